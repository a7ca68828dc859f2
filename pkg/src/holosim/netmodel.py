"""Cloud-versus-edge network model.

Two layers: a closed-form report (latency = RTT + processing, bandwidth
from stream rate or update cadence) and a discrete-event simulation of
the per-interaction pipeline with the asynchronous learning traffic
interleaved on the same clock. The perception and render stages carry
zero incremental delay, so the simulated latency reproduces the analytic
two-term model exactly and any divergence is a bug, not noise.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

BYTES_PER_MB = 1_000_000
COMFORT_BOUND_MS = 50.0
FRAME_BUDGET_MS = 1000.0 / 30.0


@dataclass(frozen=True)
class ArchProfile:
    """Deployment architecture: where inference runs and what the link
    carries. Cloud streams rendered views continuously; edge uploads one
    model update per cadence interval."""

    name: str
    rtt_ms: float
    processing_ms: float
    stream_bandwidth_MBps: float = 0.0
    update_bytes: int = 0
    update_interval_s: float = 15.0

    def __post_init__(self):
        if min(self.rtt_ms, self.processing_ms, self.stream_bandwidth_MBps,
               self.update_bytes) < 0:
            raise ValueError("profile values must be non-negative")
        if self.update_bytes > 0 and self.update_interval_s <= 0:
            raise ValueError("update_interval_s must be positive when updates flow")

    @property
    def latency_ms(self) -> float:
        return self.rtt_ms + self.processing_ms

    @property
    def bandwidth_MBps(self) -> float:
        """Stream rate if the arch streams, else the averaged update rate."""
        if self.stream_bandwidth_MBps > 0:
            return self.stream_bandwidth_MBps
        if self.update_bytes == 0:
            return 0.0
        return self.update_bytes / self.update_interval_s / BYTES_PER_MB


def default_cloud() -> ArchProfile:
    return ArchProfile(name="cloud", rtt_ms=150.0, processing_ms=20.0,
                       stream_bandwidth_MBps=90.0)


def default_edge() -> ArchProfile:
    return ArchProfile(name="edge", rtt_ms=15.0, processing_ms=20.0,
                       update_bytes=4_200_000, update_interval_s=15.0)


@dataclass(frozen=True)
class AnalyticReport:
    cloud: ArchProfile
    edge: ArchProfile
    cloud_latency_ms: float
    edge_latency_ms: float
    cloud_bandwidth_MBps: float
    edge_bandwidth_MBps: float
    reduction_percent: float

    def meets_comfort_bound(self, arch: str) -> bool:
        """True when the architecture lands under the 50 ms interaction
        comfort bound."""
        latency = self.cloud_latency_ms if arch == "cloud" else self.edge_latency_ms
        return latency < COMFORT_BOUND_MS

    @staticmethod
    def cgh_within_frame_budget(cgh_ms: float) -> bool:
        """True when one hologram computation fits a 30 FPS frame slot."""
        return cgh_ms <= FRAME_BUDGET_MS

    def to_csv(self) -> str:
        lines = ["arch,latency_ms,bandwidth_MBps"]
        for name, lat, bw in (
                ("cloud", self.cloud_latency_ms, self.cloud_bandwidth_MBps),
                ("edge", self.edge_latency_ms, self.edge_bandwidth_MBps)):
            lines.append(f"{name},{lat:.6g},{bw:.6g}")
        return "\n".join(lines) + "\n"


def analytic_report(cloud: ArchProfile, edge: ArchProfile) -> AnalyticReport:
    """Closed-form latency and bandwidth comparison between the two
    deployment architectures."""
    cloud_bw = cloud.bandwidth_MBps
    edge_bw = edge.bandwidth_MBps
    if cloud_bw <= 0:
        raise ValueError("cloud bandwidth must be positive to compute the reduction")
    reduction = (cloud_bw - edge_bw) / cloud_bw * 100.0
    return AnalyticReport(cloud=cloud, edge=edge,
                          cloud_latency_ms=cloud.latency_ms,
                          edge_latency_ms=edge.latency_ms,
                          cloud_bandwidth_MBps=cloud_bw,
                          edge_bandwidth_MBps=edge_bw,
                          reduction_percent=reduction)


class EventKind(enum.Enum):
    INPUT_CAPTURED = "InputCaptured"
    STATE_EXTRACTED = "StateExtracted"
    INFERENCE_DONE = "InferenceDone"
    COMMAND_SENT = "CommandSent"
    FRAME_RENDERED = "FrameRendered"
    FRAME_DISPLAYED = "FrameDisplayed"
    UPDATE_UPLOADED = "UpdateUploaded"
    GLOBAL_DOWNLOADED = "GlobalDownloaded"


# Causal kind order within one interaction chain.
RENDER_ORDER = (
    EventKind.INPUT_CAPTURED,
    EventKind.STATE_EXTRACTED,
    EventKind.INFERENCE_DONE,
    EventKind.COMMAND_SENT,
    EventKind.FRAME_RENDERED,
    EventKind.FRAME_DISPLAYED,
)

FL_ORDER = (EventKind.UPDATE_UPLOADED, EventKind.GLOBAL_DOWNLOADED)


@dataclass(frozen=True)
class Event:
    """One timeline entry. `chain` groups causally linked events: each
    interaction is one chain (>= 0), each update/download pair is one
    negative chain id."""

    kind: EventKind
    user_id: int
    t_ms: float
    chain: int

    def __post_init__(self):
        if self.t_ms < 0:
            raise ValueError("timestamps must be non-negative")


@dataclass(frozen=True)
class Timeline:
    events: tuple[Event, ...]

    def render_chains(self) -> dict[tuple[int, int], list[Event]]:
        chains: dict[tuple[int, int], list[Event]] = {}
        for ev in self.events:
            chains.setdefault((ev.user_id, ev.chain), []).append(ev)
        return chains

    def latencies(self) -> list[float]:
        """Per-interaction displayed-minus-captured times, ordered by
        (user, interaction)."""
        capture: dict[tuple[int, int], float] = {}
        display: dict[tuple[int, int], float] = {}
        for ev in self.events:
            if ev.kind is EventKind.INPUT_CAPTURED:
                capture[(ev.user_id, ev.chain)] = ev.t_ms
            elif ev.kind is EventKind.FRAME_DISPLAYED:
                display[(ev.user_id, ev.chain)] = ev.t_ms
        return [display[key] - t0 for key, t0 in sorted(capture.items())
                if key in display]

    def count(self, kind: EventKind, user_id: int | None = None) -> int:
        return sum(1 for ev in self.events
                   if ev.kind is kind and (user_id is None or ev.user_id == user_id))

    def to_csv(self) -> str:
        lines = ["t_ms,kind,user_id"]
        for ev in self.events:
            lines.append(f"{ev.t_ms:.6g},{ev.kind.value},{ev.user_id}")
        return "\n".join(lines) + "\n"


def simulate_pipeline(profile: ArchProfile, n_users: int, n_interactions: int,
                      fl_enabled: bool, seed: int = 42,
                      interaction_interval_ms: float = 1000.0,
                      jitter_ms: float = 0.0) -> Timeline:
    """Run the per-interaction pipeline for every user on one clock.

    Each interaction chain is InputCaptured, StateExtracted (+0),
    InferenceDone (+processing), CommandSent (+rtt/2), FrameRendered (+0),
    FrameDisplayed (+rtt/2). Learning traffic, when enabled, adds an
    UpdateUploaded per user every update_interval_s over the simulated
    span plus a GlobalDownloaded one RTT later; it shares the timeline but
    touches no render chain. Jitter shifts whole chains, never the stage
    spacing, and defaults to off.
    """
    if n_users < 1 or n_interactions < 1:
        raise ValueError("counts must be >= 1")
    rng = np.random.default_rng([seed, 17]) if jitter_ms > 0 else None
    half_rtt = profile.rtt_ms / 2.0
    events: list[Event] = []
    for i in range(n_interactions):
        for user in range(n_users):
            t0 = i * interaction_interval_ms
            if rng is not None:
                t0 = max(0.0, t0 + rng.uniform(-jitter_ms, jitter_ms))
            stages = (
                (EventKind.INPUT_CAPTURED, t0),
                (EventKind.STATE_EXTRACTED, t0),
                (EventKind.INFERENCE_DONE, t0 + profile.processing_ms),
                (EventKind.COMMAND_SENT, t0 + profile.processing_ms + half_rtt),
                (EventKind.FRAME_RENDERED, t0 + profile.processing_ms + half_rtt),
                (EventKind.FRAME_DISPLAYED, t0 + profile.processing_ms + profile.rtt_ms),
            )
            events.extend(Event(kind, user, t, i) for kind, t in stages)
    if fl_enabled and profile.update_bytes > 0:
        duration_ms = n_interactions * interaction_interval_ms
        interval_ms = profile.update_interval_s * 1000.0
        n_updates = int(duration_ms // interval_ms)
        for user in range(n_users):
            for k in range(1, n_updates + 1):
                t_up = k * interval_ms
                events.append(Event(EventKind.UPDATE_UPLOADED, user, t_up, -k))
                events.append(Event(EventKind.GLOBAL_DOWNLOADED, user,
                                    t_up + profile.rtt_ms, -k))
    events.sort(key=lambda ev: ev.t_ms)  # stable: generation order breaks ties
    return Timeline(tuple(events))


def _chain_order(chain: list[Event]) -> tuple[EventKind, ...]:
    return FL_ORDER if chain[0].kind in FL_ORDER else RENDER_ORDER


def verify_ordering(tl: Timeline) -> list[str]:
    """Check every causal chain against the pipeline kind order and
    non-decreasing timestamps. Returns human-readable violations; an
    empty list means the timeline is causally sound."""
    violations: list[str] = []
    for (user, chain_id), chain in tl.render_chains().items():
        order = _chain_order(chain)
        rank = {kind: i for i, kind in enumerate(order)}
        seen: set[EventKind] = set()
        prev_t = None
        for ev in chain:
            if ev.kind not in rank:
                violations.append(
                    f"user {user} chain {chain_id}: unexpected {ev.kind.value}")
                continue
            for predecessor in order[:rank[ev.kind]]:
                if predecessor not in seen:
                    violations.append(
                        f"user {user} chain {chain_id}: {ev.kind.value} "
                        f"at {ev.t_ms:g} ms before {predecessor.value}")
                    break
            if prev_t is not None and ev.t_ms < prev_t:
                violations.append(
                    f"user {user} chain {chain_id}: {ev.kind.value} at "
                    f"{ev.t_ms:g} ms moves time backwards")
            prev_t = ev.t_ms
            seen.add(ev.kind)
        if EventKind.INPUT_CAPTURED in seen and EventKind.FRAME_DISPLAYED not in seen:
            violations.append(
                f"user {user} chain {chain_id}: InputCaptured without FrameDisplayed")
    return violations

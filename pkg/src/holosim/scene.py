"""Shared-scene core: user state, emotion-to-response mapping, and layered
composition of one base scene with per-user personalization layers.

Every user sees the same base asset; personalization never mutates it.  A
user's view is the base channel defaults overlaid with that user's own
layer, so passive viewers get a view that hashes identically to the base.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

# Fixed seven-class order (FER-2013 convention); argmax ties break to the
# lowest index in this tuple.
EMOTION_CLASSES = ("angry", "disgust", "fear", "happy", "sad", "surprise", "neutral")

SIMPLEX_TOL = 1e-6
UNIT_TOL = 1e-6


class CommandKind(enum.Enum):
    NEUTRAL = "Neutral"
    SMILE = "Smile"
    SPEAK_REPLY = "SpeakReply"
    GAZE = "Gaze"


def canonical_json(obj) -> str:
    """Key-sorted, compact JSON used for all content hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EmotionDistribution:
    """Probability vector over EMOTION_CLASSES, in that fixed order."""

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != len(EMOTION_CLASSES):
            raise ValueError(f"expected {len(EMOTION_CLASSES)} probabilities, got {len(self.probs)}")
        if any(p < 0.0 or p > 1.0 for p in self.probs):
            raise ValueError("probabilities must lie in [0, 1]")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1 within {SIMPLEX_TOL}")

    @classmethod
    def one_hot(cls, name: str) -> "EmotionDistribution":
        idx = EMOTION_CLASSES.index(name)
        return cls(tuple(1.0 if i == idx else 0.0 for i in range(len(EMOTION_CLASSES))))

    @property
    def top(self) -> str:
        return classify_emotion(self)

    @property
    def confidence(self) -> float:
        return max(self.probs)


@dataclass(frozen=True)
class UserStateVector:
    """Per-user perceptual state sampled at one instant."""

    user_id: str
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    gaze: tuple[float, float, float]
    emotion: EmotionDistribution
    audio: tuple[int, ...] | None = None
    audio_sample_rate: int = 16000
    timestamp_ms: float = 0.0

    def __post_init__(self):
        if abs(math.sqrt(math.fsum(c * c for c in self.orientation)) - 1.0) > UNIT_TOL:
            raise ValueError("orientation quaternion must have unit norm")
        if abs(math.sqrt(math.fsum(c * c for c in self.gaze)) - 1.0) > UNIT_TOL:
            raise ValueError("gaze vector must have unit norm")
        if self.timestamp_ms < 0:
            raise ValueError("timestamp must be non-negative")
        if self.audio is not None:
            for s in self.audio:
                if not -32768 <= s <= 32767:
                    raise ValueError("audio samples must be signed 16-bit")

    @property
    def has_audio(self) -> bool:
        return self.audio is not None and len(self.audio) > 0


@dataclass(frozen=True)
class ResponseCommand:
    user_id: str
    kind: CommandKind
    intensity: float
    timestamp_ms: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError("intensity must lie in [0, 1]")


@dataclass(frozen=True)
class SceneLayer:
    """One user's blend-shape overlay. All weights in [0, 1]; an all-zero
    layer is semantically empty."""

    user_id: str
    blend_weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, w in self.blend_weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"blend weight {name}={w} outside [0, 1]")

    @property
    def is_empty(self) -> bool:
        return all(w == 0.0 for w in self.blend_weights.values())


@dataclass(frozen=True)
class BaseScene:
    asset_id: str
    channel_defaults: dict[str, float]

    def __post_init__(self):
        if any(v != 0.0 for v in self.channel_defaults.values()):
            raise ValueError("channel defaults must all be exactly 0")

    def canonical_form(self) -> dict:
        return {"asset_id": self.asset_id, "channels": dict(sorted(self.channel_defaults.items()))}

    @property
    def content_hash(self) -> str:
        return content_digest(self.canonical_form())


@dataclass(frozen=True)
class ComposedView:
    user_id: str
    effective_weights: dict[str, float]
    asset_id: str
    base_hash: str

    def canonical_form(self) -> dict:
        return {"asset_id": self.asset_id, "channels": dict(sorted(self.effective_weights.items()))}

    @property
    def digest(self) -> str:
        """Content digest; equals the base hash iff the view is unmodified."""
        return content_digest(self.canonical_form())


def classify_emotion(dist: EmotionDistribution) -> str:
    """Argmax class of a distribution; ties break to the lowest index."""
    return EMOTION_CLASSES[int(np.argmax(dist.probs))]


def map_response(emotion: str, has_audio: bool, confidence: float,
                 user_id: str = "", timestamp_ms: float = 0.0) -> ResponseCommand:
    """Deterministic total mapping from a classified state to a command.

    Audio presence dominates (a spoken question always earns a spoken
    reply), then happy maps to a smile, neutral to no change, and every
    remaining class to gaze following.
    """
    if emotion not in EMOTION_CLASSES:
        raise ValueError(f"unknown emotion class {emotion!r}")
    if not 0.0 <= confidence <= 1.0:
        raise ValueError("confidence must lie in [0, 1]")
    if has_audio:
        kind, intensity = CommandKind.SPEAK_REPLY, confidence
    elif emotion == "happy":
        kind, intensity = CommandKind.SMILE, confidence
    elif emotion == "neutral":
        kind, intensity = CommandKind.NEUTRAL, 0.0
    else:
        kind, intensity = CommandKind.GAZE, confidence
    return ResponseCommand(user_id=user_id, kind=kind, intensity=intensity,
                           timestamp_ms=timestamp_ms)


def respond(state: UserStateVector) -> ResponseCommand:
    """Classify a user state and map it to a response command."""
    emotion = classify_emotion(state.emotion)
    return map_response(emotion, state.has_audio, state.emotion.confidence,
                        user_id=state.user_id, timestamp_ms=state.timestamp_ms)


_COMMAND_CHANNELS = {
    CommandKind.SMILE: "smile",
    CommandKind.SPEAK_REPLY: "mouth_open",
    CommandKind.GAZE: "gaze_follow",
}


def apply_command(cmd: ResponseCommand) -> SceneLayer:
    """Realize a response command as a blend-shape layer."""
    channel = _COMMAND_CHANNELS.get(cmd.kind)
    if channel is None:  # Neutral
        return SceneLayer(user_id=cmd.user_id, blend_weights={})
    return SceneLayer(user_id=cmd.user_id, blend_weights={channel: cmd.intensity})


def compose_view(base: BaseScene, layer: SceneLayer | None, viewer: str) -> ComposedView:
    """Overlay a user's layer on the base defaults.

    Zero weights are identity, so an absent or empty layer reproduces the
    base exactly. A layer owned by a different user is rejected: views are
    isolated per user.
    """
    if layer is not None and layer.user_id != viewer:
        raise ValueError(
            f"layer owned by {layer.user_id!r} cannot compose a view for {viewer!r}")
    effective = dict(base.channel_defaults)
    if layer is not None:
        for name, w in layer.blend_weights.items():
            if w != 0.0:
                effective[name] = w
    return ComposedView(user_id=viewer, effective_weights=effective,
                        asset_id=base.asset_id, base_hash=base.content_hash)


def latest_command(commands: list[ResponseCommand]) -> ResponseCommand:
    """Pick the winning command when several target one user:
    latest timestamp wins, list order breaking exact ties."""
    if not commands:
        raise ValueError("no commands to resolve")
    best = commands[0]
    for cmd in commands[1:]:
        if cmd.timestamp_ms >= best.timestamp_ms:
            best = cmd
    return best

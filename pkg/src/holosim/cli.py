"""Command-line orchestrator.

One executable, one subcommand per experiment: `netsim` (latency and
bandwidth tables), `cgh` (hologram artifacts and the timing ladder),
`fedsim` (federated-versus-centralized convergence), `compose` (the
three-user shared-scene demonstration), `serve`/`client` (the aggregation
protocol over TCP loopback), and `all` (every in-process scenario).

Settings resolve in priority order: command-line flag, then environment
variable `HOLO_<KEY>`, then `--config` file line `key=value`, then the
built-in default. Every run writes `config.resolved` and `manifest.txt`
next to its artifacts so an output directory is self-describing.
"""
from __future__ import annotations

import argparse
import os
import sys
import threading
import typing
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import fedlearn, netmodel, scene
from .cgh import (
    AmplitudeImage,
    backend_name,
    bench,
    engine,
    pgm,
)
from .proto import TcpListener, connect, memory_pair, service

_MODULE_OF = {"netsim": "netmodel", "cgh": "cgh", "fedsim": "fedlearn",
              "compose": "scene", "serve": "proto", "client": "proto",
              "all": "cli"}


class CliError(Exception):
    def __init__(self, module: str, message: str, code: int = 1):
        super().__init__(message)
        self.module = module
        self.code = code


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _to_str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_config_file(path: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError("cli", f"{path}:{lineno}: expected key=value", 2)
                key, _, value = line.partition("=")
                mapping[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError("cli", f"cannot read config file: {exc}", 2) from exc
    return mapping


def _resolve(keys: dict[str, tuple], file_cfg: dict[str, str],
             flags: dict[str, object]) -> dict[str, object]:
    """Merge flag, environment, file, and default values for every
    allowed key; unknown file keys are an error, never ignored."""
    unknown = sorted(set(file_cfg) - set(keys))
    if unknown:
        raise CliError("cli", f"unknown config keys: {', '.join(unknown)}", 2)
    resolved: dict[str, object] = {}
    for key, (cast, default) in keys.items():
        env_name = f"HOLO_{key.upper()}"
        try:
            if flags.get(key) is not None:
                resolved[key] = flags[key]
            elif env_name in os.environ:
                resolved[key] = cast(os.environ[env_name])
            elif key in file_cfg:
                resolved[key] = cast(file_cfg[key])
            else:
                resolved[key] = default
        except ValueError as exc:
            raise CliError("cli", f"bad value for {key}: {exc}", 2) from exc
    return resolved


class Artifacts:
    """Collects produced files so the manifest is always complete."""

    def __init__(self, out_dir: str | os.PathLike):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.names: list[str] = []

    def save_text(self, name: str, text: str) -> None:
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.names.append(name)

    def save_bytes(self, name: str, data: bytes) -> None:
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.names.append(name)

    def path_for(self, *names: str) -> Path:
        """Register files an external writer will create and return the
        path of the first."""
        self.names.extend(names)
        return self.dir / names[0]

    def finish(self, resolved: dict[str, object]) -> None:
        text = "".join(f"{k}={_fmt_value(v)}\n" for k, v in sorted(resolved.items()))
        self.save_text("config.resolved", text)
        manifest = "".join(f"{n}\n" for n in sorted(self.names))
        (self.dir / "manifest.txt").write_text(manifest, encoding="utf-8")


# ---------------------------------------------------------------- netsim

_NETSIM_KEYS = {
    "cloud_rtt_ms": (float, 150.0),
    "cloud_processing_ms": (float, 20.0),
    "cloud_stream_MBps": (float, 90.0),
    "edge_rtt_ms": (float, 15.0),
    "edge_processing_ms": (float, 20.0),
    "edge_update_bytes": (int, 4_200_000),
    "edge_update_interval_s": (float, 15.0),
    "users": (int, 3),
    "interactions": (int, 60),
    "interaction_interval_ms": (float, 1000.0),
    "fl": (_to_bool, True),
    "jitter_ms": (float, 0.0),
    "seed": (int, 42),
}


def run_netsim(resolved: dict, out_dir: str) -> None:
    cloud = netmodel.ArchProfile(
        name="cloud", rtt_ms=resolved["cloud_rtt_ms"],
        processing_ms=resolved["cloud_processing_ms"],
        stream_bandwidth_MBps=resolved["cloud_stream_MBps"])
    edge = netmodel.ArchProfile(
        name="edge", rtt_ms=resolved["edge_rtt_ms"],
        processing_ms=resolved["edge_processing_ms"],
        update_bytes=resolved["edge_update_bytes"],
        update_interval_s=resolved["edge_update_interval_s"])
    report = netmodel.analytic_report(cloud, edge)
    timeline = netmodel.simulate_pipeline(
        edge, resolved["users"], resolved["interactions"], resolved["fl"],
        seed=resolved["seed"],
        interaction_interval_ms=resolved["interaction_interval_ms"],
        jitter_ms=resolved["jitter_ms"])
    violations = netmodel.verify_ordering(timeline)
    if violations:
        raise CliError("netmodel", f"timeline violates causality: {violations[0]}")
    art = Artifacts(out_dir)
    art.save_text("netsim.csv", report.to_csv())
    art.save_text("timeline.csv", timeline.to_csv())
    art.finish(resolved)
    print(f"netsim: cloud {report.cloud_latency_ms:.6g} ms / "
          f"{report.cloud_bandwidth_MBps:.6g} MB/s, "
          f"edge {report.edge_latency_ms:.6g} ms / "
          f"{report.edge_bandwidth_MBps:.6g} MB/s, "
          f"reduction {report.reduction_percent:.2f}% -> {art.dir}")


# ------------------------------------------------------------------- cgh

_CGH_KEYS = {
    "size": (int, 64),
    "iterations": (int, 100),
    "scaling_sizes": (_to_int_list, [4096, 16384, 65536, 262144]),
    "scaling_iterations": (int, 10),
    "compare_backends": (_to_bool, False),
    "bit_depth": (int, 8),
    "seed": (int, 42),
}


def _test_pattern(size: int) -> np.ndarray:
    """Deterministic high-contrast target: a bright ring around a filled
    disc, recognizable in reconstructions at any grid size."""
    half = size / 2.0
    y = np.arange(size).reshape(-1, 1) - half + 0.5
    x = np.arange(size).reshape(1, -1) - half + 0.5
    r = np.hypot(x, y) / half
    pattern = np.zeros((size, size))
    pattern[(r >= 0.55) & (r <= 0.75)] = 1.0
    pattern[r <= 0.18] = 1.0
    return pattern


def run_cgh(resolved: dict, out_dir: str) -> None:
    art = Artifacts(out_dir)
    target = AmplitudeImage(_test_pattern(resolved["size"]))
    result = engine.gerchberg_saxton(target, resolved["iterations"], resolved["seed"])
    recon = engine.reconstruct(result.phase_map)
    pgm.save_amplitude(art.path_for("target.pgm"), target, resolved["bit_depth"])
    pgm.save_phase_map(art.path_for("phase.pgm", "phase.pgm.meta"), result.phase_map)
    pgm.save_amplitude(art.path_for("recon.pgm"), recon, resolved["bit_depth"])
    error_lines = ["iteration,nmse"]
    error_lines += [f"{i},{e:.9e}" for i, e in enumerate(result.error_history)]
    art.save_text("gs_error.csv", "\n".join(error_lines) + "\n")
    report = bench.benchmark_scaling(resolved["scaling_sizes"],
                                     resolved["scaling_iterations"],
                                     seed=resolved["seed"])
    art.save_text("cgh_scaling.csv", report.to_csv())
    art.save_text("cgh_scaling_fit.csv",
                  "coefficient,r_squared\n"
                  f"{report.fit.coefficient:.9e},{report.fit.r_squared:.6f}\n")
    if resolved["compare_backends"]:
        comparison = bench.compare_backends(seed=resolved["seed"])
        art.save_text("backend_bench.csv",
                      bench.backends_csv(comparison, 65536, 20))
    art.finish(resolved)
    print(f"cgh: final NMSE {result.final_nmse:.3e}, scaling fit "
          f"R^2 {report.fit.r_squared:.4f} ({backend_name()} backend) -> {art.dir}")


# ---------------------------------------------------------------- fedsim

def _flconfig_keys() -> dict[str, tuple]:
    hints = typing.get_type_hints(fedlearn.FLConfig)
    casts = {int: int, float: float, str: str}
    keys = {}
    for f in dataclass_fields(fedlearn.FLConfig):
        keys[f.name] = (casts[hints[f.name]], f.default)
    return keys


def run_fedsim(resolved: dict, out_dir: str) -> None:
    cfg = fedlearn.FLConfig(**{k: resolved[k] for k in _flconfig_keys()})
    fed, cent, csv_text = fedlearn.convergence_pair(cfg)
    art = Artifacts(out_dir)
    art.save_text("fl_convergence.csv", csv_text)
    if cfg.rounds > 0:
        gap_pp = abs(fed.accuracy_history[-1] - cent.accuracy_history[-1]) * 100.0
        within = gap_pp <= cfg.convergence_tol_pp
        art.save_text("fl_summary.csv",
                      "metric,value\n"
                      f"federated_final,{fed.accuracy_history[-1]:.6f}\n"
                      f"centralized_final,{cent.accuracy_history[-1]:.6f}\n"
                      f"gap_pp,{gap_pp:.4f}\n"
                      f"within_tolerance,{'true' if within else 'false'}\n")
        print(f"fedsim: federated {fed.accuracy_history[-1]:.4f}, centralized "
              f"{cent.accuracy_history[-1]:.4f}, gap {gap_pp:.2f} pp -> {art.dir}")
    else:
        print(f"fedsim: 0 rounds, header-only history -> {art.dir}")
    art.finish(resolved)


# --------------------------------------------------------------- compose

_COMPOSE_KEYS = {
    "users": (int, 3),
    "inputs": (_to_str_list, ["smile", "voice", "none"]),
    "asset_id": (str, "shared_portrait"),
    "seed": (int, 42),
}

_BASE_CHANNELS = {"smile": 0.0, "mouth_open": 0.0, "gaze_follow": 0.0}


def _stimulus_state(stimulus: str, user_id: str, t_ms: float) -> scene.UserStateVector:
    if stimulus == "smile":
        emotion = scene.EmotionDistribution.one_hot("happy")
        audio: tuple[int, ...] | None = None
    elif stimulus == "voice":
        emotion = scene.EmotionDistribution.one_hot("neutral")
        audio = (120, -340, 560, -780)
    elif stimulus == "none":
        emotion = scene.EmotionDistribution.one_hot("neutral")
        audio = None
    else:
        raise CliError("scene", f"unknown stimulus {stimulus!r}")
    return scene.UserStateVector(
        user_id=user_id, position=(0.0, 0.0, 1.0),
        orientation=(1.0, 0.0, 0.0, 0.0), gaze=(0.0, 0.0, 1.0),
        emotion=emotion, audio=audio, timestamp_ms=t_ms)


def run_compose(resolved: dict, out_dir: str) -> None:
    inputs = resolved["inputs"]
    if len(inputs) != resolved["users"]:
        raise CliError("scene", f"{resolved['users']} users but "
                                f"{len(inputs)} inputs")
    base = scene.BaseScene(resolved["asset_id"], dict(_BASE_CHANNELS))
    lines = ["user_id,stimulus,command_kind,intensity,digest,base_hash,matches_base"]
    for i, stimulus in enumerate(inputs):
        user_id = f"user{i + 1}"
        state = _stimulus_state(stimulus, user_id, float(i))
        cmd = scene.respond(state)
        layer = scene.apply_command(cmd)
        view = scene.compose_view(base, layer, user_id)
        matches = "true" if view.digest == base.content_hash else "false"
        lines.append(f"{user_id},{stimulus},{cmd.kind.value},"
                     f"{cmd.intensity:.6g},{view.digest},{base.content_hash},"
                     f"{matches}")
    art = Artifacts(out_dir)
    art.save_text("compose.csv", "\n".join(lines) + "\n")
    art.finish(resolved)
    print(f"compose: {resolved['users']} users composed -> {art.dir}")


# ----------------------------------------------------------- serve/client

_SERVE_KEYS = {
    "host": (str, "127.0.0.1"),
    "port": (int, 0),
    "timeout_ms": (float, 30_000.0),
    **{k: v for k, v in _flconfig_keys().items()},
}

_CLIENT_KEYS = {
    "host": (str, "127.0.0.1"),
    "port": (int, 0),
    "client_id": (int, 0),
    **{k: v for k, v in _flconfig_keys().items()},
}


def run_serve(resolved: dict, out_dir: str) -> None:
    cfg = fedlearn.FLConfig(**{k: resolved[k] for k in _flconfig_keys()})
    initial = fedlearn.init_params(cfg)
    art = Artifacts(out_dir)
    listener = TcpListener(resolved["host"], resolved["port"])
    try:
        art.save_text("port.txt", f"{listener.port}\n")
        print(f"serve: listening on {listener.port}, expecting "
              f"{cfg.num_clients} clients for {cfg.rounds} rounds", flush=True)
        result = service.aggregator_serve(listener, cfg.num_clients,
                                          resolved["timeout_ms"], cfg.rounds,
                                          initial)
    finally:
        listener.close()
    lines = ["round,participants,duplicates,late,timed_out"]
    for log in result.rounds:
        lines.append(f"{log.round},{';'.join(map(str, log.participants))},"
                     f"{';'.join(map(str, log.duplicates))},"
                     f"{';'.join(map(str, log.late))},"
                     f"{'true' if log.timed_out else 'false'}")
    art.save_text("fl_server.csv", "\n".join(lines) + "\n")
    art.save_bytes("global_params.bin", result.params.values.astype("<f4").tobytes())
    art.finish(resolved)
    print(f"serve: completed {cfg.rounds} rounds -> {art.dir}")


def run_client(resolved: dict, out_dir: str) -> None:
    if resolved["port"] <= 0:
        raise CliError("proto", "a positive --port is required")
    cfg = fedlearn.FLConfig(**{k: resolved[k] for k in _flconfig_keys()})
    client_id = resolved["client_id"]
    if not 0 <= client_id < cfg.num_clients:
        raise CliError("proto", f"client_id {client_id} outside 0..{cfg.num_clients - 1}")
    datasets, _ = fedlearn.gen_synthetic(cfg)
    transport = connect(resolved["host"], resolved["port"])
    try:
        session = service.client_session(transport, client_id,
                                         datasets[client_id], cfg)
    except service.ClientSessionError as exc:
        raise CliError("proto", str(exc)) from exc
    finally:
        transport.close()
    lines = ["round,local_acc"]
    lines += [f"{i},{acc:.6f}" for i, acc in enumerate(session.accuracy_history)]
    art = Artifacts(out_dir)
    art.save_text("client_log.csv", "\n".join(lines) + "\n")
    art.finish(resolved)
    print(f"client {client_id}: completed round {session.last_completed_round} "
          f"-> {art.dir}")


# ------------------------------------------------------------------- all

def _wire_equivalence(seed: int) -> bool:
    """In-process protocol check: FedAvg over socketpairs must equal the
    library run bit for bit."""
    cfg = fedlearn.FLConfig(num_clients=3, rounds=3, samples_per_client=30,
                            seed=seed)
    datasets, _ = fedlearn.gen_synthetic(cfg)
    initial = fedlearn.init_params(cfg)
    pairs = [memory_pair() for _ in range(cfg.num_clients)]
    outcome: dict = {}

    def serve():
        outcome["server"] = service.aggregator_serve(
            [server_side for server_side, _ in pairs], cfg.num_clients,
            10_000.0, cfg.rounds, initial)

    threads = [threading.Thread(target=serve)]
    for i in range(cfg.num_clients):
        threads.append(threading.Thread(
            target=service.client_session,
            args=(pairs[i][1], i, datasets[i], cfg)))
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=60.0)
    reference = fedlearn.run_fedavg(cfg)
    wire = outcome["server"].params
    return wire.values.tobytes() == reference.params.values.tobytes()


def run_all(resolved: dict, out_dir: str) -> None:
    seed = resolved["seed"]
    base = Path(out_dir)
    run_netsim(_defaults(_NETSIM_KEYS, seed), str(base / "netsim"))
    cgh_resolved = _defaults(_CGH_KEYS, seed)
    cgh_resolved["scaling_sizes"] = [4096, 16384, 65536]
    run_cgh(cgh_resolved, str(base / "cgh"))
    run_fedsim(_defaults(_flconfig_keys(), seed), str(base / "fedsim"))
    run_compose(_defaults(_COMPOSE_KEYS, seed), str(base / "compose"))
    art = Artifacts(out_dir)
    ok = _wire_equivalence(seed)
    art.save_text("proto_check.csv",
                  f"check,passed\nwire_equivalence,{'true' if ok else 'false'}\n")
    if not ok:
        art.finish(resolved)
        raise CliError("proto", "wire equivalence check failed")
    art.names += [f"{sub}/manifest.txt" for sub in
                  ("netsim", "cgh", "fedsim", "compose")]
    art.finish(resolved)
    print(f"all: complete -> {base}")


def _defaults(keys: dict[str, tuple], seed: int) -> dict:
    resolved = {k: default for k, (_, default) in keys.items()}
    if "seed" in resolved:
        resolved["seed"] = seed
    return resolved


# ------------------------------------------------------------ arg parsing

def _add_common(sub: argparse.ArgumentParser, command: str) -> None:
    sub.add_argument("--config", help="key=value settings file")
    sub.add_argument("--out", default=f"holo_out/{command}",
                     help="output directory (default %(default)s)")
    sub.add_argument("--seed", type=int, default=None,
                     help="RNG seed (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holo",
        description="Desk-scale simulator of a multi-user holographic "
                    "display: holography, federated personalization, and "
                    "the edge-versus-cloud network model.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("netsim", help="latency/bandwidth report and event timeline")
    _add_common(p, "netsim")
    p.add_argument("--defaults", action="store_true",
                   help="use the built-in architecture profiles")
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--interactions", type=int, default=None)

    p = subs.add_parser("cgh", help="hologram synthesis artifacts and timing ladder")
    _add_common(p, "cgh")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--scaling-sizes", dest="scaling_sizes", type=_to_int_list,
                   default=None, help="comma-separated pixel counts")
    p.add_argument("--compare-backends", dest="compare_backends",
                   action="store_const", const=True, default=None)

    p = subs.add_parser("fedsim", help="federated vs centralized convergence")
    _add_common(p, "fedsim")
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--num-clients", dest="num_clients", type=int, default=None)
    p.add_argument("--partition", choices=("iid", "dirichlet"), default=None)
    p.add_argument("--alpha", type=float, default=None)

    p = subs.add_parser("compose", help="three-user composed-view demonstration")
    _add_common(p, "compose")
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--inputs", type=_to_str_list, default=None,
                   help="comma-separated stimuli: smile, voice, none")

    p = subs.add_parser("serve", help="run the aggregation server")
    _add_common(p, "serve")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--num-clients", dest="num_clients", type=int, default=None)
    p.add_argument("--timeout-ms", dest="timeout_ms", type=float, default=None)

    p = subs.add_parser("client", help="run one edge client session")
    _add_common(p, "client")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--client-id", dest="client_id", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--num-clients", dest="num_clients", type=int, default=None)

    p = subs.add_parser("all", help="run every in-process scenario")
    _add_common(p, "all")
    return parser


_KEYSETS = {
    "netsim": _NETSIM_KEYS,
    "cgh": _CGH_KEYS,
    "fedsim": None,  # computed lazily from FLConfig
    "compose": _COMPOSE_KEYS,
    "serve": _SERVE_KEYS,
    "client": _CLIENT_KEYS,
    "all": {"seed": (int, 42)},
}

_RUNNERS = {
    "netsim": run_netsim,
    "cgh": run_cgh,
    "fedsim": run_fedsim,
    "compose": run_compose,
    "serve": run_serve,
    "client": run_client,
    "all": run_all,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    keys = _KEYSETS[command] if _KEYSETS[command] is not None else _flconfig_keys()
    try:
        file_cfg = _parse_config_file(args.config) if args.config else {}
        flags = {k: v for k, v in vars(args).items()
                 if k in keys and v is not None}
        if args.seed is not None:
            flags["seed"] = args.seed
        resolved = _resolve(keys, file_cfg, flags)
        _RUNNERS[command](resolved, args.out)
        return 0
    except CliError as exc:
        print(f"error: {exc.module}: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {_MODULE_OF[command]}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

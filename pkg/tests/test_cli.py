"""End-to-end command-line runs in subprocesses."""
import os
import subprocess
import sys
import time

import pytest

CLI = [sys.executable, "-m", "holosim.cli"]


def run_cli(*args, env_extra=None, check=True):
    env = dict(os.environ)
    env.pop("HOLO_USERS", None)
    if env_extra:
        env.update(env_extra)
    out = subprocess.run([*CLI, *args], capture_output=True, text=True, env=env)
    if check:
        assert out.returncode == 0, f"stderr: {out.stderr}\nstdout: {out.stdout}"
    return out


def read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


class TestNetsim:
    def test_artifacts_and_values(self, tmp_path):
        out = tmp_path / "n"
        run_cli("netsim", "--out", str(out), "--users", "2",
                "--interactions", "5")
        assert sorted(os.listdir(out)) == [
            "config.resolved", "manifest.txt", "netsim.csv", "timeline.csv"]
        lines = read(out / "netsim.csv").strip().splitlines()
        assert lines[1] == "cloud,170,90"
        assert lines[2] == "edge,35,0.28"
        assert read(out / "timeline.csv").startswith("t_ms,kind,user_id\n")

    def test_defaults_flag(self, tmp_path):
        out = tmp_path / "n"
        res = run_cli("netsim", "--defaults", "--out", str(out))
        assert "cloud 170 ms" in res.stdout
        assert "edge 35 ms" in res.stdout
        assert "99.69%" in res.stdout

    def test_manifest_lists_artifacts(self, tmp_path):
        out = tmp_path / "n"
        run_cli("netsim", "--out", str(out), "--interactions", "3")
        names = read(out / "manifest.txt").split()
        assert names == sorted(names)
        assert "netsim.csv" in names
        assert "manifest.txt" not in names


class TestCgh:
    def test_artifacts(self, tmp_path):
        out = tmp_path / "c"
        run_cli("cgh", "--out", str(out), "--size", "16", "--iterations", "10",
                "--scaling-sizes", "4096")
        files = sorted(os.listdir(out))
        for name in ("target.pgm", "phase.pgm", "phase.pgm.meta", "recon.pgm",
                     "gs_error.csv", "cgh_scaling.csv", "cgh_scaling_fit.csv"):
            assert name in files
        assert "backend_bench.csv" not in files
        gs = read(out / "gs_error.csv").strip().splitlines()
        assert gs[0] == "iteration,nmse"
        assert len(gs) == 11
        fit = read(out / "cgh_scaling_fit.csv").strip().splitlines()
        assert fit[0] == "coefficient,r_squared"

    def test_compare_backends_artifact(self, tmp_path):
        out = tmp_path / "c"
        run_cli("cgh", "--out", str(out), "--size", "16", "--iterations", "10",
                "--scaling-sizes", "4096", "--compare-backends")
        bench = read(out / "backend_bench.csv").strip().splitlines()
        assert bench[0] == "backend,n_pixels,seconds,iterations"
        assert {line.split(",")[0] for line in bench[1:]} == {"python", "cython"}

    def test_error_history_monotone(self, tmp_path):
        out = tmp_path / "c"
        run_cli("cgh", "--out", str(out), "--size", "16", "--iterations", "30",
                "--scaling-sizes", "4096")
        rows = read(out / "gs_error.csv").strip().splitlines()[1:]
        nmse = [float(r.split(",")[1]) for r in rows]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(nmse, nmse[1:]))


class TestFedsim:
    def test_artifacts_and_summary(self, tmp_path):
        out = tmp_path / "f"
        run_cli("fedsim", "--out", str(out), "--rounds", "3",
                "--num-clients", "3")
        conv = read(out / "fl_convergence.csv").strip().splitlines()
        assert conv[0] == "round,federated_acc,centralized_acc"
        assert len(conv) == 4
        summary = dict(line.split(",") for line in
                       read(out / "fl_summary.csv").strip().splitlines()[1:])
        assert set(summary) == {"federated_final", "centralized_final",
                                "gap_pp", "within_tolerance"}

    def test_dirichlet_flag(self, tmp_path):
        out = tmp_path / "f"
        run_cli("fedsim", "--out", str(out), "--rounds", "2",
                "--num-clients", "3", "--partition", "dirichlet",
                "--alpha", "0.3")
        assert "partition=dirichlet" in read(out / "config.resolved")


class TestCompose:
    def test_three_user_scenario(self, tmp_path):
        out = tmp_path / "s"
        run_cli("compose", "--out", str(out))
        rows = [line.split(",") for line in
                read(out / "compose.csv").strip().splitlines()]
        assert rows[0] == ["user_id", "stimulus", "command_kind", "intensity",
                           "digest", "base_hash", "matches_base"]
        by_stim = {r[1]: r for r in rows[1:]}
        assert by_stim["smile"][2] == "Smile"
        assert by_stim["voice"][2] == "SpeakReply"
        assert by_stim["none"][2] == "Neutral"
        assert by_stim["none"][6] == "true"
        assert by_stim["none"][4] == by_stim["none"][5]
        assert by_stim["smile"][6] == "false"
        assert by_stim["voice"][6] == "false"


class TestConfigResolution:
    def test_file_env_flag_precedence(self, tmp_path):
        cfg = tmp_path / "settings"
        cfg.write_text("users=5\n# comment\ninteractions=4\n")
        o1 = tmp_path / "o1"
        run_cli("netsim", "--config", str(cfg), "--out", str(o1))
        assert "users=5" in read(o1 / "config.resolved")
        o2 = tmp_path / "o2"
        run_cli("netsim", "--config", str(cfg), "--out", str(o2),
                env_extra={"HOLO_USERS": "7"})
        assert "users=7" in read(o2 / "config.resolved")
        o3 = tmp_path / "o3"
        run_cli("netsim", "--config", str(cfg), "--out", str(o3), "--users",
                "9", env_extra={"HOLO_USERS": "7"})
        assert "users=9" in read(o3 / "config.resolved")

    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "settings"
        cfg.write_text("warp_factor=9\n")
        out = run_cli("netsim", "--config", str(cfg), "--out",
                      str(tmp_path / "o"), check=False)
        assert out.returncode == 2
        assert out.stderr.startswith("error: cli:")
        assert "warp_factor" in out.stderr

    def test_module_errors_are_one_line_with_module_name(self, tmp_path):
        cfg = tmp_path / "settings"
        cfg.write_text("partition=dirichlet\nalpha=-1.0\n")
        out = run_cli("fedsim", "--config", str(cfg), "--out",
                      str(tmp_path / "o"), check=False)
        assert out.returncode == 1
        assert out.stderr.startswith("error: fedlearn:")
        assert out.stderr.strip().count("\n") == 0

        out = run_cli("cgh", "--size", "33", "--out", str(tmp_path / "o2"),
                      check=False)
        assert out.returncode == 1
        assert out.stderr.startswith("error: cgh:")

    def test_resolved_config_written_even_for_defaults(self, tmp_path):
        out = tmp_path / "o"
        run_cli("netsim", "--out", str(out))
        resolved = read(out / "config.resolved")
        assert "cloud_rtt_ms=150.0" in resolved
        assert "seed=42" in resolved


class TestReproducibility:
    def test_fedsim_artifacts_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run_cli("fedsim", "--out", str(out), "--rounds", "3",
                    "--num-clients", "3")
        assert read(a / "fl_convergence.csv") == read(b / "fl_convergence.csv")

    def test_cgh_artifacts_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run_cli("cgh", "--out", str(out), "--size", "16",
                    "--iterations", "10", "--scaling-sizes", "4096")
        for name in ("target.pgm", "phase.pgm", "recon.pgm", "gs_error.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_changes_artifacts(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli("fedsim", "--out", str(a), "--rounds", "2", "--num-clients", "2")
        run_cli("fedsim", "--out", str(b), "--rounds", "2", "--num-clients", "2",
                "--seed", "7")
        assert read(a / "fl_convergence.csv") != read(b / "fl_convergence.csv")


class TestServeClient:
    def test_tcp_training_session(self, tmp_path):
        srv_out = tmp_path / "srv"
        server = subprocess.Popen(
            [*CLI, "serve", "--out", str(srv_out), "--port", "0",
             "--rounds", "2", "--num-clients", "2", "--timeout-ms", "8000"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
        try:
            port_file = srv_out / "port.txt"
            deadline = time.monotonic() + 10
            while not port_file.exists():
                assert time.monotonic() < deadline, "server never published its port"
                time.sleep(0.05)
            port = port_file.read_text().strip()
            clients = [subprocess.Popen(
                [*CLI, "client", "--out", str(tmp_path / f"c{i}"),
                 "--host", "127.0.0.1", "--port", port,
                 "--client-id", str(i), "--rounds", "2", "--num-clients", "2"],
                stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
                for i in range(2)]
            for proc in clients:
                _, err = proc.communicate(timeout=60)
                assert proc.returncode == 0, err
            _, err = server.communicate(timeout=60)
            assert server.returncode == 0, err
        finally:
            server.kill()
        log = read(srv_out / "fl_server.csv").strip().splitlines()
        assert log[0] == "round,participants,duplicates,late,timed_out"
        assert log[1].startswith("0,0;1,")
        assert (srv_out / "global_params.bin").stat().st_size > 0
        client_log = read(tmp_path / "c0" / "client_log.csv").strip().splitlines()
        assert client_log[0] == "round,local_acc"
        assert len(client_log) == 3


@pytest.mark.slow
class TestAll:
    def test_full_pipeline(self, tmp_path):
        out = tmp_path / "a"
        res = run_cli("all", "--out", str(out))
        assert "all: complete" in res.stdout
        for sub in ("netsim", "cgh", "fedsim", "compose"):
            assert (out / sub / "manifest.txt").exists()
        assert read(out / "proto_check.csv").strip().splitlines()[1] == \
            "wire_equivalence,true"

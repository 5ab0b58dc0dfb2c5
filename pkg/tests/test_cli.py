"""Command-line contract: exit codes, artifacts, echoes, overrides."""

import json
import math

import numpy as np
import pytest

from kgphase.backends import get_backend, set_backend
from kgphase.cli import SERIES_HEADER, main


@pytest.fixture(autouse=True)
def _in_tmp_and_backend_restored(tmp_path, monkeypatch):
    before = get_backend()
    monkeypatch.chdir(tmp_path)
    yield
    set_backend(before.NAME)


def read_summary(prefix):
    with open(f"{prefix}.json") as fh:
        return json.load(fh)


def read_series(prefix):
    with open(f"{prefix}.csv") as fh:
        header = fh.readline().strip()
        rows = [tuple(float(x) for x in line.split(",")) for line in fh]
    return header, rows


MINI_PLAN = {
    "mu_values": [0.015625],
    "alpha_exponents": [-4, -2],
    "A_interval": [1.3, 1.9],
    "A_bins": 3,
    "samples_per_bin": 2,
    "t_end": 32.0,
    "seed": 7,
    "a_mode": "normalized",
    "grid": {"n": 32, "dealias_factor": 2},
    "step": {"dt": 0.0625, "stages": 2, "stage_tol": 1e-12,
             "max_stage_iters": 100},
}


def write_plan(path, **overrides):
    data = {**MINI_PLAN, **overrides}
    path.write_text(json.dumps(data))
    return str(path)


# ------------------------------------------------------------------ simulate


def test_simulate_stationary_field(capsys):
    code = main(["simulate", "--mu", "1", "--alpha", "-0.25", "--A", "0",
                 "--t-end", "4", "--n", "16", "--out", "sim"])
    assert code == 0
    out = capsys.readouterr().out
    assert "confined (completed)" in out

    summary = read_summary("sim")
    assert summary["outcome"]["classification"] == "confined"
    assert summary["outcome"]["status"] == "completed"
    assert summary["outcome"]["first_crossing_time"] is None
    assert summary["outcome"]["energy_drift"] <= 1e-12
    assert summary["config"]["c_sq"] == 0.25
    assert summary["config"]["A_prime"] == 0.0
    assert summary["series"] == "sim.csv"

    header, rows = read_series("sim")
    assert header == SERIES_HEADER
    assert rows[0][0] == 0.0
    assert rows[-1][0] == 4.0
    for r in rows:                       # u == sqrt(mu) everywhere, always
        assert r[1] == pytest.approx(1.0, abs=1e-12)


def test_simulate_supercritical_crossing_is_a_successful_run():
    code = main(["simulate", "--mu", "0.015625", "--A-prime", "2.0",
                 "--alpha-exp", "-20", "--t-end", "2048", "--out", "cross"])
    assert code == 0                      # a crossing is a result, not an error
    summary = read_summary("cross")
    assert summary["outcome"]["classification"] == "crossing"
    assert summary["outcome"]["status"] == "early-stopped"
    tc = summary["outcome"]["first_crossing_time"]
    assert 0.0 < tc < 64.0
    assert summary["outcome"]["t_final"] == tc
    assert summary["config"]["alpha"] == -(2.0**-20)

    header, rows = read_series("cross")
    assert rows[-1][0] == pytest.approx(tc)
    assert rows[-1][1] < 0.0


def test_simulate_alpha_exponent_is_translated():
    assert main(["simulate", "--mu", "1", "--alpha-exp", "-2", "--A", "0.1",
                 "--t-end", "1", "--n", "16", "--out", "s"]) == 0
    assert read_summary("s")["config"]["alpha"] == -0.25


def test_simulate_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"mu": 1.0, "A": 0.1, "t_end": 2.0, "n": 16,
                               "out": "fromcfg"}))
    assert main(["simulate", "--config", str(cfg), "--t-end", "1"]) == 0
    summary = read_summary("fromcfg")
    assert summary["config"]["t_end"] == 1.0      # flag wins
    assert summary["config"]["mu"] == 1.0         # config supplies the rest
    assert summary["config"]["A"] == 0.1


def test_simulate_usage_errors_exit_1(capsys):
    # positive alpha violates the sign contract
    assert main(["simulate", "--mu", "1", "--alpha", "0.25", "--A", "0",
                 "--t-end", "1"]) == 1
    assert "alpha" in capsys.readouterr().err
    # mutually exclusive amplitude flags (argparse-level)
    assert main(["simulate", "--A", "0.1", "--A-prime", "1.0"]) == 1
    # mutually exclusive coupling flags
    assert main(["simulate", "--alpha", "-0.25", "--alpha-exp", "-2"]) == 1
    # bad dt
    assert main(["simulate", "--mu", "1", "--A", "0", "--dt", "0",
                 "--t-end", "1"]) == 1
    # missing config file
    assert main(["simulate", "--config", "nope.json"]) == 1


def test_cli_parser_level_exit_codes(capsys):
    assert main(["no-such-command"]) == 1
    assert main([]) == 1
    assert main(["--help"]) == 0          # help is a successful invocation
    assert "simulate" in capsys.readouterr().out


def test_simulate_stage_divergence_exits_2(capsys):
    code = main(["simulate", "--mu", "1", "--A", "0.9", "--n", "16",
                 "--dt", "1.5", "--max-stage-iters", "20", "--t-end", "3",
                 "--out", "div"])
    assert code == 2
    assert "failed:stage-divergence" in capsys.readouterr().out
    assert read_summary("div")["outcome"]["status"] == "failed:stage-divergence"


def test_backend_flag(capsys):
    assert main(["--backend", "pure", "simulate", "--mu", "1", "--A", "0.1",
                 "--n", "16", "--t-end", "1", "--out", "p"]) == 0
    assert read_summary("p")["config"]["backend"] == "pure"
    assert main(["--backend", "fortran", "simulate", "--mu", "1"]) == 1


# ----------------------------------------------------------------------- ode


def test_ode_confined_run_prints_the_normalized_amplitude(capsys):
    code = main(["ode", "--mu", "1", "--A", "0.3", "--t-end", "8",
                 "--out", "o"])
    assert code == 0
    out = capsys.readouterr().out
    assert "critical_amplitude 0.414214" in out
    assert "A' 0.724264" in out
    summary = read_summary("o")
    assert summary["outcome"]["classification"] == "confined"
    assert summary["config"]["critical_amplitude"] == pytest.approx(
        math.sqrt(2.0) - 1.0)


def test_ode_supercritical_crossing():
    assert main(["ode", "--mu", "1", "--A-prime", "1.25", "--t-end", "64",
                 "--out", "oc"]) == 0
    summary = read_summary("oc")
    assert summary["outcome"]["classification"] == "crossing"
    assert summary["outcome"]["first_crossing_time"] > 0.0


def test_ode_zero_amplitude_series_is_constant():
    assert main(["ode", "--mu", "1", "--A", "0", "--t-end", "4",
                 "--out", "oz"]) == 0
    header, rows = read_series("oz")
    assert header == SERIES_HEADER
    for r in rows:
        assert r[1] == r[2] == r[3] == pytest.approx(1.0, abs=1e-13)


# --------------------------------------------------------------------- sweep


def test_sweep_diagram_resume_cycle(tmp_path, capsys):
    plan = write_plan(tmp_path / "mini.json")
    out = tmp_path / "out"

    assert main(["sweep", plan, "--out-dir", str(out)]) == 0
    text = capsys.readouterr().out
    assert "jobs: 12 planned, 12 journaled, 0 remaining" in text
    assert "mu=0.015625" in text

    for suffix in (".csv", ".json", ".pgm", ".mask.pgm", ".gp.dat"):
        assert (out / f"diagram_mu_0p015625{suffix}").exists()
    journal = out / "mini.journal.csv"
    assert journal.exists()

    # a populated journal is refused unless resuming is explicit
    assert main(["sweep", plan, "--out-dir", str(out)]) == 1
    assert "pass --resume" in capsys.readouterr().err
    assert main(["sweep", plan, "--out-dir", str(out), "--resume"]) == 0

    # recomputing from the journal reproduces the diagram byte-for-byte
    first = (out / "diagram_mu_0p015625.csv").read_bytes()
    redo = tmp_path / "redo"
    assert main(["diagram", plan, "--journal", str(journal),
                 "--out-dir", str(redo)]) == 0
    assert (redo / "diagram_mu_0p015625.csv").read_bytes() == first

    meta = json.loads((out / "diagram_mu_0p015625.json").read_text())
    assert meta["plan"]["seed"] == 7
    assert meta["failures"] == 0


def test_sweep_interrupted_then_resumed_matches(tmp_path):
    plan = write_plan(tmp_path / "mini.json")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", plan, "--out-dir", str(a)]) == 0
    assert main(["sweep", plan, "--out-dir", str(b), "--max-jobs", "5"]) == 0
    assert main(["sweep", plan, "--out-dir", str(b), "--resume"]) == 0
    assert ((a / "diagram_mu_0p015625.csv").read_bytes()
            == (b / "diagram_mu_0p015625.csv").read_bytes())


def test_sweep_with_out_of_domain_jobs_exits_2_but_emits_diagrams(tmp_path, capsys):
    plan = write_plan(tmp_path / "dom.json", a_mode="raw",
                      A_interval=[0.12, 0.13], A_bins=2, samples_per_bin=4,
                      alpha_exponents=[-2], t_end=8.0)
    out = tmp_path / "out"
    assert main(["sweep", plan, "--out-dir", str(out)]) == 2
    assert "failed" in capsys.readouterr().out
    assert (out / "diagram_mu_0p015625.csv").exists()
    journal = (out / "dom.journal.csv").read_text()
    assert "failed:domain" in journal


def test_diagram_requires_an_existing_journal(tmp_path, capsys):
    plan = write_plan(tmp_path / "mini.json")
    assert main(["diagram", plan, "--journal", str(tmp_path / "none.csv"),
                 "--out-dir", str(tmp_path)]) == 1
    assert "no records" in capsys.readouterr().err


def test_sweep_rejects_a_malformed_plan(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**MINI_PLAN, "extra_knob": 1}))
    assert main(["sweep", str(bad), "--out-dir", str(tmp_path)]) == 1
    assert "unknown plan keys" in capsys.readouterr().err


# -------------------------------------------------------------------- verify


def test_verify_suite_passes_and_prints_check_lines(capsys):
    assert main(["verify", "order"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    for line in lines:
        assert "measured" in line and "PASS" in line


def test_verify_rejects_unknown_suites():
    assert main(["verify", "no-such-suite"]) == 1

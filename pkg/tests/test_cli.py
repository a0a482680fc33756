"""Command-line interface: subcommands, CSV outputs, exit codes, config merge."""

import numpy as np
import pytest

import spinet.cli as cli
from spinet.cli import main, read_csv
from spinet.device import PRESETS
from spinet.model2_elliptic import CertificateViolation

# coarse grid + reduced bias: the full -1 V default needs finer grids to keep
# the explicit drift terms stable, and CLI tests only exercise the plumbing
FAST = ["--m", "24", "--dt", "5e-4", "--threshold", "1e-4", "--bias", "-0.3"]


def write_state_csv(path, m=20, bump=0.2):
    x = (np.arange(m) + 1.0) / (m + 1.0)
    n0 = np.ones(m)
    W0 = 1.5 + bump * np.sin(np.pi * x)
    W3 = 0.1 * np.sin(np.pi * x)
    with open(path, "w") as fh:
        fh.write("x,n0,W0,W1,W2,W3\n")
        for i in range(m):
            fh.write("%.17g,%.17g,%.17g,0.0,0.0,%.17g\n" % (x[i], n0[i], W0[i], W3[i]))


# -- simulate ---------------------------------------------------------------------


def test_simulate_writes_profile_and_convergence(tmp_path):
    rc = main(["simulate", "--preset", "three-layer", *FAST, "--outdir", str(tmp_path)])
    assert rc == 0
    header, data, comments = read_csv(tmp_path / "n_profile.csv")
    assert header == ["x", "n0", "n1", "n2", "n3", "W0", "T", "V"]
    assert data.shape == (24, 8)
    assert np.all(np.diff(data[:, 0]) > 0.0)  # cell centers ascending
    assert np.all(data[:, 1] > 0.0)
    assert any("converged = True" in c for c in comments)
    assert any("mode = energy-transport" in c for c in comments)
    cheader, cdata, _ = read_csv(tmp_path / "convergence.csv")
    assert cheader == ["step", "residual"]
    assert np.all(cdata[:, 1] > 0.0)
    assert cdata[-1, 1] <= 1e-4


def test_simulate_drift_diffusion_has_unit_temperature(tmp_path):
    rc = main(
        ["simulate", "--preset", "three-layer", "--mode", "drift-diffusion",
         *FAST, "--outdir", str(tmp_path)]
    )
    assert rc == 0
    header, data, _ = read_csv(tmp_path / "n_profile.csv")
    np.testing.assert_allclose(data[:, header.index("T")], 1.0, atol=1e-14)


def test_simulate_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--preset", "five-layer", *FAST, "--outdir", str(out)]) == 0
    assert (a / "n_profile.csv").read_bytes() == (b / "n_profile.csv").read_bytes()


def test_simulate_nonconvergence_exits_2(tmp_path, capsys):
    rc = main(
        ["simulate", "--preset", "three-layer", "--m", "24", "--dt", "5e-4",
         "--threshold", "1e-12", "--max-steps", "3", "--outdir", str(tmp_path)]
    )
    assert rc == 2
    assert "not converged" in capsys.readouterr().err
    _, cdata, _ = read_csv(tmp_path / "convergence.csv")
    assert len(cdata) == 3  # partial history still written


def test_simulate_unknown_preset_exits_1(tmp_path, capsys):
    rc = main(["simulate", "--preset", "no-such-device", "--outdir", str(tmp_path)])
    assert rc == 1
    assert "unknown preset" in capsys.readouterr().err


def test_simulate_env_outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("SPINET_OUTDIR", str(tmp_path / "envout"))
    rc = main(["simulate", "--preset", "three-layer", *FAST])
    assert rc == 0
    assert (tmp_path / "envout" / "n_profile.csv").exists()


# -- sweep ------------------------------------------------------------------------


def test_sweep_outputs(tmp_path):
    rc = main(
        ["sweep", "--preset", "three-layer", "--p-values", "0,0.5",
         *FAST, "--outdir", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "n_profile_p0.csv").exists()
    assert (tmp_path / "n_profile_p0_5.csv").exists()
    header, data, _ = read_csv(tmp_path / "temperature_sweep.csv")
    assert header == ["x", "T_p0", "T_p0.5"]
    assert data.shape == (24, 3)
    sheader, sdata, _ = read_csv(tmp_path / "sweep_summary.csv")
    assert sheader == ["p", "max_T"]
    np.testing.assert_allclose(sdata[:, 0], [0.0, 0.5])
    # summary max_T matches the per-run profile columns
    np.testing.assert_allclose(sdata[:, 1], np.max(data[:, 1:], axis=0), rtol=1e-15)


def test_sweep_rejects_bad_polarization(tmp_path, capsys):
    rc = main(
        ["sweep", "--preset", "three-layer", "--p-values", "0,1.5",
         *FAST, "--outdir", str(tmp_path)]
    )
    assert rc == 1
    assert "outside" in capsys.readouterr().err


# -- entropy-check ------------------------------------------------------------------


def test_entropy_check_monotone_run(tmp_path):
    rc = main(
        ["entropy-check", "--m", "32", "--steps", "50", "--dt", "1e-3",
         "--seed", "1", "--outdir", str(tmp_path)]
    )
    assert rc == 0
    header, data, comments = read_csv(tmp_path / "entropy.csv")
    assert header == ["step", "H1", "production", "violation"]
    assert data.shape == (51, 4)
    assert np.all(np.diff(data[:, 1]) <= 1e-10)  # H1 non-increasing
    assert np.all(data[:, 2] >= 0.0)
    assert np.all(data[:, 3] <= 1e-10)
    assert any("monotone_nonincreasing = True" in c for c in comments)


def test_entropy_check_violation_exits_3(tmp_path, monkeypatch, capsys):
    from spinet.entropy import EntropyReport

    def fake_run(profile, initial, steps, **kw):
        H = np.array([1.0, 0.5, 0.8])
        report = EntropyReport(
            steps=2, H=H, monotone_nonincreasing=False, max_violation=0.3,
            tolerance=kw.get("tolerance", 1e-10), production=np.zeros(3),
        )
        return report, initial, np.ones(3)

    monkeypatch.setattr(cli, "entropy_trajectory_run", fake_run)
    rc = main(["entropy-check", "--m", "8", "--steps", "2", "--outdir", str(tmp_path)])
    assert rc == 3
    assert "entropy increased" in capsys.readouterr().err
    _, data, _ = read_csv(tmp_path / "entropy.csv")  # trajectory still written
    assert data[2, 3] == pytest.approx(0.3)


# -- model2-step --------------------------------------------------------------------


def test_model2_step_round_trip(tmp_path):
    state = tmp_path / "state.csv"
    write_state_csv(state)
    rc = main(
        ["model2-step", "--state", str(state), "--h", "1e-3", "--tau-sf", "0.5",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    header, data, comments = read_csv(tmp_path / "model2_state.csv")
    assert header == ["x", "n0", "W0", "W1", "W2", "W3"]
    assert data.shape == (20, 6)
    assert np.all(data[:, 1] > 0.0)
    Wv = np.linalg.norm(data[:, 3:6], axis=1)
    assert np.all(data[:, 2] > Wv)
    cert = {c.split("=")[0]: c for c in comments if "certificate" in c}
    assert any("converged = True" in c for c in comments)
    assert any("direct_residual" in c for c in comments)
    assert len(cert) == 10


def test_model2_step_missing_column_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,n0,W0\n0.5,1.0,1.5\n")
    rc = main(["model2-step", "--state", str(bad), "--outdir", str(tmp_path)])
    assert rc == 1
    assert "missing column" in capsys.readouterr().err


def test_model2_step_without_state_exits_1(tmp_path, capsys):
    rc = main(["model2-step", "--outdir", str(tmp_path)])
    assert rc == 1
    assert "needs --state" in capsys.readouterr().err


def test_model2_step_nonconvergence_exits_2(tmp_path, capsys):
    state = tmp_path / "state.csv"
    write_state_csv(state, bump=0.4)
    rc = main(
        ["model2-step", "--state", str(state), "--max-iter", "1",
         "--outdir", str(tmp_path)]
    )
    assert rc == 2
    assert "fixed point not reached" in capsys.readouterr().err
    _, _, comments = read_csv(tmp_path / "model2_state.csv")
    assert any("converged = False" in c for c in comments)


def test_model2_step_certificate_violation_exits_3(tmp_path, monkeypatch, capsys):
    state = tmp_path / "state.csv"
    write_state_csv(state)

    def raising(prev, h, tau_sf, bc, **kw):
        exc = CertificateViolation.__new__(CertificateViolation)
        RuntimeError.__init__(exc, "converged iterate violates solution bounds")
        raise exc

    monkeypatch.setattr(cli, "solve_time_step", raising)
    rc = main(["model2-step", "--state", str(state), "--outdir", str(tmp_path)])
    assert rc == 3
    assert "violates solution bounds" in capsys.readouterr().err


# -- config file and presets -----------------------------------------------------


def test_config_file_run_section_and_flag_override(tmp_path):
    from dataclasses import replace

    profile = replace(PRESETS["three-layer"](), bias_V=-0.3)
    ini = profile.to_config() + (
        "\n[run]\nm = 24\ndt = 5e-4\nthreshold = 1e-4\n"
        "mode = drift-diffusion\np_values = 0.0 0.33\n"
    )
    cfg_path = tmp_path / "device.ini"
    cfg_path.write_text(ini)
    out1 = tmp_path / "from_config"
    rc = main(["simulate", "--config", str(cfg_path), "--outdir", str(out1)])
    assert rc == 0
    header, data, comments = read_csv(out1 / "n_profile.csv")
    assert data.shape == (24, 8)  # [run] m respected
    np.testing.assert_allclose(data[:, header.index("T")], 1.0, atol=1e-14)

    # command-line flag wins over the [run] section
    out2 = tmp_path / "override"
    rc = main(
        ["simulate", "--config", str(cfg_path), "--mode", "energy-transport",
         "--outdir", str(out2)]
    )
    assert rc == 0
    _, data2, _ = read_csv(out2 / "n_profile.csv")
    assert np.max(np.abs(data2[:, header.index("T")] - 1.0)) > 1e-6


def test_presets_lists_known_profiles(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "three-layer" in out and "five-layer" in out
    assert "magnetic" in out


def test_usage_errors_exit_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["simulate", "--m", "24"]) == 1  # neither preset nor config
    err = capsys.readouterr().err
    assert "error:" in err


def test_read_csv_rejects_headerless_file(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("# only comments\n")
    with pytest.raises(ValueError):
        read_csv(p)

import dataclasses
from pathlib import Path

import numpy as np
import pytest

from pmlcorner import cli
from pmlcorner.config import (
    REFERENCE_CONFIG,
    ConfigError,
    parse_config,
    parse_corner_config,
    parse_eig_config,
    parse_sweep_config,
    serialize_config,
)
from pmlcorner.damping import DampingKind
from pmlcorner.output import OUTPUT_DIR_ENV, SENTINEL, RowWriter, read_snapshot, read_table, write_snapshot
from pmlcorner.solver import Scheme

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


# ---------------------------------------------------------------- parsing
def test_reference_config_parses():
    cfg = parse_config(REFERENCE_CONFIG)
    assert cfg.scheme is Scheme.A
    assert cfg.domain == (-2.0, 20.0, -2.0, 20.0)
    assert cfg.box == (0.0, 18.0, 0.0, 18.0)
    assert (cfg.pml_thickness, cfg.sigma, cfg.h, cfg.dt, cfg.n_steps) == (2.0, 25.0, 0.5, 0.2, 100)
    prof = cfg.profile()
    assert prof.sigma_x(19.0) == 25.0 and prof.sigma_x(9.0) == 0.0


@pytest.mark.parametrize(
    "parser,path",
    [(parse_config, "corner_blowup_A.cfg"), (parse_config, "corner_blowup_B.cfg"),
     (parse_sweep_config, "sweep_scheme_b_constant.cfg"), (parse_sweep_config, "sweep_scheme_a_constant.cfg"),
     (parse_sweep_config, "sweep_scheme_b_quadratic.cfg"), (parse_eig_config, "eig_q1.cfg"),
     (parse_corner_config, "corner_decay.cfg")],
)
def test_shipped_configs_round_trip(parser, path):
    cfg = parser((CONFIGS / path).read_text())
    assert parser(serialize_config(cfg)) == cfg


def test_reference_round_trip():
    cfg = parse_config(REFERENCE_CONFIG)
    assert parse_config(serialize_config(cfg)) == cfg


def test_defaults():
    cfg = parse_config("domain = 0 4 0 4\nh = 0.5\ndt = 0.1\nsteps = 3\n")
    assert cfg.scheme is Scheme.B and cfg.r == 1 and cfg.damping is DampingKind.CONSTANT
    assert cfg.profile() is None
    assert parse_config("domain = 0 4 0 4\nh = 0.5\ndt = 0.1\nT = 1\n").n_steps == 10


def test_thickness_alone_defines_the_box():
    cfg = parse_config("domain = -2 20 -2 20\npml_thickness = 2\nsigma = 3\nh = 0.5\ndt = 0.1\nsteps = 1\n")
    assert cfg.profile().physical_box == (0.0, 18.0, 0.0, 18.0)


def test_missing_h_names_the_key():
    text = REFERENCE_CONFIG.replace("h = 0.5\n", "")
    with pytest.raises(ConfigError, match="'h'"):
        parse_config(text)


def test_missing_steps():
    with pytest.raises(ConfigError, match="steps"):
        parse_config("domain = 0 4 0 4\nh = 0.5\ndt = 0.1\n")


def test_margin_mismatch_is_a_geometry_error():
    text = REFERENCE_CONFIG.replace("box = 0 18 0 18", "box = 0 17 0 17")
    with pytest.raises(ConfigError, match="geometry"):
        parse_config(text)


@pytest.mark.parametrize(
    "line",
    ["colour = red", "scheme = C", "h = -1", "dt = 0", "mu = 0", "domain = 0 1 0", "sigma = -2",
     "damping = cubic", "fields = Q", "h"],
)
def test_invalid_values(line):
    base = "domain = 0 4 0 4\nh = 0.5\ndt = 0.1\nsteps = 3\n"
    key = line.split("=")[0].strip()
    kept = "\n".join(l for l in base.splitlines() if not l.startswith(key + " "))
    with pytest.raises(ConfigError):
        parse_config(kept + "\n" + line + "\n")


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(REFERENCE_CONFIG + "h = 0.25\n")


def test_other_parsers():
    sw = parse_sweep_config((CONFIGS / "sweep_scheme_b_constant.cfg").read_text())
    assert sw.h_values == (0.5, 0.25, 0.125) and sw.sigma_values == (1.0, 10.0, 25.0)
    with pytest.raises(ConfigError, match="h_values"):
        parse_sweep_config("domain = 0 1 0 1\n")
    with pytest.raises(ConfigError):
        parse_corner_config("n = 8\ndt = 0.1\n")
    assert parse_eig_config("domain = 0 2 0 2\nh = 0.5\n").r == 1


# ---------------------------------------------------------------- output files
def test_snapshot_round_trip(tmp_path):
    vals = np.arange(12.0).reshape(3, 4) / 7
    assert not write_snapshot(tmp_path / "s.txt", vals, h=0.5, t=1.0, step=5, field="P")
    header, data = read_snapshot(tmp_path / "s.txt")
    assert header["nx"] == "4" and header["ny"] == "3" and header["overflow"] == "0"
    np.testing.assert_array_equal(data, vals)


def test_snapshot_overflow_sentinel(tmp_path):
    vals = np.array([[1.0, np.inf], [-np.inf, np.nan]])
    assert write_snapshot(tmp_path / "s.txt", vals, h=1.0, t=0.0, step=0, field="P")
    header, data = read_snapshot(tmp_path / "s.txt")
    assert header["overflow"] == "1"
    assert np.all(np.isfinite(data))
    assert data[0, 1] == SENTINEL and data[1, 0] == -SENTINEL and abs(data[1, 1]) == SENTINEL


def test_snapshot_count_checked(tmp_path):
    p = tmp_path / "s.txt"
    write_snapshot(p, np.zeros((2, 2)), h=1.0, t=0.0, step=0, field="P")
    p.write_text(p.read_text().replace("nx=2", "nx=3"))
    with pytest.raises(ValueError):
        read_snapshot(p)


def test_row_writer_flushes_each_row(tmp_path):
    p = tmp_path / "t.csv"
    w = RowWriter(p, ["a", "b"])
    w.write({"a": 1, "b": 0.1})
    assert read_table(p) == [{"a": "1", "b": "0.1"}]  # readable before close
    w.write({"a": 2})
    w.close()
    assert read_table(p)[1] == {"a": "2", "b": ""}


# ---------------------------------------------------------------- CLI
def _write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_scheme_a_blows_up(tmp_path, capsys):
    status = cli.main(["run", str(CONFIGS / "corner_blowup_A.cfg"), "-o", str(tmp_path)])
    assert status == cli.EXIT_BLOWUP == 2
    assert "verdict=unstable" in capsys.readouterr().out
    assert (tmp_path / "verdict.txt").read_text().startswith("verdict=unstable")
    rows = read_table(tmp_path / "log.csv")
    assert int(rows[-1]["step"]) < 40
    assert float(rows[-1]["max_norm"]) > 10 * float(rows[0]["max_norm"])


def test_cli_scheme_b_is_stable(tmp_path):
    status = cli.main(["run", str(CONFIGS / "corner_blowup_B.cfg"), "-o", str(tmp_path)])
    assert status == cli.EXIT_OK
    assert (tmp_path / "verdict.txt").read_text().startswith("verdict=stable")
    assert len(read_table(tmp_path / "log.csv")) == 101
    assert len(list(tmp_path.glob("snap_P_*.txt"))) == 11


def test_cli_zero_amplitude(tmp_path):
    text = REFERENCE_CONFIG.replace("scheme = A", "scheme = B") + "source_amplitude = 0\nsnapshot_stride = 20\n"
    out = tmp_path / "out"
    assert cli.main(["run", _write(tmp_path, text), "-o", str(out)]) == cli.EXIT_OK
    snaps = sorted(out.glob("snap_P_*.txt"))
    assert len(snaps) == 6
    for s in snaps:
        assert not np.any(read_snapshot(s)[1])


def test_cli_pstar_snapshots_and_energies(tmp_path):
    text = ("domain = 0 4 0 4\nh = 0.5\ndt = 0.1\nsteps = 4\nsource_center = 2 2\n"
            "snapshot_stride = 2\nfields = P Pstar\nenergies = true\nscheme = fluid\n")
    out = tmp_path / "out"
    assert cli.main(["run", _write(tmp_path, text), "-o", str(out)]) == cli.EXIT_OK
    assert len(list(out.glob("snap_Pstar_*.txt"))) == 3
    rows = read_table(out / "log.csv")
    assert {"e0", "e_fluid"} <= set(rows[0])
    assert rows[0]["e_fluid"] == "" and rows[2]["e_fluid"] != ""


def test_cli_reruns_are_bit_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        cli.main(["run", str(CONFIGS / "corner_blowup_A.cfg"), "-o", str(out)])
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_cli_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    text = "domain = 0 2 0 2\nh = 0.5\ndt = 0.1\nsteps = 2\nsource_center = 1 1\nname = envrun\n"
    assert cli.main(["run", _write(tmp_path, text)]) == cli.EXIT_OK
    assert (tmp_path / "env" / "envrun" / "verdict.txt").exists()


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG
    assert "missing.cfg" in capsys.readouterr().err
    bad = _write(tmp_path, REFERENCE_CONFIG.replace("box = 0 18 0 18", "box = 0 17 0 17"))
    assert cli.main(["run", bad]) == cli.EXIT_CONFIG
    assert "geometry" in capsys.readouterr().err
    assert cli.main(["eig", _write(tmp_path, "domain = 0 1 0 1\n", "e.cfg")]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit):
        cli.main([])


def test_cli_seed_is_accepted(tmp_path):
    text = "domain = 0 2 0 2\nh = 0.5\ndt = 0.1\nsteps = 2\nsource_center = 1 1\n"
    assert cli.main(["--seed", "7", "run", _write(tmp_path, text), "-o", str(tmp_path / "o")]) == 0


def test_cli_eig(capsys):
    assert cli.main(["eig", str(CONFIGS / "eig_q1.cfg")]) == cli.EXIT_OK
    values = dict(line.split("=") for line in capsys.readouterr().out.split())
    lam, mu = float(values["lambda_max"]), float(values["mu_max"])
    assert abs(lam - mu) <= 1e-10 * lam
    assert float(values["dt_fluid"]) == pytest.approx(2 / np.sqrt(lam))
    assert float(values["dt_scheme_a_theoretical"]) == pytest.approx(0.078, abs=1e-4)


def test_cli_corner_decay(tmp_path, capsys):
    assert cli.main(["corner-decay", str(CONFIGS / "corner_decay.cfg"), "-o", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.split()
    assert len(lines) == 101
    t, nrm = map(float, lines[-1].split(","))
    t0, n0 = map(float, lines[0].split(","))
    assert t == pytest.approx(1.0) and nrm / n0 == pytest.approx(np.exp(-2.0), rel=1e-10)
    assert len(read_table(tmp_path / "corner_decay.csv")) == 101


def test_sweep_rows_and_parallel_match(tmp_path):
    text = ("scheme = B\nr = 1\ndomain = -2 20 -2 20\nbox = 0 18 0 18\npml_thickness = 2\n"
            "h_values = 0.5\nsigma_values = 1 25\n")
    cfg = parse_sweep_config(text)
    rows = cli.sweep(cfg, tmp_path / "serial")
    table = read_table(tmp_path / "serial" / "boundaries.csv")
    assert len(table) == len(rows) == 2
    for row in rows:
        assert row["dt_boundary"] == pytest.approx(0.5 / np.sqrt(2), rel=0.03)
        assert row["dt_theoretical"] == pytest.approx(0.5 / np.sqrt(2))
    par = cli.sweep(dataclasses.replace(cfg, workers=2), tmp_path / "par")
    assert par == rows

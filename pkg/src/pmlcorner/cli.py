"""Experiment drivers and the ``pmlcorner`` command line.

Subcommands: ``run``, ``sweep``, ``eig`` and ``corner-decay``, each taking a
``key = value`` config file. Artifacts go under ``$PMLCORNER_OUTPUT_DIR``
(default ``./pmlcorner_output``). Exit status: 0 for a run that completed
without blow-up, 2 when blow-up was detected, 1 for usage or config errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import stability
from .assembly import build_operators
from .config import (
    ConfigError,
    CornerConfig,
    EigConfig,
    RunConfig,
    SweepConfig,
    parse_config,
    parse_corner_config,
    parse_eig_config,
    parse_sweep_config,
    resolve_box,
)
from .damping import make_profile
from .diagnostics import StabilityVerdict, Verdict, run as run_steps
from .output import RowWriter, output_dir, write_snapshot
from .solver import init_state
from .split_corner import PeriodicGrid, acoustic_system, gaussian_initial_state, simulate_corner

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2


@dataclass
class RunOutcome:
    verdict: StabilityVerdict
    directory: Path
    snapshots: list[Path]

    @property
    def exit_status(self) -> int:
        return EXIT_BLOWUP if self.verdict.verdict is Verdict.UNSTABLE else EXIT_OK


def _operators(cfg: RunConfig):
    profile = cfg.profile()
    sx = profile.sigma_x if profile is not None else 0.0
    sy = profile.sigma_y if profile is not None else 0.0
    return build_operators(cfg.domain, cfg.h, cfg.r, cfg.mu, cfg.rho, sx, sy)


def run(cfg: RunConfig, out: Path | None = None) -> RunOutcome:
    """Run one simulation, writing snapshots, a per-step log and the verdict."""
    directory = Path(out) if out is not None else output_dir() / cfg.name
    directory.mkdir(parents=True, exist_ok=True)
    ops = _operators(cfg)
    state = init_state(ops, cfg.source, cfg.dt)
    snapshots: list[Path] = []
    h = min(ops.mesh.hx, ops.mesh.hy)

    def snap(s):
        for name in cfg.fields:
            vec = s.P_curr if name == "P" else s.Pstar_curr
            path = directory / f"snap_{name}_{s.n:06d}.txt"
            write_snapshot(path, ops.dofs.to_lattice(vec), h=h, t=s.t, step=s.n, field=name)
            snapshots.append(path)

    def callback(s):
        if cfg.snapshot_stride and s.n % cfg.snapshot_stride == 0:
            snap(s)

    if cfg.snapshot_stride:
        snap(state)
    result = run_steps(
        ops, state, cfg.scheme, cfg.n_steps,
        energies=cfg.energies, threshold_factor=cfg.threshold_factor,
        window=cfg.window, callback=callback,
    )
    series = result.series
    columns = ["step", "t", "max_norm"]
    if cfg.energies:
        columns += ["e0", "e_a", "e_b", "e_fluid"]
    with RowWriter(directory / "log.csv", columns) as log:
        for i, n in enumerate(series.steps):
            row = {"step": n, "t": n * cfg.dt, "max_norm": series.max_norm[i]}
            if cfg.energies:
                row.update(e0=series.e0[i], e_a=series.e_a[i], e_b=series.e_b[i], e_fluid=series.e_fluid[i])
            log.write(row)
    v = result.verdict
    (directory / "verdict.txt").write_text(
        f"verdict={v.verdict.value} growth_rate={v.growth_rate!r} "
        f"steps_run={v.steps_run} amplification={v.amplification!r}\n"
    )
    return RunOutcome(v, directory, snapshots)


SWEEP_COLUMNS = ["h", "dt_boundary", "sigma", "scheme", "r", "damping",
                 "dt_theoretical", "dt_spectral", "n_probes"]


def _sweep_point(cfg: SweepConfig, h: float, sigma: float) -> dict:
    probe_cfg = stability.ProbeConfig(
        source=cfg.source, steps=cfg.steps, max_steps=cfg.max_steps,
        threshold_factor=cfg.threshold_factor, window=cfg.window, mu=cfg.mu, rho=cfg.rho,
    )
    box, L = resolve_box(cfg.domain, cfg.box, cfg.pml_thickness)
    if box is not None:
        profile = make_profile(cfg.damping, sigma, box, L)
        sx, sy = profile.sigma_x, profile.sigma_y
    else:
        sx = sy = 0.0
    ops = build_operators(cfg.domain, h, cfg.r, cfg.mu, cfg.rho, sx, sy)
    c = probe_cfg.c
    try:
        result = stability.empirical_cfl(cfg.scheme, None, cfg.r, h, probe_cfg, ops=ops)
        dt_emp = result.dt_boundary
        n_probes = len(result.probes)
    except stability.AllProbesUnstableError:
        dt_emp, n_probes = 0.0, -1
    report = stability.cfl_report(cfg.scheme, ops, cfg.r, h, sigma, c, dt_emp)
    return {
        "h": h, "dt_boundary": dt_emp, "sigma": sigma, "scheme": cfg.scheme.value,
        "r": cfg.r, "damping": cfg.damping.value, "dt_theoretical": report.dt_theoretical,
        "dt_spectral": report.dt_spectral, "n_probes": n_probes,
    }


def sweep(cfg: SweepConfig, out: Path | None = None) -> list[dict]:
    """Empirical dt boundary for every (h, sigma), one flushed row per point."""
    directory = Path(out) if out is not None else output_dir() / cfg.name
    directory.mkdir(parents=True, exist_ok=True)
    points = [(h, s) for h in cfg.h_values for s in cfg.sigma_values]
    rows = []
    with RowWriter(directory / "boundaries.csv", SWEEP_COLUMNS) as writer:
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                futures = [pool.submit(_sweep_point, cfg, h, s) for h, s in points]
                for fut in futures:
                    row = fut.result()
                    writer.write(row)
                    rows.append(row)
        else:
            for h, s in points:
                row = _sweep_point(cfg, h, s)
                writer.write(row)
                rows.append(row)
    return rows


def eig(cfg: EigConfig) -> dict[str, float]:
    ops = build_operators(cfg.domain, cfg.h, cfg.r, cfg.mu, cfg.rho)
    out = stability.spectral_bounds(ops, cfg.sigma)
    c = float(np.sqrt(cfg.mu / cfg.rho))
    try:
        out["dt_fluid_theoretical"] = stability.cfl_fluid_theoretical(cfg.r, c, cfg.h)
        out["dt_scheme_a_theoretical"] = stability.cfl_corner_scheme_a(cfg.r, c, cfg.h, cfg.sigma)
    except stability.UntabulatedDegreeError:
        pass
    return out


def corner_decay(cfg: CornerConfig, out: Path | None = None) -> list[tuple[float, float]]:
    system = acoustic_system(cfg.sigma, cfg.mu, cfg.rho)
    grid = PeriodicGrid(cfg.n, cfg.length)
    U0 = gaussian_initial_state(system, grid, cfg.width)
    series = simulate_corner(system, grid, U0, cfg.dt, T=cfg.T, steps=cfg.steps)
    rows = list(zip(series.times.tolist(), series.norms.tolist()))
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        with RowWriter(Path(out) / "corner_decay.csv", ["t", "norm"]) as writer:
            for t, nrm in rows:
                writer.write({"t": t, "norm": nrm})
    return rows


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmlcorner", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="reserved; the core paths are deterministic")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "run one simulation"),
        ("sweep", "empirical CFL boundaries over h and sigma"),
        ("eig", "spectral CFL bounds"),
        ("corner-decay", "norm decay of the damped corner system"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("-o", "--out", default=None, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = _read(args.config)
        if args.command == "run":
            cfg = parse_config(text)
            outcome = run(cfg, args.out)
            v = outcome.verdict
            print(f"verdict={v.verdict.value} steps_run={v.steps_run} "
                  f"amplification={v.amplification:.6g} growth_rate={v.growth_rate:.6g}")
            return outcome.exit_status
        if args.command == "sweep":
            cfg = parse_sweep_config(text)
            rows = sweep(cfg, args.out)
            print(",".join(SWEEP_COLUMNS))
            for row in rows:
                print(",".join("" if row[k] is None else str(row[k]) for k in SWEEP_COLUMNS))
            return EXIT_OK
        if args.command == "eig":
            cfg = parse_eig_config(text)
            for key, value in eig(cfg).items():
                print(f"{key}={value!r}")
            return EXIT_OK
        cfg = parse_corner_config(text)
        for t, nrm in corner_decay(cfg, args.out):
            print(f"{t!r},{nrm!r}")
        return EXIT_OK
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

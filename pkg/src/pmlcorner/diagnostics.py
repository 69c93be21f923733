"""Discrete energies, their dissipation identities, and blow-up detection.

Energy helpers take consecutive :class:`SimState` objects, oldest first.
State ``s_k`` carries P^{k-1}, P^k, P*^{k-1}, P*^k and V, V* at k - 1/2,
so for instance the scheme-B energy at n + 1/2 needs ``s_n, s_{n+1}, s_{n+2}``.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .assembly import AssembledOperators
from .solver import Scheme, SimState, stepper


def _constant(values: np.ndarray, name: str) -> float:
    if values.size == 0:
        return 0.0
    v = float(values.flat[0])
    if not np.allclose(values, v, rtol=0, atol=1e-14 * max(1.0, abs(v))):
        raise ValueError(f"{name} must be constant over the domain for this energy")
    return v


def constant_sigmas(ops: AssembledOperators) -> tuple[float, float]:
    sx = _constant(np.concatenate([ops.sx_p, ops.sx_v]), "sigma_x")
    sy = _constant(np.concatenate([ops.sy_p, ops.sy_v]), "sigma_y")
    return sx, sy


def stiffness_action(ops: AssembledOperators, P: np.ndarray) -> np.ndarray:
    """K P with K = R B^{-1} R^T, without forming K."""
    return ops.Rx @ ((ops.RxT @ P) / ops.B) + ops.Ry @ ((ops.RyT @ P) / ops.B)


def _mnorm2(ops, P):
    return float(np.dot(ops.M * P, P))


def _bnorm2(ops, V):
    return float(np.dot(ops.B * V, V))


def energy_fluid(s_n: SimState, s_np1: SimState, ops: AssembledOperators) -> float:
    """0.5 (|P^n|_M^2 + (B V^{n+1/2} | V^{n-1/2})), conserved by the leapfrog."""
    cross = np.dot(ops.B * s_np1.Vx, s_n.Vx) + np.dot(ops.B * s_np1.Vy, s_n.Vy)
    return 0.5 * (_mnorm2(ops, s_n.P_curr) + float(cross))


def energy_scheme_a(state: SimState, ops: AssembledOperators, sigma: float | None = None) -> float:
    """Scheme-A energy at n + 1/2 from ``state`` = s_{n+1} (holds P^n, P^{n+1}).

    0.5 * (|(P^{n+1} - P^n)/dt|_M^2 + (K_sigma P^n | P^{n+1})), K_sigma = K + sigma^2 M.
    """
    if sigma is None:
        sx, sy = constant_sigmas(ops)
        if sx != sy:
            raise ValueError("scheme-A energy requires sigma_x == sigma_y")
        sigma = sx
    dt = state.dt
    Pn, Pn1 = state.P_prev, state.P_curr
    kin = _mnorm2(ops, (Pn1 - Pn) / dt)
    pot = float(np.dot(stiffness_action(ops, Pn) + sigma**2 * ops.M * Pn, Pn1))
    return 0.5 * (kin + pot)


def dissipation_scheme_a(s_n: SimState, s_np1: SimState, ops: AssembledOperators, sigma: float) -> float:
    """-2 sigma |(D I P)^n|_M^2, the right-hand side of the scheme-A identity."""
    dip = (s_np1.P_curr - s_n.P_prev) / (2.0 * s_n.dt)
    return -2.0 * sigma * _mnorm2(ops, dip)


def energy_scheme_b(
    history: Sequence[SimState],
    ops: AssembledOperators,
    sigma_x: float | None = None,
    sigma_y: float | None = None,
) -> float | None:
    """Scheme-B energy at n + 1/2 from the last three states s_n, s_{n+1}, s_{n+2}.

    Returns ``None`` when fewer than three states are available.
    """
    if len(history) < 3:
        return None
    s0, s1, s2 = history[-3:]
    if sigma_x is None or sigma_y is None:
        sx, sy = constant_sigmas(ops)
        sigma_x = sx if sigma_x is None else sigma_x
        sigma_y = sy if sigma_y is None else sigma_y
    dt = s0.dt
    # P*^{n-1}, P*^n, P*^{n+1}, P*^{n+2}
    ps = (s0.Pstar_prev, s0.Pstar_curr, s2.Pstar_prev, s2.Pstar_curr)
    d2p_n = (ps[2] - 2 * ps[1] + ps[0]) / dt**2
    d2p_np1 = (ps[3] - 2 * ps[2] + ps[1]) / dt**2
    e = float(np.dot(ops.M * d2p_np1, d2p_n))
    for comp, sig in (("Vstar_x", sigma_x), ("Vstar_y", sigma_y)):
        v0, v1, v2 = (getattr(s, comp) for s in (s0, s1, s2))
        e += _bnorm2(ops, (v2 - 2 * v1 + v0) / dt**2)
        e += sig**2 * _bnorm2(ops, (v2 - v0) / (2 * dt))
    return 0.5 * e


def dissipation_scheme_b(
    history: Sequence[SimState], ops: AssembledOperators, sigma_x: float, sigma_y: float
) -> float | None:
    """-2 sigma_x |(D^2 I V*_x)^n|_B^2 - 2 sigma_y |(D^2 I V*_y)^n|_B^2 from s_{n-1}..s_{n+2}."""
    if len(history) < 4:
        return None
    states = history[-4:]
    dt = states[0].dt
    out = 0.0
    for comp, sig in (("Vstar_x", sigma_x), ("Vstar_y", sigma_y)):
        v = [getattr(s, comp) for s in states]  # V*^{n-3/2} .. V*^{n+3/2}
        iv = [(v[k] + v[k + 1]) / 2 for k in range(3)]  # (I V*)^{n-1}, ^n, ^{n+1}
        d2iv = (iv[2] - 2 * iv[1] + iv[0]) / dt**2
        out -= 2.0 * sig * _bnorm2(ops, d2iv)
    return out


def energy_order0(state: SimState, ops: AssembledOperators) -> float:
    """Monitor 0.5 (|P^n|_M^2 + |V*^{n-1/2}|_B^2)."""
    return 0.5 * (_mnorm2(ops, state.P_curr) + _bnorm2(ops, state.Vstar_x) + _bnorm2(ops, state.Vstar_y))


class Verdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"


@dataclass
class EnergySeries:
    """Per-step records of a run. Energy lists hold ``None`` where undefined."""

    steps: list[int] = field(default_factory=list)
    max_norm: list[float] = field(default_factory=list)
    e0: list[float] = field(default_factory=list)
    e_a: list[float | None] = field(default_factory=list)
    e_b: list[float | None] = field(default_factory=list)
    e_fluid: list[float | None] = field(default_factory=list)
    residual: list[float | None] = field(default_factory=list)  # energy-identity defect per step
    completed: bool = False

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    growth_rate: float
    steps_run: int
    amplification: float


def growth_rate(values: Sequence[float], window: int) -> float:
    """Least-squares slope of log(values) over the trailing ``window`` points."""
    tail = np.asarray(values[-window:], dtype=float)
    if len(tail) < 2:
        return 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(np.maximum(tail, np.finfo(float).tiny))
    if not np.all(np.isfinite(logs)):
        return np.inf
    return float(np.polyfit(np.arange(len(tail), dtype=float), logs, 1)[0])


def detect_blowup(series: EnergySeries, threshold_factor: float = 10.0, window: int = 50) -> StabilityVerdict:
    """Classify a run from its max-norm history.

    Unstable: the latest max-norm exceeds ``threshold_factor`` times the
    initial one and the trailing log-slope is positive. Stable: the run
    completed and the max-norm over the trailing ``window`` steps stays
    within twice the initial one (start-up overshoot is tolerated).
    """
    norms = series.max_norm
    if not norms:
        return StabilityVerdict(Verdict.INCONCLUSIVE, 0.0, 0, 1.0)
    initial = norms[0]
    last = norms[-1]
    rate = growth_rate(norms, window)
    steps_run = series.steps[-1] if series.steps else 0
    if initial == 0.0:
        amp = 1.0 if last == 0.0 else np.inf
    else:
        amp = last / initial
    if (not np.isfinite(last)) or (last > threshold_factor * initial and rate > 0):
        return StabilityVerdict(Verdict.UNSTABLE, rate, steps_run, amp)
    if series.completed and max(norms[-window:]) <= 2.0 * initial:
        return StabilityVerdict(Verdict.STABLE, rate, steps_run, amp)
    return StabilityVerdict(Verdict.INCONCLUSIVE, rate, steps_run, amp)


@dataclass
class RunResult:
    state: SimState
    series: EnergySeries
    verdict: StabilityVerdict


def run(
    ops: AssembledOperators,
    state: SimState,
    scheme: Scheme | str,
    steps: int,
    *,
    energies: bool = False,
    stop_on_blowup: bool = True,
    threshold_factor: float = 10.0,
    window: int = 50,
    callback: Callable[[SimState], None] | None = None,
) -> RunResult:
    """Advance ``steps`` steps, recording the max-norm of P after every step.

    With ``energies=True`` the applicable discrete energies are recorded as
    well (this keeps a short ring of past states). With ``stop_on_blowup``
    the run ends as soon as :func:`detect_blowup` would call it unstable.
    """
    scheme = Scheme(scheme)
    step = stepper(scheme)
    series = EnergySeries()
    ring: deque[SimState] = deque(maxlen=4)
    sigmas = None
    if energies:
        try:
            sigmas = constant_sigmas(ops)
        except ValueError:
            sigmas = None

    def record(s: SimState) -> None:
        series.steps.append(s.n)
        series.max_norm.append(float(np.max(np.abs(s.P_curr))) if s.P_curr.size else 0.0)
        if not energies:
            return
        ring.append(s)
        series.e0.append(energy_order0(s, ops))
        ea = eb = ef = res = None
        if len(ring) >= 2:
            ef = energy_fluid(ring[-2], ring[-1], ops) if ops.is_undamped else None
        if sigmas is not None:
            sx, sy = sigmas
            if sx == sy and s.n >= 1:
                ea = energy_scheme_a(s, ops, sx)
            eb = energy_scheme_b(list(ring), ops, sx, sy)
            # (E^{n+1/2} - E^{n-1/2})/dt minus the dissipation term of the scheme run
            if scheme is Scheme.A and ea is not None and series.e_a and series.e_a[-1] is not None:
                res = (ea - series.e_a[-1]) / s.dt - dissipation_scheme_a(ring[-2], s, ops, sx)
            elif scheme is Scheme.B and eb is not None and series.e_b and series.e_b[-1] is not None:
                res = (eb - series.e_b[-1]) / s.dt - dissipation_scheme_b(list(ring), ops, sx, sy)
        series.e_a.append(ea)
        series.e_b.append(eb)
        series.e_fluid.append(ef)
        series.residual.append(res)

    record(state)
    initial = series.max_norm[0]
    for _ in range(steps):
        state = step(state, ops)
        record(state)
        if callback is not None:
            callback(state)
        last = series.max_norm[-1]
        if stop_on_blowup and (not np.isfinite(last) or last > threshold_factor * initial):
            if growth_rate(series.max_norm, window) > 0 or not np.isfinite(last):
                break
    else:
        series.completed = True
    return RunResult(state, series, detect_blowup(series, threshold_factor, window))

"""CFL bounds three ways: closed form, spectral, and empirical bisection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import AssembledOperators, build_operators
from .damping import DampingProfile
from .diagnostics import Verdict, run
from .solver import RickerSpec, Scheme, init_state

# 1D CFL numbers of the Qr - Qr^disc leapfrog scheme, c * dt / h < cfl_{1,r}.
CFL_1D = {1: 1.0, 5: 0.1010}


class UntabulatedDegreeError(ValueError):
    """No closed-form CFL constant for this degree; use the spectral bound."""


class ConvergenceError(RuntimeError):
    pass


def _cfl_1d(r: int) -> float:
    try:
        return CFL_1D[r]
    except KeyError:
        raise UntabulatedDegreeError(
            f"no tabulated CFL constant for r={r} (known: {sorted(CFL_1D)}); "
            "use the spectral bound from lambda_max instead"
        ) from None


def cfl_fluid_theoretical(r: int, c: float, h: float, d: int = 2) -> float:
    """Largest stable dt in the fluid, ``(h/c) * cfl_{1,r} / sqrt(d)``."""
    return h / c * _cfl_1d(r) / math.sqrt(d)


def cfl_corner_scheme_a(r: int, c: float, h: float, sigma: float, d: int = 2) -> float:
    """Scheme-A bound in a corner with constant damping ``sigma``.

    The fluid bound shrinks by ``sqrt(1 + sigma^2 h^2 / (4 C^2))`` where
    ``C = sqrt(d) c / cfl_{1,r}``.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    C = math.sqrt(d) * c / _cfl_1d(r)
    return cfl_fluid_theoretical(r, c, h, d) / math.sqrt(1.0 + sigma**2 * h**2 / (4.0 * C**2))


def _rng_start(n: int) -> np.ndarray:
    return np.random.default_rng(12345).standard_normal(n)


def _power_iteration(apply, n: int, tol: float, max_iter: int) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite operator."""
    if n == 0:
        return 0.0
    x = _rng_start(n)
    x /= np.linalg.norm(x)
    rq_old = None
    for _ in range(max_iter):
        y = apply(x)
        rq = float(np.dot(x, y))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if rq_old is not None and abs(rq - rq_old) <= tol * abs(rq):
            return rq
        rq_old = rq
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def lambda_max(ops: AssembledOperators, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of ``R B^-1 R^T v = lambda M v`` by power iteration.

    Iterates on the symmetric form ``M^-1/2 R B^-1 R^T M^-1/2``. Returns 0 for
    a space without free pressure dofs.
    """
    ms = 1.0 / np.sqrt(ops.M)

    def apply(x):
        z = ms * x
        return ms * (ops.Rx @ ((ops.RxT @ z) / ops.B) + ops.Ry @ ((ops.RyT @ z) / ops.B))

    return _power_iteration(apply, ops.n_pressure, tol, max_iter)


def mu_max(ops: AssembledOperators, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of ``R^T M^-1 R w = mu B w`` (B block diagonal, two blocks)."""
    bs = 1.0 / np.sqrt(ops.B)
    nv = ops.n_velocity
    if ops.n_pressure == 0:
        return 0.0

    def apply(x):
        zx, zy = bs * x[:nv], bs * x[nv:]
        q = (ops.Rx @ zx + ops.Ry @ zy) / ops.M
        return np.concatenate([bs * (ops.RxT @ q), bs * (ops.RyT @ q)])

    return _power_iteration(apply, 2 * nv, tol, max_iter)


def lambda_max_dense(ops: AssembledOperators) -> float:
    """Dense generalized eigensolve of ``K v = lambda M v``; for small meshes only."""
    if ops.n_pressure == 0:
        return 0.0
    R = ops.R.toarray()
    Binv = np.concatenate([1.0 / ops.B, 1.0 / ops.B])
    K = (R * Binv) @ R.T
    return float(scipy.linalg.eigh(K, np.diag(ops.M), eigvals_only=True)[-1])


def mu_max_dense(ops: AssembledOperators) -> float:
    if ops.n_pressure == 0:
        return 0.0
    R = ops.R.toarray()
    A = (R.T / ops.M) @ R
    Bfull = np.concatenate([ops.B, ops.B])
    return float(scipy.linalg.eigh(A, np.diag(Bfull), eigvals_only=True)[-1])


def dt_from_eigenvalue(lam: float) -> float:
    """Stable region of the leapfrog, dt < 2 / sqrt(lambda)."""
    return math.inf if lam <= 0 else 2.0 / math.sqrt(lam)


def spectral_bounds(ops: AssembledOperators, sigma: float = 0.0) -> dict[str, float]:
    """Spectral dt bounds for the fluid / scheme B and the scheme-A corner."""
    lam = lambda_max(ops)
    mu = mu_max(ops)
    return {
        "lambda_max": lam,
        "mu_max": mu,
        "dt_fluid": dt_from_eigenvalue(lam),
        "dt_scheme_b": dt_from_eigenvalue(mu),
        "dt_scheme_a": dt_from_eigenvalue(lam + sigma**2),
    }


@dataclass(frozen=True)
class ProbeConfig:
    """How one empirical stability probe is run.

    ``steps=None`` runs ``crossing_factor`` domain-crossing times, capped at
    ``max_steps``.
    """

    source: RickerSpec = RickerSpec()
    steps: int | None = None
    max_steps: int = 1000
    crossing_factor: float = 4.0
    threshold_factor: float = 10.0
    window: int = 50
    mu: float = 1.0
    rho: float = 1.0

    @property
    def c(self) -> float:
        return math.sqrt(self.mu / self.rho)

    def n_steps(self, ops: AssembledOperators, dt: float) -> int:
        if self.steps is not None:
            return self.steps
        m = ops.mesh
        crossing = max(m.x_max - m.x_min, m.y_max - m.y_min) / self.c
        return min(self.max_steps, math.ceil(self.crossing_factor * crossing / dt))


def probe(ops: AssembledOperators, scheme: Scheme | str, dt: float, config: ProbeConfig = ProbeConfig()) -> Verdict:
    state = init_state(ops, config.source, dt)
    result = run(ops, state, scheme, config.n_steps(ops, dt),
                 threshold_factor=config.threshold_factor, window=config.window)
    return result.verdict.verdict


@dataclass
class BisectionResult:
    dt_boundary: float
    probes: list[tuple[float, Verdict]] = field(default_factory=list)


class AllProbesUnstableError(RuntimeError):
    pass


def bisect_dt(
    ops: AssembledOperators,
    scheme: Scheme | str,
    dt_high: float,
    width: float,
    config: ProbeConfig = ProbeConfig(),
) -> BisectionResult:
    """Largest stable dt in ``(0, dt_high]`` to within ``width``."""
    out = BisectionResult(dt_boundary=0.0)
    verdict = probe(ops, scheme, dt_high, config)
    out.probes.append((dt_high, verdict))
    if verdict is Verdict.STABLE:
        out.dt_boundary = dt_high
        return out
    lo, hi = 0.0, dt_high
    while hi - lo >= width:
        mid = 0.5 * (lo + hi)
        verdict = probe(ops, scheme, mid, config)
        out.probes.append((mid, verdict))
        if verdict is Verdict.STABLE:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise AllProbesUnstableError(f"every probe down to dt={hi:.3e} was unstable")
    out.dt_boundary = lo
    return out


def empirical_cfl(
    scheme: Scheme | str,
    profile: DampingProfile | None,
    r: int,
    h: float,
    config: ProbeConfig = ProbeConfig(),
    domain: tuple[float, float, float, float] | None = None,
    ops: AssembledOperators | None = None,
) -> BisectionResult:
    """Bisect on dt between 0 and twice the fluid bound until the bracket is below 1e-3 h/c.

    Without a profile the run is undamped over ``domain``. Pass ``ops`` to
    reuse an existing assembly.
    """
    if ops is None:
        if profile is not None:
            domain = profile.computational_domain
            sx, sy = profile.sigma_x, profile.sigma_y
        else:
            if domain is None:
                raise ValueError("an undamped probe needs an explicit domain")
            sx = sy = 0.0
        ops = build_operators(domain, h, r, config.mu, config.rho, sx, sy)
    c = config.c
    try:
        upper = 2.0 * cfl_fluid_theoretical(r, c, h)
    except UntabulatedDegreeError:
        upper = 2.0 * dt_from_eigenvalue(lambda_max(ops))
    return bisect_dt(ops, scheme, upper, 1e-3 * h / c, config)


@dataclass(frozen=True)
class CflReport:
    scheme: Scheme
    r: int
    h: float
    c: float
    sigma: float
    dt_theoretical: float | None
    dt_spectral: float
    dt_empirical: float | None
    cfl_constants: dict[int, float] = field(default_factory=lambda: dict(CFL_1D))


def cfl_report(
    scheme: Scheme | str,
    ops: AssembledOperators,
    r: int,
    h: float,
    sigma: float,
    c: float = 1.0,
    dt_empirical: float | None = None,
) -> CflReport:
    """Theoretical and spectral bounds for ``scheme`` on ``ops``.

    For scheme A the bounds are the constant-sigma corner ones; for the fluid
    and scheme B they are the fluid bounds.
    """
    scheme = Scheme(scheme)
    lam = lambda_max(ops)
    try:
        if scheme is Scheme.A:
            theo = cfl_corner_scheme_a(r, c, h, sigma)
        else:
            theo = cfl_fluid_theoretical(r, c, h)
    except UntabulatedDegreeError:
        theo = None
    if scheme is Scheme.A:
        spec = dt_from_eigenvalue(lam + sigma**2)
    elif scheme is Scheme.B:
        spec = dt_from_eigenvalue(mu_max(ops))
    else:
        spec = dt_from_eigenvalue(lam)
    return CflReport(scheme, r, h, c, sigma, theo, spec, dt_empirical)

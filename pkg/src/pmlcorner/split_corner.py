"""Corner model dU/dt + sigma U = Ax dU/dx + Ay dU/dy on a periodic grid.

With equal constant damping in both directions the split PML equations add
up to this single damped system, and its solution factorizes as
U(t) = exp(-sigma t) W(t) with W solving the undamped system. W is advanced
with the exact propagator of the centred-difference semi-discretization,
which is unitary mode by mode, so the reported norm follows exp(-sigma t)
up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-14


@dataclass(frozen=True)
class HyperbolicSystem:
    Ax: np.ndarray
    Ay: np.ndarray
    sigma: float = 0.0

    def __post_init__(self):
        Ax = np.asarray(self.Ax, dtype=float)
        Ay = np.asarray(self.Ay, dtype=float)
        if Ax.ndim != 2 or Ax.shape[0] != Ax.shape[1] or Ax.shape != Ay.shape:
            raise ValueError("Ax and Ay must be square matrices of the same size")
        for name, A in (("Ax", Ax), ("Ay", Ay)):
            if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(A))):
                raise ValueError(f"{name} is not symmetric")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        object.__setattr__(self, "Ax", Ax)
        object.__setattr__(self, "Ay", Ay)

    @property
    def m(self) -> int:
        return self.Ax.shape[0]


def acoustic_system(sigma: float = 0.0, mu: float = 1.0, rho: float = 1.0) -> HyperbolicSystem:
    """(P, Vx, Vy) acoustics in symmetrized variables (P/sqrt(mu), sqrt(rho) V)."""
    c = np.sqrt(mu / rho)
    Ax = np.zeros((3, 3))
    Ay = np.zeros((3, 3))
    Ax[0, 1] = Ax[1, 0] = c
    Ay[0, 2] = Ay[2, 0] = c
    return HyperbolicSystem(Ax, Ay, sigma)


@dataclass(frozen=True)
class PeriodicGrid:
    n: int
    length: float = 1.0

    @property
    def h(self) -> float:
        return self.length / self.n

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.arange(self.n) * self.h
        return np.meshgrid(s, s, indexing="xy")


@dataclass
class CornerSeries:
    times: np.ndarray
    norms: np.ndarray
    final: np.ndarray


def l2_norm(U: np.ndarray, grid: PeriodicGrid) -> float:
    return float(np.sqrt(grid.h**2 * np.sum(U**2)))


def _propagator(system: HyperbolicSystem, grid: PeriodicGrid, dt: float) -> np.ndarray:
    # Centred differences have symbol i sin(k h)/h; the one-step propagator of
    # each Fourier mode is exp(i dt H(k)) with H(k) real symmetric.
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    sx = np.sin(k * grid.h) / grid.h
    SX, SY = np.meshgrid(sx, sx, indexing="xy")
    H = SX[..., None, None] * system.Ax + SY[..., None, None] * system.Ay
    w, Q = np.linalg.eigh(H)
    phase = np.exp(1j * dt * w)
    return np.einsum("...ij,...j,...kj->...ik", Q, phase, Q)


def simulate_corner(
    system: HyperbolicSystem,
    grid: PeriodicGrid,
    U0: np.ndarray,
    dt: float,
    T: float | None = None,
    steps: int | None = None,
) -> CornerSeries:
    """Integrate from ``U0`` (shape ``(m, n, n)``) and record the discrete L2 norm.

    Give either the final time ``T`` (rounded to a whole number of steps) or
    the number of ``steps``.
    """
    U0 = np.asarray(U0, dtype=float)
    if U0.shape != (system.m, grid.n, grid.n):
        raise ValueError(f"initial state must have shape {(system.m, grid.n, grid.n)}, got {U0.shape}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps is None:
        if T is None:
            raise ValueError("give T or steps")
        steps = int(round(T / dt))
    G = _propagator(system, grid, dt)
    What = np.fft.fft2(U0, axes=(1, 2))
    What = np.moveaxis(What, 0, -1)  # (n, n, m)
    w_norm0 = l2_norm(U0, grid)
    times = np.arange(steps + 1) * dt
    norms = np.empty(steps + 1)
    norms[0] = w_norm0
    for k in range(1, steps + 1):
        What = np.einsum("...ij,...j->...i", G, What)
        # Parseval: sum |U|^2 = sum |U_hat|^2 / n^2
        w_norm = np.sqrt(grid.h**2 * np.sum(np.abs(What) ** 2) / grid.n**2)
        norms[k] = np.exp(-system.sigma * times[k]) * w_norm
    W = np.real(np.fft.ifft2(np.moveaxis(What, -1, 0), axes=(1, 2)))
    final = np.exp(-system.sigma * times[-1]) * W
    return CornerSeries(times=times, norms=norms, final=final)


def strong_stability_check(series: CornerSeries, C: float = 1.0) -> bool:
    """True iff every recorded norm is within ``C`` times the initial norm."""
    return bool(np.all(series.norms <= C * series.norms[0]))


def gaussian_initial_state(system: HyperbolicSystem, grid: PeriodicGrid, width: float = 0.1) -> np.ndarray:
    """Gaussian bump in the first component centred in the box, zeros elsewhere."""
    X, Y = grid.coordinates()
    c = grid.length / 2
    U0 = np.zeros((system.m, grid.n, grid.n))
    U0[0] = np.exp(-((X - c) ** 2 + (Y - c) ** 2) / (2 * width**2))
    return U0

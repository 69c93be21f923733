"""Uniform rectangular meshes and lumped Qr - Qr^disc operator assembly.

Pressure lives in the continuous Qr space with homogeneous Dirichlet
condition on the outer boundary; each velocity component lives in the
discontinuous Qr space with one set of Gauss-Lobatto nodes per element.
All integrals use the Gauss-Lobatto rule, so the mass matrices are
diagonal and stored as vectors.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .gll import QuadratureRule, gll_rule

Field = float | Callable[[np.ndarray, np.ndarray], np.ndarray]
Profile1D = float | Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Mesh:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def jacobian(self) -> float:
        return self.hx * self.hy


def build_mesh(domain: tuple[float, float, float, float], h: float) -> Mesh:
    """Partition ``domain = (x_min, x_max, y_min, y_max)`` into squares of size ~h.

    Element counts are rounded to the nearest integer; ``hx`` and ``hy`` are
    then recomputed exactly from the counts.
    """
    x_min, x_max, y_min, y_max = map(float, domain)
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"empty or inverted rectangle {domain!r}")
    if h <= 0:
        raise ValueError(f"element size must be positive, got {h}")
    nx = max(1, int(round((x_max - x_min) / h)))
    ny = max(1, int(round((y_max - y_min) / h)))
    return Mesh(x_min, x_max, y_min, y_max, nx, ny)


@dataclass(frozen=True)
class DofMaps:
    """Degree-of-freedom numbering for the pressure and velocity spaces.

    Pressure nodes form the global (r*nx+1) x (r*ny+1) lattice, numbered
    row-major with x fastest. ``free`` lists the lattice indices that are not
    on the outer boundary; pressure vectors used by the solver only carry
    those entries. Velocity nodes are numbered element by element, then
    (b, a) within the element with a (the x index) fastest.
    """

    mesh: Mesh
    r: int
    pressure_x: np.ndarray
    pressure_y: np.ndarray
    dirichlet: np.ndarray
    free: np.ndarray
    velocity_x: np.ndarray
    velocity_y: np.ndarray
    element_pressure: np.ndarray

    @property
    def lattice_shape(self) -> tuple[int, int]:
        """(rows, cols) = (r*ny+1, r*nx+1)."""
        return (self.r * self.mesh.ny + 1, self.r * self.mesh.nx + 1)

    @property
    def n_pressure_total(self) -> int:
        return len(self.pressure_x)

    @property
    def n_pressure(self) -> int:
        return len(self.free)

    @property
    def n_velocity(self) -> int:
        return len(self.velocity_x)

    def free_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return self.pressure_x[self.free], self.pressure_y[self.free]

    def to_lattice(self, p_free: np.ndarray) -> np.ndarray:
        """Scatter a free-dof pressure vector onto the full nodal lattice."""
        full = np.zeros(self.n_pressure_total, dtype=np.result_type(p_free, float))
        full[self.free] = p_free
        return full.reshape(self.lattice_shape)


def build_spaces(mesh: Mesh, r: int) -> DofMaps:
    rule = gll_rule(r)
    xi = rule.points
    ncol = r * mesh.nx + 1
    nrow = r * mesh.ny + 1

    # Lattice coordinates: element offset + reference node, exact at shared nodes.
    lat_x = np.empty(ncol)
    lat_y = np.empty(nrow)
    for e in range(mesh.nx):
        lat_x[e * r : e * r + r + 1] = mesh.x_min + (e + xi) * mesh.hx
    for e in range(mesh.ny):
        lat_y[e * r : e * r + r + 1] = mesh.y_min + (e + xi) * mesh.hy
    lat_x[-1], lat_y[-1] = mesh.x_max, mesh.y_max
    px, py = np.meshgrid(lat_x, lat_y)
    px, py = px.ravel(), py.ravel()

    ii, jj = np.meshgrid(np.arange(ncol), np.arange(nrow))
    on_boundary = (ii == 0) | (ii == ncol - 1) | (jj == 0) | (jj == nrow - 1)
    on_boundary = on_boundary.ravel()

    # element_pressure[e, b, a] = lattice index of local node (a, b) of element e
    n = r + 1
    ex, ey = np.meshgrid(np.arange(mesh.nx), np.arange(mesh.ny))
    ex, ey = ex.ravel(), ey.ravel()
    la = np.arange(n)
    cols = ex[:, None, None] * r + la[None, None, :]
    rows = ey[:, None, None] * r + la[None, :, None]
    element_pressure = rows * ncol + cols

    vx = (mesh.x_min + (ex[:, None, None] + xi[None, None, :]) * mesh.hx) * np.ones((1, n, 1))
    vy = (mesh.y_min + (ey[:, None, None] + xi[None, :, None]) * mesh.hy) * np.ones((1, 1, n))

    return DofMaps(
        mesh=mesh,
        r=r,
        pressure_x=px,
        pressure_y=py,
        dirichlet=np.flatnonzero(on_boundary),
        free=np.flatnonzero(~on_boundary),
        velocity_x=vx.ravel(),
        velocity_y=vy.ravel(),
        element_pressure=element_pressure,
    )


def _nodal(field: Field, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if callable(field):
        return np.broadcast_to(np.asarray(field(x, y), dtype=float), x.shape).copy()
    return np.full(x.shape, float(field))


def _nodal_1d(profile: Profile1D, coord: np.ndarray) -> np.ndarray:
    if callable(profile):
        return np.broadcast_to(np.asarray(profile(coord), dtype=float), coord.shape).copy()
    return np.full(coord.shape, float(profile))


@dataclass(frozen=True)
class AssembledOperators:
    """Lumped mass vectors, gradient matrices and nodal damping samples.

    ``M`` (pressure) and ``B`` (per velocity component) are the diagonals of
    the lumped mass matrices. Damping fields are sampled at the nodes:
    ``sx_p``, ``sy_p`` at free pressure dofs and ``sx_v``, ``sy_v`` at
    velocity dofs. ``Rx`` and ``Ry`` map velocity to free pressure dofs.
    """

    mesh: Mesh
    dofs: DofMaps
    rule: QuadratureRule
    M: np.ndarray
    B: np.ndarray
    Rx: sp.csr_matrix
    Ry: sp.csr_matrix
    RxT: sp.csr_matrix
    RyT: sp.csr_matrix
    sx_p: np.ndarray
    sy_p: np.ndarray
    sx_v: np.ndarray
    sy_v: np.ndarray

    @property
    def n_pressure(self) -> int:
        return len(self.M)

    @property
    def n_velocity(self) -> int:
        return len(self.B)

    @property
    def M_sigma_sum(self) -> np.ndarray:
        return self.mass_weighted(self.sx_p + self.sy_p)

    @property
    def M_sigma_prod(self) -> np.ndarray:
        return self.mass_weighted(self.sx_p * self.sy_p)

    @property
    def B_sigma_x(self) -> np.ndarray:
        return self.velocity_mass_weighted(self.sx_v)

    @property
    def B_sigma_y(self) -> np.ndarray:
        return self.velocity_mass_weighted(self.sy_v)

    @property
    def R(self) -> sp.csr_matrix:
        """R = [Rx Ry], shape (N_P, 2 N_V)."""
        return sp.hstack([self.Rx, self.Ry], format="csr")

    @property
    def is_undamped(self) -> bool:
        return not (np.any(self.sx_p) or np.any(self.sy_p) or np.any(self.sx_v) or np.any(self.sy_v))

    def mass_weighted(self, nu: np.ndarray) -> np.ndarray:
        return self.M * nu

    def velocity_mass_weighted(self, nu: np.ndarray) -> np.ndarray:
        return self.B * nu

    def with_damping(self, sigma_x: Profile1D, sigma_y: Profile1D) -> AssembledOperators:
        """Same mesh and matrices, new damping samples (gradients are reused)."""
        px, py = self.dofs.free_coordinates()
        return AssembledOperators(
            mesh=self.mesh, dofs=self.dofs, rule=self.rule, M=self.M, B=self.B,
            Rx=self.Rx, Ry=self.Ry, RxT=self.RxT, RyT=self.RyT,
            sx_p=_nodal_1d(sigma_x, px), sy_p=_nodal_1d(sigma_y, py),
            sx_v=_nodal_1d(sigma_x, self.dofs.velocity_x),
            sy_v=_nodal_1d(sigma_y, self.dofs.velocity_y),
        )


def gradient_blocks(rule: QuadratureRule, hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
    """Element gradient blocks in local (pressure, velocity) numbering.

    ``Gx[(b', a'), (b, a)] = (d/dx phi_{a'b'}, psi_{ab})`` evaluated with the
    tensor Gauss-Lobatto rule, i.e. ``w_a w_b hy D[a, a'] delta(b, b')``.
    """
    n = rule.n_points
    w, D = rule.weights, rule.deriv_matrix
    eye = np.eye(n)
    wab = np.outer(w, w)  # [b, a]
    # Gx[b', a', b, a] = delta(b,b') D[a, a'] w_a w_b hy
    Gx = np.einsum("pb,aq,ba->pqba", eye, D, wab) * hy
    # Gy[b', a', b, a] = delta(a,a') D[b, b'] w_a w_b hx
    Gy = np.einsum("qa,bp,ba->pqba", eye, D, wab) * hx
    return Gx.reshape(n * n, n * n), Gy.reshape(n * n, n * n)


def lumped_mass_lattice(dofs: DofMaps, rule: QuadratureRule, mu: Field | np.ndarray = 1.0) -> np.ndarray:
    """Lumped 1/mu-weighted pressure mass on every lattice node, Dirichlet ones included.

    ``mu`` may be given already sampled at the velocity (element-local) nodes.
    """
    mesh = dofs.mesh
    if isinstance(mu, np.ndarray):
        mu_v = mu
    else:
        mu_v = _nodal(mu, dofs.velocity_x, dofs.velocity_y)
    wab = np.outer(rule.weights, rule.weights).ravel()
    # Element-local pressure nodes coincide with the velocity nodes.
    local_mass = np.tile(wab * mesh.jacobian, mesh.n_elements) / mu_v
    return np.bincount(dofs.element_pressure.ravel(), weights=local_mass,
                       minlength=dofs.n_pressure_total)


def assemble(
    mesh: Mesh,
    dofs: DofMaps,
    rule: QuadratureRule,
    mu: Field = 1.0,
    rho: Field = 1.0,
    sigma_x: Profile1D = 0.0,
    sigma_y: Profile1D = 0.0,
) -> AssembledOperators:
    """Assemble all lumped operators over ``mesh``.

    ``mu`` and ``rho`` may be constants or callables ``f(x, y)``; the damping
    profiles may be constants or callables of one coordinate.
    """
    if rule.degree != dofs.r:
        raise ValueError("quadrature degree does not match the space degree")
    n = rule.n_points
    ne = mesh.n_elements
    jac = mesh.jacobian
    wab = np.outer(rule.weights, rule.weights).ravel()  # local (b, a) order

    mu_v = _nodal(mu, dofs.velocity_x, dofs.velocity_y)
    rho_v = _nodal(rho, dofs.velocity_x, dofs.velocity_y)
    if np.any(~np.isfinite(mu_v)) or np.any(mu_v <= 0):
        raise ValueError("bulk modulus mu must be positive everywhere")
    if np.any(~np.isfinite(rho_v)) or np.any(rho_v <= 0):
        raise ValueError("density rho must be positive everywhere")

    M_full = lumped_mass_lattice(dofs, rule, mu_v)
    B = np.tile(wab * jac, ne) * rho_v

    Gx, Gy = gradient_blocks(rule, mesh.hx, mesh.hy)
    free_index = -np.ones(dofs.n_pressure_total, dtype=np.int64)
    free_index[dofs.free] = np.arange(dofs.n_pressure)

    def _global(G: np.ndarray) -> sp.csr_matrix:
        nloc = n * n
        prow = dofs.element_pressure.reshape(ne, nloc)  # lattice index per local pressure node
        rows = np.repeat(free_index[prow][:, :, None], nloc, axis=2)
        cols = np.broadcast_to(
            (np.arange(ne)[:, None] * nloc + np.arange(nloc)[None, :])[:, None, :], rows.shape
        )
        vals = np.broadcast_to(G[None, :, :], rows.shape)
        keep = (rows >= 0) & (vals != 0.0)
        return sp.csr_matrix(
            (vals[keep], (rows[keep], cols[keep])), shape=(dofs.n_pressure, ne * nloc)
        )

    Rx = _global(Gx)
    Ry = _global(Gy)
    px, py = dofs.free_coordinates()
    ops = AssembledOperators(
        mesh=mesh, dofs=dofs, rule=rule, M=M_full[dofs.free], B=B,
        Rx=Rx, Ry=Ry, RxT=Rx.T.tocsr(), RyT=Ry.T.tocsr(),
        sx_p=_nodal_1d(sigma_x, px), sy_p=_nodal_1d(sigma_y, py),
        sx_v=_nodal_1d(sigma_x, dofs.velocity_x), sy_v=_nodal_1d(sigma_y, dofs.velocity_y),
    )
    if np.any(ops.sx_p < 0) or np.any(ops.sy_p < 0):
        raise ValueError("damping must be nonnegative")
    return ops


def apply_gradient(ops: AssembledOperators, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Rx^T P, Ry^T P)``, the right-hand sides of the velocity updates."""
    P = np.asarray(P)
    if P.shape != (ops.n_pressure,):
        raise ValueError(f"pressure vector must have shape ({ops.n_pressure},), got {P.shape}")
    return ops.RxT @ P, ops.RyT @ P


def apply_divergence(ops: AssembledOperators, Vx: np.ndarray, Vy: np.ndarray) -> np.ndarray:
    """Return ``Rx Vx + Ry Vy``."""
    Vx, Vy = np.asarray(Vx), np.asarray(Vy)
    if Vx.shape != (ops.n_velocity,) or Vy.shape != (ops.n_velocity,):
        raise ValueError(f"velocity vectors must have shape ({ops.n_velocity},)")
    return ops.Rx @ Vx + ops.Ry @ Vy


def build_operators(
    domain: tuple[float, float, float, float],
    h: float,
    r: int,
    mu: Field = 1.0,
    rho: Field = 1.0,
    sigma_x: Profile1D = 0.0,
    sigma_y: Profile1D = 0.0,
) -> AssembledOperators:
    """Mesh, spaces and assembly in one call."""
    mesh = build_mesh(domain, h)
    dofs = build_spaces(mesh, r)
    return assemble(mesh, dofs, gll_rule(r), mu, rho, sigma_x, sigma_y)

import numpy as np
import pytest

from pmlcorner.assembly import (
    apply_divergence,
    apply_gradient,
    assemble,
    build_mesh,
    build_operators,
    build_spaces,
    lumped_mass_lattice,
)
from pmlcorner.damping import make_profile
from pmlcorner.gll import gll_rule

from oracles import dense_assembly, gauss_rule


# ---------------------------------------------------------------- mesh and spaces
@pytest.mark.parametrize(
    "domain,h,expected",
    [((-2, 20, -2, 20), 0.5, (44, 44)), ((0, 1, 0, 1), 1.0, (1, 1)), ((0, 1, 0, 2), 0.5, (2, 4))],
)
def test_build_mesh_counts(domain, h, expected):
    mesh = build_mesh(domain, h)
    assert (mesh.nx, mesh.ny) == expected
    assert mesh.hx == pytest.approx(h) and mesh.hy == pytest.approx(h)


def test_build_mesh_rounds_counts():
    mesh = build_mesh((0, 1, 0, 1), 0.3)
    assert mesh.nx == 3
    assert mesh.hx == pytest.approx(1 / 3)


@pytest.mark.parametrize("domain", [(0, 0, 0, 1), (1, 0, 0, 1), (0, 1, 2, 1)])
def test_build_mesh_rejects_bad_rectangles(domain):
    with pytest.raises(ValueError):
        build_mesh(domain, 0.1)


@pytest.mark.parametrize(
    "n_el,r,np_total,n_free,nv",
    [(1, 1, 4, 0, 4), (2, 1, 9, 1, 16), (2, 5, 121, 81, 144)],
)
def test_space_counts(n_el, r, np_total, n_free, nv):
    dofs = build_spaces(build_mesh((0, n_el, 0, n_el), 1.0), r)
    assert dofs.n_pressure_total == np_total == (r * n_el + 1) ** 2
    assert dofs.n_pressure == n_free
    assert len(dofs.dirichlet) == np_total - n_free
    assert dofs.n_velocity == nv == n_el * n_el * (r + 1) ** 2


def test_velocity_dofs_are_not_shared():
    dofs = build_spaces(build_mesh((0, 2, 0, 2), 1.0), 2)
    # Element-local nodes on a shared edge have equal coordinates but distinct indices.
    coords = np.stack([dofs.velocity_x, dofs.velocity_y], axis=1)
    _, counts = np.unique(coords, axis=0, return_counts=True)
    assert counts.max() == 4  # interior vertex touched by four elements
    assert dofs.n_velocity == len(coords)


# ---------------------------------------------------------------- lumped masses
def test_interior_mass_is_four_quarter_cells():
    ops = build_operators((0, 3, 0, 3), 1.0, 1)
    np.testing.assert_allclose(ops.M, 1.0, rtol=1e-15)
    ops = build_operators((0, 1.5, 0, 1.5), 0.5, 1)
    np.testing.assert_allclose(ops.M, 0.25, rtol=1e-15)


@pytest.mark.parametrize("r,mu", [(1, 1.0), (3, 2.5), (5, 0.5)])
def test_total_mass_is_area_over_mu(r, mu):
    mesh = build_mesh((-1, 3, 0, 2), 0.5)
    dofs = build_spaces(mesh, r)
    total = lumped_mass_lattice(dofs, gll_rule(r), mu).sum()
    assert total == pytest.approx(8.0 / mu, rel=1e-13)


def test_masses_are_positive():
    ops = build_operators((0, 3, 0, 2), 0.5, 3, mu=2.0, rho=3.0)
    assert np.all(ops.M > 0) and np.all(ops.B > 0)
    assert ops.M.ndim == 1 and ops.B.ndim == 1


def test_zero_damping_gives_zero_weighted_masses():
    ops = build_operators((0, 2, 0, 2), 0.5, 2)
    assert not np.any(ops.M_sigma_sum) and not np.any(ops.M_sigma_prod)
    assert not np.any(ops.B_sigma_x) and not np.any(ops.B_sigma_y)
    assert ops.is_undamped


def test_weighted_masses_follow_nodal_damping():
    prof = make_profile("constant", 3.0, (0, 2, 0, 2), 1.0)
    ops = build_operators(prof.computational_domain, 0.5, 1, sigma_x=prof.sigma_x, sigma_y=prof.sigma_y)
    np.testing.assert_allclose(ops.M_sigma_sum, ops.M * (ops.sx_p + ops.sy_p))
    np.testing.assert_allclose(ops.M_sigma_prod, ops.M * ops.sx_p * ops.sy_p)
    assert set(np.unique(ops.sx_p)) == {0.0, 3.0}
    assert np.all(ops.M_sigma_prod >= 0)


@pytest.mark.parametrize("bad", [{"mu": 0.0}, {"rho": -1.0}, {"mu": lambda x, y: x - 1.0}])
def test_assemble_rejects_nonpositive_coefficients(bad):
    with pytest.raises(ValueError):
        build_operators((0, 2, 0, 2), 0.5, 1, **bad)


# ---------------------------------------------------------------- dense oracle equivalence
SMALL = [((0, 2, 0, 2), 1.0, 1), ((0, 3, 0, 2), 1.0, 2), ((0, 1, 0, 1), 0.25, 1),
         ((0, 1.5, 0, 1.5), 0.5, 3), ((-1, 1, 0, 1), 0.5, 2)]


@pytest.mark.parametrize("domain,h,r", SMALL)
def test_lumped_mass_equals_row_sum_of_exact_mass(domain, h, r):
    mu, rho = 2.0, 0.5
    mesh = build_mesh(domain, h)
    dofs = build_spaces(mesh, r)
    ops = assemble(mesh, dofs, gll_rule(r), mu=mu, rho=rho)
    qx, qw = gauss_rule(r + 3)  # exact to degree 2r + 5
    M, B, _, _ = dense_assembly(mesh, r, qx, qw, mu=mu, rho=rho)
    np.testing.assert_allclose(lumped_mass_lattice(dofs, gll_rule(r), mu), M.sum(axis=1), rtol=1e-12)
    np.testing.assert_allclose(ops.M, M.sum(axis=1)[dofs.free], rtol=1e-12)
    np.testing.assert_allclose(ops.B, B.sum(axis=1), rtol=1e-12)


@pytest.mark.parametrize("domain,h,r", SMALL)
def test_gradients_equal_brute_force_lobatto_assembly(domain, h, r):
    mesh = build_mesh(domain, h)
    dofs = build_spaces(mesh, r)
    ops = assemble(mesh, dofs, gll_rule(r))
    q = gll_rule(r)
    _, B, Rx, Ry = dense_assembly(mesh, r, q.points, q.weights)
    scale = np.abs(Rx).max()
    np.testing.assert_allclose(ops.Rx.toarray(), Rx[dofs.free], atol=1e-12 * scale)
    np.testing.assert_allclose(ops.Ry.toarray(), Ry[dofs.free], atol=1e-12 * scale)
    np.testing.assert_allclose(np.diag(B), ops.B, rtol=1e-12)
    np.testing.assert_allclose(B - np.diag(np.diag(B)), 0.0, atol=1e-14)


@pytest.mark.parametrize("domain,h,r", SMALL)
def test_gradients_equal_exact_assembly_after_transverse_lumping(domain, h, r):
    mesh = build_mesh(domain, h)
    dofs = build_spaces(mesh, r)
    ops = assemble(mesh, dofs, gll_rule(r))
    qx, qw = gauss_rule(r + 3)
    _, _, Rx, Ry = dense_assembly(mesh, r, qx, qw)
    n, ne = r + 1, mesh.n_elements
    # velocity index (e, b, a): Rx lumps over b, Ry over a.
    shape = (-1, ne, n, n)
    rx_exact = Rx[dofs.free].reshape(shape).sum(axis=2)
    ry_exact = Ry[dofs.free].reshape(shape).sum(axis=3)
    rx = ops.Rx.toarray().reshape(shape).sum(axis=2)
    ry = ops.Ry.toarray().reshape(shape).sum(axis=3)
    scale = np.abs(Rx).max()
    np.testing.assert_allclose(rx, rx_exact, atol=1e-12 * scale)
    np.testing.assert_allclose(ry, ry_exact, atol=1e-12 * scale)


def test_gradient_independent_of_material_and_damping():
    base = build_operators((0, 3, 0, 3), 0.5, 2)
    other = build_operators((0, 3, 0, 3), 0.5, 2, mu=lambda x, y: 1 + x, rho=4.0,
                            sigma_x=lambda x: x, sigma_y=2.0)
    assert (base.Rx != other.Rx).nnz == 0
    assert (base.Ry != other.Ry).nnz == 0


def test_uniform_mesh_element_blocks_identical():
    ops = build_operators((0, 5, 0, 5), 1.0, 2)
    dofs = ops.dofs
    n = 3
    full = np.zeros((dofs.n_pressure_total, ops.n_velocity))
    full[dofs.free] = ops.Rx.toarray()
    blocks = []
    for e in range(ops.mesh.n_elements):
        ex, ey = e % 5, e // 5
        if ex in (0, 4) or ey in (0, 4):
            continue  # blocks touching the boundary lose their Dirichlet rows
        rows = dofs.element_pressure[e].ravel()
        blocks.append(full[np.ix_(rows, np.arange(e * n * n, (e + 1) * n * n))])
    for blk in blocks[1:]:
        np.testing.assert_array_equal(blk, blocks[0])


# ---------------------------------------------------------------- gradient actions
def test_zero_pressure_gives_zero_gradient():
    ops = build_operators((0, 2, 0, 2), 0.5, 2)
    gx, gy = apply_gradient(ops, np.zeros(ops.n_pressure))
    assert not np.any(gx) and not np.any(gy)


def test_linear_pressure_gradient_in_interior_element():
    ops = build_operators((0, 3, 0, 3), 1.0, 1)
    px, py = ops.dofs.free_coordinates()
    slope_x, slope_y = 0.7, -1.3
    P = slope_x * px + slope_y * py + 0.2
    gx, gy = apply_gradient(ops, P)
    centre = 4  # element (1, 1), all of whose pressure nodes are free
    sl = slice(centre * 4, centre * 4 + 4)
    np.testing.assert_allclose(gx[sl], slope_x * ops.B[sl], rtol=1e-13)
    np.testing.assert_allclose(gy[sl], slope_y * ops.B[sl], rtol=1e-13)


def test_gradient_and_divergence_are_adjoint(rng):
    ops = build_operators((0, 2, 0, 3), 0.5, 3)
    P = rng.standard_normal(ops.n_pressure)
    Vx, Vy = rng.standard_normal((2, ops.n_velocity))
    gx, gy = apply_gradient(ops, P)
    lhs = gx @ Vx + gy @ Vy
    rhs = P @ apply_divergence(ops, Vx, Vy)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gradient_shape_mismatch():
    ops = build_operators((0, 2, 0, 2), 0.5, 1)
    with pytest.raises(ValueError):
        apply_gradient(ops, np.zeros(ops.n_pressure + 1))
    with pytest.raises(ValueError):
        apply_divergence(ops, np.zeros(3), np.zeros(3))

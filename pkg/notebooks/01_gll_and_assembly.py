"""
Gauss-Lobatto points and the lumped operators
=============================================

Builds the quadrature rule, then assembles the diagonal masses and the
sparse gradient on a small mesh and looks at what comes out.
"""

# %%
import numpy as np

from pmlcorner import build_operators, gll_rule

# %% The r = 5 rule on [0, 1]: six points, both endpoints included.
q = gll_rule(5)
print("points ", np.round(q.points, 6))
print("weights", np.round(q.weights, 6))

# It integrates x^9 exactly but not x^10.
for k in (9, 10):
    print(f"x^{k}: quadrature {q.integrate(q.points**k):.15f}  exact {1 / (k + 1):.15f}")

# %% Operators on a 4 x 4 mesh of unit squares with r = 2.
ops = build_operators((0, 4, 0, 4), 1.0, 2)
print("free pressure dofs", ops.n_pressure, " velocity dofs", ops.n_velocity)
print("M is a vector:", ops.M.shape, " B is a vector:", ops.B.shape)
print("Rx nonzeros per row", ops.Rx.nnz / ops.Rx.shape[0])

# %% The discrete gradient of a linear pressure is exact: Rx^T P = slope * B
# on every element whose pressure nodes are all free.
px, py = ops.dofs.free_coordinates()
gx = ops.RxT @ (3.0 * px - py)
centre = 5  # element (1, 1)
sl = slice(centre * 9, centre * 9 + 9)
print("gradient / B on an interior element:", np.round(gx[sl] / ops.B[sl], 12))

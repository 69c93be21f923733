"""
Three views of the time-step limit
==================================

Closed-form bounds, the largest generalized eigenvalue, and the empirical
boundary found by bisection, for scheme A and scheme B with sigma = 25.
"""

# %%
import math

from pmlcorner import build_operators, make_profile
from pmlcorner.stability import (
    cfl_corner_scheme_a,
    cfl_fluid_theoretical,
    dt_from_eigenvalue,
    empirical_cfl,
    lambda_max,
    mu_max,
)

h, sigma = 0.5, 25.0
profile = make_profile("constant", sigma, (0, 18, 0, 18), 2.0)
ops = build_operators(profile.computational_domain, h, 1,
                      sigma_x=profile.sigma_x, sigma_y=profile.sigma_y)

# %% Closed forms.
print(f"fluid / scheme B  h/sqrt(2)         {cfl_fluid_theoretical(1, 1.0, h):.5f}")
print(f"scheme A corner                     {cfl_corner_scheme_a(1, 1.0, h, sigma):.5f}")

# %% Spectral: the two generalized eigenproblems share their largest eigenvalue.
lam, mu = lambda_max(ops), mu_max(ops)
print(f"lambda_max {lam:.10f}  mu_max {mu:.10f}")
print(f"2/sqrt(lambda)          {dt_from_eigenvalue(lam):.5f}")
print(f"2/sqrt(lambda+sigma^2)  {dt_from_eigenvalue(lam + sigma**2):.5f}")

# %% Empirical: bisection on dt, each probe a full simulation.
for scheme in ("A", "B"):
    res = empirical_cfl(scheme, profile, 1, h, ops=ops)
    print(f"scheme {scheme}: boundary {res.dt_boundary:.5f} after {len(res.probes)} probes")
    for dt, verdict in res.probes:
        print(f"    dt={dt:.5f}  {verdict.value}")

# %% Scheme A tightens with sigma; scheme B does not move.
print(" sigma   A theory   A empirical   B empirical")
for s in (1.0, 10.0, 25.0):
    p = make_profile("constant", s, (0, 18, 0, 18), 2.0)
    a = empirical_cfl("A", p, 1, h).dt_boundary
    b = empirical_cfl("B", p, 1, h).dt_boundary
    print(f"{s:6g}   {cfl_corner_scheme_a(1, 1.0, h, s):.5f}    {a:.5f}       {b:.5f}"
          f"   (h/sqrt2 = {h / math.sqrt(2):.5f})")

"""Boundary Riemann problems for the convex quadratic isotherm.

Run with ``python demos/riemann_tour.py``. A shock followed by a
rarefaction does not bring the velocity back to where it started; the
ratio is the amplification factor R.
"""

import numpy as np

from wavefront_psa import amplification, functions_for, make_model, solve_boundary_rp
from wavefront_psa.riemann import fan_state

fns = functions_for(make_model("inert-convex-quadratic", a=1.0, b=0.5))

# %% A high concentration pushed into a low one: an admissible shock
shock = solve_boundary_rp(fns, 0.8, 0.2, 1.0)
print("shock:", shock.to_dict())

# %% Going back down: a rarefaction fan whose states keep W = u G(c) fixed
fan = solve_boundary_rp(fns, 0.2, 0.8, shock.u0)
w = fan.wave
print(f"rarefaction: u0={fan.u0:.12f}, slopes z in [{w.z0:.6f}, {w.z_plus:.6f}]")
for z in np.linspace(w.z0, w.z_plus, 5):
    c, u = fan_state(fns, w, z)
    print(f"  z={z:.4f}  c={c:.6f}  u={u:.6f}  u*G(c)={u * fns.G(c):.12f}")

# %% One shock plus one rarefaction multiplies the boundary velocity by R
print(f"u after the pair: {fan.u0:.15f}")
print(f"R(0.2, 0.8):      {amplification(fns, 0.2, 0.8):.15f}")

# %% With linear isotherms (a Temple system) nothing accumulates
lin = functions_for(make_model("linear", a1=0.0, a2=1.0))
print(f"linear model R:   {amplification(lin, 0.2, 0.8):.15f}")

# %% [markdown]
# # Time stepping and conservation laws
#
# The integrating-factor RK4 treats the purely dispersive linear part
# exactly.  Along the nonlinear flow the mean and the L2 mass are
# conserved to near machine precision, and the energy with the
# quarter-exponent fractional term is conserved while the half-exponent
# variant visibly drifts: the conserved form is the one whose variational
# derivative reproduces the equation.

# %%
import warnings

import numpy as np

warnings.filterwarnings("ignore")

from fzklab.evolve import (
    SolverConfig, conserved_quantities, gaussian, linear_propagator, solve,
)
from fzklab.spectral import Grid, apply_multiplier

grid = Grid.square(2, 128, 12.0)
u0 = gaussian(grid, amplitude=0.8, width=1.0)
alpha = 1.5

# %% linear exactness
lin = solve(u0, SolverConfig(alpha=alpha, dt=1e-2, T=1.0, record_every=100,
                             nonlinear=False))
exact = apply_multiplier(linear_propagator(grid, alpha, 1.0), u0)
err = (lin.final().u - exact).l2_norm() / exact.l2_norm()
print(f"linear flow vs analytic propagator at T=1: {err:.2e}")

# %% nonlinear conservation over T = 0.5
traj = solve(u0, SolverConfig(alpha=alpha, dt=5e-4, T=0.5, record_every=100))
q0 = conserved_quantities(traj.snapshots[0].u, alpha)
qT = conserved_quantities(traj.final().u, alpha)
print(f"mean drift:                  {abs(qT.mean - q0.mean):.2e}")
print(f"mass drift (relative):       {abs(qT.mass - q0.mass) / q0.mass:.2e}")
print(f"energy drift, quarter form:  "
      f"{abs(qT.hamiltonian - q0.hamiltonian) / abs(q0.hamiltonian):.2e}")
print(f"energy drift, half form:     "
      f"{abs(qT.hamiltonian_printed - q0.hamiltonian_printed) / abs(q0.hamiltonian_printed):.2e}"
      "   <- not conserved by this flow")

# %% fourth-order self-convergence in dt
small = Grid.square(2, 32, 8.0)
u0s = gaussian(small, 1.0, 1.2)
ref = solve(u0s, SolverConfig(alpha=alpha, dt=0.00125, T=0.2,
                              record_every=1000)).final().u
errs = [
    (solve(u0s, SolverConfig(alpha=alpha, dt=dt, T=0.2,
                             record_every=1000)).final().u - ref).l2_norm()
    for dt in (0.01, 0.005)
]
print(f"Richardson order: {np.log2(errs[0] / errs[1]):.2f} (errors {errs[0]:.2e}, {errs[1]:.2e})")

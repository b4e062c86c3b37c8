# %% [markdown]
# # Local smoothing and propagation of one-sided regularity
#
# Two numerical experiments at reduced size (the full-size versions run in
# tests/test_acceptance.py):
#
# 1. the time-integrated weighted gain functional stays finite and
#    refinement-stable for smooth data, while the same functional one
#    derivative higher, over the rough side of a kink, grows under
#    refinement — the discrete signature of a gain of alpha/2 derivatives
#    but not more;
# 2. a Sobolev norm on a moving half space stays bounded while the window
#    expands into territory reached only by radiation from the rough side.

# %%
import warnings

warnings.filterwarnings("ignore")

from fzklab.evolve import SolverConfig, gaussian, one_sided_kink, solve
from fzklab.monitors import propagation_monitor, smoothing_integral
from fzklab.spectral import Field, Grid
from fzklab.weights import DirectionalWeight, PlateauProfile

alpha, L = 1.5, 16.0
weight = DirectionalWeight((1.0, 0.0), shift=-3.5,
                           profile=PlateauProfile(2.0, 1.0))


def kink_run(points, sigma):
    grid = Grid.square(2, points, L)
    bump = gaussian(grid, 0.5, 1.2, center=(10.0, 8.0))
    kink = one_sided_kink(grid, (1.0, 0.0), threshold=5.0,
                          smoothing_order=sigma, window_width=1.5)
    u0 = Field(grid, bump.values + 0.25 / kink.max_abs() * kink.values)
    dt = 8e-4 * 64 / points
    return solve(u0, SolverConfig(alpha=alpha, dt=dt, T=0.25,
                                  record_every=points // 8))


# %% smoothing functionals across one refinement (64^2 -> 128^2)
print("weighted gain functionals over the rough side (sigma = 1.6 kink):")
vals = {}
for pts in (64, 128):
    traj = kink_run(pts, sigma=1.6)
    at_s = smoothing_integral(traj, 2.0, alpha, weight).gain_term
    hi = smoothing_integral(traj, 3.0 - alpha / 2, alpha, weight).gain_term
    vals[pts] = (at_s, hi)
    print(f"  {pts:3d}^2: gain(J^2.75) = {at_s:8.4f}   gain(J^3) = {hi:8.4f}")
print(f"  growth: index s+a/2 -> x{vals[128][0] / vals[64][0]:.2f},"
      f"  index s+1 -> x{vals[128][1] / vals[64][1]:.2f}  (rough side grows)")

# %% propagation monitor on a milder kink (sigma = 2.4), moving window
print("\nmoving half-space monitor (omega = 1):")
for pts in (64, 128):
    traj = kink_run(pts, sigma=2.4)
    mon = propagation_monitor(traj, r=2.0, beta=6.0, eps=0.3, tau=1.5,
                              nu=(1.0, 0.0), omega=1.0, channel_index=3.0)
    print(f"  {pts:3d}^2: sup_t J^2-window = {mon.sup_half_space:8.4f}, "
          f"channel integral = {mon.channel_integral:.4f}")
print("  both stay bounded as the resolution doubles.")

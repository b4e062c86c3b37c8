# %% [markdown]
# # Weight families, regions, and the directional cone condition
#
# Localized estimates are driven by three ingredients: smooth cutoff
# families that form exact (quadratic) partitions of unity, moving
# half-spaces/channels, and an admissibility condition on the direction
# vector nu that fixes the smoothing constant lambda.

# %%
import numpy as np

from fzklab.weights import (
    ConeCondition, CutoffFamily, HalfSpace, UnitBox,
    check_cone, eps_midpoint, region_indicator, smoothing_lambda,
)

# %% the cutoff family at (eps, tau) = (1, 5)
fam = CutoffFamily(1.0, 5.0)
x = np.linspace(-2.0, 8.0, 11)
print("x      :", " ".join(f"{v:6.2f}" for v in x))
print("chi    :", " ".join(f"{v:6.3f}" for v in fam.chi(x)))
print("phi    :", " ".join(f"{v:6.3f}" for v in fam.phi(x)))
print("psi    :", " ".join(f"{v:6.3f}" for v in fam.psi(x)))
quad = fam.chi(x) ** 2 + fam.phi_tilde(x) ** 2 + fam.psi(x)
print(f"quadratic partition defect: {np.max(np.abs(quad - 1)):.2e}")
print(f"interior slope bound: chi'(3) = {float(fam.chi(np.array(3.0), 1)):.3f} "
      f">= 1/(10(tau-eps)) = {1 / 40:.3f}")

# %% regions: membership is strict on the stated sides
hs = HalfSpace((1.0, 0.0), beta=0.0)
box = UnitBox((0, 0))
print("halfspace (1,0)>0 at (1,0):", region_indicator(hs, (1.0, 0.0)))
print("unit box edge (0, .5):", region_indicator(box, (0.0, 0.5)),
      " interior (.5,.5):", region_indicator(box, (0.5, 0.5)))
# a moving half space expands toward -nu as t grows
moving = HalfSpace((1.0, 0.0), 5.0)
print("moving: x1=3.5 in {x1 > 5 - t} at t=2:",
      region_indicator(moving, (3.5, 0.0), t=2.0, omega=1.0))

# %% cone classification and the smoothing constant
for nu in ((1.0, 0.0), (1.0, 0.05), (0.0, 1.0)):
    cone = ConeCondition(nu, alpha=1.0)
    cls = check_cone(cone)
    lam = smoothing_lambda(cone) if cls.admissible else float("nan")
    print(f"nu={nu}: case={cls.case if cls.admissible else 'inadmissible':>12} "
          f" lambda={lam:.6f}  ({cls.reason})")

# %% the auxiliary eps lives in an explicit interval; the helper takes its midpoint
print("eps midpoint for nu=(1, 0.5), alpha=1.5, n=2:",
      f"{eps_midpoint(1.0, 0.5, 1.5, 2):.4f}")

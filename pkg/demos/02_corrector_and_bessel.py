# %% [markdown]
# # The bounded corrector and its Bessel kernels
#
# The inhomogeneous fractional Laplacian splits as
# (I - Lap)^(a/2) = (-Lap)^(a/2) + K_a, where K_a has the exact multiplier
# <2 pi xi>^a - |2 pi xi|^a.  The same multiplier factors through a signed
# generalized-binomial series, and the convolution kernels behind the
# negative-order Bessel potentials are classical special functions with
# sharp asymptotics at zero and infinity.

# %%
import numpy as np

from fzklab.kernels import (
    BesselKernel, binom_asymptotic_check, bounded_ratio,
    k_alpha_multiplier, k_alpha_series_multiplier,
)

# %% exact corrector values: 1 at the origin, decreasing, <= 1
radii = np.array([0.0, 0.2, 1.0, 4.0]) / (2 * np.pi)
for alpha in (0.5, 1.0, 1.5, 2.0):
    vals = k_alpha_multiplier(alpha, (radii, np.zeros_like(radii)))
    print(f"alpha={alpha}: m(|2 pi xi|=0,0.2,1,4) = "
          + ", ".join(f"{v:.6f}" for v in vals))

# %% the truncated series reproduces the multiplier away from xi = 0;
# at xi = 0 it converges only algebraically (rate J^(-alpha/2))
alpha = 1.0
xi = (np.array([0.5, 1.0, 2.0]), np.zeros(3))
exact = k_alpha_multiplier(alpha, xi)
for J in (10, 50, 200):
    approx = k_alpha_series_multiplier(alpha, xi, J)
    print(f"J={J:4d}: max series error off zero = {np.max(np.abs(exact - approx)):.2e}")

# %% the binomial tail drives that rate: k^{beta+1} |binom(beta, k)| settles
rep = binom_asymptotic_check(0.5, 400)
print(f"beta=1/2 scaled binomials -> {rep.empirical_limit:.6f} "
      f"(limit 1/|Gamma(-1/2)| = {rep.predicted_limit:.6f})")

# %% order -(2 - alpha) smoothing witness: m(xi) <2 pi xi>^(2-alpha) stays <= 2
big = np.linspace(0.0, 100.0, 1000)
print("sup bounded ratio:",
      {a: round(float(np.max(bounded_ratio(a, (big, np.zeros_like(big))))), 3)
       for a in (0.5, 1.0, 1.5, 2.0)})

# %% Bessel kernels: unit mass, exact Fourier transform, known asymptotics
for delta, n in ((1.0, 2), (1.5, 3)):
    K = BesselKernel(delta, n)
    print(f"B_{delta} in {n}d: L1 mass = {K.l1_mass():.8f}, "
          f"FT at |xi|=1: {K.fourier_value(1.0):.8f} vs "
          f"{(1 + (2 * np.pi) ** 2) ** (-delta / 2):.8f}")
    r = 1e-4
    print(f"   near-zero ratio at r={r}: {K.eval(r) / K.asymptotic('near-zero', r):.6f}")
    r = 25.0
    print(f"   tail ratio at r={r}: {K.eval(r) / K.asymptotic('infinity', r):.6f}")

"""Weight families, spatial regions, and the directional cone condition.

The moving-frame convention throughout is that every one-dimensional
profile is evaluated at ``nu.x + omega*t (+ shift)``, so with
``omega > 0`` level sets travel in the ``-nu`` direction as time grows.

Profiles are piecewise-polynomial: ramps are integrals of
``u^m (1-u)^m`` (a C^m smoothstep), so every derivative used by the
diagnostics is exact and junction continuity holds structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


# ---------------------------------------------------------------------------
# Polynomial smoothstep ramps
# ---------------------------------------------------------------------------

class SmoothRamp:
    """C^m ramp S on [0, 1] with S(0)=0, S(1)=1 and m vanishing derivatives
    at both endpoints.  S is the normalized antiderivative of u^m (1-u)^m.

    Coefficients are built exactly; evaluation uses the reflection
    S(u) = 1 - S(1-u) for u > 1/2 and product-form derivatives, so the
    construction-level identities hold to ~1e-14.
    """

    def __init__(self, m: int = 7):
        if m < 1:
            raise ValueError("ramp order must be >= 1")
        from fractions import Fraction

        self.m = m
        # S(u) = sum_k binom(m,k)(-1)^k u^(m+k+1)/(m+k+1) / B(m+1, m+1)
        norm = Fraction(math.factorial(m) ** 2, math.factorial(2 * m + 1))
        coeffs = [Fraction(0)] * (2 * m + 2)
        for k in range(m + 1):
            coeffs[m + k + 1] = Fraction(math.comb(m, k) * (-1) ** k, m + k + 1) / norm
        self._S = np.polynomial.Polynomial([float(c) for c in coeffs])
        self._inv_norm = 1.0 / float(norm)

    def _deriv_core(self, u: np.ndarray, k: int) -> np.ndarray:
        """d^k/du^k of u^m (1-u)^m via Leibniz (cancellation-free)."""
        m = self.m
        out = np.zeros(u.shape)
        for j in range(k + 1):
            if j > m or (k - j) > m:
                continue
            c = math.comb(k, j) * math.perm(m, j) * math.perm(m, k - j) * (-1) ** (k - j)
            out += c * u ** (m - j) * (1.0 - u) ** (m - (k - j))
        return out

    def __call__(self, u, order: int = 0):
        """Evaluate d^order S / du^order, clamped outside [0, 1]."""
        u = np.asarray(u, dtype=float)
        inside = (u > 0.0) & (u < 1.0)
        uc = np.clip(u, 0.0, 1.0)
        if order == 0:
            # reflection keeps evaluation on [0, 1/2] where Horner is stable
            direct = self._S(uc)
            reflected = 1.0 - self._S(1.0 - uc)
            vals = np.where(uc <= 0.5, direct, reflected)
            return np.where(inside, vals, np.where(u >= 1.0, 1.0, 0.0))
        vals = self._inv_norm * self._deriv_core(uc, order - 1)
        return np.where(inside, vals, 0.0)

    def integral(self, u) -> np.ndarray:
        """int_0^u S(v) dv, clamped to [0, 1]; integral(1) == 1/2 exactly."""
        u = np.asarray(np.clip(u, 0.0, 1.0), dtype=float)
        iS = self._S.integ()
        direct = iS(u)
        # symmetry S(v) = 1 - S(1-v) gives int_0^u S = u - 1/2 + int_0^(1-u) S
        reflected = u - 0.5 + iS(1.0 - u)
        return np.where(u <= 0.5, direct, reflected)


_DEFAULT_RAMP = SmoothRamp(7)


class PiecewiseProfile:
    """Scalar profile assembled from constant stretches and smooth ramps.

    ``segments`` is a list of (x_lo, x_hi, y_lo, y_hi) ramp spans; the
    profile is constant between spans.  Derivatives through order 6 are
    exact polynomials.
    """

    def __init__(self, segments, base: float = 0.0, ramp: SmoothRamp = _DEFAULT_RAMP):
        self.segments = sorted(segments, key=lambda s: s[0])
        for (a, b, *_vals) in self.segments:
            if b <= a:
                raise ValueError("ramp span must have positive width")
        self.base = base
        self.ramp = ramp

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.base if order == 0 else 0.0)
        for (a, b, y_lo, y_hi) in self.segments:
            width = b - a
            u = (x - a) / width
            if order == 0:
                vals = y_lo + (y_hi - y_lo) * self.ramp(u, 0)
                out = np.where(x >= a, vals, out)
                out = np.where(x >= b, y_hi, out)
            else:
                dv = (y_hi - y_lo) / width**order * self.ramp(u, order)
                out = np.where((x > a) & (x < b), dv, out)
        return out


# ---------------------------------------------------------------------------
# Directional weights:  phi(nu.x + omega t + shift)
# ---------------------------------------------------------------------------

class PlateauProfile:
    """Nondecreasing profile with phi' == 1 exactly on [0, plateau].

    phi' ramps up on [-ramp_width, 0], equals 1 on [0, plateau], ramps
    down on [plateau, plateau + ramp_width]; phi is its exact
    antiderivative (a bounded smoothed step with bounded derivatives of
    every order used, and with sqrt(phi') smooth because the ramp
    vanishes to high order at its junctions).
    """

    def __init__(self, plateau: float = 1.0, ramp_width: float = 1.0,
                 ramp: SmoothRamp = _DEFAULT_RAMP):
        if plateau < 1.0:
            raise ValueError("plateau must cover [0, 1]")
        if ramp_width <= 0:
            raise ValueError("ramp_width must be positive")
        self.plateau = plateau
        self.ramp_width = ramp_width
        self._dprofile = PiecewiseProfile(
            [(-ramp_width, 0.0, 0.0, 1.0),
             (plateau, plateau + ramp_width, 1.0, 0.0)],
            ramp=ramp,
        )
        # antiderivative pieces: integral of the up-ramp is ramp_width/2
        self._half_ramp_mass = ramp_width / 2.0
        self.ramp = ramp

    def derivative(self, x, order: int = 1):
        """d^order phi / dx^order for order >= 1."""
        return self._dprofile(x, order - 1)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        w, p = self.ramp_width, self.plateau
        out = np.zeros(x.shape)
        # up-ramp region: integral of S((x+w)/w) from -w
        u = (x + w) / w
        up = w * self.ramp.integral(u)
        out = np.where(x > -w, up, 0.0)
        # plateau: half_mass + (x - 0)
        out = np.where(x > 0.0, self._half_ramp_mass + x, out)
        # down-ramp on [p, p+w]: half + p + w * int_0^v (1 - S) dv'
        v = np.clip((x - p) / w, 0.0, 1.0)
        down = self._half_ramp_mass + p + w * (v - self.ramp.integral(v))
        out = np.where(x > p, down, out)
        out = np.where(x > p + w, self._half_ramp_mass + p + w * 0.5, out)
        return out

    def total_rise(self) -> float:
        return self.plateau + self.ramp_width

    def support(self) -> tuple:
        """Interval outside which phi' vanishes."""
        return (-self.ramp_width, self.plateau + self.ramp_width)


@dataclass(frozen=True)
class DirectionalWeight:
    """Weight ``phi(nu.x + omega t + shift)`` built from a plateau profile.

    Satisfies the admissibility hypotheses: phi nondecreasing, phi' == 1
    on [0, 1], derivatives bounded through order 4, and sqrt(phi') with
    bounded first and second derivatives.
    """

    nu: tuple
    shift: float = 0.0
    profile: PlateauProfile = field(default_factory=PlateauProfile)

    def __post_init__(self):
        nu = tuple(float(v) for v in self.nu)
        if all(v == 0.0 for v in nu):
            raise ValueError("direction nu must be non-null")
        object.__setattr__(self, "nu", nu)

    def argument(self, coords: Sequence[np.ndarray], t: float = 0.0,
                 omega: float = 0.0) -> np.ndarray:
        arg = omega * t + self.shift
        out = None
        for v, x in zip(self.nu, coords):
            out = v * x if out is None else out + v * x
        return out + arg

    def value(self, coords, t: float = 0.0, omega: float = 0.0) -> np.ndarray:
        return self.profile.value(self.argument(coords, t, omega))

    def scalar_derivative(self, coords, order: int, t: float = 0.0,
                          omega: float = 0.0) -> np.ndarray:
        """d^order phi evaluated along the moving argument (order >= 1)."""
        return self.profile.derivative(self.argument(coords, t, omega), order)

    def partial(self, beta: Sequence[int], coords, t: float = 0.0,
                omega: float = 0.0) -> np.ndarray:
        """Spatial partial d^beta of phi(nu.x + omega t + shift), exact:
        nu^beta * phi^(|beta|)."""
        total = int(sum(beta))
        if total == 0:
            return self.value(coords, t, omega)
        factor = 1.0
        for v, b in zip(self.nu, beta):
            factor *= v ** int(b)
        return factor * self.scalar_derivative(coords, total, t, omega)

    def derivative_bounds(self, max_order: int = 4, samples: int = 20001) -> dict:
        """Recorded sup-norms of phi^(j), j <= max_order, on a dense sample."""
        lo, hi = self.profile.support()
        pad = 0.5 * (hi - lo)
        x = np.linspace(lo - pad, hi + pad, samples)
        bounds = {0: float(np.max(np.abs(self.profile.value(x))))}
        for j in range(1, max_order + 1):
            bounds[j] = float(np.max(np.abs(self.profile.derivative(x, j))))
        return bounds


class WindowedDirectionalWeight:
    """Directional weight flattened to a constant near the box boundary.

    ``w(x) = c + (phi(nu.x + shift) - c) * W(x)`` with W a tensor-product
    plateau window that is 1 on the core and 0 near the boundary.  Spatial
    partials through total order 3 are exact (Leibniz on the product);
    phi itself is never differentiated spectrally.
    """

    def __init__(self, base: DirectionalWeight, grid, margin_fraction: float = 0.2,
                 boundary_value: Optional[float] = None,
                 ramp: SmoothRamp = _DEFAULT_RAMP):
        self.base = base
        self.grid = grid
        lo, hi = base.profile.support()
        if boundary_value is None:
            boundary_value = 0.0
        self.boundary_value = float(boundary_value)
        self._windows = []
        for o, L in zip(grid.origin, grid.lengths):
            m = margin_fraction * L
            self._windows.append(
                PiecewiseProfile(
                    [(o, o + m, 0.0, 1.0), (o + L - m, o + L, 1.0, 0.0)],
                    ramp=ramp,
                )
            )
        self.margin_fraction = margin_fraction

    def partial(self, beta: Sequence[int], t: float = 0.0, omega: float = 0.0) -> np.ndarray:
        """d^beta of the windowed weight on the grid (|beta| <= 3)."""
        beta = tuple(int(b) for b in beta)
        coords = self.grid.coordinates
        c = self.boundary_value
        total = np.zeros(self.grid.shape)
        # Leibniz: sum over gamma <= beta of binom(beta, gamma)
        #          d^gamma(phi - c) * d^(beta-gamma) W
        ranges = [range(b + 1) for b in beta]
        import itertools

        for gamma in itertools.product(*ranges):
            coef = 1.0
            for b, g in zip(beta, gamma):
                coef *= math.comb(b, g)
            rest = tuple(b - g for b, g in zip(beta, gamma))
            if sum(gamma) == 0:
                phi_part = self.base.value(coords, t, omega) - c
            else:
                phi_part = self.base.partial(gamma, coords, t, omega)
            win_part = self._tensor_window(rest)
            total += coef * phi_part * win_part
        if sum(beta) == 0:
            total += c
        return total

    def _tensor_window(self, orders: Sequence[int]) -> np.ndarray:
        out = None
        for axis, (win, x) in enumerate(zip(self._windows, self.grid.coordinate_axes)):
            vals = win(x, orders[axis])
            shape = [1] * self.grid.ndim
            shape[axis] = -1
            vals = vals.reshape(shape)
            out = vals if out is None else out * vals
        return np.broadcast_to(out, self.grid.shape).copy()


class GridBumpWeight:
    """Smooth directional bump weight bound to a grid: rises 0 -> 1 and
    returns to 0 along ``nu.x``, constant (zero) near the box boundary.

    Spectrally gentle by construction (single wide ramps, no boundary
    window), which keeps commutator order probes clean at small scales.
    Spatial partials through any order used are exact.
    """

    def __init__(self, grid, nu: Sequence[float], up: tuple, down: tuple,
                 ramp: SmoothRamp = _DEFAULT_RAMP):
        self.grid = grid
        self.nu = tuple(float(v) for v in nu)
        self.up = (float(up[0]), float(up[1]))      # (start, width)
        self.down = (float(down[0]), float(down[1]))
        if self.up[1] <= 0 or self.down[1] <= 0:
            raise ValueError("ramp widths must be positive")
        self.ramp = ramp

    def _argument(self, t: float, omega: float) -> np.ndarray:
        out = None
        for v, x in zip(self.nu, self.grid.coordinates):
            out = v * x if out is None else out + v * x
        return out + omega * t

    def partial(self, beta: Sequence[int], t: float = 0.0,
                omega: float = 0.0) -> np.ndarray:
        """d^beta of the weight on the grid (exact ramp derivatives)."""
        beta = tuple(int(b) for b in beta)
        order = sum(beta)
        s = self._argument(t, omega)
        (a, r1), (b, r2) = self.up, self.down
        vals = (self.ramp((s - a) / r1, order) / r1**order
                - self.ramp((s - b) / r2, order) / r2**order)
        if order == 0:
            return vals
        factor = 1.0
        for v, k in zip(self.nu, beta):
            factor *= v ** k
        return factor * vals


# ---------------------------------------------------------------------------
# Cutoff families chi, phi, phi_tilde, psi
# ---------------------------------------------------------------------------

class CutoffFamily:
    """The four cutoff profiles attached to parameters (eps, tau).

    Members (all evaluated at the scalar argument, typically nu.x+omega*t):

    * chi:        0 below eps, 1 above tau, monotone, with
                  chi' >= 1/(10*(tau-eps)) on [2*eps, tau-2*eps]
    * psi:        1 far left, supported in (-inf, eps/4]
    * phi_tilde:  sqrt(1 - chi^2 - psi)   (quadratic partition member)
    * phi:        1 - chi - psi           (linear partition member)

    Both partitions hold exactly by construction:
    chi^2 + phi_tilde^2 + psi == 1 and chi + phi + psi == 1.
    """

    KINDS = ("chi", "phi", "phi_tilde", "psi")

    def __init__(self, eps: float, tau: float, ramp: SmoothRamp = _DEFAULT_RAMP):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if tau < 5 * eps:
            raise ValueError(f"tau must be >= 5*eps, got tau={tau}, eps={eps}")
        self.eps = float(eps)
        self.tau = float(tau)
        self.ramp = ramp
        # chi' = c * B with B a plateau bump on [eps, tau]; plateau on
        # [2 eps, tau - 2 eps] guarantees the interior derivative bound.
        self._bump = PiecewiseProfile(
            [(eps, 2 * eps, 0.0, 1.0), (tau - 2 * eps, tau, 1.0, 0.0)],
            ramp=ramp,
        )
        ramp_mass_up = eps * 0.5                 # integral of up-ramp
        ramp_mass_down = 2 * eps * 0.5
        plateau_mass = (tau - 2 * eps) - 2 * eps
        self._bump_mass = ramp_mass_up + plateau_mass + ramp_mass_down
        self._chi_scale = 1.0 / self._bump_mass
        # psi: left ramp down on [eps/8, eps/4]
        self._psi_profile = PiecewiseProfile(
            [(eps / 8, eps / 4, 1.0, 0.0)], base=1.0, ramp=ramp)
        # positivity of the quadratic radicand, asserted at construction
        x = np.linspace(-tau, 2 * tau, 4001)
        rad = 1.0 - self.chi(x) ** 2 - self.psi(x)
        if np.min(rad) < -1e-10:
            raise ValueError("quadratic partition radicand went negative")

    # -- chi ---------------------------------------------------------------
    def chi(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        if order >= 1:
            return self._chi_scale * self._bump(x, order - 1)
        eps, tau = self.eps, self.tau
        out = np.zeros(x.shape)
        # integrate the bump analytically piece by piece
        u = np.clip((x - eps) / eps, 0.0, 1.0)
        up = eps * self.ramp.integral(u)
        out = np.where(x > eps, up, out)
        mass_up = eps * 0.5
        out = np.where(x > 2 * eps, mass_up + (x - 2 * eps), out)
        plateau_end = tau - 2 * eps
        mass_plateau = mass_up + (plateau_end - 2 * eps)
        v = np.clip((x - plateau_end) / (2 * eps), 0.0, 1.0)
        down = mass_plateau + 2 * eps * (v - self.ramp.integral(v))
        out = np.where(x > plateau_end, down, out)
        out = np.where(x >= tau, self._bump_mass, out)
        return self._chi_scale * out

    # -- psi ---------------------------------------------------------------
    def psi(self, x, order: int = 0):
        return self._psi_profile(np.asarray(x, dtype=float), order)

    # -- linear partition member phi ----------------------------------------
    def phi(self, x, order: int = 0):
        if order == 0:
            return 1.0 - self.chi(x) - self.psi(x)
        return -self.chi(x, order) - self.psi(x, order)

    # -- quadratic partition member phi_tilde --------------------------------
    def phi_tilde(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        g = 1.0 - self.chi(x) ** 2 - self.psi(x)
        g = np.maximum(g, 0.0)
        root = np.sqrt(g)
        if order == 0:
            return root
        # derivatives of sqrt(g) by chain rule; g has high-order zeros at
        # the support boundary so the limits there are 0
        tiny = g > 1e-30
        safe_root = np.where(tiny, root, 1.0)
        safe_g = np.where(tiny, g, 1.0)
        g1 = -2 * self.chi(x) * self.chi(x, 1) - self.psi(x, 1)
        if order == 1:
            return np.where(tiny, g1 / (2 * safe_root), 0.0)
        g2 = -2 * (self.chi(x, 1) ** 2 + self.chi(x) * self.chi(x, 2)) - self.psi(x, 2)
        if order == 2:
            return np.where(
                tiny, g2 / (2 * safe_root) - g1**2 / (4 * safe_g * safe_root), 0.0)
        g3 = -2 * (3 * self.chi(x, 1) * self.chi(x, 2)
                   + self.chi(x) * self.chi(x, 3)) - self.psi(x, 3)
        if order == 3:
            return np.where(
                tiny,
                g3 / (2 * safe_root) - 3 * g1 * g2 / (4 * safe_g * safe_root)
                + 3 * g1**3 / (8 * safe_g**2 * safe_root),
                0.0,
            )
        raise ValueError("phi_tilde derivatives implemented through order 3")

    def member(self, kind: str):
        if kind not in self.KINDS:
            raise ValueError(f"unknown cutoff kind {kind!r}")
        return getattr(self, kind)

    def eval_moving(self, kind: str, nu: Sequence[float], coords,
                    t: float = 0.0, omega: float = 0.0, order: int = 0):
        """Evaluate a member at nu.x + omega*t on coordinate arrays."""
        arg = omega * t
        out = None
        for v, x in zip(nu, coords):
            out = v * x if out is None else out + v * x
        return self.member(kind)(out + arg, order)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfSpace:
    """{ x : nu.x > beta }, moving threshold beta - omega*t."""

    nu: tuple
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))

    def indicator(self, coords, t: float = 0.0, omega: float = 0.0) -> np.ndarray:
        proj = sum(v * x for v, x in zip(self.nu, coords))
        return proj + omega * t > self.beta


@dataclass(frozen=True)
class Channel:
    """{ x : lo < nu.x < hi }, moving thresholds (lo - omega*t, hi - omega*t)."""

    nu: tuple
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        if self.hi <= self.lo:
            raise ValueError(f"channel needs hi > lo, got [{self.lo}, {self.hi}]")

    def indicator(self, coords, t: float = 0.0, omega: float = 0.0) -> np.ndarray:
        proj = sum(v * x for v, x in zip(self.nu, coords)) + omega * t
        return (proj > self.lo) & (proj < self.hi)


@dataclass(frozen=True)
class UnitBox:
    """Integer-cornered unit box { x : k_j < x_j <= k_j + 1 }.  Static."""

    corner: tuple

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(k) for k in self.corner))

    def indicator(self, coords, t: float = 0.0, omega: float = 0.0) -> np.ndarray:
        if omega != 0.0:
            raise ValueError("unit boxes are static; omega must be 0")
        out = None
        for k, x in zip(self.corner, coords):
            inside = (x > k) & (x <= k + 1)
            out = inside if out is None else out & inside
        return out


def region_indicator(region, x: Sequence[float], t: float = 0.0,
                     omega: float = 0.0) -> bool:
    """Point membership test for a single point x."""
    coords = tuple(np.asarray([xi], dtype=float) for xi in x)
    return bool(region.indicator(coords, t, omega)[0])


# ---------------------------------------------------------------------------
# Cone condition and the smoothing constant
# ---------------------------------------------------------------------------

#: Operator-norm constant of J^{-1} d_{x_j}: sup_xi |2 pi xi_j| / <2 pi xi> = 1.
#: (The defining infimum over L^2 would be 0; the estimates require the
#: upper operator-norm bound, so the default is 1.  Configurable.)
DEFAULT_C = 1.0


@dataclass(frozen=True)
class ConeCondition:
    """Direction admissibility data for the smoothing estimates.

    Case 1: nu_1 > 0 and all transverse components vanish.
    Case 2: nu_1 > 0, 0 < |nu_bar| below both directional bounds, with the
            auxiliary eps in its admissible interval.
    """

    nu: tuple
    alpha: float
    eps: Optional[float] = None
    C: float = DEFAULT_C

    def __post_init__(self):
        nu = tuple(float(v) for v in self.nu)
        if all(v == 0.0 for v in nu):
            raise ValueError("nu must be non-null")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {self.alpha}")
        object.__setattr__(self, "nu", nu)

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def nu1(self) -> float:
        return self.nu[0]

    @property
    def nu_bar(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.nu[1:])))


def eps_interval(nu1: float, nu_bar: float, alpha: float, n: int,
                 C: float = DEFAULT_C) -> tuple:
    """Admissible interval (0, upper) for the auxiliary eps in Case 2."""
    if nu_bar <= 0:
        raise ValueError("eps interval is defined only for nu_bar > 0")
    upper = nu1 / (nu_bar * math.sqrt(n - 1)) - alpha * math.sqrt(n - 1) * nu_bar * C**2 / (4 * nu1)
    return (0.0, upper)


def eps_midpoint(nu1: float, nu_bar: float, alpha: float, n: int,
                 C: float = DEFAULT_C) -> float:
    """Midpoint of the admissible eps interval (maximizes test margin)."""
    lo, hi = eps_interval(nu1, nu_bar, alpha, n, C)
    if hi <= lo:
        raise ValueError("empty eps interval; direction is inadmissible")
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConeClassification:
    case: int               # 1, 2, or 0 for inadmissible
    admissible: bool
    reason: str
    details: dict


def check_cone(cone: ConeCondition) -> ConeClassification:
    """Classify a direction as Case 1, Case 2, or inadmissible."""
    nu1, nu_bar, alpha, n, C = cone.nu1, cone.nu_bar, cone.alpha, cone.n, cone.C
    details = {"nu1": nu1, "nu_bar": nu_bar, "alpha": alpha, "n": n, "C": C}
    if nu1 <= 0:
        return ConeClassification(0, False, "nu_1 must be positive", details)
    if nu_bar == 0.0:
        return ConeClassification(1, True, "axis-aligned direction", details)

    bound1 = 2 * nu1 / (C * math.sqrt(alpha * (n - 1)))
    eps = cone.eps
    if eps is None:
        try:
            eps = eps_midpoint(nu1, nu_bar, alpha, n, C)
        except ValueError:
            eps = None
    details["bound_transverse"] = bound1
    if nu_bar >= bound1:
        return ConeClassification(
            0, False,
            f"|nu_bar|={nu_bar:.6g} >= {bound1:.6g} (transverse bound)", details)
    lo, hi = eps_interval(nu1, nu_bar, alpha, n, C)
    details["eps_interval"] = (lo, hi)
    if eps is None or not lo < eps < hi:
        return ConeClassification(
            0, False, f"eps={eps} outside admissible interval ({lo:.6g}, {hi:.6g})",
            details)
    details["eps"] = eps
    bound2 = nu1 * (1 + alpha) / (alpha * eps * math.sqrt(n - 1))
    details["bound_eps"] = bound2
    if nu_bar >= bound2:
        return ConeClassification(
            0, False,
            f"|nu_bar|={nu_bar:.6g} >= {bound2:.6g} (eps-coupled bound)", details)
    return ConeClassification(2, True, "tilted admissible direction", details)


def smoothing_lambda(cone: ConeCondition) -> float:
    """The smoothing constant lambda for an admissible direction.

    Case 1 returns alpha*nu_1/2.  Case 2 returns the explicit radical
    expression; admissibility guarantees positivity.
    """
    cls = check_cone(cone)
    if not cls.admissible:
        raise ValueError(f"inadmissible direction: {cls.reason}")
    alpha, nu1, n = cone.alpha, cone.nu1, cone.n
    if cls.case == 1:
        return alpha * nu1 / 2.0
    nb = cone.nu_bar
    eps = cls.details["eps"]
    C = cone.C
    root = math.sqrt(
        nu1**2 * (1 - alpha) ** 2 / 4.0
        + nb * nu1 * alpha * (1 - alpha) * eps * math.sqrt(n - 1) / 2.0
        + nb**2 * alpha**2 * (n - 1) * (eps**2 + C**2) / 4.0
    )
    return nu1 * (1 + alpha) / 4.0 - alpha * eps * math.sqrt(n - 1) * nb / 4.0 - 0.5 * root

"""Corrector multiplier, binomial series, and Bessel kernels."""

import numpy as np
import pytest
from scipy.special import gammaln, kv

from fzklab.kernels import (
    BesselKernel,
    KAlphaOperator,
    SingularKernelError,
    apply_k_alpha,
    bessel_asymptotic,
    bessel_kernel_eval,
    binom_asymptotic_check,
    bounded_ratio,
    k_alpha_multiplier,
    k_alpha_series_multiplier,
    legendre_duplication_residual,
    psi_series,
    signed_binomial_terms,
)
from fzklab.spectral import Field, Grid, bessel_potential, random_field


def kernel_closed_form(delta, n, r):
    """Independent oracle: Bessel-K closed form of the unit-mass kernel."""
    nu = (delta - n) / 2.0
    pref = 2.0 ** (1 - (n + delta) / 2) / (np.pi ** (n / 2) * np.exp(gammaln(delta / 2)))
    return pref * r**nu * kv(nu, r)


class TestCorrectorMultiplier:
    def test_value_one_at_zero(self):
        for alpha in (0.5, 1.0, 1.5, 2.0):
            assert k_alpha_multiplier(alpha, (np.array([0.0]), np.array([0.0])))[0] \
                == pytest.approx(1.0)

    def test_alpha_two_is_constant_one(self):
        xi = (np.linspace(0, 40, 100), np.zeros(100))
        assert np.max(np.abs(k_alpha_multiplier(2.0, xi) - 1.0)) < 1e-12

    def test_unit_radius_value(self):
        # alpha=1, |2 pi xi| = 1: sqrt(2) - 1
        val = k_alpha_multiplier(1.0, 1.0 / (2 * np.pi))
        assert val == pytest.approx(np.sqrt(2.0) - 1.0, rel=1e-12)

    def test_positive_decreasing(self):
        radii = np.linspace(0.0, 30.0, 400)
        m = k_alpha_multiplier(1.3, (radii, np.zeros_like(radii)))
        assert np.all(m > 0)
        assert np.all(np.diff(m) <= 1e-15)
        assert np.all(m <= 1.0 + 1e-15)

    def test_alpha_domain(self):
        with pytest.raises(ValueError):
            k_alpha_multiplier(0.0, 1.0)
        with pytest.raises(ValueError):
            k_alpha_multiplier(2.5, 1.0)

    def test_bounded_ratio_below_two(self):
        radii = np.linspace(0.0, 200.0, 2000)
        for alpha in (0.5, 1.0, 1.5, 2.0):
            h = bounded_ratio(alpha, (radii, np.zeros_like(radii)))
            assert np.all(h > 0)
            assert np.max(h) <= 2.0


class TestPsiSeries:
    def test_first_term_magnitude(self):
        # at J=1 the single term is (alpha/2) <.>^0 = alpha/2 regardless of xi
        for alpha in (0.5, 1.0, 1.7):
            val, last = psi_series(alpha, (np.array([3.0]), np.array([0.0])), 1)
            assert val[0] == pytest.approx(alpha / 2.0, rel=1e-12)
            assert last[0] == pytest.approx(alpha / 2.0, rel=1e-12)

    def test_alpha_two_terminates(self):
        coeffs = signed_binomial_terms(2.0, 10)
        assert coeffs[0] == pytest.approx(1.0)
        assert np.max(np.abs(coeffs[1:])) < 1e-15
        val, _ = psi_series(2.0, (np.array([1.5]), np.array([0.0])), 10)
        assert val[0] == pytest.approx(1.0, rel=1e-12)

    def test_converges_to_exact_multiplier_away_from_zero(self):
        radii = np.linspace(0.25, 50.0, 300)
        xi = (radii, np.zeros_like(radii))
        for alpha in (0.5, 1.0, 1.5):
            exact = k_alpha_multiplier(alpha, xi)
            approx = k_alpha_series_multiplier(alpha, xi, 200)
            assert np.max(np.abs(exact - approx)) < 1e-10

    def test_zero_frequency_limit_and_rate(self):
        # at xi=0 the series converges algebraically to the exact value 1;
        # the truncation error follows the binomial tail rate J^(-alpha/2)
        xi0 = (np.array([0.0]), np.array([0.0]))
        for alpha in (0.5, 1.0, 1.5):
            Js = np.array([25, 50, 100, 200, 400])
            errs = []
            for J in Js:
                val, _ = psi_series(alpha, xi0, int(J))
                errs.append(abs(1.0 - val[0]))
            slope = np.polyfit(np.log(Js), np.log(errs), 1)[0]
            assert abs(slope + alpha / 2.0) < 0.3
            # partial sums increase toward the limit
            assert errs[-1] < errs[0]


class TestBinomialAsymptotics:
    def test_first_coefficient(self):
        assert signed_binomial_terms(1.0, 1)[0] == pytest.approx(0.5)

    def test_half_converges_to_inverse_gamma(self):
        rep = binom_asymptotic_check(0.5, 400)
        assert rep.predicted_limit == pytest.approx(1.0 / (2 * np.sqrt(np.pi)),
                                                    rel=1e-12)
        assert rep.empirical_limit == pytest.approx(rep.predicted_limit, rel=2e-3)
        assert rep.converged

    def test_consecutive_ratio_settles_by_200(self):
        for beta in (0.25, 0.75, 1.3):
            rep = binom_asymptotic_check(beta, 250)
            ratio = rep.scaled[199] / rep.scaled[198]
            assert abs(ratio - 1.0) < 0.01

    def test_integer_beta_terminates(self):
        rep = binom_asymptotic_check(3.0, 50)
        assert rep.terminated
        assert np.max(np.abs(rep.scaled[3:])) < 1e-14


class TestGammaIdentity:
    def test_legendre_duplication(self):
        zs = np.linspace(0.05, 9.95, 200)
        assert legendre_duplication_residual(zs) < 1e-10


@pytest.mark.parametrize("delta,n", [(1.0, 2), (2.0, 2), (1.5, 3), (4.0, 3)])
class TestBesselKernelPairs:
    def test_matches_closed_form(self, delta, n):
        K = BesselKernel(delta, n)
        for r in (1e-3, 0.1, 1.0, 5.0, 20.0):
            assert K.eval(r) == pytest.approx(kernel_closed_form(delta, n, r),
                                              rel=1e-8)

    def test_eval_many_matches_scalar(self, delta, n):
        K = BesselKernel(delta, n)
        radii = np.array([1e-3, 0.05, 0.7, 3.0, 15.0])
        many = K.eval_many(radii)
        scalar = np.array([K.eval(r) for r in radii])
        assert np.max(np.abs(many / scalar - 1.0)) < 1e-8

    def test_unit_l1_mass(self, delta, n):
        assert BesselKernel(delta, n).l1_mass() == pytest.approx(1.0, abs=1e-6)

    def test_fourier_transform_values(self, delta, n):
        K = BesselKernel(delta, n)
        for rho in (0.0, 0.5, 1.0, 2.0, 5.0):
            want = (1.0 + (2 * np.pi * rho) ** 2) ** (-delta / 2.0)
            assert K.fourier_value(rho) == pytest.approx(want, abs=1e-6)

    def test_positive_and_monotone_along_rays(self, delta, n):
        K = BesselKernel(delta, n)
        radii = np.linspace(0.01, 20.0, 300)
        vals = K.eval_many(radii)
        assert np.all(vals > 0)
        assert np.all(np.diff(vals) < 0)


class TestBesselAsymptotics:
    def test_power_law_case(self):
        # delta < n: kernel ~ c r^(delta - n)
        K = BesselKernel(1.0, 2)
        r = 1e-4
        assert K.eval(r) / K.asymptotic("near-zero", r) == pytest.approx(1.0,
                                                                         abs=0.05)

    def test_log_case_precise_and_paper_form(self):
        K = BesselKernel(2.0, 2)
        r = 1e-5
        assert K.eval(r) / K.asymptotic("near-zero", r) == pytest.approx(1.0,
                                                                         abs=0.05)
        # the coarse form log(1/|2 pi y|) is asymptotically equivalent to
        # the precise log(2/r) - gamma: their ratio drifts to 1 like 1/log r
        prec = lambda rr: np.log(2.0 / rr) - 0.5772156649015329
        coarse = lambda rr: np.log(1.0 / (2 * np.pi * rr))
        assert coarse(1e-10) / prec(1e-10) == pytest.approx(1.0, abs=0.1)
        assert abs(coarse(1e-12) / prec(1e-12) - 1.0) < abs(
            coarse(1e-8) / prec(1e-8) - 1.0)

    def test_constant_case_and_printed_constant_ratio(self):
        # delta > n: finite limit Gamma((d-n)/2) / ((4 pi)^(n/2) Gamma(d/2));
        # the classical comparability constant pi^(n/2)Gamma((d-n)/2)/Gamma(d/2)
        # is exactly (2 pi)^n times larger
        delta, n = 4.0, 3
        K = BesselKernel(delta, n)
        lim = K.value_at_zero()
        printed = np.pi ** (n / 2) * np.exp(
            gammaln((delta - n) / 2) - gammaln(delta / 2))
        assert printed / lim == pytest.approx((2 * np.pi) ** n, rel=1e-10)
        assert K.eval(1e-3) / K.asymptotic("near-zero", 1e-3) == pytest.approx(
            1.0, abs=0.05)

    def test_exponential_tail(self):
        for delta, n in [(1.5, 2), (4.0, 3), (1.0, 2)]:
            K = BesselKernel(delta, n)
            r = 30.0
            assert K.eval(r) / K.asymptotic("infinity", r) == pytest.approx(
                1.0, abs=0.05)

    def test_regime_gates(self):
        K = BesselKernel(1.5, 2)
        with pytest.raises(ValueError):
            K.asymptotic("near-zero", 0.5)
        with pytest.raises(ValueError):
            K.asymptotic("infinity", 5.0)
        with pytest.raises(ValueError):
            K.asymptotic("sideways", 0.01)

    def test_singularity_guard(self):
        with pytest.raises(SingularKernelError):
            BesselKernel(1.0, 2).eval(0.0)
        with pytest.raises(SingularKernelError):
            BesselKernel(2.0, 2).value_at_zero()
        # delta > n has a finite value at zero
        assert BesselKernel(4.0, 3).eval(0.0) > 0

    def test_point_wrappers(self):
        v1 = bessel_kernel_eval(1.5, 2, (0.3, 0.4))     # |y| = 0.5
        v2 = BesselKernel(1.5, 2).eval(0.5)
        assert v1 == pytest.approx(v2, rel=1e-12)
        a = bessel_asymptotic(4.0, 3, "near-zero", (0.0, 0.01, 0.0))
        assert a == pytest.approx(BesselKernel(4.0, 3).asymptotic("near-zero", 0.01))


class TestKAlphaOperator:
    def test_alpha_two_is_identity(self, rng):
        g = Grid.square(2, 32, 2.0)
        f = random_field(g, rng, smooth=0.05)
        out = apply_k_alpha(KAlphaOperator(2.0), f)
        assert (out - f).l2_norm() < 1e-12 * f.l2_norm()

    def test_l2_bound_by_weighted_bessel_norm(self, rng):
        g = Grid.square(2, 64, 4.0)
        f = random_field(g, rng, smooth=0.01)
        alpha = 1.2
        out = apply_k_alpha(KAlphaOperator(alpha), f)
        weighted = bessel_potential(f, alpha - 2.0)
        radii = g.wavenumber_norm / (2 * np.pi)
        sup_ratio = np.max(bounded_ratio(alpha, (radii, np.zeros_like(radii))))
        assert out.l2_norm() <= sup_ratio * weighted.l2_norm() * (1 + 1e-10)

    def test_series_mode_agrees_with_exact(self, rng):
        # mean-zero data: the truncated series converges algebraically only
        # at the zero frequency, geometrically everywhere else
        g = Grid.square(2, 64, 4.0)
        f = random_field(g, rng, smooth=0.05)
        f = Field(g, f.values - np.mean(f.values))
        alpha = 1.5
        exact = apply_k_alpha(KAlphaOperator(alpha), f)
        series = apply_k_alpha(KAlphaOperator(alpha, mode="series", truncation=50), f)
        assert (exact - series).l2_norm() < 1e-5 * exact.l2_norm()

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            KAlphaOperator(1.0, mode="other")
        with pytest.raises(ValueError):
            KAlphaOperator(1.0, mode="series", truncation=0)

"""Spectral core: transforms, multipliers, dealiased products."""

import numpy as np
import pytest

from fzklab.spectral import (
    Field,
    Grid,
    GridMismatchError,
    Multiplier,
    SymbolEvaluationError,
    apply_multiplier,
    band_limited_field,
    bessel_potential,
    bessel_potential_multiplier,
    complex_plane_wave,
    dealiased_product,
    forward,
    fractional_laplacian,
    fractional_laplacian_multiplier,
    inverse,
    partial,
    partial_multiplier,
    plane_wave,
    random_field,
    riesz_power_multiplier,
)


class TestGrid:
    def test_basic_properties(self):
        g = Grid.square(2, 64, 2.0)
        assert g.ndim == 2
        assert g.shape == (64, 64)
        assert g.spacing == (2.0 / 64, 2.0 / 64)
        assert g.cell_volume == pytest.approx((2.0 / 64) ** 2)

    def test_frequency_lattice_is_k_over_L(self):
        g = Grid.square(2, 16, 4.0)
        ax = g.frequency_axes[0]
        k = np.fft.fftfreq(16) * 16
        assert np.allclose(ax, k / 4.0)
        # centered integer range [-8, 8)
        assert ax.min() == pytest.approx(-8 / 4.0)
        assert ax.max() == pytest.approx(7 / 4.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid.square(4, 16, 1.0)          # dimension
        with pytest.raises(ValueError):
            Grid.square(2, 6, 1.0)           # < 8 points
        with pytest.raises(ValueError):
            Grid.square(2, 24, 1.0)          # not a power of two
        with pytest.raises(ValueError):
            Grid.square(2, 16, -1.0)

    def test_grid_mismatch_raises(self, rng):
        f = random_field(Grid.square(2, 16, 1.0), rng)
        g = random_field(Grid.square(2, 32, 1.0), rng)
        with pytest.raises(GridMismatchError):
            f + g


class TestTransforms:
    def test_constant_has_only_dc(self):
        g = Grid.square(2, 16, 1.0)
        spec = forward(Field(g, np.ones(g.shape)))
        coeffs = spec.coeffs.copy()
        assert coeffs[0, 0] == pytest.approx(g.num_points)
        coeffs[0, 0] = 0.0
        assert np.max(np.abs(coeffs)) < 1e-10

    def test_cosine_two_symmetric_bins(self):
        g = Grid.square(2, 16, 1.0)
        spec = forward(plane_wave(g, (1, 0)))
        mags = np.abs(spec.coeffs)
        nonzero = np.argwhere(mags > 1e-9 * mags.max())
        assert sorted(map(tuple, nonzero)) == [(0, 0), (1, 0)] or \
            sorted(map(tuple, nonzero)) == [(1, 0), (15, 0)]

    def test_parseval_against_direct_summation(self, rng):
        # independent oracle: naive double-sum DFT on an 8x8 grid
        g = Grid.square(2, 8, 1.0)
        f = random_field(g, rng)
        n = 8
        naive = np.zeros((n, n), dtype=complex)
        j = np.arange(n)
        for k1 in range(n):
            for k2 in range(n):
                phase = np.exp(-2j * np.pi * (k1 * j[:, None] + k2 * j[None, :]) / n)
                naive[k1, k2] = np.sum(f.values * phase)
        spec = forward(f)
        assert np.max(np.abs(spec.coeffs - naive)) < 1e-10 * np.max(np.abs(naive))
        assert abs(f.l2_norm() - spec.l2_norm()) < 1e-12 * f.l2_norm()

    def test_round_trip_identity(self, rng):
        g = Grid.square(3, 8, 2.0)
        f = random_field(g, rng)
        f2 = inverse(forward(f))
        assert np.max(np.abs(f2.values - f.values)) < 1e-12 * f.max_abs()

    def test_inverse_rejects_broken_symmetry(self, rng):
        from fzklab.spectral import SpectralField

        g = Grid.square(2, 16, 1.0)
        coeffs = np.zeros(g.shape, dtype=complex)
        coeffs[3, 2] = 1.0    # no conjugate partner
        with pytest.raises(SymbolEvaluationError):
            inverse(SpectralField(g, coeffs))


class TestMultipliers:
    @pytest.mark.parametrize("k", [(1, 0), (0, 1), (3, 2), (-2, 5)])
    def test_plane_wave_eigenfunction(self, k):
        # error measured against the multiplier's lattice sup, the scale at
        # which FFT rounding enters a multiplier application
        g = Grid.square(2, 64, 1.0)
        for m in (fractional_laplacian_multiplier(1.0),
                  bessel_potential_multiplier(2.5),
                  partial_multiplier((1, 0)),
                  partial_multiplier((1, 2))):
            w = complex_plane_wave(g, k)
            xi = tuple(np.array([kj / L]) for kj, L in zip(k, g.lengths))
            lam = np.asarray(m.symbol(xi)).ravel()[0]
            out_re = apply_multiplier(m, Field(g, np.real(w)))
            out_im = apply_multiplier(m, Field(g, np.imag(w)))
            out = out_re.values + 1j * out_im.values
            scale = float(np.max(np.abs(m.sample(g))))
            assert np.max(np.abs(out - lam * w)) < 1e-12 * scale

    @pytest.mark.parametrize("k", [(1, 0), (3, 2), (-2, 5)])
    def test_plane_wave_eigenvalue_strict_low_order(self, k):
        # for order <= 1 multipliers the eigenvalue itself is resolved to
        # 1e-12 relative
        g = Grid.square(2, 64, 1.0)
        for m in (fractional_laplacian_multiplier(1.0),
                  bessel_potential_multiplier(1.0),
                  partial_multiplier((1, 0))):
            w = complex_plane_wave(g, k)
            xi = tuple(np.array([kj / L]) for kj, L in zip(k, g.lengths))
            lam = np.asarray(m.symbol(xi)).ravel()[0]
            out_re = apply_multiplier(m, Field(g, np.real(w)))
            out_im = apply_multiplier(m, Field(g, np.imag(w)))
            out = out_re.values + 1j * out_im.values
            assert np.max(np.abs(out - lam * w)) < 1e-12 * max(abs(lam), 1.0)

    def test_frac_laplacian_scaling_value(self):
        # |k|=1, alpha=1: eigenvalue 2*pi
        g = Grid.square(2, 32, 1.0)
        pw = plane_wave(g, (1, 0))
        out = fractional_laplacian(pw, 1.0)
        assert np.max(np.abs(out.values - 2 * np.pi * pw.values)) < 1e-12 * 2 * np.pi

    def test_frac_laplacian_domain(self, rng):
        f = random_field(Grid.square(2, 16, 1.0), rng)
        with pytest.raises(ValueError):
            fractional_laplacian(f, 0.0)
        with pytest.raises(ValueError):
            fractional_laplacian(f, -1.0)
        with pytest.raises(ValueError):
            fractional_laplacian(f, 2.5)

    def test_frac_laplacian_kills_constant(self):
        g = Grid.square(2, 16, 3.0)
        out = fractional_laplacian(Field(g, np.full(g.shape, 2.5)), 1.3)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_bessel_identity_and_inverse(self, rng):
        g = Grid.square(2, 32, 2.0)
        f = random_field(g, rng, smooth=0.02)
        assert np.max(np.abs(bessel_potential(f, 0.0).values - f.values)) < 1e-12
        g2 = bessel_potential(bessel_potential(f, 2.0), -2.0)
        assert np.max(np.abs(g2.values - f.values)) < 1e-10 * f.max_abs()

    def test_bessel_plane_wave_value(self):
        g = Grid.square(2, 32, 1.0)
        pw = plane_wave(g, (2, 1))
        s = 1.7
        lam = (1 + (2 * np.pi) ** 2 * 5) ** (s / 2)
        out = bessel_potential(pw, s)
        assert np.max(np.abs(out.values - lam * pw.values)) < 1e-12 * lam

    def test_bracket_square_identity(self, rng):
        # <xi>^2 = 1 + |xi|^2: J^2 f - D^2 f - f = 0
        g = Grid.square(2, 32, 2.0)
        f = random_field(g, rng, smooth=0.05)
        lhs = (bessel_potential(f, 2.0) - fractional_laplacian(f, 2.0) - f)
        assert lhs.l2_norm() < 1e-10 * f.l2_norm()

    def test_linearity(self, rng):
        g = Grid.square(2, 32, 1.0)
        f = random_field(g, rng)
        h = random_field(g, rng)
        m = bessel_potential_multiplier(1.5)
        lhs = apply_multiplier(m, Field(g, 2.0 * f.values - 3.0 * h.values))
        rhs = 2.0 * apply_multiplier(m, f) - 3.0 * apply_multiplier(m, h)
        assert (lhs - rhs).l2_norm() < 1e-12 * max(lhs.l2_norm(), 1.0)

    def test_non_finite_symbol_names_frequency(self, rng):
        g = Grid.square(2, 16, 1.0)
        bad = Multiplier(symbol=lambda freqs: 1.0 / freqs[0], name="bad")
        with pytest.raises(SymbolEvaluationError) as err:
            apply_multiplier(bad, random_field(g, rng))
        assert "xi=" in str(err.value)

    def test_operator_order_scaling(self, rng):
        # ||J^s f|| on annulus-N probes: log-log slope within 0.1 of s
        g = Grid.square(2, 128, 1.0)
        s = 1.5
        m = bessel_potential_multiplier(s)
        scales = [4, 8, 16, 32]
        meds = []
        for N in scales:
            norms = [apply_multiplier(m, band_limited_field(g, rng, (N, 2 * N))).l2_norm()
                     for _ in range(6)]
            meds.append(np.median(norms))
        slope = np.polyfit(np.log(scales), np.log(meds), 1)[0]
        assert abs(slope - s) < 0.1

    def test_riesz_power_rejects_negative(self):
        with pytest.raises(ValueError):
            riesz_power_multiplier(-1.0)


class TestDealiasedProduct:
    def test_plane_wave_sum_frequency(self):
        g = Grid.square(2, 64, 1.0)
        f = plane_wave(g, (2, 1))
        h = plane_wave(g, (3, -1))
        prod = dealiased_product(f, h)
        # cos a cos b = (cos(a+b) + cos(a-b))/2
        expect = 0.5 * (plane_wave(g, (5, 0)).values + plane_wave(g, (-1, 2)).values)
        assert np.max(np.abs(prod.values - expect)) < 1e-12

    def test_zero_absorbs(self, rng):
        g = Grid.square(2, 32, 1.0)
        f = random_field(g, rng)
        z = Field(g, np.zeros(g.shape))
        assert dealiased_product(f, z).l2_norm() == 0.0

    def test_matches_direct_product_when_band_limited(self, rng):
        g = Grid.square(2, 64, 1.0)
        cut = 64 // 3
        f = band_limited_field(g, rng, (0.0, cut / 2 - 1), unit_norm=False)
        h = band_limited_field(g, rng, (0.0, cut / 2 - 1), unit_norm=False)
        direct = f.values * h.values
        prod = dealiased_product(f, h)
        scale = max(np.max(np.abs(direct)), 1e-30)
        assert np.max(np.abs(prod.values - direct)) < 1e-12 * scale

    def test_grid_mismatch(self, rng):
        f = random_field(Grid.square(2, 16, 1.0), rng)
        h = random_field(Grid.square(2, 16, 2.0), rng)
        with pytest.raises(GridMismatchError):
            dealiased_product(f, h)


class TestFftWorkers:
    def test_env_cap(self, monkeypatch):
        from fzklab.spectral import fft_workers

        monkeypatch.setenv("FZK_THREADS", "1")
        assert fft_workers() == 1
        monkeypatch.setenv("FZK_THREADS", "3")
        assert fft_workers() == 3
        monkeypatch.setenv("FZK_THREADS", "junk")
        assert fft_workers() >= 1
        monkeypatch.delenv("FZK_THREADS")
        assert fft_workers() >= 1

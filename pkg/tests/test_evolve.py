"""Time stepping, conservation laws, initial data, checkpoints."""

import warnings

import numpy as np
import pytest

from fzklab.spectral import Field, Grid, apply_multiplier, complex_plane_wave
from fzklab.evolve import (
    SolverConfig,
    State,
    conserved_quantities,
    gaussian,
    leapfrog_reference,
    linear_propagator,
    load_checkpoint,
    make_initial_data,
    one_sided_kink,
    save_checkpoint,
    solve,
    step,
    zk_line_soliton,
)


class TestLinearPropagator:
    def test_zero_dt_identity(self):
        g = Grid.square(2, 32, 4.0)
        sym = linear_propagator(g, 1.5, 0.0).sample(g)
        assert np.max(np.abs(sym - 1.0)) == 0.0

    def test_unit_modulus(self):
        g = Grid.square(2, 32, 4.0)
        sym = linear_propagator(g, 1.0, 0.37).sample(g)
        assert np.max(np.abs(np.abs(sym) - 1.0)) < 1e-14

    def test_single_mode_phase(self):
        # a plane-wave mode k acquires phase exp(i t 2 pi xi_1 |2 pi xi|^a):
        # crests move toward -x1 (phase velocity -|2 pi xi|^a / (2 pi xi_1) * ...)
        g = Grid.square(2, 32, 2.0)
        k = (2, 1)
        alpha = 1.5
        t = 0.21
        xi = np.array([kj / L for kj, L in zip(k, g.lengths)])
        theta = t * 2 * np.pi * xi[0] * (2 * np.pi * np.linalg.norm(xi)) ** alpha
        w = complex_plane_wave(g, k)
        prop = linear_propagator(g, alpha, t)
        out = (apply_multiplier(prop, Field(g, np.real(w))).values
               + 1j * apply_multiplier(prop, Field(g, np.imag(w))).values)
        assert np.max(np.abs(out - np.exp(1j * theta) * w)) < 1e-12

    def test_time_reversibility(self):
        g = Grid.square(2, 32, 6.0)
        u0 = gaussian(g, 1.0, 0.8)
        fwd = apply_multiplier(linear_propagator(g, 1.5, 0.05), u0)
        back = apply_multiplier(linear_propagator(g, 1.5, -0.05), fwd)
        assert (back - u0).l2_norm() < 1e-12 * u0.l2_norm()


class TestStepping:
    def test_zero_stays_zero(self):
        g = Grid.square(2, 32, 4.0)
        cfg = SolverConfig(alpha=1.0, dt=1e-3, T=1e-2)
        s = State(0.0, Field(g, np.zeros(g.shape)))
        for _ in range(5):
            s = step(s, cfg)
        assert s.u.l2_norm() == 0.0
        assert s.t == pytest.approx(5e-3)

    def test_linear_steps_match_propagator(self):
        g = Grid.square(2, 64, 12.0)
        u0 = gaussian(g, 0.5, 1.0)
        cfg = SolverConfig(alpha=1.5, dt=5e-3, T=0.05, record_every=10,
                           nonlinear=False)
        traj = solve(u0, cfg)
        exact = apply_multiplier(linear_propagator(g, 1.5, 0.05), u0)
        assert (traj.final().u - exact).l2_norm() < 1e-12 * exact.l2_norm()

    def test_fourth_order_in_dt(self):
        g = Grid.square(2, 32, 8.0)
        u0 = gaussian(g, 1.0, 1.2)
        ref = solve(u0, SolverConfig(alpha=1.5, dt=0.00125, T=0.2,
                                     record_every=1000)).final().u
        errs = []
        for dt in (0.01, 0.005):
            uT = solve(u0, SolverConfig(alpha=1.5, dt=dt, T=0.2,
                                        record_every=1000)).final().u
            errs.append((uT - ref).l2_norm())
        order = np.log2(errs[0] / errs[1])
        assert abs(order - 4.0) < 0.3

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(alpha=0.0, dt=1e-3, T=1.0)
        with pytest.raises(ValueError):
            SolverConfig(alpha=1.0, dt=-1e-3, T=1.0)
        with pytest.raises(ValueError):
            SolverConfig(alpha=1.0, dt=1e-2, T=1e-3)
        with pytest.raises(ValueError):
            SolverConfig(alpha=1.0, dt=1e-3, T=1.0, dealias=False)

    def test_stability_number_recorded(self):
        g = Grid.square(2, 64, 8.0)
        cfg = SolverConfig(alpha=1.5, dt=1e-3, T=0.1)
        assert cfg.stability_number(g) > 0
        traj = solve(gaussian(g, 0.1, 1.0), cfg)
        assert traj.meta["stability_number"] == pytest.approx(
            cfg.stability_number(g))

    def test_boundary_warning(self):
        g = Grid.square(2, 32, 4.0)   # box too small for the data
        u0 = gaussian(g, 1.0, 1.5)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            traj = solve(u0, SolverConfig(alpha=1.0, dt=1e-3, T=1e-2))
        assert traj.meta["boundary_warning"]
        assert any("boundary" in str(w.message) for w in caught)


class TestConservedQuantities:
    def test_zero_field(self):
        g = Grid.square(2, 16, 2.0)
        q = conserved_quantities(Field(g, np.zeros(g.shape)), 1.0)
        assert (q.mean, q.mass, q.hamiltonian) == (0.0, 0.0, 0.0)

    def test_constant_field_values(self):
        g = Grid.square(2, 16, 2.0)
        c, vol = 0.7, 4.0
        q = conserved_quantities(Field(g, np.full(g.shape, c)), 1.3)
        assert q.mean == pytest.approx(c * vol, rel=1e-12)
        assert q.mass == pytest.approx(c * c * vol, rel=1e-12)
        assert q.hamiltonian == pytest.approx(-c**3 * vol / 6.0, rel=1e-12)

    def test_mass_conserved_along_flow(self):
        g = Grid.square(2, 64, 12.0)
        u0 = gaussian(g, 0.6, 1.0)
        traj = solve(u0, SolverConfig(alpha=1.5, dt=1e-3, T=1.0, record_every=200))
        q0 = conserved_quantities(traj.snapshots[0].u, 1.5)
        q1 = conserved_quantities(traj.final().u, 1.5)
        assert abs(q1.mean - q0.mean) < 1e-10
        assert abs(q1.mass - q0.mass) / q0.mass < 1e-6

    def test_hamiltonian_form_contrast(self):
        # the quarter-exponent energy is conserved; the half-exponent
        # variant drifts visibly under the same flow
        g = Grid.square(2, 64, 12.0)
        u0 = gaussian(g, 0.8, 1.0)
        traj = solve(u0, SolverConfig(alpha=1.5, dt=5e-4, T=0.25, record_every=100))
        q0 = conserved_quantities(traj.snapshots[0].u, 1.5)
        q1 = conserved_quantities(traj.final().u, 1.5)
        drift_quarter = abs(q1.hamiltonian - q0.hamiltonian) / abs(q0.hamiltonian)
        drift_half = abs(q1.hamiltonian_printed - q0.hamiltonian_printed) \
            / abs(q0.hamiltonian_printed)
        assert drift_quarter < 1e-6
        assert drift_half > 1e-3


class TestCrossScheme:
    def test_zk_against_leapfrog(self):
        g = Grid.square(2, 64, 16.0)
        u0 = zk_line_soliton(g, speed=0.8)
        T = 0.02
        a = solve(u0, SolverConfig(alpha=2.0, dt=1e-4, T=T,
                                   record_every=1000)).final().u
        b = leapfrog_reference(u0, 2.0, 2e-6, T)
        assert (a - b).l2_norm() / a.l2_norm() < 1e-3

    def test_soliton_translates_at_speed_c(self):
        # at alpha=2 the line profile is an exact traveling wave; after
        # time T the peak has moved by c*T toward +x1
        g = Grid.square(2, 128, 32.0)
        c = 1.0
        u0 = zk_line_soliton(g, speed=c)
        T = 0.5
        uT = solve(u0, SolverConfig(alpha=2.0, dt=2.5e-4, T=T,
                                    record_every=2000)).final().u
        profile0 = u0.values[:, 0]
        profileT = uT.values[:, 0]
        x = g.coordinate_axes[0]
        peak0 = x[np.argmax(profile0)]
        peakT = x[np.argmax(profileT)]
        assert peakT - peak0 == pytest.approx(c * T, abs=2 * g.spacing[0])


class TestInitialData:
    def test_registry(self):
        g = Grid.square(2, 32, 8.0)
        f = make_initial_data("gaussian", g, {"amplitude": 0.3, "width": 1.0})
        assert f.max_abs() == pytest.approx(0.3, rel=1e-6)
        with pytest.raises(ValueError):
            make_initial_data("unknown", g, {})

    def test_kink_regularity_indices(self):
        # H^2 norm saturates under refinement; H^3 norm grows
        from fzklab.monitors import global_sobolev

        vals = {}
        for N in (64, 128):
            g = Grid.square(2, N, 16.0)
            u = one_sided_kink(g, (1.0, 0.0), threshold=5.0,
                               smoothing_order=1.6, window_width=1.5)
            vals[N] = (global_sobolev(u, 2.0), global_sobolev(u, 3.0))
        assert vals[128][0] / vals[64][0] < 1.05
        assert vals[128][1] / vals[64][1] > 1.8

    def test_kink_smooth_on_one_side(self):
        # high-order derivative mass concentrates on the rough side
        g = Grid.square(2, 128, 16.0)
        u = one_sided_kink(g, (1.0, 0.0), threshold=5.0, smoothing_order=1.6,
                           window_width=1.5)
        from fzklab.monitors import localized_sobolev
        from fzklab.weights import Channel

        rough = localized_sobolev(u, 3.0, Channel((1.0, 0.0), 4.0, 6.0))
        smooth = localized_sobolev(u, 3.0, Channel((1.0, 0.0), 8.0, 10.0))
        assert rough > 100 * smooth


class TestCheckpoints:
    def test_round_trip(self, tmp_path):
        g = Grid.square(2, 32, 8.0)
        u = gaussian(g, 1.0, 1.0)
        path = tmp_path / "state.ckpt"
        save_checkpoint(path, u, 0.75, 1.5, "deadbeef")
        u2, header = load_checkpoint(path)
        assert np.array_equal(u2.values, u.values)
        assert u2.grid.same_as(g)
        assert header["t"] == 0.75
        assert header["alpha"] == 1.5
        assert header["config_hash"] == "deadbeef"

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError):
            load_checkpoint(path)

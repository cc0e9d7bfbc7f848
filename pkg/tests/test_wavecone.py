"""Tests for oscillation-direction certificates and the segment search."""

from __future__ import annotations

import numpy as np
import pytest

from rtmix.relaxation import (
    REGION_CONSTRAINT,
    REGION_INTERIOR,
    classify_state,
    max_flux_defect,
    sample_constraint_states,
    slip_energies,
)
from rtmix.state import FluidSetup, ReducedState, StateZ, SymTraceless, embed, project
from rtmix.wavecone import (
    cone_matrix,
    connect_constraint_states,
    find_segment,
    in_cone,
    mixing_direction,
    shear_direction,
    stationary_direction,
)

SETUP = FluidSetup(rho_minus=0.25, rho_plus=4.0)


def random_strip_state(rng: np.random.Generator,
                       setup: FluidSetup = SETUP) -> StateZ:
    """A random state with density strictly inside the mixing interval."""
    rho = rng.uniform(setup.rho_minus + 0.1, setup.rho_plus - 0.1)
    v = rng.standard_normal(setup.n)
    u = rng.standard_normal(setup.n)
    dev, _ = SymTraceless.deviatoric(_random_sym(rng, setup.n))
    return StateZ(rho, v, u, dev, rng.standard_normal())


def _random_sym(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


# {{{ cone membership


class TestConeMembership:
    def test_matrix_layout(self):
        dev = SymTraceless.from_matrix(np.array([[1.0, 2.0], [2.0, -1.0]]))
        zbar = StateZ(5.0, np.array([6.0, 7.0]), np.array([8.0, 9.0]), dev, 3.0)
        mat = cone_matrix(zbar)
        expected = np.array([
            [4.0, 2.0, 8.0],
            [2.0, 2.0, 9.0],
            [8.0, 9.0, 5.0],
            [6.0, 7.0, 0.0],
        ])
        np.testing.assert_allclose(mat, expected, rtol=0, atol=0)

    def test_zero_direction_not_in_cone(self):
        zbar = StateZ.rest(1.0, 2)
        zero = zbar - zbar
        assert not in_cone(zero).in_cone

    def test_generic_directions_not_in_cone(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            zbar = random_strip_state(rng)
            cert = in_cone(zbar)
            assert not cert.in_cone
            assert cert.nondegenerate
            assert cert.smallest_singular_value > 1e-6 * cert.matrix_norm

    def test_degenerate_direction_reported(self):
        # Kernel exists but the density/momentum block vanishes: the
        # direction cannot carry a mass/momentum oscillation.
        s = 1.5
        dev = SymTraceless.from_matrix(np.diag([s, -s]))
        zbar = StateZ(0.0, np.array([1.0, 0.0]), np.zeros(2), dev, s)
        cert = in_cone(zbar)
        assert cert.smallest_singular_value <= 1e-12 * cert.matrix_norm
        assert not cert.nondegenerate
        assert not cert.in_cone

    def test_kernel_vector_annihilates_matrix(self):
        rng = np.random.default_rng(3)
        z = random_strip_state(rng)
        zbar = mixing_direction(z, SETUP)
        cert = in_cone(zbar, tol=1e-10)
        assert cert.in_cone
        eta = np.concatenate([cert.xi, [cert.c]])
        residual = cone_matrix(zbar) @ eta
        assert np.linalg.norm(residual) <= 1e-10 * cert.matrix_norm


# }}}


# {{{ mixing (density-oscillation) directions


class TestMixingDirection:
    def test_momentum_locked_state(self):
        rng = np.random.default_rng(5)
        w = rng.standard_normal(2)
        rho = 1.7
        dev, _ = SymTraceless.deviatoric(_random_sym(rng, 2))
        z = StateZ(rho, w, rho * w, dev, 0.3)
        zt = mixing_direction(z, SETUP)
        assert zt.rho == 1.0
        np.testing.assert_array_equal(zt.v, np.zeros(2))
        np.testing.assert_array_equal(zt.u, w)
        np.testing.assert_allclose(
            zt.S.matrix + zt.P * np.eye(2), np.outer(w, w), atol=1e-14
        )

    def test_boundary_density_raises(self):
        z = StateZ.rest(SETUP.rho_plus, 2)
        with pytest.raises(ValueError, match="strictly inside"):
            mixing_direction(z, SETUP)

    def test_direction_stability(self):
        rng = np.random.default_rng(7)
        gap = SETUP.rho_plus - SETUP.rho_minus
        for _ in range(10):
            z = random_strip_state(rng)
            if not (SETUP.rho_minus + 0.3 < z.rho < SETUP.rho_plus - 0.3):
                continue
            zt = mixing_direction(z, SETUP)
            for t in (-0.05 * gap, 0.05 * gap):
                zt_shift = mixing_direction(z + zt * t, SETUP)
                assert project(zt_shift - zt).norm() <= 1e-11 * project(zt).norm()
                assert abs(zt_shift.P - zt.P) <= 1e-11 * max(1.0, abs(zt.P))

    def test_in_cone_tight_tolerance(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            z = random_strip_state(rng)
            assert in_cone(mixing_direction(z, SETUP), tol=1e-10).in_cone

    def test_slip_energies_invariant_along_line(self):
        rng = np.random.default_rng(13)
        z = random_strip_state(rng)
        zt = mixing_direction(z, SETUP)
        tp0, tm0 = slip_energies(z, SETUP)
        lo = SETUP.rho_minus - z.rho
        hi = SETUP.rho_plus - z.rho
        margin = 0.02 * (hi - lo)
        for t in np.linspace(lo + margin, hi - margin, 20):
            tp, tm = slip_energies(z + zt * float(t), SETUP)
            assert abs(tp - tp0) <= 1e-11 * max(1.0, tp0)
            assert abs(tm - tm0) <= 1e-11 * max(1.0, tm0)

    def test_flux_defect_traceless_part_invariant(self):
        from rtmix.relaxation import flux_defect_matrix

        rng = np.random.default_rng(17)
        z = random_strip_state(rng)
        zt = mixing_direction(z, SETUP)
        m0 = flux_defect_matrix(z, SETUP)
        dev0 = m0 - np.trace(m0) / 2.0 * np.eye(2)
        scale = max(1.0, float(np.abs(dev0).max()))
        lo = SETUP.rho_minus - z.rho
        hi = SETUP.rho_plus - z.rho
        margin = 0.02 * (hi - lo)
        for t in np.linspace(lo + margin, hi - margin, 20):
            mt = flux_defect_matrix(z + zt * float(t), SETUP)
            devt = mt - np.trace(mt) / 2.0 * np.eye(2)
            assert float(np.abs(devt - dev0).max()) <= 1e-11 * scale

    def test_max_defect_affine_with_exact_slope(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            z = random_strip_state(rng)
            zt = mixing_direction(z, SETUP)
            tp, tm = slip_energies(z, SETUP)
            slope = (tp - tm) / (SETUP.rho_plus - SETUP.rho_minus)
            lo = SETUP.rho_minus - z.rho
            hi = SETUP.rho_plus - z.rho
            margin = 0.02 * (hi - lo)
            ts = np.linspace(lo + margin, hi - margin, 7)
            qs = [max_flux_defect(z + zt * float(t), SETUP) for t in ts]
            scale = max(1.0, max(abs(q) for q in qs))
            for i in range(1, len(ts)):
                secant = (qs[i] - qs[0]) / (ts[i] - ts[0])
                assert abs(secant - slope) <= 1e-11 * scale


# }}}


# {{{ shear (density-free) directions


class TestShearDirection:
    def test_zero_stress(self):
        zbar = shear_direction(np.array([1.0, 2.0]), SymTraceless.zero(2), 0.7)
        assert zbar.P == 0.0
        cert = in_cone(zbar, tol=1e-10)
        assert cert.in_cone
        assert abs(cert.c) <= 1e-12

    def test_diagonal_stress_example(self):
        s = 0.8
        dev = SymTraceless.from_matrix(np.diag([s, -s]))
        zbar = shear_direction(np.array([1.0, 0.0]), dev, 2.0)
        assert abs(zbar.P - s) <= 1e-14
        cert = in_cone(zbar, tol=1e-10)
        assert cert.in_cone
        xi = cert.xi / np.linalg.norm(cert.xi)
        assert abs(abs(xi[1]) - 1.0) <= 1e-12
        assert abs(cert.c) <= 1e-12 * cert.matrix_norm

    def test_invalid_arguments(self):
        dev = SymTraceless.zero(2)
        with pytest.raises(ValueError, match="nonzero"):
            shear_direction(np.zeros(2), dev, 1.0)
        with pytest.raises(ValueError, match="degenerate"):
            shear_direction(np.array([1.0, 0.0]), dev, 0.0)
        with pytest.raises(ValueError, match="dimension"):
            shear_direction(np.array([1.0, 0.0, 0.0]), dev, 1.0)

    def test_slip_plus_invariant_when_locked_to_light(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            z = random_strip_state(rng)
            w = rng.standard_normal(2)
            dev, _ = SymTraceless.deviatoric(_random_sym(rng, 2))
            zbar = shear_direction(w, dev, SETUP.rho_minus)
            tp0, _ = slip_energies(z, SETUP)
            for t in (-1.0, 1.0):
                tp, _ = slip_energies(z + zbar * t, SETUP)
                assert abs(tp - tp0) <= 1e-12 * max(1.0, tp0)

    def test_slip_minus_invariant_when_locked_to_heavy(self):
        rng = np.random.default_rng(29)
        for _ in range(5):
            z = random_strip_state(rng)
            w = rng.standard_normal(2)
            dev, _ = SymTraceless.deviatoric(_random_sym(rng, 2))
            zbar = shear_direction(w, dev, SETUP.rho_plus)
            _, tm0 = slip_energies(z, SETUP)
            for t in (-1.0, 1.0):
                _, tm = slip_energies(z + zbar * t, SETUP)
                assert abs(tm - tm0) <= 1e-12 * max(1.0, tm0)

    def test_random_shear_directions_in_cone(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            w = rng.standard_normal(2)
            dev, _ = SymTraceless.deviatoric(_random_sym(rng, 2))
            lam = rng.uniform(0.2, 5.0)
            assert in_cone(shear_direction(w, dev, lam), tol=1e-9).in_cone

    def test_three_dimensional_direction(self):
        setup3 = FluidSetup(rho_minus=0.25, rho_plus=4.0, n=3)
        rng = np.random.default_rng(37)
        w = rng.standard_normal(3)
        dev, _ = SymTraceless.deviatoric(_random_sym(rng, 3))
        zbar = shear_direction(w, dev, 1.5)
        cert = in_cone(zbar, tol=1e-9)
        assert cert.in_cone
        assert abs(float(cert.xi @ w)) <= 1e-9 * np.linalg.norm(w)
        assert setup3.n == 3


# }}}


# {{{ stationary (purely spatial) directions


class TestStationaryDirection:
    def test_certificate_has_no_time_component(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            xi = rng.standard_normal(2)
            zbar = stationary_direction(
                xi, rng.standard_normal(), rng.standard_normal(),
                rng.standard_normal(), density=rng.standard_normal(),
            )
            cert = in_cone(zbar, tol=1e-9)
            assert cert.in_cone
            eta = np.append(cert.xi, cert.c)
            eta = eta / np.linalg.norm(eta)
            assert abs(eta[2]) <= 1e-10
            # The certificate frequency is parallel to the input.
            unit = np.asarray(xi, float) / np.linalg.norm(xi)
            assert abs(abs(eta[:2] @ unit) - 1.0) <= 1e-10

    def test_components_follow_the_parametrization(self):
        zbar = stationary_direction([0.0, 2.0], 0.8, -0.6, 1.3, density=0.4)
        perp = np.array([-1.0, 0.0])
        assert zbar.rho == 0.4
        np.testing.assert_allclose(zbar.v, 0.8 * perp, atol=0)
        np.testing.assert_allclose(zbar.u, -0.6 * perp, atol=0)
        np.testing.assert_allclose(
            zbar.S.matrix + zbar.P * np.eye(2),
            1.3 * np.outer(perp, perp), atol=1e-15,
        )

    def test_invalid_arguments(self):
        with pytest.raises(ValueError, match="nonzero"):
            stationary_direction(np.zeros(2), 1.0, 1.0, 1.0)
        with pytest.raises(ValueError, match="shape"):
            stationary_direction(np.ones(3), 1.0, 1.0, 1.0)

    def test_degenerate_without_density_and_momentum(self):
        zbar = stationary_direction([1.0, 0.0], 1.0, 0.0, 1.0, density=0.0)
        assert not in_cone(zbar).nondegenerate


# }}}


# {{{ connecting constraint-set states


def _k_pair(e_val: float, count: int, seed: int) -> list[ReducedState]:
    return sample_constraint_states(e_val, SETUP, count, seed)


class TestConnectConstraintStates:
    def test_opposite_velocity_same_density(self):
        e_val = 2.0
        samples = _k_pair(e_val, 4, seed=41)
        heavy = next(s for s in samples if s.rho == SETUP.rho_plus)
        flipped = ReducedState(heavy.rho, -heavy.v, -heavy.u, heavy.S)
        zbar = connect_constraint_states(heavy, flipped, SETUP)
        assert zbar.rho == 0.0
        assert zbar.P == 0.0
        cert = in_cone(zbar, tol=1e-9)
        assert cert.in_cone
        assert abs(float(cert.xi @ zbar.v)) <= 1e-9 * np.linalg.norm(zbar.v)

    def test_stress_factorization_identity(self):
        e_val = 2.0
        samples = _k_pair(e_val, 40, seed=43)
        lights = [s for s in samples if s.rho == SETUP.rho_minus]
        heavies = [s for s in samples if s.rho == SETUP.rho_plus]
        for z1, z2 in zip(lights, heavies):
            zbar = connect_constraint_states(z1, z2, SETUP)
            lhs = zbar.rho * zbar.S.matrix
            rhs = (np.outer(zbar.u, zbar.u)
                   - SETUP.rho_minus * SETUP.rho_plus * np.outer(zbar.v, zbar.v))
            scale = max(1.0, float(np.abs(rhs).max()))
            assert float(np.abs(lhs - rhs).max()) <= 1e-11 * scale

    def test_certificates_on_many_pairs(self):
        e_val = 2.0
        samples = _k_pair(e_val, 1000, seed=47)
        rng = np.random.default_rng(53)
        for _ in range(1000):
            i, j = rng.integers(0, len(samples), size=2)
            z1, z2 = samples[i], samples[j]
            if z1.distance(z2) <= 1e-9:
                continue
            zbar = connect_constraint_states(z1, z2, SETUP)
            assert in_cone(zbar, tol=1e-9).in_cone

    def test_rejects_non_constraint_input(self):
        e_val = 2.0
        samples = _k_pair(e_val, 2, seed=59)
        interior = StateZ.rest(1.0, 2)
        with pytest.raises(ValueError, match="constraint set|energy levels"):
            connect_constraint_states(interior, embed(samples[0]), SETUP)

    def test_rejects_identical_inputs(self):
        samples = _k_pair(2.0, 2, seed=61)
        with pytest.raises(ValueError, match="identical"):
            connect_constraint_states(samples[0], samples[0], SETUP)

    def test_rejects_mismatched_levels(self):
        z1 = _k_pair(2.0, 1, seed=67)[0]
        z2 = _k_pair(3.0, 2, seed=67)[1]
        with pytest.raises(ValueError, match="energy levels"):
            connect_constraint_states(z1, z2, SETUP)


# }}}


# {{{ segment search


class TestFindSegment:
    def test_rest_state_mixing_reach(self):
        # With a budget of one the only candidate is the density-mixing
        # direction, whose reach from a rest state is exactly the distance
        # to the nearer end of the density interval.
        e_val = 2.0
        for mu in (1.0, 2.125, 3.0):
            z = StateZ.rest(mu, 2)
            report = find_segment(z, e_val, SETUP, budget=1, seed=0)
            expected = min(mu - SETUP.rho_minus, SETUP.rho_plus - mu)
            assert abs(report.length - expected) <= 1e-6 * expected
            assert report.contained

    def test_reported_direction_in_cone(self):
        e_val = 2.0
        for mu, seed in ((1.0, 0), (2.125, 1), (3.0, 2)):
            report = find_segment(StateZ.rest(mu, 2), e_val, SETUP,
                                  budget=12, seed=seed)
            assert in_cone(report.zbar, tol=1e-9).in_cone
            assert report.contained

    def test_length_ratio_meets_reference(self):
        e_val = 2.0
        reports = []
        for mu, seed in ((1.0, 5), (2.125, 6), (3.0, 7)):
            reports.append(
                find_segment(StateZ.rest(mu, 2), e_val, SETUP,
                             budget=16, seed=seed)
            )
        samples = sample_constraint_states(e_val, SETUP, 8, seed=71)
        for i in range(0, 6, 2):
            # Chord midpoints between constraint states sit exactly on the
            # slip-energy level set; pulling a quarter of the way toward a
            # rest state of the same density makes them strictly interior.
            mid = embed(samples[i]) * 0.5 + embed(samples[i + 1]) * 0.5
            z = mid * 0.75 + StateZ.rest(mid.rho, 2) * 0.25
            assert classify_state(z, e_val, SETUP).region == REGION_INTERIOR
            reports.append(
                find_segment(z, e_val, SETUP, budget=16, seed=i)
            )
        assert len(reports) >= 4
        for report in reports:
            assert report.ratio >= 1.0 / 14.0
            assert not report.exhausted
            assert report.contained

    def test_length_shrinks_near_constraint_set(self):
        e_val = 2.0
        k = embed(sample_constraint_states(e_val, SETUP, 1, seed=73)[0])
        center = StateZ.rest(2.125, 2)
        lengths = []
        dists = []
        for j in range(1, 6):
            s = 2.0 ** (-j)
            z = k * (1.0 - s) + center * s
            assert classify_state(z, e_val, SETUP).region == REGION_INTERIOR
            report = find_segment(z, e_val, SETUP, budget=12, seed=j)
            lengths.append(report.length)
            dists.append(report.dist_constraint)
            assert report.ratio >= 1.0 / 14.0
        assert all(a > b for a, b in zip(lengths, lengths[1:]))
        assert all(a > b for a, b in zip(dists, dists[1:]))

    def test_deterministic_given_seed(self):
        e_val = 2.0
        z = StateZ.rest(1.5, 2)
        r1 = find_segment(z, e_val, SETUP, budget=10, seed=99)
        r2 = find_segment(z, e_val, SETUP, budget=10, seed=99)
        assert r1.length == r2.length
        assert project(r1.zbar - r2.zbar).norm() == 0.0

    def test_rejects_non_interior_center(self):
        e_val = 2.0
        k = embed(sample_constraint_states(e_val, SETUP, 1, seed=79)[0])
        assert classify_state(k, e_val, SETUP).region == REGION_CONSTRAINT
        with pytest.raises(ValueError, match="interior"):
            find_segment(k, e_val, SETUP, budget=4, seed=0)

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError, match="budget"):
            find_segment(StateZ.rest(1.0, 2), 2.0, SETUP, budget=0, seed=0)


# }}}

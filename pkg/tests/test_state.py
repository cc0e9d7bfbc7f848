"""State types, traceless-matrix algebra, eigen helpers, frame transforms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtmix.state import (
    FluidSetup,
    ReducedState,
    StateZ,
    SymTraceless,
    embed,
    max_eigenvalue,
    project,
    symmetric_eigenvalues,
    to_acc,
    to_lab,
)

RNG = np.random.default_rng(42)
SETUP = FluidSetup(rho_minus=0.25, rho_plus=4.0, g=1.0, n=2)


def random_state(rng, n=2, rho_range=(0.3, 3.9)) -> StateZ:
    mat = rng.normal(size=(n, n))
    dev, _ = SymTraceless.deviatoric(mat + mat.T)
    return StateZ(
        rho=rng.uniform(*rho_range),
        v=rng.normal(size=n),
        u=rng.normal(size=n),
        S=dev,
        P=rng.normal(),
    )


# {{{ FluidSetup


def test_setup_validation():
    with pytest.raises(ValueError):
        FluidSetup(rho_minus=2.0, rho_plus=1.0)
    with pytest.raises(ValueError):
        FluidSetup(rho_minus=-1.0, rho_plus=1.0)
    with pytest.raises(ValueError):
        FluidSetup(rho_minus=1.0, rho_plus=2.0, g=0.0)
    with pytest.raises(ValueError):
        FluidSetup(rho_minus=1.0, rho_plus=2.0, n=1)


def test_setup_derived_quantities():
    # (4 - 0.25)/(4 + 0.25) = 3.75/4.25 and sqrt(4/0.25) = 4.
    assert SETUP.atwood() == pytest.approx(3.75 / 4.25, rel=1e-15)
    assert SETUP.ratio_r() == pytest.approx(4.0, rel=1e-15)
    assert 0.0 < FluidSetup(1.0, 1.0001).atwood() < 1.0


# }}}


# {{{ SymTraceless


def test_traceless_structural():
    s = SymTraceless(2, (1.5, -0.75))
    mat = s.matrix
    assert mat[0, 0] == 1.5 and mat[1, 1] == -1.5
    assert mat[0, 1] == mat[1, 0] == -0.75
    assert np.trace(mat) == 0.0  # exact, by construction

    s3 = SymTraceless(3, (1.0, 2.0, 0.1, 0.2, 0.3))
    assert np.trace(s3.matrix) == 0.0
    np.testing.assert_array_equal(s3.matrix, s3.matrix.T)


def test_traceless_entry_count_enforced():
    with pytest.raises(ValueError):
        SymTraceless(2, (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        SymTraceless(3, (1.0,))


def test_from_matrix_and_deviatoric():
    m = np.array([[2.0, 1.0], [1.0, -2.0]])
    s = SymTraceless.from_matrix(m)
    np.testing.assert_allclose(s.matrix, m, atol=1e-15)
    with pytest.raises(ValueError):
        SymTraceless.from_matrix(np.array([[1.0, 0.0], [0.0, 1.0]]))  # trace 2
    with pytest.raises(ValueError):
        SymTraceless.from_matrix(np.array([[0.0, 1.0], [-1.0, 0.0]]))  # skew

    full = np.array([[3.0, 1.0], [1.0, 1.0]])
    dev, mean = SymTraceless.deviatoric(full)
    assert mean == pytest.approx(2.0)
    np.testing.assert_allclose(dev.matrix, [[1.0, 1.0], [1.0, -1.0]], atol=1e-15)


def test_traceless_arithmetic():
    a = SymTraceless(2, (1.0, 2.0))
    b = SymTraceless(2, (0.5, -1.0))
    np.testing.assert_allclose((a + b).matrix, a.matrix + b.matrix)
    np.testing.assert_allclose((a - b).matrix, a.matrix - b.matrix)
    np.testing.assert_allclose((2.5 * a).matrix, 2.5 * a.matrix)
    assert a.frobenius() == pytest.approx(np.linalg.norm(a.matrix))


# }}}


# {{{ symmetric eigenvalues (dual route: library solver as oracle)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_closed_form_eigenvalues_match_library(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2))
    m = m + m.T
    mine = symmetric_eigenvalues(m)
    ref = np.linalg.eigvalsh(m)
    np.testing.assert_allclose(mine, ref, atol=1e-12 * max(1, np.abs(m).max()))


def test_jacobi_eigenvalues_match_library():
    for n in (3, 4, 5):
        for seed in range(5):
            rng = np.random.default_rng(100 * n + seed)
            m = rng.normal(size=(n, n))
            m = m + m.T
            mine = symmetric_eigenvalues(m)
            ref = np.linalg.eigvalsh(m)
            np.testing.assert_allclose(mine, ref, atol=1e-11 * np.abs(m).max())
    assert max_eigenvalue(np.diag([1.0, 5.0, -2.0])) == pytest.approx(5.0)


# }}}


# {{{ projection


def test_project_drops_pressure_only():
    z = random_state(RNG)
    z7 = StateZ(z.rho, z.v, z.u, z.S, P=7.0)
    r = project(z7)
    assert isinstance(r, ReducedState)
    assert r.rho == z7.rho
    np.testing.assert_array_equal(r.v, z7.v)
    np.testing.assert_array_equal(r.u, z7.u)
    assert r.S == z7.S

    # project . embed(-, P=0) is the identity on reduced states.
    assert project(embed(r, P=0.0)) == r

    # distances between projections do not see the pressures.
    z_a = StateZ(z.rho, z.v, z.u, z.S, P=-3.0)
    assert project(z_a).distance(project(z7)) == 0.0


def test_reduced_flat_norm_matches_frobenius():
    r = project(random_state(RNG))
    expected = np.sqrt(r.rho**2 + r.v @ r.v + r.u @ r.u
                       + np.linalg.norm(r.S.matrix) ** 2)
    assert r.norm() == pytest.approx(expected, rel=1e-14)


# }}}


# {{{ frame transforms


def test_to_lab_identity_at_t0():
    z = random_state(RNG)
    out = to_lab(z, 0.0, SETUP)
    assert out.rho == z.rho and out.P == z.P
    np.testing.assert_array_equal(out.v, z.v)
    np.testing.assert_array_equal(out.u, z.u)
    np.testing.assert_array_equal(out.S.matrix, z.S.matrix)
    back = to_acc(z, 0.0, SETUP)
    np.testing.assert_array_equal(back.v, z.v)


def test_free_fall_state_is_lab_rest():
    t, g = 0.7, SETUP.g
    mu = 1.3
    z_acc = StateZ(mu, np.array([0.0, g * t]), np.array([0.0, mu * g * t]),
                   SymTraceless.zero(2), P=0.0)
    lab = to_lab(z_acc, t, SETUP)
    np.testing.assert_allclose(lab.v, 0.0, atol=1e-15)
    np.testing.assert_allclose(lab.u, 0.0, atol=1e-15)
    # And the inverse example: a lab rest state accelerates to free fall.
    rest = StateZ.rest(mu)
    acc = to_acc(rest, t, SETUP)
    np.testing.assert_allclose(acc.v, [0.0, g * t], atol=1e-15)
    np.testing.assert_allclose(acc.u, [0.0, mu * g * t], atol=1e-15)


def test_roundtrips_to_1e14():
    for t in (0.3, 1.0):
        for _ in range(50):
            z = random_state(RNG)
            back = to_acc(to_lab(z, t, SETUP), t, SETUP)
            scale = max(1.0, z.norm())
            assert (back - z).norm() <= 1e-14 * scale
            fwd = to_lab(to_acc(z, t, SETUP), t, SETUP)
            assert (fwd - z).norm() <= 1e-14 * scale


def test_transform_is_affine_bijection():
    # to_lab(lam z + (1-lam) z') = lam to_lab(z) + (1-lam) to_lab(z'):
    # convex combinations commute with affine maps (offsets cancel).
    t = 0.8
    for lam in (0.0, 0.3, 1.0):
        z1, z2 = random_state(RNG), random_state(RNG)
        mixed = to_lab(z1 * lam + z2 * (1.0 - lam), t, SETUP)
        combo = to_lab(z1, t, SETUP) * lam + to_lab(z2, t, SETUP) * (1.0 - lam)
        assert (mixed - combo).norm() <= 1e-13 * max(1.0, combo.norm())


def test_transform_output_traceless_structurally():
    z = random_state(RNG)
    for t in (0.0, 0.5, 2.0):
        for out in (to_lab(z, t, SETUP), to_acc(z, t, SETUP)):
            assert isinstance(out.S, SymTraceless)
            assert np.trace(out.S.matrix) == 0.0


def test_transforms_in_three_dimensions():
    setup3 = FluidSetup(0.5, 2.0, g=1.5, n=3)
    rng = np.random.default_rng(7)
    z = random_state(rng, n=3, rho_range=(0.6, 1.9))
    back = to_acc(to_lab(z, 0.9, setup3), 0.9, setup3)
    assert (back - z).norm() <= 1e-14 * max(1.0, z.norm())


def test_dimension_mismatch_raises():
    z = random_state(RNG, n=3, rho_range=(0.5, 3.0))
    with pytest.raises(ValueError):
        to_lab(z, 0.5, SETUP)


# }}}

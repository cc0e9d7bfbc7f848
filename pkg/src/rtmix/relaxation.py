"""Pointwise constraint set and its convex relaxation.

The mixing relaxation replaces the pointwise constraint set (two pure
densities, momentum locked to velocity, stress determined up to a scalar
energy level ``e``) by an open convex hull.  Membership in that hull is
decided by three scalar functionals of a reduced state:

* two *slip energies* — the kinetic energy carried by the state's deviation
  from momentum-lock against each pure phase, and
* a *flux defect* — the largest eigenvalue of a matrix comparing the
  quadratic momentum flux estimate against the stress.

A state is interior exactly when the density sits strictly between the pure
values and all three functionals sit strictly below ``e``.  Boundary
densities route to face predicates (momentum-locked states whose flux
defect does not exceed ``e``); the constraint set itself is the equality
case of the face condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .diffarith import Dual2, dual_variable
from .state import (
    FluidSetup,
    ReducedState,
    StateZ,
    SymTraceless,
    max_eigenvalue,
    project,
    to_acc,
)

__all__ = [
    "REGION_CONSTRAINT",
    "REGION_FACE_HEAVY",
    "REGION_FACE_LIGHT",
    "REGION_INTERIOR",
    "REGION_MIX_BOUNDARY",
    "REGION_OUTSIDE",
    "EnergyFunction",
    "HullReport",
    "classify_state",
    "classify_state_lab",
    "constraint_set_distance",
    "flux_defect_matrix",
    "flux_defect_matrix_factored",
    "hull_bound_constants",
    "max_flux_defect",
    "mixing_direction_vector",
    "phase_quadratic_matrix",
    "quadratic_matrix_identity_residual",
    "quadratic_matrix_scaled_det",
    "sample_constraint_states",
    "slip_energies",
    "sphere_directions",
]

REGION_INTERIOR = "interior"
REGION_MIX_BOUNDARY = "mixing_boundary"
REGION_FACE_HEAVY = "heavy_face"
REGION_FACE_LIGHT = "light_face"
REGION_CONSTRAINT = "constraint_set"
REGION_OUTSIDE = "outside"


# {{{ report and energy types


@dataclass(frozen=True)
class HullReport:
    """Classification of one reduced state against the hull at level ``e``.

    Slip/defect values that are undefined at a boundary density (vanishing
    denominator) are reported as ``nan``; the classification never relies
    on them there.  Margins are ``e`` minus the respective functional;
    ``density_margin`` is the distance of the density to the nearer pure
    value.
    """

    region: str
    slip_plus: float
    slip_minus: float
    flux_defect: float
    margin_slip_plus: float
    margin_slip_minus: float
    margin_flux: float
    density_margin: float


@dataclass(frozen=True)
class EnergyFunction:
    """A positive energy-level field e(x, t) with a finite sup bound."""

    fn: Callable[[np.ndarray, float], float]
    bound: float

    @classmethod
    def constant(cls, value: float) -> "EnergyFunction":
        if not value > 0.0:
            raise ValueError(f"energy level must be positive, got {value}")
        return cls(fn=lambda x, t: value, bound=value)

    def __call__(self, x, t: float) -> float:
        val = float(self.fn(np.asarray(x, dtype=float), t))
        if not val > 0.0:
            raise ValueError(f"energy function returned non-positive {val}")
        if val > self.bound * (1.0 + 1.0e-12):
            raise ValueError(
                f"energy value {val} exceeds declared bound {self.bound}"
            )
        return val


# }}}


# {{{ hull functionals


def _as_reduced(z: StateZ | ReducedState) -> ReducedState:
    return project(z) if isinstance(z, StateZ) else z


def _check_open_interval(rho: float, setup: FluidSetup) -> None:
    if not (setup.rho_minus < rho < setup.rho_plus):
        raise ValueError(
            f"density {rho} not strictly inside "
            f"({setup.rho_minus}, {setup.rho_plus}); boundary densities "
            "route to the face predicates"
        )


def slip_energies(z: StateZ | ReducedState,
                  setup: FluidSetup) -> tuple[float, float]:
    """Kinetic energies of the deviation from momentum-lock per phase.

    Returns ``(slip_plus, slip_minus)``; each vanishes exactly when the
    momentum is locked to the opposite pure density times the velocity.
    """
    r = _as_reduced(z)
    _check_open_interval(r.rho, setup)
    mu_m, mu_p, n = setup.rho_minus, setup.rho_plus, setup.n
    num_p = r.u - mu_m * r.v
    num_m = r.u - mu_p * r.v
    s_plus = (mu_p / n) * float(num_p @ num_p) / (r.rho - mu_m) ** 2
    s_minus = (mu_m / n) * float(num_m @ num_m) / (r.rho - mu_p) ** 2
    return s_plus, s_minus


def mixing_direction_vector(z: StateZ | ReducedState,
                            setup: FluidSetup) -> np.ndarray:
    """The normalized momentum excess (u - rho v)/((rho+ - rho)(rho - rho-))."""
    r = _as_reduced(z)
    _check_open_interval(r.rho, setup)
    denom = (setup.rho_plus - r.rho) * (r.rho - setup.rho_minus)
    return (r.u - r.rho * r.v) / denom


def flux_defect_matrix(z: StateZ | ReducedState, setup: FluidSetup) -> np.ndarray:
    """Quadratic momentum-flux estimate minus the stress."""
    r = _as_reduced(z)
    _check_open_interval(r.rho, setup)
    mu_m, mu_p = setup.rho_minus, setup.rho_plus
    denom = (mu_p - r.rho) * (r.rho - mu_m)
    ww = np.outer(r.v, r.v)
    mw = np.outer(r.u, r.v)
    mm = np.outer(r.u, r.u)
    quad = (r.rho * mu_m * mu_p * ww - mu_m * mu_p * (mw + mw.T)
            + (mu_p + mu_m - r.rho) * mm) / denom
    return quad - r.S.matrix


def flux_defect_matrix_factored(z: StateZ | ReducedState,
                                setup: FluidSetup) -> np.ndarray:
    """Same matrix built from the rank-one factored form (dual route)."""
    r = _as_reduced(z)
    _check_open_interval(r.rho, setup)
    mu_m, mu_p = setup.rho_minus, setup.rho_plus
    a = (r.u - mu_m * r.v) / (r.rho - mu_m)
    b = (r.u - mu_p * r.v) / (r.rho - mu_p)
    return (-r.rho * np.outer(a, b) + np.outer(a, r.u) + np.outer(r.u, b)
            - r.S.matrix)


def max_flux_defect(z: StateZ | ReducedState, setup: FluidSetup) -> float:
    """Largest eigenvalue of the flux-defect matrix."""
    return max_eigenvalue(flux_defect_matrix(z, setup))


# }}}


# {{{ density-coefficient quadratic matrix and its convexity identity


def phase_quadratic_matrix(mu, setup: FluidSetup):
    """The 2x2 density-coefficient matrix of the flux-defect quadratic form.

    For any direction ``xi``, ``xi^T (defect + stress) xi`` equals
    ``(v.xi, u.xi) A(rho) (v.xi, u.xi)^T`` with this matrix.  Accepts a
    plain float or a :class:`~rtmix.diffarith.Dual2` density.
    """
    mu_m, mu_p = setup.rho_minus, setup.rho_plus
    denom = (mu_p - mu) * (mu - mu_m)
    inv = 1.0 / denom if not isinstance(mu, Dual2) else denom.reciprocal()
    a11 = mu * mu_m * mu_p * inv
    a12 = -mu_m * mu_p * inv
    a22 = (mu_p + mu_m - mu) * inv
    return a11, a12, a22


def quadratic_matrix_identity_residual(mu: float, setup: FluidSetup) -> float:
    """Residual of the convexity certificate A'' = 2 A' A^{-1} A'.

    The identity is exact for the closed-form matrix; the returned Frobenius
    residual is pure floating-point noise away from the interval edges.
    """
    _check_open_interval(mu, setup)
    d = dual_variable(float(mu))
    a11, a12, a22 = phase_quadratic_matrix(d, setup)
    A = np.array([[a11.f0, a12.f0], [a12.f0, a22.f0]])
    A1 = np.array([[a11.f1, a12.f1], [a12.f1, a22.f1]])
    A2 = np.array([[a11.f2, a12.f2], [a12.f2, a22.f2]])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / det
    return float(np.linalg.norm(A2 - 2.0 * A1 @ Ainv @ A1))


def quadratic_matrix_scaled_det(mu: float, setup: FluidSetup) -> float:
    """det of the quadratic matrix rescaled by its denominator.

    Equals ``rho- rho+ (rho+ - mu)(mu - rho-)``, strictly positive on the
    open density interval (the positive-definiteness certificate).
    """
    _check_open_interval(mu, setup)
    mu_m, mu_p = setup.rho_minus, setup.rho_plus
    denom = (mu_p - mu) * (mu - mu_m)
    a11, a12, a22 = phase_quadratic_matrix(float(mu), setup)
    return float((a11 * a22 - a12 * a12) * denom * denom)


# }}}


# {{{ membership classification (accelerated frame)


def _classify_from_values(
    rho: float,
    mom_lock_plus: bool,
    mom_lock_minus: bool,
    constraint_hit: bool,
    slip_plus: float,
    slip_minus: float,
    defect: float,
    e_val: float,
    setup: FluidSetup,
    tol: float,
) -> HullReport:
    mu_m, mu_p = setup.rho_minus, setup.rho_plus
    gap = mu_p - mu_m
    delta = tol * gap
    eps = tol * max(1.0, e_val)
    density_margin = min(abs(rho - mu_m), abs(mu_p - rho))

    at_minus = abs(rho - mu_m) <= delta
    at_plus = abs(mu_p - rho) <= delta

    if at_minus or at_plus:
        locked = mom_lock_minus if at_minus else mom_lock_plus
        if locked and constraint_hit:
            region = REGION_CONSTRAINT
        elif locked and defect <= e_val + eps:
            region = REGION_FACE_LIGHT if at_minus else REGION_FACE_HEAVY
        else:
            region = REGION_OUTSIDE
    elif mu_m < rho < mu_p:
        margins = (e_val - slip_plus, e_val - slip_minus, e_val - defect)
        if all(m > eps for m in margins) and density_margin > delta:
            region = REGION_INTERIOR
        elif all(m >= -eps for m in margins):
            region = REGION_MIX_BOUNDARY
        else:
            region = REGION_OUTSIDE
    else:
        region = REGION_OUTSIDE

    return HullReport(
        region=region,
        slip_plus=slip_plus,
        slip_minus=slip_minus,
        flux_defect=defect,
        margin_slip_plus=e_val - slip_plus,
        margin_slip_minus=e_val - slip_minus,
        margin_flux=e_val - defect,
        density_margin=density_margin,
    )


def classify_state(z: StateZ | ReducedState, e_val: float, setup: FluidSetup,
                   tol: float = 1.0e-9) -> HullReport:
    """Classify an accelerated-frame state against the hull at level ``e``."""
    if not e_val > 0.0:
        raise ValueError(f"energy level must be positive, got {e_val}")
    r = _as_reduced(z)
    if r.n != setup.n:
        raise ValueError(f"state dimension {r.n} != setup dimension {setup.n}")
    mu_m, mu_p, n = setup.rho_minus, setup.rho_plus, setup.n
    gap = mu_p - mu_m
    delta = tol * gap

    at_minus = abs(r.rho - mu_m) <= delta
    at_plus = abs(mu_p - r.rho) <= delta

    mom_scale = max(1.0, float(np.linalg.norm(r.u)),
                    abs(r.rho) * float(np.linalg.norm(r.v)))
    stress_scale = max(1.0, e_val, r.S.frobenius(),
                       abs(r.rho) * float(r.v @ r.v)) * math.sqrt(n)

    lock_minus = float(np.linalg.norm(r.u - mu_m * r.v)) <= tol * mom_scale
    lock_plus = float(np.linalg.norm(r.u - mu_p * r.v)) <= tol * mom_scale

    if at_minus or at_plus:
        mu_face = mu_m if at_minus else mu_p
        face_mat = mu_face * np.outer(r.v, r.v) - r.S.matrix
        defect = max_eigenvalue(face_mat)
        constraint_hit = (
            float(np.linalg.norm(face_mat - e_val * np.eye(n)))
            <= tol * stress_scale
        )
        # The slip energy against the *opposite* phase stays well defined on
        # each face; the same-phase one is a 0/0 limit, reported as nan.
        if at_plus:
            num = r.u - mu_m * r.v
            slip_plus = (mu_p / n) * float(num @ num) / (r.rho - mu_m) ** 2
            slip_minus = float("nan")
        else:
            num = r.u - mu_p * r.v
            slip_minus = (mu_m / n) * float(num @ num) / (r.rho - mu_p) ** 2
            slip_plus = float("nan")
    elif mu_m < r.rho < mu_p:
        slip_plus, slip_minus = slip_energies(r, setup)
        defect = max_flux_defect(r, setup)
        constraint_hit = False
    else:
        slip_plus, slip_minus = float("nan"), float("nan")
        defect = float("nan")
        constraint_hit = False

    return _classify_from_values(
        r.rho, lock_plus, lock_minus, constraint_hit,
        slip_plus, slip_minus, defect, e_val, setup, tol,
    )


# }}}


# {{{ membership classification (lab frame)


def classify_state_lab(z: StateZ, x, t: float, energy: EnergyFunction,
                       setup: FluidSetup, tol: float = 1.0e-9) -> HullReport:
    """Classify a lab-frame state at position ``x`` and time ``t``.

    Evaluates the time-dependent lab-frame inequalities directly (no frame
    transform), so it provides an independent route to
    ``classify_state(to_acc(z, t), e(x,t))``.
    """
    e_val = energy(x, t)
    n = setup.n
    rho_m, rho_p = setup.rho_minus, setup.rho_plus
    gt = setup.g * t
    e_last = np.zeros(n)
    e_last[n - 1] = 1.0
    rho, v, u, S = z.rho, z.v, z.u, z.S.matrix

    gap = rho_p - rho_m
    delta = tol * gap
    at_minus = abs(rho - rho_m) <= delta
    at_plus = abs(rho_p - rho) <= delta

    # Effective level for the stress condition (the pressure-like shift).
    shift = (2.0 / n) * gt * float(u[n - 1]) + (1.0 / n) * rho * gt * gt
    level = e_val - shift

    mom_scale = max(1.0, float(np.linalg.norm(u)),
                    abs(rho) * float(np.linalg.norm(v)))
    stress_scale = max(1.0, e_val, float(np.linalg.norm(S)),
                       abs(rho) * float(v @ v)) * math.sqrt(n)

    lock_minus = float(np.linalg.norm(u - rho_m * v)) <= tol * mom_scale
    lock_plus = float(np.linalg.norm(u - rho_p * v)) <= tol * mom_scale

    if at_minus or at_plus:
        rho_face = rho_m if at_minus else rho_p
        face_mat = rho_face * np.outer(v, v) - S
        defect = max_eigenvalue(face_mat) + shift
        constraint_hit = (
            float(np.linalg.norm(face_mat - level * np.eye(n)))
            <= tol * stress_scale
        )
        if at_plus:
            num = u - rho_m * v + (rho - rho_m) * gt * e_last
            slip_plus = (rho_p / n) * float(num @ num) / (rho - rho_m) ** 2
            slip_minus = float("nan")
        else:
            num = u - rho_p * v + (rho - rho_p) * gt * e_last
            slip_minus = (rho_m / n) * float(num @ num) / (rho_p - rho) ** 2
            slip_plus = float("nan")
    elif rho_m < rho < rho_p:
        num_p = u - rho_m * v + (rho - rho_m) * gt * e_last
        num_m = u - rho_p * v + (rho - rho_p) * gt * e_last
        slip_plus = (rho_p / n) * float(num_p @ num_p) / (rho - rho_m) ** 2
        slip_minus = (rho_m / n) * float(num_m @ num_m) / (rho_p - rho) ** 2
        denom = (rho_p - rho) * (rho - rho_m)
        ww = np.outer(v, v)
        uv = np.outer(u, v)
        uu = np.outer(u, u)
        quad = (rho * rho_m * rho_p * ww - rho_m * rho_p * (uv + uv.T)
                + (rho_p + rho_m - rho) * uu) / denom
        defect = max_eigenvalue(quad - S) + shift
        constraint_hit = False
    else:
        slip_plus, slip_minus, defect = float("nan"), float("nan"), float("nan")
        constraint_hit = False

    # Momentum lock in the lab frame: at a face density the free-fall term
    # (rho - rho_face) g t e_n vanishes, leaving u = rho_face v.
    return _classify_from_values(
        rho, lock_plus, lock_minus, constraint_hit,
        slip_plus, slip_minus, defect, e_val, setup, tol,
    )


# }}}


# {{{ sampling the constraint set and its Hausdorff continuity


def sphere_directions(count: int, n: int, seed: int | None = None) -> np.ndarray:
    """Deterministic quasi-uniform unit directions (seeded only for n > 3)."""
    if n == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    if n == 3:
        # Fibonacci spiral.
        k = np.arange(count, dtype=float) + 0.5
        phi = np.arccos(1.0 - 2.0 * k / count)
        theta = np.pi * (1.0 + np.sqrt(5.0)) * k
        return np.stack([
            np.cos(theta) * np.sin(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(phi),
        ], axis=1)
    rng = np.random.default_rng(seed if seed is not None else 0)
    raw = rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _constraint_state(mu: float, b: np.ndarray, e_val: float,
                      n: int) -> ReducedState:
    w = np.sqrt(n * e_val / mu) * b
    m = mu * w
    dev, _ = SymTraceless.deviatoric(mu * np.outer(w, w))
    return ReducedState(mu, w, m, dev)


def sample_constraint_states(e_val: float, setup: FluidSetup, count: int,
                             seed: int) -> list[ReducedState]:
    """Random constraint-set states (alternating densities, seeded)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not e_val > 0.0:
        raise ValueError(f"energy level must be positive, got {e_val}")
    rng = np.random.default_rng(np.random.PCG64(seed))
    out = []
    for k in range(count):
        mu = setup.rho_minus if k % 2 == 0 else setup.rho_plus
        raw = rng.standard_normal(setup.n)
        b = raw / np.linalg.norm(raw)
        out.append(_constraint_state(mu, b, e_val, setup.n))
    return out


def constraint_set_distance(e1: float, e2: float, setup: FluidSetup,
                            directions: int = 2048) -> float:
    """Sampled Hausdorff distance between the reduced constraint sets.

    Both sets are sampled over the same deterministic direction set, so the
    distance is reproducible and exact matched pairs are available.
    """
    if not (e1 > 0.0 and e2 > 0.0):
        raise ValueError("energy levels must be positive")
    dirs = sphere_directions(directions, setup.n)
    def flats(e_val):
        pts = []
        for mu in (setup.rho_minus, setup.rho_plus):
            for b in dirs:
                pts.append(_constraint_state(mu, b, e_val, setup.n).flat())
        return np.asarray(pts)

    a, b = flats(e1), flats(e2)
    d_ab = cKDTree(b).query(a, k=1)[0].max()
    d_ba = cKDTree(a).query(b, k=1)[0].max()
    return float(max(d_ab, d_ba))


def hull_bound_constants(e_val: float, setup: FluidSetup) -> dict[str, float]:
    """Closed-form bounds on hull states in terms of (e, densities, n).

    Velocity/momentum bounds come from resolving them along the two slip
    numerators; the stress bound from convex combinations of constraint-set
    stresses.
    """
    n = setup.n
    return {
        "velocity": math.sqrt(n * e_val / setup.rho_minus),
        "momentum": math.sqrt(n * e_val * setup.rho_plus),
        "stress": (n + math.sqrt(n)) * e_val,
    }


# }}}

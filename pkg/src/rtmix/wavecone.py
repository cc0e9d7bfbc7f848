"""Oscillation directions compatible with the linear mixing system.

A direction in state space supports localized plane-wave oscillations
exactly when an associated small matrix (built from the direction's stress,
momentum, density and velocity components) is rank deficient; the kernel
vector supplies the space-time frequency of the wave.  This module decides
that membership, builds the canonical families of admissible directions
(density-mixing, shear, and purely spatial), connects pairs of
constraint-set states, and searches for long admissible segments through
interior hull points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .relaxation import (
    REGION_CONSTRAINT,
    REGION_INTERIOR,
    REGION_OUTSIDE,
    classify_state,
    mixing_direction_vector,
    sample_constraint_states,
)
from .state import (
    FluidSetup,
    ReducedState,
    StateZ,
    SymTraceless,
    embed,
    project,
)

__all__ = [
    "ConeCertificate",
    "SegmentReport",
    "cone_matrix",
    "connect_constraint_states",
    "find_segment",
    "in_cone",
    "mixing_direction",
    "shear_direction",
    "stationary_direction",
]


# {{{ cone membership


@dataclass(frozen=True)
class ConeCertificate:
    """Kernel certificate for one candidate oscillation direction.

    ``xi`` is the spatial frequency, ``c`` the temporal one; the direction
    admits oscillations iff ``in_cone`` (rank-deficient matrix and a
    nondegenerate density/momentum component).
    """

    in_cone: bool
    nondegenerate: bool
    xi: np.ndarray
    c: float
    smallest_singular_value: float
    matrix_norm: float


def cone_matrix(zbar: StateZ) -> np.ndarray:
    """The (n+2) x (n+1) matrix whose kernel certifies oscillation support.

    Row blocks: [stress + pressure*id | momentum], [momentum^T | density],
    [velocity^T | 0].
    """
    n = zbar.n
    out = np.zeros((n + 2, n + 1))
    out[:n, :n] = zbar.S.matrix + zbar.P * np.eye(n)
    out[:n, n] = zbar.u
    out[n, :n] = zbar.u
    out[n, n] = zbar.rho
    out[n + 1, :n] = zbar.v
    return out


def in_cone(zbar: StateZ, tol: float = 1.0e-9) -> ConeCertificate:
    """Decide oscillation-direction membership via singular values."""
    mat = cone_matrix(zbar)
    u, s, vh = np.linalg.svd(mat)
    sigma_min = float(s[-1])
    mat_norm = float(s[0])
    kernel = vh[-1]
    xi, c = kernel[:-1], float(kernel[-1])

    z_norm = zbar.norm()
    nondegenerate = (
        float(np.hypot(zbar.rho, np.linalg.norm(zbar.u))) > tol * max(z_norm, 1e-300)
    )
    member = (
        z_norm > 0.0
        and sigma_min <= tol * max(mat_norm, 1e-300)
        and nondegenerate
    )
    return ConeCertificate(
        in_cone=member,
        nondegenerate=nondegenerate,
        xi=xi,
        c=c,
        smallest_singular_value=sigma_min,
        matrix_norm=mat_norm,
    )


# }}}


# {{{ canonical direction families


def mixing_direction(z: StateZ | ReducedState, setup: FluidSetup) -> StateZ:
    """The density-mixing direction through an interior state.

    Unit density component; the velocity component is the normalized
    momentum excess, and stress/pressure complete it so that the whole line
    through ``z`` supports oscillations and leaves the slip energies
    invariant.
    """
    r = project(z) if isinstance(z, StateZ) else z
    wt = mixing_direction_vector(r, setup)
    mt = r.v + (setup.rho_plus + setup.rho_minus - r.rho) * wt
    full = np.outer(mt, mt) - setup.rho_plus * setup.rho_minus * np.outer(wt, wt)
    dev, mean = SymTraceless.deviatoric(full)
    return StateZ(1.0, wt, mt, dev, mean)


def shear_direction(wbar: np.ndarray, sbar: SymTraceless,
                    lam: float) -> StateZ:
    """A density-free direction (0, w, lam*w, stress, pressure).

    The pressure is chosen so the cone matrix acquires a kernel vector
    (xi, c) with xi orthogonal to ``w``: xi must be an eigenvector of the
    stress compressed to the orthogonal complement of ``w``, and the
    pressure is minus its eigenvalue.  In dimension 2 the complement is a
    line, so xi = perp(w) and the pressure is -(xi . s xi)/|xi|^2.  In
    higher dimensions the eigenvalue of largest magnitude is taken, ties
    broken by lexicographically largest sign-normalized eigenvector.
    Requires a nonzero velocity and a nonzero momentum factor.
    """
    w = np.asarray(wbar, dtype=float)
    n = sbar.n
    if w.shape != (n,):
        raise ValueError(f"velocity shape {w.shape} does not match stress "
                         f"dimension {n}")
    if not float(w @ w) > 0.0:
        raise ValueError("velocity component must be nonzero")
    if lam == 0.0:
        raise ValueError("momentum factor must be nonzero (degenerate direction)")

    smat = sbar.matrix
    if n == 2:
        xi = np.array([-w[1], w[0]])
        qbar = -float(xi @ smat @ xi) / float(xi @ xi)
    else:
        # Orthonormal basis of the complement of w, then the compressed
        # stress eigenproblem on that complement.
        basis = np.linalg.svd(w.reshape(1, -1))[2][1:].T
        compressed = basis.T @ smat @ basis
        vals, vecs = np.linalg.eigh(compressed)
        order = []
        for i in range(n - 1):
            y = vecs[:, i]
            nz = np.nonzero(np.abs(y) > 1e-14)[0]
            if nz.size and y[nz[0]] < 0:
                y = -y
            order.append((-abs(vals[i]), tuple(-y), i))
        _, _, pick = min(order)
        qbar = -float(vals[pick])
        xi = basis @ vecs[:, pick]
    return StateZ(0.0, w, lam * w, sbar, qbar)


def stationary_direction(xi: np.ndarray, velocity_coef: float,
                         momentum_coef: float, stress_coef: float,
                         density: float = 0.0) -> StateZ:
    """A direction whose kernel certificate has no time component.

    For a spatial frequency ``xi`` (normalized here), any state whose
    velocity and momentum are multiples of ``perp(xi)`` and whose
    stress-plus-pressure block is a multiple of ``perp(xi) x perp(xi)``
    is annihilated by ``(xi, 0)``: every row of the cone matrix contracts
    ``xi`` against a ``perp(xi)`` factor.  The three multipliers and the
    density are free, which makes this the generic spatial-oscillation
    family in two dimensions.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2,):
        raise ValueError(f"spatial frequency must have shape (2,), got {xi.shape}")
    norm = float(np.linalg.norm(xi))
    if norm == 0.0:
        raise ValueError("spatial frequency must be nonzero")
    xi = xi / norm
    perp = np.array([-xi[1], xi[0]])
    dev, mean = SymTraceless.deviatoric(stress_coef * np.outer(perp, perp))
    return StateZ(density, velocity_coef * perp, momentum_coef * perp,
                  dev, mean)


def connect_constraint_states(z1: StateZ | ReducedState,
                              z2: StateZ | ReducedState,
                              setup: FluidSetup,
                              tol: float = 1.0e-9) -> StateZ:
    """Direction connecting two constraint-set states (pressure dropped).

    Both inputs must lie in the constraint set at a shared level ``e``
    (inferred from the trace identity rho |v|^2 = n e); the difference is
    then an admissible oscillation direction with zero pressure component.
    """
    r1 = project(z1) if isinstance(z1, StateZ) else z1
    r2 = project(z2) if isinstance(z2, StateZ) else z2
    n = setup.n
    e1 = r1.rho * float(r1.v @ r1.v) / n
    e2 = r2.rho * float(r2.v @ r2.v) / n
    if abs(e1 - e2) > tol * max(1.0, e1, e2):
        raise ValueError(
            f"inputs sit at different energy levels ({e1} vs {e2})"
        )
    for r, e in ((r1, e1), (r2, e2)):
        if classify_state(r, e, setup, tol).region != REGION_CONSTRAINT:
            raise ValueError("inputs must lie in the constraint set")
    if r1.distance(r2) <= tol * max(1.0, r1.norm(), r2.norm()):
        raise ValueError("identical inputs give the zero direction")

    dev = r2.S - r1.S
    zbar = StateZ(r2.rho - r1.rho, r2.v - r1.v, r2.u - r1.u, dev, 0.0)
    if abs(zbar.rho) > tol:
        # Self-check: for a genuine density jump the stress difference
        # factors through the momentum and velocity differences with the
        # product of the two extreme densities as coefficient.
        lhs = zbar.rho * dev.matrix
        rhs = (np.outer(zbar.u, zbar.u)
               - setup.rho_minus * setup.rho_plus * np.outer(zbar.v, zbar.v))
        scale = max(1.0, float(np.abs(lhs).max()), float(np.abs(rhs).max()))
        if float(np.abs(lhs - rhs).max()) > 1.0e-11 * scale:
            raise ValueError(
                "connecting direction failed the stress factorization check"
            )
    return zbar


# }}}


# {{{ admissible segment search


@dataclass(frozen=True)
class SegmentReport:
    """Result of the admissible-segment search through an interior state.

    ``zbar`` is scaled so that both ``z + zbar`` and ``z - zbar`` lie in the
    hull closure; ``length`` is its reduced-space norm.  ``dist_constraint``
    is a sampled estimate of the reduced distance from ``z`` to the
    constraint set, and ``ratio = length / dist_constraint``.  ``exhausted``
    flags a search that spent its budget without reaching the reference
    ratio 1/(2*7); the best direction found is still returned.
    """

    zbar: StateZ
    length: float
    dist_constraint: float
    ratio: float
    exhausted: bool
    contained: bool


_REFERENCE_RATIO = 1.0 / 14.0  # 1/(2 * dim of the reduced state space), n=2


def _segment_reach(z: StateZ, zbar: StateZ, e_val: float,
                   setup: FluidSetup) -> float:
    """sup of t such that both z + t zbar and z - t zbar stay in the hull."""

    def inside(t: float) -> bool:
        for sign in (1.0, -1.0):
            reg = classify_state(z + zbar * (sign * t), e_val, setup).region
            if reg == REGION_OUTSIDE:
                return False
        return True

    t_lo, t_hi = 0.0, 1.0e-3
    while inside(t_hi) and t_hi < 1.0e9:
        t_lo = t_hi
        t_hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (t_lo + t_hi)
        if inside(mid):
            t_lo = mid
        else:
            t_hi = mid
    return t_lo


def _contained(z: StateZ, zbar: StateZ, e_val: float, setup: FluidSetup,
               points: int) -> bool:
    for s in np.linspace(-1.0, 1.0, points + 2):
        if classify_state(z + zbar * float(s), e_val, setup).region == REGION_OUTSIDE:
            return False
    return True


def find_segment(z: StateZ | ReducedState, e_val: float, setup: FluidSetup,
                 budget: int = 24, seed: int = 0,
                 check_points: int = 64) -> SegmentReport:
    """Search for a long oscillation-admissible segment centered at ``z``.

    Candidates: the mixing direction, shear directions with momentum locked
    to either pure density, and connecting directions between sampled
    constraint-set states.  Each candidate is scaled to unit reduced norm,
    pushed to the hull boundary by bisection, and the winner is certified by
    membership at ``check_points`` interior points plus the endpoints.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    z_full = embed(z) if isinstance(z, ReducedState) else z
    base = classify_state(z_full, e_val, setup)
    if base.region != REGION_INTERIOR:
        raise ValueError(
            f"segment search requires a strictly interior state, got "
            f"{base.region}"
        )

    rng = np.random.default_rng(seed)
    n_samples = max(32, 2 * budget)
    samples = sample_constraint_states(e_val, setup, n_samples, seed)
    lights = [s for s in samples if s.rho == setup.rho_minus]
    heavies = [s for s in samples if s.rho == setup.rho_plus]

    candidates: list[StateZ] = [mixing_direction(z_full, setup)]
    while len(candidates) < budget and (len(candidates) - 1) // 2 < min(
            len(lights), len(heavies)):
        k = (len(candidates) - 1) // 2
        if len(candidates) % 2 == 1:
            raw = rng.standard_normal(setup.n)
            lam = setup.rho_minus if len(candidates) % 4 == 1 else setup.rho_plus
            candidates.append(
                shear_direction(raw / np.linalg.norm(raw),
                                SymTraceless.zero(setup.n), lam)
            )
        else:
            candidates.append(
                connect_constraint_states(lights[k], heavies[k], setup)
            )
    candidates = candidates[:budget]

    best_t = 0.0
    best_dir: StateZ | None = None
    for cand in candidates:
        norm = project(cand).norm()
        if norm <= 1.0e-14:
            continue
        unit = cand * (1.0 / norm)
        reach = _segment_reach(z_full, unit, e_val, setup)
        if reach > best_t:
            best_t = reach
            best_dir = unit

    if best_dir is None:
        raise ValueError("no candidate direction admitted a nonzero segment")

    zbar = best_dir * best_t
    contained = _contained(z_full, zbar, e_val, setup, check_points)

    ref_points = sample_constraint_states(e_val, setup, 2048, seed + 1)
    r = project(z_full)
    dist = min(r.distance(k) for k in ref_points)
    ratio = best_t / dist if dist > 0 else float("inf")
    return SegmentReport(
        zbar=zbar,
        length=best_t,
        dist_constraint=dist,
        ratio=ratio,
        exhausted=ratio < _REFERENCE_RATIO,
        contained=contained,
    )


# }}}

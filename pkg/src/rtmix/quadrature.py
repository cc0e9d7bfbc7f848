"""Quadrature and deterministic sampling helpers.

The adaptive integrator pairs the 15-point Kronrod extension with its
embedded 7-point Gauss rule (the published QUADPACK node/weight constants)
and accumulates accepted panels with compensated (Kahan) summation.
Integrands must be vectorized: ``f(x: ndarray) -> ndarray`` elementwise.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureError",
    "adaptive_gauss_kronrod",
    "gauss_legendre_panels",
    "gauss_legendre_rule",
    "halton_points",
    "kahan_sum",
]

# 15-point Kronrod nodes on [-1, 1] (nonnegative half) and weights, with the
# embedded 7-point Gauss weights; classical double-precision constants.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule: nodes ordered left to right.
_NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WEIGHTS15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss-7 weights aligned with the 15-node layout (zeros at Kronrod-only
# nodes, which sit at even indices of the sorted layout's odd positions).
_WEIGHTS7 = np.zeros(15)
_WEIGHTS7[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    """Raised when the adaptive integrator cannot meet its tolerance."""


def kahan_sum(values: np.ndarray) -> float:
    """Compensated summation of a 1-d array in the given order."""
    total = 0.0
    carry = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        y = v - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def adaptive_gauss_kronrod(
    f,
    a: float,
    b: float,
    abs_tol: float = 1.0e-11,
    max_subdivisions: int = 10_000,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``abs_tol``.

    Returns ``(value, error_estimate)``.  Raises :class:`QuadratureError`
    if the subdivision cap is hit before the tolerance is met.
    """
    if not b > a:
        if b == a:
            return 0.0, 0.0
        raise ValueError(f"empty integration interval [{a}, {b}]")

    active = np.array([[float(a), float(b)]])
    done: list[tuple[float, float, float]] = []  # (left, value, error)
    splits = 0
    while active.size:
        lefts = active[:, 0]
        rights = active[:, 1]
        half = 0.5 * (rights - lefts)
        mid = 0.5 * (lefts + rights)
        pts = mid[:, None] + half[:, None] * _NODES15[None, :]
        vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
        gk = half * (vals @ _WEIGHTS15)
        g7 = half * (vals @ _WEIGHTS7)
        err = np.abs(gk - g7)
        # Per-panel budget proportional to panel length.
        budget = abs_tol * (rights - lefts) / (b - a)
        ok = err <= np.maximum(budget, 1.0e-300)
        for i in np.nonzero(ok)[0]:
            done.append((lefts[i], gk[i], err[i]))
        bad = np.nonzero(~ok)[0]
        if bad.size:
            splits += bad.size
            if splits > max_subdivisions:
                raise QuadratureError(
                    f"subdivision cap {max_subdivisions} exceeded; "
                    f"residual panel error {err[bad].sum():.3e}"
                )
            l, r, m = lefts[bad], rights[bad], mid[bad]
            active = np.concatenate(
                [np.stack([l, m], axis=1), np.stack([m, r], axis=1)]
            )
        else:
            active = np.empty((0, 2))

    done.sort(key=lambda rec: rec[0])
    value = kahan_sum(np.array([rec[1] for rec in done]))
    error = float(np.sum([rec[2] for rec in done]))
    return value, error


@lru_cache(maxsize=64)
def gauss_legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def gauss_legendre_panels(
    a: float, b: float, panels: int, order: int
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on ``[a, b]`` split into equal panels."""
    nodes, weights = gauss_legendre_rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


_PRIMES = (2, 3, 5, 7, 11, 13)


def halton_points(count: int, dim: int, skip: int = 20) -> np.ndarray:
    """Deterministic low-discrepancy points in ``[0, 1)^dim`` (Halton)."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton_points supports dim <= {len(_PRIMES)}")
    out = np.empty((count, dim))
    idx = np.arange(skip + 1, skip + count + 1, dtype=np.int64)
    for d in range(dim):
        base = _PRIMES[d]
        i = idx.copy()
        frac = np.zeros(count)
        scale = 1.0 / base
        while np.any(i > 0):
            frac += (i % base) * scale
            i //= base
            scale /= base
        out[:, d] = frac
    return out

"""State-space types and the lab/uniformly-accelerated frame transforms.

A state point bundles density, velocity, momentum, a trace-free symmetric
stress and a pressure.  The same container serves two reference frames: the
lab frame (gravity acts as a body force) and the accelerated frame obtained
by shifting the vertical coordinate with the free-fall parabola, in which
the linear system has no forcing term.  The transforms between the two are
affine bijections carrying the time explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FluidSetup",
    "ReducedState",
    "StateZ",
    "SymTraceless",
    "embed",
    "max_eigenvalue",
    "project",
    "symmetric_eigenvalues",
    "to_acc",
    "to_lab",
]


# {{{ fluid setup


@dataclass(frozen=True)
class FluidSetup:
    """Two densities, gravity and spatial dimension for one mixing problem."""

    rho_minus: float
    rho_plus: float
    g: float = 1.0
    n: int = 2

    def __post_init__(self) -> None:
        if not (0.0 < self.rho_minus < self.rho_plus):
            raise ValueError(
                f"need 0 < rho_minus < rho_plus, got "
                f"({self.rho_minus}, {self.rho_plus})"
            )
        if not self.g > 0.0:
            raise ValueError(f"gravity must be positive, got {self.g}")
        if self.n < 2:
            raise ValueError(f"spatial dimension must be >= 2, got {self.n}")

    def atwood(self) -> float:
        """Density contrast (rho+ - rho-)/(rho+ + rho-), in (0, 1)."""
        return (self.rho_plus - self.rho_minus) / (self.rho_plus + self.rho_minus)

    def ratio_r(self) -> float:
        """Square root of the density ratio, > 1."""
        return float(np.sqrt(self.rho_plus / self.rho_minus))


# }}}


# {{{ symmetric traceless matrices


def _tri_indices(n: int) -> list[tuple[int, int]]:
    """Entry layout: diagonal (0..n-2), then strict upper triangle row-major."""
    idx = [(i, i) for i in range(n - 1)]
    idx.extend((i, j) for i in range(n) for j in range(i + 1, n))
    return idx


@dataclass(frozen=True)
class SymTraceless:
    """Symmetric n x n matrix with zero trace, stored by independent entries.

    The last diagonal entry is implied by the others, so symmetry and
    trace-zero hold structurally rather than as runtime checks.
    """

    n: int
    entries: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = self.n * (self.n + 1) // 2 - 1
        if len(self.entries) != expected:
            raise ValueError(
                f"SymTraceless(n={self.n}) needs {expected} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def zero(cls, n: int) -> "SymTraceless":
        return cls(n, (0.0,) * (n * (n + 1) // 2 - 1))

    @classmethod
    def from_matrix(cls, mat, tol: float = 1.0e-9) -> "SymTraceless":
        """Store a matrix that is already symmetric and trace-free.

        Raises if the input violates either property beyond ``tol`` relative
        to its magnitude; use :meth:`deviatoric` to remove a trace instead.
        """
        m = np.asarray(mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > tol * scale:
            raise ValueError("matrix is not symmetric within tolerance")
        if abs(np.trace(m)) > tol * scale * m.shape[0]:
            raise ValueError(f"matrix has trace {np.trace(m):.3e}, not 0")
        n = m.shape[0]
        sym = 0.5 * (m + m.T)
        return cls(n, tuple(float(sym[i, j]) for i, j in _tri_indices(n)))

    @classmethod
    def deviatoric(cls, mat) -> tuple["SymTraceless", float]:
        """Split a symmetric matrix into (trace-free part, trace/n)."""
        m = np.asarray(mat, dtype=float)
        n = m.shape[0]
        mean = float(np.trace(m)) / n
        dev = 0.5 * (m + m.T) - mean * np.eye(n)
        return cls(n, tuple(float(dev[i, j]) for i, j in _tri_indices(n))), mean

    @property
    def matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for val, (i, j) in zip(self.entries, _tri_indices(self.n)):
            out[i, j] = val
            out[j, i] = val
        out[self.n - 1, self.n - 1] = -np.trace(out)
        return out

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def __add__(self, other: "SymTraceless") -> "SymTraceless":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return SymTraceless(
            self.n, tuple(a + b for a, b in zip(self.entries, other.entries))
        )

    def __sub__(self, other: "SymTraceless") -> "SymTraceless":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "SymTraceless":
        return SymTraceless(self.n, tuple(a * scalar for a in self.entries))

    __rmul__ = __mul__

    def __neg__(self) -> "SymTraceless":
        return self * -1.0


# }}}


# {{{ symmetric eigenvalues (closed form n=2, cyclic Jacobi n>=3)


def symmetric_eigenvalues(mat: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending.

    n = 2 uses the closed form mean +/- radius; larger n runs cyclic Jacobi
    sweeps until the off-diagonal mass falls below 1e-13 of the norm.
    """
    a = np.asarray(mat, dtype=float)
    n = a.shape[0]
    if n == 2:
        mean = 0.5 * (a[0, 0] + a[1, 1])
        radius = float(np.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1]))
        return np.array([mean - radius, mean + radius])

    a = a.copy()
    scale = max(float(np.linalg.norm(a)), 1.0e-300)
    for _ in range(60):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= 1.0e-13 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1.0e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / a[p, q]
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def max_eigenvalue(mat: np.ndarray) -> float:
    return float(symmetric_eigenvalues(mat)[-1])


# }}}


# {{{ state containers


@dataclass(frozen=True)
class StateZ:
    """One state point (density, velocity, momentum, stress, pressure).

    Interpreted in the lab frame as (rho, v, u, S, P) and in the accelerated
    frame as (mu, w, m, sigma, q); the container is frame-agnostic.
    """

    rho: float
    v: np.ndarray
    u: np.ndarray
    S: SymTraceless
    P: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        n = self.S.n
        if self.v.shape != (n,) or self.u.shape != (n,):
            raise ValueError(
                f"velocity/momentum must be length-{n} vectors, got "
                f"{self.v.shape} and {self.u.shape}"
            )

    @property
    def n(self) -> int:
        return self.S.n

    @classmethod
    def rest(cls, rho: float, n: int = 2, P: float = 0.0) -> "StateZ":
        return cls(rho, np.zeros(n), np.zeros(n), SymTraceless.zero(n), P)

    def __add__(self, other: "StateZ") -> "StateZ":
        return StateZ(self.rho + other.rho, self.v + other.v, self.u + other.u,
                      self.S + other.S, self.P + other.P)

    def __sub__(self, other: "StateZ") -> "StateZ":
        return self + other * -1.0

    def __mul__(self, scalar: float) -> "StateZ":
        return StateZ(self.rho * scalar, self.v * scalar, self.u * scalar,
                      self.S * scalar, self.P * scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Euclidean norm over all components (stress in Frobenius norm)."""
        return float(np.sqrt(
            self.rho**2 + self.v @ self.v + self.u @ self.u
            + self.S.frobenius() ** 2 + self.P**2
        ))


@dataclass(frozen=True)
class ReducedState:
    """A state with the pressure dropped (the quotient the hulls live in)."""

    rho: float
    v: np.ndarray
    u: np.ndarray
    S: SymTraceless

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))

    @property
    def n(self) -> int:
        return self.S.n

    def flat(self) -> np.ndarray:
        """Coordinates (rho, v, u, stress entries doubled off-diagonal).

        The stress block is weighted so the Euclidean norm of the flat
        vector matches the matrix Frobenius norm.
        """
        n = self.S.n
        weights = []
        for i, j in _tri_indices(n):
            weights.append(1.0 if i == j else np.sqrt(2.0))
        mat = self.S.matrix
        svec = [mat[i, j] * w for (i, j), w in zip(_tri_indices(n), weights)]
        # The implied last diagonal entry contributes too.
        svec.append(mat[n - 1, n - 1])
        return np.concatenate([[self.rho], self.v, self.u, svec])

    def distance(self, other: "ReducedState") -> float:
        return float(np.linalg.norm(self.flat() - other.flat()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))


def project(z: StateZ) -> ReducedState:
    """Drop the pressure component."""
    return ReducedState(z.rho, z.v, z.u, z.S)


def embed(r: ReducedState, P: float = 0.0) -> StateZ:
    """Re-attach a pressure to a reduced state."""
    return StateZ(r.rho, r.v, r.u, r.S, P)


# }}}


# {{{ frame transforms


def _vertical_bracket(m: np.ndarray, mu: float, t: float,
                      setup: FluidSetup) -> tuple[SymTraceless, float]:
    """Deviatoric/trace split of -gt(m (x) e_n + e_n (x) m) + g^2t^2 mu e_n(x)e_n."""
    n = setup.n
    gt = setup.g * t
    bracket = np.zeros((n, n))
    bracket[n - 1, :] -= gt * m
    bracket[:, n - 1] -= gt * m
    bracket[n - 1, n - 1] += gt * gt * mu
    return SymTraceless.deviatoric(bracket)


def to_lab(z_acc: StateZ, t: float, setup: FluidSetup) -> StateZ:
    """Map an accelerated-frame state (mu, w, m, sigma, q) to the lab frame."""
    n = setup.n
    if z_acc.n != n:
        raise ValueError(f"state dimension {z_acc.n} != setup dimension {n}")
    gt = setup.g * t
    e_last = np.zeros(n)
    e_last[n - 1] = 1.0
    dev, mean = _vertical_bracket(z_acc.u, z_acc.rho, t, setup)
    return StateZ(
        rho=z_acc.rho,
        v=z_acc.v - gt * e_last,
        u=z_acc.u - z_acc.rho * gt * e_last,
        S=z_acc.S + dev,
        P=z_acc.P + mean,
    )


def to_acc(z_lab: StateZ, t: float, setup: FluidSetup) -> StateZ:
    """Map a lab-frame state (rho, v, u, S, P) to the accelerated frame."""
    n = setup.n
    if z_lab.n != n:
        raise ValueError(f"state dimension {z_lab.n} != setup dimension {n}")
    gt = setup.g * t
    e_last = np.zeros(n)
    e_last[n - 1] = 1.0
    m_acc = z_lab.u + z_lab.rho * gt * e_last
    dev, mean = _vertical_bracket(m_acc, z_lab.rho, t, setup)
    return StateZ(
        rho=z_lab.rho,
        v=z_lab.v + gt * e_last,
        u=m_acc,
        S=z_lab.S - dev,
        P=z_lab.P - mean,
    )


# }}}

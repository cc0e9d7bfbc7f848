"""Forward-mode differentiation arithmetic.

Two small truncated-Taylor ("jet") types power every derivative in this
package:

* :class:`Dual2` -- one independent variable, derivatives up to order 2.
  Used for profile functions of a single density/similarity variable.
* :class:`Jet3` -- three independent variables ``(x1, x2, t)``, batched over
  numpy arrays, carrying derivatives up to order 2 or 3.  Order 2 yields
  field values of potential-built states (which are second derivatives of
  the potentials); order 3 additionally yields the first derivatives of
  those states, which is what pointwise residuals of the linear system need.

All payloads broadcast: ``value`` may be any array shape ``S``; ``grad`` is
``S + (3,)``, ``hess`` ``S + (3, 3)``, ``third`` ``S + (3, 3, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dual2",
    "Jet3",
    "dual_constant",
    "dual_variable",
    "jet_constant",
    "jet_variable",
]


# {{{ one-variable order-2 duals


@dataclass(frozen=True)
class Dual2:
    """Value and first/second derivative with respect to one variable."""

    f0: np.ndarray | float
    f1: np.ndarray | float
    f2: np.ndarray | float

    def __add__(self, other: "Dual2 | float") -> "Dual2":
        if isinstance(other, Dual2):
            return Dual2(self.f0 + other.f0, self.f1 + other.f1, self.f2 + other.f2)
        return Dual2(self.f0 + other, self.f1, self.f2)

    __radd__ = __add__

    def __neg__(self) -> "Dual2":
        return Dual2(-self.f0, -self.f1, -self.f2)

    def __sub__(self, other: "Dual2 | float") -> "Dual2":
        return self + (-other if isinstance(other, Dual2) else -other)

    def __rsub__(self, other: float) -> "Dual2":
        return (-self) + other

    def __mul__(self, other: "Dual2 | float") -> "Dual2":
        if isinstance(other, Dual2):
            return Dual2(
                self.f0 * other.f0,
                self.f1 * other.f0 + self.f0 * other.f1,
                self.f2 * other.f0 + 2.0 * self.f1 * other.f1 + self.f0 * other.f2,
            )
        return Dual2(self.f0 * other, self.f1 * other, self.f2 * other)

    __rmul__ = __mul__

    def __truediv__(self, other: "Dual2 | float") -> "Dual2":
        if isinstance(other, Dual2):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other: float) -> "Dual2":
        return self.reciprocal() * other

    def apply(self, g0, g1, g2) -> "Dual2":
        """Compose with a scalar function given its derivatives at ``f0``."""
        return Dual2(g0, g1 * self.f1, g2 * self.f1 * self.f1 + g1 * self.f2)

    def reciprocal(self) -> "Dual2":
        inv = 1.0 / self.f0
        return self.apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def sqrt(self) -> "Dual2":
        root = np.sqrt(self.f0)
        return self.apply(root, 0.5 / root, -0.25 / (root * self.f0))

    def exp(self) -> "Dual2":
        e = np.exp(self.f0)
        return self.apply(e, e, e)


def dual_variable(values) -> Dual2:
    """The identity function evaluated at ``values``."""
    x = np.asarray(values, dtype=float)
    return Dual2(x, np.ones_like(x), np.zeros_like(x))


def dual_constant(values) -> Dual2:
    c = np.asarray(values, dtype=float)
    return Dual2(c, np.zeros_like(c), np.zeros_like(c))


# }}}


# {{{ three-variable batched jets


def _sym3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetrized outer product ``a_i b_jk + a_j b_ik + a_k b_ij``."""
    t = np.einsum("...i,...jk->...ijk", a, b)
    return t + t.transpose(*range(t.ndim - 3), -2, -3, -1) + t.transpose(
        *range(t.ndim - 3), -2, -1, -3
    )


@dataclass(frozen=True)
class Jet3:
    """Batched Taylor data in the three variables ``(x1, x2, t)``.

    ``third`` is ``None`` for order-2 jets.  All arithmetic keeps the order
    of its operands (mixing orders is a bug and raises).
    """

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 2 if self.third is None else 3

    def _check(self, other: "Jet3") -> None:
        if (self.third is None) != (other.third is None):
            raise ValueError("cannot mix jets of different order")

    def __add__(self, other: "Jet3 | float") -> "Jet3":
        if isinstance(other, Jet3):
            self._check(other)
            third = None if self.third is None else self.third + other.third
            return Jet3(self.value + other.value, self.grad + other.grad,
                        self.hess + other.hess, third)
        return Jet3(self.value + other, self.grad, self.hess, self.third)

    __radd__ = __add__

    def __neg__(self) -> "Jet3":
        return Jet3(-self.value, -self.grad, -self.hess,
                    None if self.third is None else -self.third)

    def __sub__(self, other: "Jet3 | float") -> "Jet3":
        if isinstance(other, Jet3):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other: float) -> "Jet3":
        return (-self) + other

    def __mul__(self, other: "Jet3 | float") -> "Jet3":
        if not isinstance(other, Jet3):
            return Jet3(self.value * other, self.grad * other, self.hess * other,
                        None if self.third is None else self.third * other)
        self._check(other)
        u0 = self.value[..., None]
        v0 = other.value[..., None]
        grad = u0 * other.grad + v0 * self.grad
        outer = np.einsum("...i,...j->...ij", self.grad, other.grad)
        hess = (u0[..., None] * other.hess + v0[..., None] * self.hess
                + outer + outer.transpose(*range(outer.ndim - 2), -1, -2))
        third = None
        if self.third is not None:
            third = (u0[..., None, None] * other.third
                     + v0[..., None, None] * self.third
                     + _sym3(self.grad, other.hess)
                     + _sym3(other.grad, self.hess))
        return Jet3(self.value * other.value, grad, hess, third)

    __rmul__ = __mul__

    def apply(self, f0, f1, f2, f3=None) -> "Jet3":
        """Compose with a scalar function given derivatives at ``value``.

        ``f3`` is required for (and only used by) order-3 jets.
        """
        f1e = np.asarray(f1)[..., None]
        f2e = np.asarray(f2)[..., None, None]
        grad = f1e * self.grad
        gg = np.einsum("...i,...j->...ij", self.grad, self.grad)
        hess = f1e[..., None] * self.hess + f2e * gg
        third = None
        if self.third is not None:
            if f3 is None:
                raise ValueError("order-3 composition needs the third derivative")
            f3e = np.asarray(f3)[..., None, None, None]
            ggg = np.einsum("...i,...jk->...ijk", self.grad, gg)
            third = (f1e[..., None, None] * self.third
                     + f2e[..., None] * _sym3(self.grad, self.hess)
                     + f3e * ggg)
        return Jet3(np.asarray(f0), grad, hess, third)

    def reciprocal(self) -> "Jet3":
        inv = 1.0 / self.value
        inv2 = inv * inv
        return self.apply(inv, -inv2, 2.0 * inv2 * inv,
                          None if self.third is None else -6.0 * inv2 * inv2)

    def __truediv__(self, other: "Jet3 | float") -> "Jet3":
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def exp(self) -> "Jet3":
        e = np.exp(self.value)
        return self.apply(e, e, e, None if self.third is None else e)

    def cos(self) -> "Jet3":
        c, s = np.cos(self.value), np.sin(self.value)
        return self.apply(c, -s, -c, None if self.third is None else s)

    def sin(self) -> "Jet3":
        c, s = np.cos(self.value), np.sin(self.value)
        return self.apply(s, c, -s, None if self.third is None else -c)


def jet_variable(index: int, values, order: int = 2) -> Jet3:
    """The coordinate function ``x_index`` (0: x1, 1: x2, 2: t)."""
    if index not in (0, 1, 2):
        raise ValueError(f"coordinate index must be 0, 1 or 2, got {index}")
    if order not in (2, 3):
        raise ValueError(f"jet order must be 2 or 3, got {order}")
    x = np.asarray(values, dtype=float)
    grad = np.zeros(x.shape + (3,))
    grad[..., index] = 1.0
    hess = np.zeros(x.shape + (3, 3))
    third = np.zeros(x.shape + (3, 3, 3)) if order == 3 else None
    return Jet3(x, grad, hess, third)


def jet_constant(values, shape=(), order: int = 2) -> Jet3:
    """A constant jet broadcast to ``shape``."""
    x = np.broadcast_to(np.asarray(values, dtype=float), shape).astype(float)
    third = np.zeros(x.shape + (3, 3, 3)) if order == 3 else None
    return Jet3(x, np.zeros(x.shape + (3,)), np.zeros(x.shape + (3, 3)), third)


# }}}

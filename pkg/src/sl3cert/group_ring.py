"""Sparse elements of the group ring over Q (exact) or R (double precision).

A :class:`RingElement` is a finitely supported map from group elements to
scalars. Exactly two scalar kinds exist, ``Fraction`` and ``float``; they
never mix, and conversion goes one way through :meth:`RingElement.to_float`.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from .matrix_group import Basis, GeneratorSet, GroupElement, identity, inverse
from .matrix_group import mul as _gmul

def _coerce(value, kind):
    if kind is Fraction:
        if isinstance(value, float):
            raise TypeError("float coefficient in an exact ring element")
        if not isinstance(value, Rational):
            raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")
        return Fraction(value)
    return float(value)


class RingElement:
    """Finitely supported sum of group elements with nonzero coefficients."""

    __slots__ = ("coeffs", "kind")

    def __init__(self, coeffs: Mapping[GroupElement, object] | None = None, kind=Fraction):
        if kind not in (Fraction, float):
            raise TypeError("kind must be Fraction or float")
        self.kind = kind
        self.coeffs = {}
        if coeffs:
            for g, c in coeffs.items():
                c = _coerce(c, kind)
                if c:
                    self.coeffs[g] = c

    @classmethod
    def _raw(cls, coeffs: dict, kind) -> "RingElement":
        x = object.__new__(cls)
        x.coeffs = {g: c for g, c in coeffs.items() if c}
        x.kind = kind
        return x

    @classmethod
    def zero(cls, kind=Fraction) -> "RingElement":
        return cls._raw({}, kind)

    @classmethod
    def singleton(cls, g: GroupElement, coeff=1, kind=Fraction) -> "RingElement":
        return cls({g: coeff}, kind)

    @classmethod
    def one(cls, n: int = 3, kind=Fraction) -> "RingElement":
        return cls.singleton(identity(n), 1, kind)

    # container protocol

    def __getitem__(self, g: GroupElement):
        return self.coeffs.get(g, self.kind(0))

    def __len__(self):
        return len(self.coeffs)

    def support(self) -> set:
        return set(self.coeffs)

    def items(self):
        return self.coeffs.items()

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.kind is other.kind and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        terms = ", ".join(f"{c}*{g.entries}" for g, c in list(self.coeffs.items())[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"RingElement[{self.kind.__name__}]({{{terms}{more}}})"

    # arithmetic

    def _check(self, other: "RingElement"):
        if not isinstance(other, RingElement):
            raise TypeError(f"expected RingElement, got {type(other).__name__}")
        if other.kind is not self.kind:
            raise TypeError("cannot mix exact and float ring elements")

    def __add__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return add(self, negate(other))

    def __neg__(self):
        return negate(self)

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        if isinstance(other, RingElement):
            return NotImplemented
        return scale(self, other)

    def to_float(self) -> "RingElement":
        return RingElement._raw({g: float(c) for g, c in self.coeffs.items()}, float)

    def is_hermitian(self) -> bool:
        return star(self) == self


def add(x: RingElement, y: RingElement) -> RingElement:
    x._check(y)
    out = dict(x.coeffs)
    for g, c in y.coeffs.items():
        out[g] = out.get(g, 0) + c
    return RingElement._raw(out, x.kind)


def negate(x: RingElement) -> RingElement:
    return RingElement._raw({g: -c for g, c in x.coeffs.items()}, x.kind)


def scale(x: RingElement, s) -> RingElement:
    s = _coerce(s, x.kind)
    return RingElement._raw({g: s * c for g, c in x.coeffs.items()}, x.kind)


def mul(x: RingElement, y: RingElement) -> RingElement:
    """Convolution: the coefficient of k is the sum of x_g * y_h over gh = k."""
    x._check(y)
    out: dict = {}
    # deterministic summation order: x's insertion order, then y's
    yitems = list(y.coeffs.items())
    for g, a in x.coeffs.items():
        for h, b in yitems:
            k = _gmul(g, h)
            out[k] = out.get(k, 0) + a * b
    return RingElement._raw(out, x.kind)


def star(x: RingElement) -> RingElement:
    return RingElement._raw({inverse(g): c for g, c in x.coeffs.items()}, x.kind)


def augmentation(x: RingElement):
    return sum(x.coeffs.values(), x.kind(0))


def l1_norm(x: RingElement):
    return sum((abs(c) for c in x.coeffs.values()), x.kind(0))


def laplacian(gens: GeneratorSet, kind=Fraction) -> RingElement:
    """|S| at the identity and -1 at every generator."""
    coeffs = {identity(gens.n): len(gens)}
    for s in gens:
        coeffs[s] = -1
    return RingElement(coeffs, kind)


def target(eps, gens: GeneratorSet) -> RingElement:
    """The exact element Delta^2 - eps * Delta."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    lap = laplacian(gens)
    return lap * lap - lap * eps


def to_vector(x: RingElement, basis: Basis) -> np.ndarray:
    """Coefficient vector over ``basis``; object dtype in exact mode."""
    dtype = object if x.kind is Fraction else float
    v = np.array([x.kind(0)] * len(basis), dtype=dtype)
    for g, c in x.coeffs.items():
        try:
            v[basis.index_of[g]] = c
        except KeyError:
            raise ValueError(f"{g} is not in the basis") from None
    return v


def from_vector(v: Iterable, basis: Basis, kind=Fraction) -> RingElement:
    v = list(v)
    if len(v) != len(basis):
        raise ValueError("vector length does not match the basis")
    return RingElement({g: c for g, c in zip(basis.elements, v)}, kind)

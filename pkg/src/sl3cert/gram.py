"""Gram-matrix constraint systems over a ball basis.

For a basis a_1..a_m the Gram evaluation of P is sum_ij P_ij a_i^-1 a_j, so
each matrix entry (i, j) contributes to exactly one group element. The
pairs sharing a group element form a class, and the constraints
"class sum = target coefficient" partition the m^2 entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .group_ring import RingElement
from .matrix_group import Basis, GroupElement, ball, inverse, mul


class MissingProductError(RuntimeError):
    """A product a_i^-1 a_j was not found in the doubled ball."""


class UnsupportedTargetError(ValueError):
    """The target has a coefficient no Gram entry can reach."""


@dataclass(frozen=True)
class ProductTable:
    """Classification of index pairs by the group element a_i^-1 a_j.

    ``pair_class[i, j]`` indexes into ``big`` (the ball of twice the radius).
    Only attained elements get a class; ``class_ids`` lists them in
    canonical order and ``class_members[k]`` holds flat indices i*m + j.
    """

    basis: Basis
    big: Basis
    pair_class: np.ndarray
    class_ids: np.ndarray
    class_members: list = field(repr=False)

    @property
    def m(self) -> int:
        return self.basis.m

    @property
    def num_classes(self) -> int:
        return len(self.class_ids)

    def members_of(self, g: GroupElement) -> np.ndarray:
        k = self.slot.get(self.big.index_of.get(g, -1))
        if k is None:
            return np.empty(0, dtype=np.int64)
        return self.class_members[k]

    @property
    def slot(self) -> dict:
        slot = self.__dict__.get("_slot_cache")
        if slot is None:
            slot = {int(c): k for k, c in enumerate(self.class_ids)}
            object.__setattr__(self, "_slot_cache", slot)
        return slot

    def flat_slots(self) -> np.ndarray:
        """For every flat index i*m + j, the position of its class in ``class_ids``."""
        cached = self.__dict__.get("_flat_slots")
        if cached is None:
            cached = np.empty(self.m * self.m, dtype=np.int64)
            for k, members in enumerate(self.class_members):
                cached[members] = k
            object.__setattr__(self, "_flat_slots", cached)
        return cached


def build_product_table(basis: Basis, big: Basis | None = None) -> ProductTable:
    if big is None:
        big = ball(basis.gens, 2 * basis.radius)
    m = basis.m
    invs = [inverse(a) for a in basis.elements]
    pair_class = np.empty((m, m), dtype=np.int64)
    index_of = big.index_of
    for i in range(m):
        ai = invs[i]
        row = pair_class[i]
        for j, aj in enumerate(basis.elements):
            k = index_of.get(mul(ai, aj))
            if k is None:
                raise MissingProductError(f"a_{i}^-1 a_{j} is missing from the ball of radius {big.radius}")
            row[j] = k
    flat = pair_class.ravel()
    order = np.argsort(flat, kind="stable")
    ids, starts = np.unique(flat[order], return_index=True)
    members = np.split(order, starts[1:])
    return ProductTable(basis, big, pair_class, ids, members)


@dataclass(frozen=True)
class ConstraintSystem:
    """One constraint per attained group element g: sum of P over class(g) = rhs."""

    table: ProductTable
    rhs: tuple  # Fractions aligned with table.class_ids
    target: RingElement

    @property
    def m(self) -> int:
        return self.table.m

    @property
    def classes(self):
        for k, c in enumerate(self.table.class_ids):
            yield self.table.big.elements[c], self.table.class_members[k], self.rhs[k]

    def rhs_of(self, g: GroupElement) -> Fraction:
        k = self.table.slot.get(self.table.big.index_of.get(g, -1))
        if k is None:
            raise KeyError(g)
        return self.rhs[k]

    def rhs_array(self) -> np.ndarray:
        return np.array([float(r) for r in self.rhs])

    def class_sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.table.class_members], dtype=np.int64)


def assemble(table: ProductTable, target: RingElement) -> ConstraintSystem:
    if target.kind is not Fraction:
        raise TypeError("targets must be exact")
    slot = table.slot
    rhs = [Fraction(0)] * table.num_classes
    for g, c in target.items():
        big_idx = table.big.index_of.get(g)
        if big_idx is None:
            raise UnsupportedTargetError(f"target support element {g} lies outside the ball of radius {table.big.radius}")
        k = slot.get(big_idx)
        if k is None:
            raise UnsupportedTargetError(f"target support element {g} is never of the form a_i^-1 a_j")
        rhs[k] = c
    return ConstraintSystem(table, tuple(rhs), target)


def class_sums(P: np.ndarray, table: ProductTable) -> np.ndarray:
    """Float class sums of P, in ``class_ids`` order."""
    return np.bincount(table.flat_slots(), weights=np.asarray(P, dtype=float).ravel(),
                       minlength=table.num_classes)


def evaluate_gram(P, table: ProductTable) -> RingElement:
    """The element sum_ij P_ij a_i^-1 a_j.

    Float arrays give a float element, integer or object (Fraction)
    arrays are summed exactly.
    """
    P = np.asarray(P)
    m = table.m
    if P.shape != (m, m):
        raise ValueError(f"expected a {m}x{m} matrix, got shape {P.shape}")
    big = table.big.elements
    if P.dtype.kind == "f":
        sums = class_sums(P, table)
        return RingElement._raw(
            {big[c]: float(s) for c, s in zip(table.class_ids, sums)}, float)
    flat = P.ravel()
    out = {}
    for c, members in zip(table.class_ids, table.class_members):
        s = sum((flat[k] for k in members.tolist()), 0)
        if s:
            out[big[c]] = Fraction(s)
    return RingElement._raw(out, Fraction)


def evaluate_gram_scaled(N: np.ndarray, denom: int, table: ProductTable) -> RingElement:
    """Exact Gram evaluation of N / denom for an integer matrix N."""
    N = np.asarray(N)
    if N.dtype.kind not in "iuO":
        raise TypeError("N must be an integer matrix")
    if N.dtype.kind != "O":
        bound = int(np.abs(N).max(initial=0)) * N.size
        if bound >= 2**62:
            N = N.astype(object)
    flat = N.ravel()
    big = table.big.elements
    out = {}
    if flat.dtype != object:
        order = np.concatenate(table.class_members)
        starts = np.cumsum([0] + [len(c) for c in table.class_members[:-1]])
        sums = np.add.reduceat(flat[order], starts)
        for c, s in zip(table.class_ids, sums.tolist()):
            if s:
                out[big[c]] = Fraction(s, denom)
    else:
        for c, members in zip(table.class_ids, table.class_members):
            s = sum(flat[k] for k in members.tolist())
            if s:
                out[big[c]] = Fraction(s, denom)
    return RingElement._raw(out, Fraction)

"""Exact integer matrices of determinant one, generating sets and word-length balls."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt
from typing import Iterable, Sequence


class GroupElement:
    """Square integer matrix with determinant 1, stored row-major as a tuple.

    Instances are immutable and hash by their entries.
    """

    __slots__ = ("entries", "n", "_hash")

    def __init__(self, entries: Iterable[int], *, check: bool = True):
        entries = tuple(int(x) for x in entries)
        n = isqrt(len(entries))
        if n * n != len(entries) or n == 0:
            raise ValueError(f"{len(entries)} entries do not form a square matrix")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_hash", hash(entries))
        if check and _det(entries, n) != 1:
            raise ValueError(f"determinant of {self.rows()} is not 1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GroupElement":
        return cls([x for row in rows for x in row])

    @classmethod
    def _trusted(cls, entries: tuple, n: int) -> "GroupElement":
        g = object.__new__(cls)
        object.__setattr__(g, "entries", entries)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "_hash", hash(entries))
        return g

    def __setattr__(self, name, value):
        raise AttributeError("GroupElement is immutable")

    def rows(self) -> list[list[int]]:
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def det(self) -> int:
        return _det(self.entries, self.n)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.entries == other.entries

    def __lt__(self, other: "GroupElement") -> bool:
        return self.entries < other.entries

    def __hash__(self):
        return self._hash

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        return mul(self, other)

    def __repr__(self):
        return f"GroupElement({self.rows()})"

    def transpose(self) -> "GroupElement":
        n = self.n
        a = self.entries
        return GroupElement._trusted(tuple(a[j * n + i] for i in range(n) for j in range(n)), n)

    def is_identity(self) -> bool:
        return self == identity(self.n)


def _det(a: Sequence[int], n: int) -> int:
    if n == 1:
        return a[0]
    if n == 2:
        return a[0] * a[3] - a[1] * a[2]
    if n == 3:
        return (a[0] * (a[4] * a[8] - a[5] * a[7])
                - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6]))
    total = 0
    for j in range(n):
        if a[j]:
            total += (-1) ** j * a[j] * _det(_minor(a, n, 0, j), n - 1)
    return total


def _minor(a: Sequence[int], n: int, row: int, col: int) -> tuple:
    return tuple(a[i * n + j] for i in range(n) if i != row for j in range(n) if j != col)


def identity(n: int = 3) -> GroupElement:
    return GroupElement._trusted(tuple(int(i == j) for i in range(n) for j in range(n)), n)


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    n = g.n
    if h.n != n:
        raise ValueError("matrix sizes differ")
    a, b = g.entries, h.entries
    if n == 3:
        a0, a1, a2, a3, a4, a5, a6, a7, a8 = a
        b0, b1, b2, b3, b4, b5, b6, b7, b8 = b
        out = (
            a0 * b0 + a1 * b3 + a2 * b6, a0 * b1 + a1 * b4 + a2 * b7, a0 * b2 + a1 * b5 + a2 * b8,
            a3 * b0 + a4 * b3 + a5 * b6, a3 * b1 + a4 * b4 + a5 * b7, a3 * b2 + a4 * b5 + a5 * b8,
            a6 * b0 + a7 * b3 + a8 * b6, a6 * b1 + a7 * b4 + a8 * b7, a6 * b2 + a7 * b5 + a8 * b8,
        )
    else:
        out = tuple(
            sum(a[i * n + k] * b[k * n + j] for k in range(n))
            for i in range(n) for j in range(n)
        )
    return GroupElement._trusted(out, n)


def inverse(g: GroupElement) -> GroupElement:
    """Inverse via the adjugate; exact because the determinant is 1."""
    n = g.n
    a = g.entries
    if n == 1:
        return g
    # adj[i][j] = (-1)^(i+j) * det(minor(j, i))
    out = tuple(
        (-1) ** (i + j) * _det(_minor(a, n, j, i), n - 1)
        for i in range(n) for j in range(n)
    )
    return GroupElement._trusted(out, n)


def word_product(word: Sequence[int], members: Sequence[GroupElement], n: int = 3) -> GroupElement:
    out = identity(n)
    for i in word:
        out = mul(out, members[i])
    return out


def elementary(n: int, i: int, j: int, k: int = 1) -> GroupElement:
    """Identity matrix with ``k`` added at position (i, j), i != j."""
    if i == j:
        raise ValueError("elementary matrices need i != j")
    e = [int(r == c) for r in range(n) for c in range(n)]
    e[i * n + j] = k
    return GroupElement._trusted(tuple(e), n)


def canonical_key(g: GroupElement) -> tuple:
    return g.entries


@dataclass(frozen=True)
class GeneratorSet:
    members: tuple[GroupElement, ...]
    inverse_index: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("generators must be distinct")
        if len(self.inverse_index) != len(self.members):
            raise ValueError("inverse_index has the wrong length")
        n = self.n
        for i, g in enumerate(self.members):
            if g == identity(n):
                raise ValueError("the identity cannot be a generator")
            if mul(self.members[self.inverse_index[i]], g) != identity(n):
                raise ValueError(f"generator {i} has no inverse in the set")

    @classmethod
    def from_elements(cls, elements: Iterable[GroupElement]) -> "GeneratorSet":
        """Deduplicate, sort canonically and pair up inverses.

        Raises ValueError when the set is not closed under inversion.
        """
        members = tuple(sorted(set(elements), key=canonical_key))
        pos = {g: i for i, g in enumerate(members)}
        try:
            inv = tuple(pos[inverse(g)] for g in members)
        except KeyError as exc:
            raise ValueError("generating set is not symmetric") from exc
        return cls(members, inv)

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def contains_self_inverse(self) -> bool:
        return any(self.inverse_index[i] == i for i in range(len(self.members)))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def base_generators() -> list[GroupElement]:
    """The three upper unitriangular elementary matrices E12, E13, E23."""
    return [
        GroupElement.from_rows([[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
        GroupElement.from_rows([[1, 0, 1], [0, 1, 0], [0, 0, 1]]),
        GroupElement.from_rows([[1, 0, 0], [0, 1, 1], [0, 0, 1]]),
    ]


def standard_generators() -> GeneratorSet:
    """The 12 elementary matrices E_ij(+-1) of SL(3, Z), canonically ordered."""
    base = base_generators()
    closed = base + [g.transpose() for g in base]
    closed = closed + [inverse(g) for g in closed]
    return GeneratorSet.from_elements(closed)


@dataclass(frozen=True)
class Basis:
    """Elements of a word-length ball, ordered by (word length, entries).

    ``words[k]`` is a generator-index word whose product is ``elements[k]``.
    """

    elements: tuple[GroupElement, ...]
    lengths: tuple[int, ...]
    words: tuple[tuple[int, ...], ...]
    radius: int
    gens: GeneratorSet
    index_of: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.index_of is None:
            object.__setattr__(self, "index_of", {g: i for i, g in enumerate(self.elements)})
        if len(self.index_of) != len(self.elements):
            raise ValueError("basis elements must be distinct")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __contains__(self, g):
        return g in self.index_of

    @property
    def m(self) -> int:
        return len(self.elements)


def ball(gens: GeneratorSet, radius: int) -> Basis:
    """All products of at most ``radius`` generators.

    BFS by right multiplication; each layer is sorted canonically before
    it is expanded so words and order are deterministic.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    e = identity(gens.n)
    seen = {e: ()}
    elements = [e]
    lengths = [0]
    layer = [e]
    for depth in range(1, radius + 1):
        new = []
        for g in layer:
            word = seen[g]
            for i, s in enumerate(gens.members):
                h = mul(g, s)
                if h not in seen:
                    seen[h] = word + (i,)
                    new.append(h)
        new.sort(key=canonical_key)
        elements.extend(new)
        lengths.extend([depth] * len(new))
        layer = new
        if not new:
            break
    return Basis(
        elements=tuple(elements),
        lengths=tuple(lengths),
        words=tuple(seen[g] for g in elements),
        radius=radius,
        gens=gens,
    )

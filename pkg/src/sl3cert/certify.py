"""Rounding a numeric Gram matrix to an exact certificate and checking it.

Everything downstream of :func:`round_and_fix` runs on Python integers and
``Fraction``; no float enters :func:`verify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .gram import build_product_table, evaluate_gram_scaled
from .group_ring import RingElement, augmentation, l1_norm, star, target
from .matrix_group import Basis, GeneratorSet, GroupElement, ball

FORMAT_HEADER = "SOSCERT v1"
DEFAULT_DENOMINATOR = 10**6
DEFAULT_THRESHOLD = Fraction(1, 6)


class CertificateError(ValueError):
    """A certificate is malformed or inconsistent with its basis."""


class RowSumError(CertificateError):
    pass


class DimensionError(CertificateError):
    pass


class SupportError(CertificateError):
    pass


class CertificateFormatError(CertificateError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NotPSDError(ValueError):
    """The numeric Gram matrix is too far from PSD to be worth rounding."""


def sqrt_factor(P: np.ndarray, reject_below: float = -1e-6) -> np.ndarray:
    """Symmetric square root of P; negative eigenvalues are clamped to 0."""
    P = np.asarray(P, dtype=float)
    w, V = np.linalg.eigh((P + P.T) / 2)
    if w.size and w[0] < reject_below:
        raise NotPSDError(f"minimum eigenvalue {w[0]:.3e} is below {reject_below:.0e}")
    root = V * np.sqrt(np.clip(w, 0.0, None))
    return root @ V.T


def round_and_fix(Qf: np.ndarray, D: int, fix_column: int = 0) -> np.ndarray:
    """Round D*Qf to integers, then move each row sum into ``fix_column``.

    Rows of the result sum to exactly zero.
    """
    if D < 1:
        raise ValueError("denominator must be positive")
    scaled = np.rint(np.asarray(Qf, dtype=float) * D)
    if scaled.size and np.abs(scaled).max() >= 2**53:
        raise OverflowError("rounded entries exceed exact float range; lower D")
    Q = scaled.astype(np.int64)
    Q[:, fix_column] -= Q.sum(axis=1)
    return Q


def gram_numerator(Q: np.ndarray) -> np.ndarray:
    """Q^t Q exactly, in int64 when that cannot overflow and Python ints otherwise."""
    Q = np.asarray(Q)
    if Q.size == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if Q.dtype != object:
        big = int(np.abs(Q).max())
        if big * big * Q.shape[0] < 2**62:
            Q = Q.astype(np.int64)
            return Q.T @ Q
    Qo = np.asarray(Q, dtype=object)
    return Qo.T.dot(Qo)


def lemma_constant(d: int, has_self_inverse: bool) -> Fraction:
    """Multiplier of ||c||_1 * Delta that makes c + ... a sum of squares.

    Valid when every support element of the hermitian, augmentation-zero c
    is a product of at most 2**d generators.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    return Fraction(2) ** (2 * d - 1 if has_self_inverse else 2 * d - 2)


def lemma_bound(d: int, l1, has_self_inverse: bool) -> Fraction:
    l1 = Fraction(l1)
    if l1 < 0:
        raise ValueError("an l1 norm is nonnegative")
    return lemma_constant(d, has_self_inverse) * l1


def support_exponent(radius: int) -> int:
    """Smallest d with 2**d >= 2*radius."""
    if radius <= 0:
        return 0
    return max(0, math.ceil(math.log2(2 * radius)))


@dataclass(frozen=True)
class VerificationReport:
    eps: Fraction
    l1_residual: Fraction
    d: int
    lemma_constant: Fraction
    eps_certified: Fraction
    normalized_gap: Fraction
    threshold: Fraction
    passed: bool

    def serialize(self) -> str:
        def q(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"
        lines = [
            f"eps={q(self.eps)}",
            f"l1_residual={q(self.l1_residual)}",
            f"d={self.d}",
            f"lemma_constant={q(self.lemma_constant)}",
            f"eps_certified={q(self.eps_certified)}",
            f"normalized_gap={q(self.normalized_gap)}",
            f"threshold={q(self.threshold)}",
            f"pass={'true' if self.passed else 'false'}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "VerificationReport":
        fields = dict(line.split("=", 1) for line in text.strip().splitlines())
        return cls(
            eps=Fraction(fields["eps"]),
            l1_residual=Fraction(fields["l1_residual"]),
            d=int(fields["d"]),
            lemma_constant=Fraction(fields["lemma_constant"]),
            eps_certified=Fraction(fields["eps_certified"]),
            normalized_gap=Fraction(fields["normalized_gap"]),
            threshold=Fraction(fields["threshold"]),
            passed=fields["pass"] == "true",
        )


def certified_gap(eps, l1, d: int, has_self_inverse: bool, num_generators: int,
                  threshold=DEFAULT_THRESHOLD) -> VerificationReport:
    """Apply the quantitative lemma to a residual norm and build the report."""
    eps, l1, threshold = Fraction(eps), Fraction(l1), Fraction(threshold)
    const = lemma_constant(d, has_self_inverse)
    eps_cert = eps - const * l1
    return VerificationReport(
        eps=eps,
        l1_residual=l1,
        d=d,
        lemma_constant=const,
        eps_certified=eps_cert,
        normalized_gap=eps_cert / num_generators,
        threshold=threshold,
        passed=eps_cert >= threshold,
    )


@dataclass(frozen=True)
class Certificate:
    Q: np.ndarray
    D: int
    eps: Fraction
    radius: int
    generators: tuple[GroupElement, ...]
    _basis: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        Q = self.Q
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"Q must be square, got shape {Q.shape}")
        if Q.dtype.kind not in "iuO":
            raise TypeError("Q must hold integers")
        if self.D < 1:
            raise CertificateError("denominator must be positive")
        bad = [i for i, row in enumerate(Q) if sum(int(x) for x in row) != 0]
        if bad:
            raise RowSumError(f"rows {bad[:5]} of Q do not sum to zero")

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    @property
    def gens(self) -> GeneratorSet:
        return GeneratorSet.from_elements(self.generators)

    def basis(self) -> Basis:
        if not self._basis:
            self._basis.append(ball(self.gens, self.radius))
        return self._basis[0]

    def dumps(self) -> str:
        eps = Fraction(self.eps)
        lines = [
            FORMAT_HEADER,
            f"m={self.m} D={self.D} eps={eps.numerator}/{eps.denominator} radius={self.radius}",
            f"generators={len(self.generators)}",
        ]
        lines += [" ".join(str(x) for x in g.entries) for g in self.generators]
        lines.append("matrix")
        lines += [" ".join(str(int(x)) for x in row) for row in self.Q]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="ascii")

    @classmethod
    def load(cls, path) -> "Certificate":
        return cls.loads(Path(path).read_text(encoding="ascii"))

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        return _parse_certificate(text)


def _ints(line: str, lineno: int, count: int) -> list[int]:
    parts = line.split(" ")
    if len(parts) != count:
        raise CertificateFormatError(f"expected {count} integers, found {len(parts)}", lineno)
    if not all(_is_int(p) for p in parts):
        raise CertificateFormatError("malformed integer", lineno)
    return [int(p) for p in parts]


def _is_int(token: str) -> bool:
    t = token[1:] if token[:1] == "-" else token
    return t.isascii() and t.isdigit()


def _parse_certificate(text: str) -> Certificate:
    if not text.endswith("\n"):
        raise CertificateFormatError("file must end with a newline")
    lines = text[:-1].split("\n")
    pos = 0

    def take(what: str) -> tuple[str, int]:
        nonlocal pos
        if pos >= len(lines):
            raise CertificateFormatError(f"unexpected end of file, expected {what}", pos + 1)
        pos += 1
        return lines[pos - 1], pos

    line, n = take("header")
    if line != FORMAT_HEADER:
        raise CertificateFormatError(f"expected {FORMAT_HEADER!r}", n)

    line, n = take("parameters")
    params = {}
    for tok in line.split(" "):
        key, sep, val = tok.partition("=")
        if not sep or key in params:
            raise CertificateFormatError(f"bad parameter token {tok!r}", n)
        params[key] = val
    if set(params) != {"m", "D", "eps", "radius"}:
        raise CertificateFormatError("expected exactly m, D, eps and radius", n)
    try:
        m = _strict_int(params["m"])
        D = _strict_int(params["D"])
        radius = _strict_int(params["radius"])
        num, slash, den = params["eps"].partition("/")
        if not slash:
            raise ValueError
        eps = Fraction(_strict_int(num), _strict_int(den))
    except (ValueError, ZeroDivisionError):
        raise CertificateFormatError("malformed parameter value", n) from None
    if m < 1 or D < 1 or radius < 0:
        raise CertificateFormatError("m and D must be positive and radius nonnegative", n)

    line, n = take("generator count")
    key, sep, val = line.partition("=")
    if key != "generators" or not _is_int(val):
        raise CertificateFormatError("expected generators=<count>", n)
    k = int(val)
    generators = []
    for _ in range(k):
        line, n = take("generator row")
        entries = _ints(line, n, 9)
        try:
            generators.append(GroupElement(entries))
        except ValueError as exc:
            raise CertificateFormatError(str(exc), n) from None
    try:
        gens = GeneratorSet.from_elements(generators)
    except ValueError as exc:
        raise CertificateFormatError(f"invalid generating set: {exc}", n) from None
    if list(gens.members) != generators:
        raise CertificateFormatError("generators are not in canonical order", n)

    line, n = take("'matrix'")
    if line != "matrix":
        raise CertificateFormatError("expected 'matrix'", n)
    rows = []
    for i in range(m):
        line, n = take(f"matrix row {i}")
        row = _ints(line, n, m)
        if sum(row) != 0:
            raise CertificateFormatError(f"matrix row {i} sums to {sum(row)}, not 0", n)
        rows.append(row)
    if pos != len(lines):
        raise CertificateFormatError("trailing content after matrix", pos + 1)

    big = max((abs(x) for row in rows for x in row), default=0)
    Q = np.array(rows, dtype=np.int64 if big < 2**62 else object)
    return Certificate(Q=Q, D=D, eps=eps, radius=radius, generators=tuple(generators))


def _strict_int(s: str) -> int:
    if not _is_int(s):
        raise ValueError(s)
    return int(s)


def verify(cert: Certificate, gens: GeneratorSet | None = None,
           threshold=DEFAULT_THRESHOLD) -> VerificationReport:
    """Exact check of Delta^2 - eps*Delta = Q^tQ/D^2 (Gram) + c and the lemma bound."""
    cert_gens = cert.gens
    if gens is not None and tuple(gens.members) != tuple(cert_gens.members):
        raise CertificateError("certificate generators differ from the given generating set")
    gens = cert_gens
    basis = cert.basis()
    if basis.m != cert.m:
        raise DimensionError(f"certificate has m={cert.m} but the ball of radius {cert.radius} has {basis.m} elements")

    a = target(cert.eps, gens)
    table = build_product_table(basis)
    N = gram_numerator(cert.Q)
    if sum(int(x) for x in N.ravel()) != 0:
        raise RowSumError("entries of Q^tQ do not sum to zero")
    b = evaluate_gram_scaled(N, cert.D * cert.D, table)
    if augmentation(b) != 0:
        raise CertificateError("Gram evaluation is not in the augmentation ideal")

    c = a - b
    if star(c) != c:
        raise CertificateError("residual is not hermitian")
    if augmentation(c) != 0:
        raise CertificateError("residual is not in the augmentation ideal")
    big = table.big
    outside = [g for g in c.support() if g not in big]
    if outside:
        raise SupportError(f"{len(outside)} residual support elements lie outside the ball of radius {big.radius}")

    d = support_exponent(cert.radius)
    return certified_gap(cert.eps, l1_norm(c), d, gens.contains_self_inverse, len(gens), threshold)


def residual(cert: Certificate) -> RingElement:
    """The exact difference c = target - Gram(Q^tQ/D^2)."""
    table = build_product_table(cert.basis())
    b = evaluate_gram_scaled(gram_numerator(cert.Q), cert.D * cert.D, table)
    return target(cert.eps, cert.gens) - b

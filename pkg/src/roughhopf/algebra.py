"""Graded free modules over combinatorial basis keys.

A :class:`FormalSum` is a finite linear combination of basis keys with exact
(``Fraction``) or floating coefficients.  The basis family (words, planar
forests, non-planar forests, or tensor pairs of these) is carried by a
:class:`Basis` object, which knows how to grade, order, print and parse keys.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Callable, Iterable, Iterator, Mapping

__all__ = [
    "Basis",
    "TensorBasis",
    "FormalSum",
    "TruncationError",
    "tensor_basis",
    "as_coefficient",
    "pairing",
    "grade_project",
    "truncate",
    "linear_map",
    "bilinear_map",
    "tensor",
]


class TruncationError(ValueError):
    """Raised when two sums live in incompatible truncated quotients."""


def as_coefficient(c):
    """Normalize a scalar: ints/strings become ``Fraction``, floats stay floats."""
    if isinstance(c, (Fraction, float)):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c) if "." not in c and "e" not in c.lower() else float(c)
    if isinstance(c, Number):
        return c
    raise TypeError(f"not a coefficient: {c!r}")


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return repr(float(c))


class Basis:
    """A family of basis keys.

    Subclasses implement :meth:`grade`, :meth:`format_key` and
    :meth:`parse_key`.  ``weight`` is the pairing normalisation
    ``<k, k>`` (1 for Kronecker-type pairings).
    """

    name = "abstract"
    unit_key = ()

    def grade(self, key) -> int:
        raise NotImplementedError

    def weight(self, key) -> int:
        return 1

    def format_key(self, key) -> str:
        raise NotImplementedError

    def parse_key(self, text: str):
        raise NotImplementedError

    def sort_key(self, key):
        return (self.grade(key), self.format_key(key))

    def __repr__(self) -> str:
        return f"<basis {self.name}>"


class TensorBasis(Basis):
    """Keys are pairs ``(a, b)`` with ``a`` in ``left`` and ``b`` in ``right``."""

    separator = " ⊗ "

    def __init__(self, left: Basis, right: Basis):
        self.left = left
        self.right = right
        self.name = f"{left.name}⊗{right.name}"
        self.unit_key = (left.unit_key, right.unit_key)

    def grade(self, key) -> int:
        return self.left.grade(key[0]) + self.right.grade(key[1])

    def weight(self, key) -> int:
        return self.left.weight(key[0]) * self.right.weight(key[1])

    def format_key(self, key) -> str:
        return self.left.format_key(key[0]) + self.separator + self.right.format_key(key[1])

    def parse_key(self, text: str):
        a, b = text.split(self.separator.strip(), 1)
        return (self.left.parse_key(a.strip()), self.right.parse_key(b.strip()))

    def sort_key(self, key):
        return (self.grade(key), self.left.sort_key(key[0]), self.right.sort_key(key[1]))


@lru_cache(maxsize=None)
def tensor_basis(left: Basis, right: Basis) -> TensorBasis:
    return TensorBasis(left, right)


class FormalSum:
    """Immutable finite linear combination ``sum c_k * k``.

    ``level`` is an optional truncation level; terms of higher grade are
    discarded on construction, and zero coefficients are never stored.
    """

    __slots__ = ("basis", "terms", "level")

    def __init__(self, basis: Basis, terms: Mapping | Iterable = (), level: int | None = None):
        if level is not None and level < 0:
            raise ValueError("truncation level must be >= 0")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        grade = basis.grade
        for k, c in items:
            if level is not None and grade(k) > level:
                continue
            acc[k] = acc.get(k, 0) + c
        self.basis = basis
        self.terms = {k: as_coefficient(c) for k, c in acc.items() if c != 0}
        self.level = level

    # construction -----------------------------------------------------
    @classmethod
    def _raw(cls, basis, terms: dict, level):
        # trusted path: terms already filtered
        obj = cls.__new__(cls)
        obj.basis = basis
        obj.terms = terms
        obj.level = level
        return obj

    @classmethod
    def zero(cls, basis: Basis, level: int | None = None) -> "FormalSum":
        return cls._raw(basis, {}, level)

    @classmethod
    def unit(cls, basis: Basis, level: int | None = None) -> "FormalSum":
        return cls(basis, {basis.unit_key: Fraction(1)}, level)

    @classmethod
    def of(cls, basis: Basis, key, coeff=1, level: int | None = None) -> "FormalSum":
        return cls(basis, {key: coeff}, level)

    # basic protocol ---------------------------------------------------
    def __iter__(self) -> Iterator:
        return iter(self.sorted_items())

    def items(self):
        return self.terms.items()

    def sorted_items(self) -> list:
        sk = self.basis.sort_key
        return sorted(self.terms.items(), key=lambda kv: sk(kv[0]))

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __getitem__(self, key):
        return self.terms.get(key, 0)

    def coeff(self, key):
        return self.terms.get(key, 0)

    def __eq__(self, other) -> bool:
        if isinstance(other, FormalSum):
            return self.basis is other.basis and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.basis.name, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"FormalSum({self.basis.name}: {self.to_text()})"

    def __str__(self) -> str:
        return self.to_text()

    # arithmetic -------------------------------------------------------
    def _merged_level(self, other: "FormalSum", strict: bool):
        a, b = self.level, other.level
        if a is None:
            return b
        if b is None:
            return a
        if a != b and strict:
            raise TruncationError(f"incompatible truncation levels {a} and {b}")
        return min(a, b)

    def _check(self, other):
        if not isinstance(other, FormalSum):
            raise TypeError(f"expected FormalSum, got {type(other).__name__}")
        if other.basis is not self.basis:
            raise TypeError(f"basis mismatch: {self.basis.name} vs {other.basis.name}")

    def __add__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        self._check(other)
        level = self._merged_level(other, strict=True)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            v = terms.get(k, 0) + c
            if v == 0:
                terms.pop(k, None)
            else:
                terms[k] = v
        out = FormalSum._raw(self.basis, terms, level)
        if level is not None and (self.level is None or other.level is None):
            out = out.truncate(level)
        return out

    __radd__ = __add__

    def __neg__(self):
        return FormalSum._raw(self.basis, {k: -c for k, c in self.terms.items()}, self.level)

    def __sub__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        return self + (-other)

    def scale(self, c) -> "FormalSum":
        c = as_coefficient(c)
        if c == 0:
            return FormalSum.zero(self.basis, self.level)
        return FormalSum._raw(self.basis, {k: c * v for k, v in self.terms.items()}, self.level)

    def __mul__(self, c):
        if isinstance(c, FormalSum):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = as_coefficient(c)
        return self.scale(1 / c)

    def map_coefficients(self, fn: Callable) -> "FormalSum":
        return FormalSum(self.basis, {k: fn(c) for k, c in self.terms.items()}, self.level)

    def to_float(self) -> "FormalSum":
        return FormalSum._raw(self.basis, {k: float(c) for k, c in self.terms.items()}, self.level)

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def with_level(self, level: int | None) -> "FormalSum":
        if level is None:
            return FormalSum._raw(self.basis, dict(self.terms), None)
        return self.truncate(level)

    # grading ----------------------------------------------------------
    def truncate(self, n: int) -> "FormalSum":
        if n < 0:
            raise ValueError("truncation level must be >= 0")
        g = self.basis.grade
        return FormalSum._raw(self.basis, {k: c for k, c in self.terms.items() if g(k) <= n}, n)

    def grade_project(self, k: int) -> "FormalSum":
        if k < 0:
            raise ValueError("grade must be >= 0")
        g = self.basis.grade
        return FormalSum._raw(self.basis, {key: c for key, c in self.terms.items() if g(key) == k}, self.level)

    def max_grade(self) -> int:
        return max((self.basis.grade(k) for k in self.terms), default=0)

    def counit(self):
        return self.terms.get(self.basis.unit_key, 0)

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self.terms.values()), default=0.0)

    # text form --------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        fmt = self.basis.format_key
        return " + ".join(f"{_format_coeff(c)} * {fmt(k)}" for k, c in self.sorted_items())

    @classmethod
    def parse(cls, basis: Basis, text: str, level: int | None = None) -> "FormalSum":
        """Inverse of :meth:`to_text`.  A bare key means coefficient 1."""
        text = text.strip()
        if text == "0" or not text:
            return cls.zero(basis, level)
        terms: dict = {}
        for part in _split_terms(text):
            if " * " in part:
                c, k = part.split(" * ", 1)
                coeff = as_coefficient(c.strip())
            else:
                k = part
                coeff = Fraction(1)
                if k.startswith("-"):
                    coeff, k = Fraction(-1), k[1:].strip()
            key = basis.parse_key(k.strip())
            terms[key] = terms.get(key, 0) + coeff
        return cls(basis, terms, level)


def _split_terms(text: str) -> list[str]:
    # top-level " + " split; keys never contain that sequence
    return [p.strip() for p in text.split(" + ") if p.strip()]


# ---------------------------------------------------------------------------
# module-level operations


def truncate(x: FormalSum, n: int) -> FormalSum:
    return x.truncate(n)


def grade_project(x: FormalSum, k: int) -> FormalSum:
    return x.grade_project(k)


def pairing(x: FormalSum, y: FormalSum):
    """Bilinear pairing ``<x, y> = sum_k x_k y_k <k, k>``."""
    if x.basis is not y.basis:
        raise TypeError(f"cannot pair {x.basis.name} with {y.basis.name}")
    small, big = (x, y) if len(x.terms) <= len(y.terms) else (y, x)
    w = x.basis.weight
    total = 0
    for k, c in small.terms.items():
        d = big.terms.get(k)
        if d is not None:
            total += c * d * w(k)
    return total


def linear_map(fn: Callable, x: FormalSum, basis: Basis, level: int | None = None) -> FormalSum:
    """Extend ``fn: key -> FormalSum`` linearly to ``x``."""
    acc: dict = {}
    for k, c in x.terms.items():
        for k2, c2 in fn(k).terms.items():
            acc[k2] = acc.get(k2, 0) + c * c2
    return FormalSum(basis, acc, level)


def bilinear_map(fn: Callable, x: FormalSum, y: FormalSum, basis: Basis,
                 level: int | None = None) -> FormalSum:
    """Extend ``fn: (key, key) -> FormalSum`` bilinearly, skipping pairs above ``level``."""
    acc: dict = {}
    gx, gy = x.basis.grade, y.basis.grade
    ytems = list(y.terms.items())
    for a, ca in x.terms.items():
        ga = gx(a)
        for b, cb in ytems:
            if level is not None and ga + gy(b) > level:
                continue
            cab = ca * cb
            for k, c in fn(a, b).terms.items():
                acc[k] = acc.get(k, 0) + cab * c
    return FormalSum(basis, acc, level)


def tensor(x: FormalSum, y: FormalSum, level: int | None = None) -> FormalSum:
    """``x ⊗ y`` as a sum over the tensor basis."""
    basis = tensor_basis(x.basis, y.basis)
    acc = {}
    gx, gy = x.basis.grade, y.basis.grade
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            if level is not None and gx(a) + gy(b) > level:
                continue
            acc[(a, b)] = ca * cb
    return FormalSum(basis, acc, level)

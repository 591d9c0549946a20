"""Exact multivariate polynomials, polynomial vector fields and differential
operators in normal form.

Coordinates are indexed ``0..d-1``.  A polynomial is a map from exponent
tuples to coefficients; a differential operator maps sorted index tuples
``w`` (the partial ``∂_w``) to polynomial coefficients.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import as_coefficient

__all__ = ["Polynomial", "PolyVectorField", "DiffOperator", "random_polynomial", "random_field"]


class Polynomial:
    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping | Iterable = ()):
        self.dim = dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for e, c in items:
            e = tuple(e)
            if len(e) != dim:
                raise ValueError(f"exponent {e} does not have length {dim}")
            acc[e] = acc.get(e, 0) + c
        self.terms = {e: as_coefficient(c) for e, c in acc.items() if c != 0}

    @classmethod
    def _raw(cls, dim, terms):
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {})

    @classmethod
    def const(cls, dim: int, c=1) -> "Polynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def var(cls, dim: int, i: int) -> "Polynomial":
        e = [0] * dim
        e[i] = 1
        return cls._raw(dim, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "Polynomial":
        return cls(len(exps), {tuple(exps): c})

    # protocol ---------------------------------------------------------
    def items(self):
        return self.terms.items()

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.dim == other.dim and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mono = "*".join(f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(parts)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Polynomial.const(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) + c
            if v == 0:
                terms.pop(e, None)
            else:
                terms[e] = v
        return Polynomial._raw(self.dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = as_coefficient(other)
            if c == 0:
                return Polynomial.zero(self.dim)
            return Polynomial._raw(self.dim, {e: c * v for e, v in self.terms.items()})
        other = self._coerce(other)
        acc: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        return Polynomial._raw(self.dim, {e: c for e, c in acc.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.const(self.dim, 1)
        for _ in range(k):
            out = out * self
        return out

    def deriv(self, i: int) -> "Polynomial":
        acc = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                acc[e2] = c * k
        return Polynomial._raw(self.dim, acc)

    def partial(self, w: Sequence[int]) -> "Polynomial":
        out = self
        for i in w:
            out = out.deriv(i)
            if not out.terms:
                break
        return out

    def __call__(self, point: Sequence):
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = v * x ** k
            total = total + v
        return total

    def compose(self, maps: Sequence["Polynomial"]) -> "Polynomial":
        """``p(q_1(y), ..., q_d(y))``."""
        if len(maps) != self.dim:
            raise ValueError(f"need {self.dim} substitutions")
        dim = maps[0].dim
        powers: list[dict] = [{0: Polynomial.const(dim, 1)} for _ in maps]

        def pw(i, k):
            cache = powers[i]
            if k not in cache:
                cache[k] = pw(i, k - 1) * maps[i]
            return cache[k]

        out = Polynomial.zero(dim)
        for e, c in self.terms.items():
            term = Polynomial.const(dim, c)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            out = out + term
        return out

    def to_float(self) -> "Polynomial":
        return Polynomial._raw(self.dim, {e: float(c) for e, c in self.terms.items()})

    def to_json(self) -> list:
        out = []
        for e, c in sorted(self.terms.items()):
            c = Fraction(c)
            out.append({"exp": list(e), "num": c.numerator, "den": c.denominator})
        return out

    @classmethod
    def from_json(cls, data: list, dim: int | None = None) -> "Polynomial":
        if not data:
            if dim is None:
                raise ValueError("empty polynomial needs an explicit dimension")
            return cls.zero(dim)
        terms = []
        for t in data:
            terms.append((tuple(t["exp"]), Fraction(t["num"], t.get("den", 1))))
        d = len(terms[0][0])
        if dim is not None and d != dim:
            raise ValueError(f"polynomial has dimension {d}, expected {dim}")
        return cls(d, terms)


def random_polynomial(dim: int, degree: int, rng: random.Random, density: float = 1.0,
                      max_num: int = 3, max_den: int = 2) -> Polynomial:
    terms = {}
    for e in itertools.product(range(degree + 1), repeat=dim):
        if sum(e) > degree or rng.random() > density:
            continue
        terms[e] = Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
    return Polynomial(dim, terms)


class PolyVectorField:
    """``V = Σ V^i ∂_i`` with polynomial components."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a vector field needs at least one component")
        d = len(comps)
        for c in comps:
            if c.dim != d:
                raise ValueError(f"component dimension {c.dim} does not match field dimension {d}")
        self.components = comps

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, dim: int) -> "PolyVectorField":
        return cls([Polynomial.zero(dim)] * dim)

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "PolyVectorField":
        return cls([Polynomial.const(dim, 1) if k == i else Polynomial.zero(dim) for k in range(dim)])

    def __getitem__(self, k: int) -> Polynomial:
        return self.components[k]

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other) -> bool:
        if isinstance(other, PolyVectorField):
            return self.components == other.components
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __repr__(self) -> str:
        return "PolyVectorField(" + ", ".join(f"[{c}]" for c in self.components) + ")"

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return PolyVectorField([-a for a in self.components])

    def __mul__(self, f):
        """Scale by a number or multiply by a polynomial function."""
        return PolyVectorField([a * f for a in self.components])

    __rmul__ = __mul__

    def apply(self, f: Polynomial) -> Polynomial:
        """``V f = V^i ∂_i f``."""
        out = Polynomial.zero(f.dim)
        for i, c in enumerate(self.components):
            if c.terms:
                df = f.deriv(i)
                if df.terms:
                    out = out + c * df
        return out

    __call__ = apply

    def directional(self, U: "PolyVectorField") -> "PolyVectorField":
        """Flat derivative ``(V^i ∂_i U^k) ∂_k``."""
        return PolyVectorField([self.apply(u) for u in U.components])

    def evaluate(self, point: Sequence) -> tuple:
        return tuple(c(point) for c in self.components)

    def to_float(self) -> "PolyVectorField":
        return PolyVectorField([c.to_float() for c in self.components])

    def as_operator(self) -> "DiffOperator":
        return DiffOperator(self.dim, {(i,): c for i, c in enumerate(self.components)})

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, data: list) -> "PolyVectorField":
        d = len(data)
        return cls([Polynomial.from_json(c, d) for c in data])

    def to_arrays(self, exponents: dict | None = None):
        """Exponent matrix ``E`` (m×d) and coefficient matrix ``C`` (m×d) as floats."""
        exps = dict(exponents) if exponents is not None else {}
        for c in self.components:
            for e in c.terms:
                exps.setdefault(e, len(exps))
        E = np.zeros((len(exps), self.dim), dtype=np.int64)
        for e, r in exps.items():
            E[r] = e
        C = np.zeros((len(exps), self.dim))
        for k, c in enumerate(self.components):
            for e, v in c.terms.items():
                C[exps[e], k] = float(v)
        return E, C


def random_field(dim: int, degree: int, rng: random.Random, density: float = 1.0) -> PolyVectorField:
    return PolyVectorField([random_polynomial(dim, degree, rng, density) for _ in range(dim)])


class DiffOperator:
    """``F = Σ_w c_w ∂_w`` with ``w`` a sorted tuple of coordinate indices."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping | Iterable = ()):
        self.dim = dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for w, c in items:
            w = tuple(sorted(w))
            if any(not 0 <= i < dim for i in w):
                raise ValueError(f"partial index out of range in {w}")
            if not isinstance(c, Polynomial):
                c = Polynomial.const(dim, c)
            acc[w] = acc[w] + c if w in acc else c
        self.terms = {w: c for w, c in acc.items() if c.terms}

    @classmethod
    def _raw(cls, dim, terms):
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        return obj

    @classmethod
    def identity(cls, dim: int) -> "DiffOperator":
        return cls(dim, {(): Polynomial.const(dim, 1)})

    @classmethod
    def zero(cls, dim: int) -> "DiffOperator":
        return cls._raw(dim, {})

    @property
    def order(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def items(self):
        return self.terms.items()

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffOperator):
            return self.dim == other.dim and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "DiffOperator(0)"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            d = "".join(f"∂{i + 1}" for i in w) or "Id"
            parts.append(f"({c}){d}")
        return "DiffOperator(" + " + ".join(parts) + ")"

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        self._check(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            v = terms[w] + c if w in terms else c
            if v.terms:
                terms[w] = v
            else:
                terms.pop(w, None)
        return DiffOperator._raw(self.dim, terms)

    def __neg__(self):
        return DiffOperator._raw(self.dim, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffOperator":
        if isinstance(c, Polynomial):
            out = {w: v * c for w, v in self.terms.items()}
            return DiffOperator._raw(self.dim, {w: v for w, v in out.items() if v.terms})
        c = as_coefficient(c)
        if c == 0:
            return DiffOperator.zero(self.dim)
        return DiffOperator._raw(self.dim, {w: v * c for w, v in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def _check(self, other):
        if not isinstance(other, DiffOperator):
            raise TypeError(f"expected DiffOperator, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def apply(self, f: Polynomial) -> Polynomial:
        if f.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {f.dim}")
        out = Polynomial.zero(self.dim)
        for w, c in self.terms.items():
            df = f.partial(w)
            if df.terms:
                out = out + c * df
        return out

    __call__ = apply

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """``self ∘ other`` in normal form, by the Leibniz rule."""
        self._check(other)
        acc: dict = {}
        for w, a in self.terms.items():
            n = len(w)
            for v, b in other.terms.items():
                # ∂_w (b ∂_v) = Σ_{S ⊂ w} (∂_S b) ∂_{(w∖S) ∪ v}
                for mask in range(1 << n):
                    s = [w[i] for i in range(n) if mask >> i & 1]
                    db = b.partial(s)
                    if not db.terms:
                        continue
                    rest = tuple(sorted([w[i] for i in range(n) if not mask >> i & 1] + list(v)))
                    term = a * db
                    acc[rest] = acc[rest] + term if rest in acc else term
        return DiffOperator._raw(self.dim, {w: c for w, c in acc.items() if c.terms})

    def __matmul__(self, other):
        return self.compose(other)

    def commutator(self, other: "DiffOperator") -> "DiffOperator":
        return self.compose(other) - other.compose(self)

    def homogeneous_part(self, k: int) -> "DiffOperator":
        return DiffOperator._raw(self.dim, {w: c for w, c in self.terms.items() if len(w) == k})

    def is_vector_field(self) -> bool:
        return all(len(w) == 1 for w in self.terms)

    def to_field(self) -> PolyVectorField:
        """The vector field of a first-order operator without constant term."""
        if not self.is_vector_field():
            raise ValueError("operator is not a vector field")
        return PolyVectorField([self.terms.get((i,), Polynomial.zero(self.dim)) for i in range(self.dim)])

    def first_order_field(self) -> PolyVectorField:
        return PolyVectorField([self.terms.get((i,), Polynomial.zero(self.dim)) for i in range(self.dim)])

    def to_float(self) -> "DiffOperator":
        return DiffOperator._raw(self.dim, {w: c.to_float() for w, c in self.terms.items()})


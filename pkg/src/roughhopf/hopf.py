"""Generic connected graded Hopf algebra over a :class:`~roughhopf.algebra.Basis`.

Concrete structures only supply the product and coproduct on basis keys;
bilinear extension, the tensor-square algebra, the counit and the antipode
(by grade recursion) live here.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

from .algebra import Basis, FormalSum, bilinear_map, linear_map, tensor_basis

__all__ = ["HopfAlgebra"]


class HopfAlgebra:
    """Product and coproduct given on basis keys.

    ``key_product(a, b)`` returns a :class:`FormalSum` over ``basis``;
    ``key_coproduct(k)`` returns one over ``basis ⊗ basis``.
    """

    def __init__(self, name: str, basis: Basis, key_product: Callable, key_coproduct: Callable,
                 key_antipode: Callable | None = None):
        self.name = name
        self.basis = basis
        self.tbasis = tensor_basis(basis, basis)
        self._prod = lru_cache(maxsize=None)(key_product)
        self._coprod = lru_cache(maxsize=None)(key_coproduct)
        self._closed_antipode = key_antipode
        self._antipode = lru_cache(maxsize=None)(self._antipode_key)

    def __repr__(self) -> str:
        return f"<HopfAlgebra {self.name}>"

    # keys -------------------------------------------------------------
    def key_product(self, a, b) -> FormalSum:
        return self._prod(a, b)

    def key_coproduct(self, k) -> FormalSum:
        return self._coprod(k)

    def key_antipode(self, k) -> FormalSum:
        return self._antipode(k)

    def _antipode_key(self, k) -> FormalSum:
        if self._closed_antipode is not None:
            return self._closed_antipode(k)
        return self.recursive_antipode(k)

    def recursive_antipode(self, k) -> FormalSum:
        """Solve ``m(S⊗id)Δ = ηε`` grade by grade."""
        basis = self.basis
        unit = basis.unit_key
        if k == unit:
            return FormalSum.unit(basis)
        acc = FormalSum.of(basis, k, -1)
        for (a, b), c in self.key_coproduct(k).items():
            if a == unit or b == unit:
                continue
            acc = acc - self.mul(self._antipode(a), FormalSum.of(basis, b)).scale(c)
        return acc

    # elements ---------------------------------------------------------
    def unit(self, level: int | None = None) -> FormalSum:
        return FormalSum.unit(self.basis, level)

    def element(self, key, coeff=1, level=None) -> FormalSum:
        return FormalSum.of(self.basis, key, coeff, level)

    def mul(self, x: FormalSum, y: FormalSum, level: int | None = None) -> FormalSum:
        if level is None:
            level = _min_level(x.level, y.level)
        return bilinear_map(self._prod, x, y, self.basis, level)

    def coproduct(self, x: FormalSum, level: int | None = None) -> FormalSum:
        return linear_map(self._coprod, x, self.tbasis, level if level is not None else x.level)

    def antipode(self, x: FormalSum) -> FormalSum:
        return linear_map(self._antipode, x, self.basis, x.level)

    def counit(self, x: FormalSum):
        return x.counit()

    def commutator(self, x: FormalSum, y: FormalSum, level: int | None = None) -> FormalSum:
        return self.mul(x, y, level) - self.mul(y, x, level)

    def power(self, x: FormalSum, k: int, level: int | None = None) -> FormalSum:
        out = self.unit(level if level is not None else x.level)
        for _ in range(k):
            out = self.mul(out, x, level)
        return out

    # tensor square ----------------------------------------------------
    def tensor_mul(self, x: FormalSum, y: FormalSum, level: int | None = None) -> FormalSum:
        """Componentwise product in ``H ⊗ H``."""
        g = self.basis.grade
        acc: dict = {}
        for (a1, b1), c1 in x.items():
            for (a2, b2), c2 in y.items():
                if level is not None and g(a1) + g(b1) + g(a2) + g(b2) > level:
                    continue
                c12 = c1 * c2
                pa = self._prod(a1, a2)
                pb = self._prod(b1, b2)
                for ka, ca in pa.items():
                    for kb, cb in pb.items():
                        key = (ka, kb)
                        acc[key] = acc.get(key, 0) + c12 * ca * cb
        return FormalSum(self.tbasis, acc, level)

    def apply_left(self, fn: Callable, x: FormalSum) -> FormalSum:
        """``(fn ⊗ id)`` on a tensor-square element; ``fn`` maps key -> FormalSum."""
        acc: dict = {}
        for (a, b), c in x.items():
            for k, ck in fn(a).items():
                acc[(k, b)] = acc.get((k, b), 0) + c * ck
        return FormalSum(self.tbasis, acc, x.level)

    def apply_right(self, fn: Callable, x: FormalSum) -> FormalSum:
        acc: dict = {}
        for (a, b), c in x.items():
            for k, ck in fn(b).items():
                acc[(a, k)] = acc.get((a, k), 0) + c * ck
        return FormalSum(self.tbasis, acc, x.level)

    def multiply_out(self, x: FormalSum) -> FormalSum:
        """``m: H ⊗ H -> H``."""
        acc: dict = {}
        for (a, b), c in x.items():
            for k, ck in self._prod(a, b).items():
                acc[k] = acc.get(k, 0) + c * ck
        return FormalSum(self.basis, acc, x.level)

    # axiom defects ----------------------------------------------------
    def counit_defect(self, k) -> tuple[FormalSum, FormalSum]:
        """``(ε⊗id)Δk - k`` and ``(id⊗ε)Δk - k``."""
        unit = self.basis.unit_key
        left: dict = {}
        right: dict = {}
        for (a, b), c in self.key_coproduct(k).items():
            if a == unit:
                left[b] = left.get(b, 0) + c
            if b == unit:
                right[a] = right.get(a, 0) + c
        x = self.element(k)
        return FormalSum(self.basis, left) - x, FormalSum(self.basis, right) - x

    def coassociativity_defect(self, k) -> FormalSum:
        """``(Δ⊗id)Δk - (id⊗Δ)Δk`` as a sum over triple keys ``(a, b, c)``."""
        b3 = tensor_basis(self.tbasis, self.basis)
        acc: dict = {}
        for (a, b), c in self.key_coproduct(k).items():
            for (a1, a2), c1 in self.key_coproduct(a).items():
                key = ((a1, a2), b)
                acc[key] = acc.get(key, 0) + c * c1
            for (b1, b2), c2 in self.key_coproduct(b).items():
                key = ((a, b1), b2)
                acc[key] = acc.get(key, 0) - c * c2
        return FormalSum(b3, acc)

    def compatibility_defect(self, a, b) -> FormalSum:
        """``Δ(ab) - Δ(a)Δ(b)``."""
        lhs = self.coproduct(self.key_product(a, b))
        rhs = self.tensor_mul(self.key_coproduct(a), self.key_coproduct(b))
        return lhs - rhs

    def antipode_defect(self, k) -> tuple[FormalSum, FormalSum]:
        """``m(S⊗id)Δk - ε(k)1`` and ``m(id⊗S)Δk - ε(k)1``."""
        d = self.key_coproduct(k)
        eps = self.unit() if k == self.basis.unit_key else FormalSum.zero(self.basis)
        left = self.multiply_out(self.apply_left(self.key_antipode, d)) - eps
        right = self.multiply_out(self.apply_right(self.key_antipode, d)) - eps
        return left, right

    def unit_defect(self, k) -> FormalSum:
        x = self.element(k)
        one = self.basis.unit_key
        return (self.key_product(one, k) - x) + (self.key_product(k, one) - x)

    def associativity_defect(self, a, b, c) -> FormalSum:
        B = self.basis
        ab = self.key_product(a, b)
        bc = self.key_product(b, c)
        return self.mul(ab, FormalSum.of(B, c)) - self.mul(FormalSum.of(B, a), bc)


def _min_level(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)



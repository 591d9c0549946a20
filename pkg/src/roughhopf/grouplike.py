"""Truncated group-like and primitive elements of the dual algebras.

Elements are :class:`FormalSum` values with a truncation level; the structure
(tensor, GL or MKW) decides the product ``⋆`` and the coproduct ``δ``.
"""
from __future__ import annotations

from fractions import Fraction

from .algebra import FormalSum, tensor
from .forests import GL, MKW
from .hopf import HopfAlgebra
from .words import TENSOR

__all__ = [
    "STRUCTURES",
    "structure",
    "star",
    "exp_n",
    "log_n",
    "is_grouplike",
    "is_primitive",
    "inverse",
    "GroupLikeError",
]

STRUCTURES = {"tensor": TENSOR, "GL": GL, "MKW": MKW}


class GroupLikeError(ValueError):
    pass


def structure(name) -> HopfAlgebra:
    if isinstance(name, HopfAlgebra):
        return name
    try:
        return STRUCTURES[name]
    except KeyError:
        raise ValueError(f"unknown structure {name!r}; expected one of {sorted(STRUCTURES)}") from None


def _level(x: FormalSum, level):
    if level is not None:
        return level
    if x.level is None:
        raise ValueError("element has no truncation level; pass level=")
    return x.level


def star(x: FormalSum, y: FormalSum, alg="tensor") -> FormalSum:
    alg = structure(alg)
    if x.basis is not alg.basis or y.basis is not alg.basis:
        raise TypeError(f"operands are not in the {alg.name} basis")
    if x.level != y.level:
        raise ValueError(f"level mismatch: {x.level} vs {y.level}")
    return alg.mul(x, y)


def exp_n(h: FormalSum, alg="tensor", level: int | None = None) -> FormalSum:
    """``Σ h^k / k!`` truncated; ``h`` must have no grade-0 part."""
    alg = structure(alg)
    n = _level(h, level)
    if h.counit() != 0:
        raise GroupLikeError("exp needs an element with zero grade-0 part")
    h = h.truncate(n)
    out = alg.unit(n)
    # Horner: 1 + h(1 + h/2(1 + h/3(...)))
    for k in range(n, 0, -1):
        out = alg.unit(n) + alg.mul(h, out).scale(Fraction(1, k))
    return out


def log_n(g: FormalSum, alg="tensor", level: int | None = None) -> FormalSum:
    """``Σ (-1)^{k+1} (g-1)^k / k`` truncated; ``g`` must have grade-0 part 1."""
    alg = structure(alg)
    n = _level(g, level)
    if g.counit() != 1:
        raise GroupLikeError("log needs an element with grade-0 part 1")
    h = g.truncate(n) - alg.unit(n)
    out = FormalSum.zero(alg.basis, n)
    power = alg.unit(n)
    for k in range(1, n + 1):
        power = alg.mul(power, h)
        if not power:
            break
        sign = 1 if k % 2 else -1
        out = out + power.scale(Fraction(sign, k))
    return out


def _defect_ok(d: FormalSum, tol) -> bool:
    if d.is_exact() and tol is None:
        return not d
    return d.max_abs() <= (1e-10 if tol is None else tol)


def is_grouplike(x: FormalSum, alg="tensor", tol: float | None = None) -> bool:
    """``δx = x⊗x`` in the tensor square truncated at the level of ``x``."""
    alg = structure(alg)
    n = _level(x, None)
    if x.counit() == 0:
        return False
    return _defect_ok(alg.coproduct(x, n) - tensor(x, x, n), tol)


def is_primitive(x: FormalSum, alg="tensor", tol: float | None = None) -> bool:
    """``δx = x⊗1 + 1⊗x`` in the truncated tensor square."""
    alg = structure(alg)
    n = _level(x, None)
    one = alg.unit(n)
    d = alg.coproduct(x, n) - tensor(x, one, n) - tensor(one, x, n)
    return _defect_ok(d, tol)


def inverse(x: FormalSum, alg="tensor", check: bool = True) -> FormalSum:
    """``x⁻¹ = S(x)`` for group-like ``x``."""
    alg = structure(alg)
    if check and not is_grouplike(x, alg, None if x.is_exact() else 1e-10):
        raise GroupLikeError("inverse is only defined here for group-like elements")
    return alg.antipode(x)

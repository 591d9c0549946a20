"""Push-forward of geometric rough paths under polynomial maps.

Words are tuples of 1-based letters; polynomial coordinates are 0-based, so
the letter ``i`` differentiates in coordinate ``i - 1``.

The local model of ``∫ ν(dX)`` at a base point ``x`` is

    Y^w ≈ Σ_u  Σ_{(s_1..s_k) ∈ Δ̃^k(u)}  ν_{s_1}^{w_1}(x) ⋯ ν_{s_k}^{w_k}(x)  X^u,

with ``k = |w|`` and ``Δ̃`` the ordered deshuffles.  ``LocalExpansion`` keeps
these coefficients as exact polynomials in ``x``; ``pushforward`` contracts
them against a rough path on a fine grid and Chen-composes the pieces.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .algebra import FormalSum
from .polynomials import Polynomial, PolyVectorField
from .roughpath import RoughPath
from .words import TENSOR, WORDS, all_words, ordered_deshuffle_positions

__all__ = [
    "OneForm",
    "LocalExpansion",
    "PushforwardError",
    "PushforwardPath",
    "one_form_word_coeff",
    "one_form_expansion",
    "local_pushforward_expansion",
    "field_expansion",
    "pushforward",
    "chain_rule_words",
    "chain_rule_direct",
    "compose_expansions",
    "factorization_check",
    "set_A",
    "set_B",
    "zeta",
    "zeta_inverse",
    "ConsistencyTable",
    "manifold_consistency_check",
]


class PushforwardError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _splits(length: int, k: int) -> tuple:
    return ordered_deshuffle_positions(length, k)


def _as_map(phi) -> list[Polynomial]:
    if isinstance(phi, Polynomial):
        return [phi]
    phi = list(phi)
    if not phi:
        raise ValueError("empty polynomial map")
    dims = {p.dim for p in phi}
    if len(dims) != 1:
        raise ValueError("all components of a map must live in the same dimension")
    return phi


def _check_letters(w, n):
    for a in w:
        if not 1 <= a <= n:
            raise ValueError(f"letter {a} outside 1..{n}")


# ---------------------------------------------------------------------------
# one-forms


class OneForm:
    """``ν = Σ_i ν_i dx^i`` with each ``ν_i`` an ``ℝ^d``-valued polynomial list."""

    def __init__(self, components: Sequence[Sequence[Polynomial]]):
        comps = [list(c) for c in components]
        if not comps:
            raise ValueError("a one-form needs at least one component")
        self.n = len(comps)
        dims = {len(c) for c in comps}
        if len(dims) != 1 or 0 in dims:
            raise ValueError("every ν_i must have the same positive number of entries")
        self.d = dims.pop()
        if {p.dim for c in comps for p in c} != {self.n}:
            raise ValueError(f"coefficients must be polynomials in {self.n} variables")
        self.components = comps

    @classmethod
    def from_map(cls, phi) -> "OneForm":
        """``dφ = Σ_i ∂_i φ dx^i``."""
        phi = _as_map(phi)
        n = phi[0].dim
        return cls([[p.deriv(i) for p in phi] for i in range(n)])


def one_form_word_coeff(nu: OneForm, w) -> list[Polynomial]:
    """``ν_w = ∂_{w_1} ⋯ ∂_{w_{k-1}} ν_{w_k}``."""
    w = tuple(w)
    if not w:
        raise ValueError("ν_w needs a nonempty word")
    _check_letters(w, nu.n)
    head = [a - 1 for a in w[:-1]]
    return [p.partial(head) for p in nu.components[w[-1] - 1]]


# ---------------------------------------------------------------------------
# local expansions


class LocalExpansion:
    """Coefficients ``c_{w,u}(x)``: target word ``w`` → source word ``u`` → polynomial."""

    def __init__(self, n: int, d: int, level: int, terms: Mapping):
        self.n = n
        self.d = d
        self.level = level
        self.terms = {w: dict(row) for w, row in terms.items()}

    def coefficient(self, w, u) -> Polynomial:
        return self.terms.get(tuple(w), {}).get(tuple(u), Polynomial.zero(self.n))

    def words(self):
        return sorted(self.terms, key=lambda w: (len(w), w))

    def at(self, x) -> dict:
        return {w: {u: p(x) for u, p in row.items()} for w, row in self.terms.items()}

    def contract(self, x, value: FormalSum) -> FormalSum:
        """``Σ_u c_{w,u}(x) ⟨value, u⟩`` for every ``w``; the empty word maps to 1."""
        out = {(): 1}
        for w, row in self.terms.items():
            acc = 0
            for u, p in row.items():
                xu = value.coeff(u)
                if xu:
                    acc = acc + p(x) * xu
            if acc:
                out[w] = acc
        return FormalSum(WORDS, out, self.level)

    def defect(self, other: "LocalExpansion"):
        """Largest coefficient of ``self − other`` over all words and monomials."""
        worst = 0
        for w in set(self.terms) | set(other.terms):
            row_a, row_b = self.terms.get(w, {}), other.terms.get(w, {})
            for u in set(row_a) | set(row_b):
                diff = self.coefficient(w, u) - other.coefficient(w, u)
                for c in diff.terms.values():
                    worst = max(worst, abs(c))
        return worst

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        return (self.n, self.d, self.level) == (other.n, other.d, other.level) and self.defect(other) == 0


def _expansion(deriv: Callable, n: int, d: int, level: int) -> LocalExpansion:
    """Assemble ``c_{w,u}`` from ``deriv(s, j)``, the ``j``-th component of the word-``s`` coefficient."""
    cache: dict = {}

    def D(s, j):
        key = (s, j)
        if key not in cache:
            cache[key] = deriv(s, j)
        return cache[key]

    terms: dict = {}
    for u in all_words(n, level, 1):
        m = len(u)
        for k in range(1, m + 1):
            for split in _splits(m, k):
                parts = [tuple(u[i] for i in block) for block in split]
                for w in itertools.product(range(1, d + 1), repeat=k):
                    prod = None
                    for part, j in zip(parts, w):
                        f = D(part, j - 1)
                        if not f.terms:
                            prod = None
                            break
                        prod = f if prod is None else prod * f
                    if prod is None:
                        continue
                    row = terms.setdefault(w, {})
                    row[u] = row[u] + prod if u in row else prod
    for row in terms.values():
        for u in [u for u, p in row.items() if not p.terms]:
            del row[u]
    return LocalExpansion(n, d, level, {w: r for w, r in terms.items() if r})


def one_form_expansion(nu: OneForm, level: int) -> LocalExpansion:
    if level < 1:
        raise ValueError("level must be >= 1")
    return _expansion(lambda s, j: one_form_word_coeff(nu, s)[j], nu.n, nu.d, level)


def local_pushforward_expansion(phi, level: int) -> LocalExpansion:
    """Local model of ``φ_* X``: ``ν = dφ`` so ``ν_s = ∂_s φ``."""
    phi = _as_map(phi)
    if level < 1:
        raise ValueError("level must be >= 1")
    n = phi[0].dim
    return _expansion(lambda s, j: phi[j].partial([a - 1 for a in s]), n, len(phi), level)


def field_expansion(fields: Sequence[PolyVectorField], phi, level: int) -> LocalExpansion:
    """Same assembly with ``V_s φ = V_{s_1}(⋯ V_{s_k} φ)`` in place of ``∂_s φ``.

    With ``V_i = ∂_i`` this is ``local_pushforward_expansion``; in general the
    single-letter rows are the Davie expansion ``ℱ(X)φ`` of the solver.
    """
    phi = _as_map(phi)
    n = len(fields)

    def deriv(s, j):
        f = phi[j]
        for a in reversed(s):
            f = fields[a - 1].apply(f)
        return f

    return _expansion(deriv, n, len(phi), level)


# ---------------------------------------------------------------------------
# chain rule and factorization


def chain_rule_words(psi, phi, w):
    """``∂_w(ψ∘φ)`` through the sum over ordered deshuffles of ``w``.

    ``ψ`` may be a polynomial or a list of them (then a list is returned).
    """
    phi = _as_map(phi)
    single = isinstance(psi, Polynomial)
    psi = _as_map(psi)
    w = tuple(w)
    n, m = phi[0].dim, len(phi)
    if psi[0].dim != m:
        raise ValueError(f"ψ takes {psi[0].dim} arguments but φ has {m} components")
    _check_letters(w, n)
    if not w:
        out = [p.compose(phi) for p in psi]
        return out[0] if single else out
    out = [Polynomial.zero(n) for _ in psi]
    dphi: dict = {}
    for k in range(1, len(w) + 1):
        for split in _splits(len(w), k):
            parts = [tuple(w[i] - 1 for i in block) for block in split]
            for v in itertools.product(range(m), repeat=k):
                prod = Polynomial.const(n, 1)
                for part, j in zip(parts, v):
                    key = (part, j)
                    if key not in dphi:
                        dphi[key] = phi[j].partial(part)
                    prod = prod * dphi[key]
                    if not prod.terms:
                        break
                if not prod.terms:
                    continue
                for r, p in enumerate(psi):
                    dv = p.partial(v)
                    if dv.terms:
                        out[r] = out[r] + dv.compose(phi) * prod
    return out[0] if single else out


def chain_rule_direct(psi, phi, w):
    """Oracle: differentiate the composite directly."""
    phi = _as_map(phi)
    single = isinstance(psi, Polynomial)
    out = [p.compose(phi).partial([a - 1 for a in w]) for p in _as_map(psi)]
    return out[0] if single else out


def compose_expansions(outer: LocalExpansion, inner: LocalExpansion, inner_map) -> LocalExpansion:
    """``c_{w,u}(x) = Σ_v c^outer_{w,v}(φ(x)) c^inner_{v,u}(x)`` for ``|w| ≤ |v| ≤ |u|``."""
    inner_map = _as_map(inner_map)
    if outer.n != inner.d:
        raise ValueError("inner target dimension must match outer source dimension")
    level = min(outer.level, inner.level)
    moved: dict = {}
    terms: dict = {}
    for w, row in outer.terms.items():
        if len(w) > level:
            continue
        acc: dict = {}
        for v, c_wv in row.items():
            if len(v) > level:
                continue
            if (w, v) not in moved:
                moved[(w, v)] = c_wv.compose(inner_map)
            a = moved[(w, v)]
            for u, c_vu in inner.terms.get(v, {}).items():
                term = a * c_vu
                acc[u] = acc[u] + term if u in acc else term
        acc = {u: p for u, p in acc.items() if p.terms}
        if acc:
            terms[w] = acc
    return LocalExpansion(inner.n, outer.d, level, terms)


def factorization_check(phi, psi, level: int):
    """Largest coefficient defect between ``(ψ∘φ)``'s expansion and the composed expansions."""
    phi, psi = _as_map(phi), _as_map(psi)
    if psi[0].dim != len(phi):
        raise ValueError("ψ must take as many arguments as φ has components")
    direct = local_pushforward_expansion([p.compose(phi) for p in psi], level)
    composed = compose_expansions(local_pushforward_expansion(psi, level),
                                  local_pushforward_expansion(phi, level), phi)
    return direct.defect(composed)


# ---------------------------------------------------------------------------
# the bijection between the two index sets of the factorization proof
#
# Positions of the source word u are 0..L-1 (coloured letters).  An element
# of A is (t, s, z): t an ordered deshuffle of the positions into k blocks,
# s a k-tuple of intermediate words with 1 <= |s_i| <= |t_i|, and z[i] an
# ordered deshuffle of the positions t[i] into |s_i| blocks.  An element of
# B is (v, sb, z): an intermediate word v, sb an ordered deshuffle of the
# positions of v into k blocks, and z an ordered deshuffle of the source
# positions into |v| blocks.


def _blocks_of(positions: Sequence[int], k: int):
    for split in _splits(len(positions), k):
        yield tuple(tuple(positions[i] for i in block) for block in split)


def set_A(length: int, k: int, alphabet: int) -> list:
    out = []
    for t in _splits(length, k):
        choices = []
        for block in t:
            opts = []
            for size in range(1, len(block) + 1):
                for s in itertools.product(range(1, alphabet + 1), repeat=size):
                    for z in _blocks_of(block, size):
                        opts.append((s, z))
            choices.append(opts)
        for pick in itertools.product(*choices):
            out.append((t, tuple(p[0] for p in pick), tuple(p[1] for p in pick)))
    return out


def set_B(length: int, k: int, alphabet: int) -> list:
    out = []
    for m in range(k, length + 1):
        for v in itertools.product(range(1, alphabet + 1), repeat=m):
            for sb in _splits(m, k):
                for z in _splits(length, m):
                    out.append((v, sb, z))
    return out


def zeta(a) -> tuple:
    """``(t, s, z) ↦ (v, s, z)``: order all ``z^i_j`` by last position and read off ``s``."""
    _, s, z = a
    index = [(i, j) for i in range(len(s)) for j in range(len(s[i]))]
    index.sort(key=lambda ij: z[ij[0]][ij[1]][-1])
    v = tuple(s[i][j] for i, j in index)
    where = {ij: pos for pos, ij in enumerate(index)}
    sb = tuple(tuple(where[(i, j)] for j in range(len(s[i]))) for i in range(len(s)))
    return v, sb, tuple(z[i][j] for i, j in index)


def zeta_inverse(b) -> tuple:
    """``(v, s, z) ↦ (t, s, z)``: regroup the blocks of ``z`` along ``s``."""
    v, sb, z = b
    s = tuple(tuple(v[p] for p in block) for block in sb)
    zz = tuple(tuple(z[p] for p in block) for block in sb)
    t = tuple(tuple(sorted(itertools.chain.from_iterable(blocks))) for blocks in zz)
    return t, s, zz


# ---------------------------------------------------------------------------
# numerical push-forward


def _level1(value: FormalSum, n: int) -> list:
    return [value.coeff((i,)) for i in range(1, n + 1)]


class PushforwardPath(RoughPath):
    """``φ_* X``; increments are Chen products of local models on a uniform fine grid."""

    def __init__(self, X: RoughPath, phi, level: int, x0, refine: int = 64, exact: bool = False,
                 tol: float | None = None):
        phi = _as_map(phi)
        if X.structure != "tensor":
            raise ValueError("push-forward needs a geometric (tensor-structure) rough path")
        if X.level < level:
            raise ValueError(f"rough path level {X.level} is below the requested level {level}")
        if refine < 1:
            raise ValueError("refine must be >= 1")
        self.source = X
        self.phi = phi
        self.n = phi[0].dim
        if len(x0) != self.n:
            raise ValueError(f"base point must have {self.n} coordinates")
        self.x0 = tuple(x0)
        self.refine = refine
        self.exact = exact
        self.tol = tol
        self.expansion = local_pushforward_expansion(phi, level)
        if not exact:
            self.expansion = LocalExpansion(self.n, len(phi), level, {
                w: {u: p.to_float() for u, p in row.items()} for w, row in self.expansion.terms.items()})
        super().__init__(self._evaluate, level, X.alpha, "tensor", X.horizon, dimension=len(phi))

    def _value(self, a, b) -> FormalSum:
        v = self.source(a, b).truncate(self.level)
        return v if self.exact else v.to_float()

    def base_point(self, s):
        start = self.source.horizon[0]
        if s == start:
            return self.x0
        inc = _level1(self._value(start, s), self.n)
        return tuple(x + d for x, d in zip(self.x0, inc))

    def compose(self, s, t, pieces: int) -> FormalSum:
        x = self.base_point(s)
        out = TENSOR.unit(self.level)
        if not self.exact:
            out = out.to_float()
        h = Fraction(t - s) / pieces if self.exact else (t - s) / pieces
        for i in range(pieces):
            a = s + i * h
            b = t if i == pieces - 1 else s + (i + 1) * h
            v = self._value(a, b)
            out = TENSOR.mul(out, self.expansion.contract(x, v))
            x = tuple(p + d for p, d in zip(x, _level1(v, self.n)))
        return out

    def refinement_defect(self, s, t) -> float:
        """Largest coefficient change between ``refine/2`` and ``refine`` fine steps."""
        coarse = self.compose(s, t, max(1, self.refine // 2))
        fine = self.compose(s, t, self.refine)
        return float((fine - coarse).max_abs())

    def _evaluate(self, s, t) -> FormalSum:
        if s == t:
            out = TENSOR.unit(self.level)
            return out if self.exact else out.to_float()
        val = self.compose(s, t, self.refine)
        if self.tol is not None:
            d = self.refinement_defect(s, t)
            if d > self.tol:
                raise PushforwardError(
                    f"grid with {self.refine} steps is too coarse on [{s}, {t}]: refinement defect {d:.3e} > {self.tol:.3e}")
        return val


def pushforward(X: RoughPath, phi, level: int, x0, refine: int = 64, exact: bool = False,
                tol: float | None = None) -> PushforwardPath:
    """``φ_* X`` started from the base point ``x0`` at the left end of the horizon."""
    return PushforwardPath(X, phi, level, x0, refine, exact, tol)


# ---------------------------------------------------------------------------
# consistency on manifolds


@dataclass
class ConsistencyTable:
    rows: list = field(default_factory=list)  # (chart_i, chart_j, s, t, defect)
    tol: float = 1e-8

    @property
    def max_defect(self) -> float:
        return max((r[4] for r in self.rows), default=0.0)

    @property
    def flagged(self) -> list:
        return [r for r in self.rows if r[4] > self.tol]

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_csv(self) -> str:
        lines = ["chart_i,chart_j,s,t,defect"]
        lines += [f"{i},{j},{float(s)!r},{float(t)!r},{d:.6e}" for i, j, s, t, d in self.rows]
        return "\n".join(lines) + "\n"


def manifold_consistency_check(charts: Mapping, transitions: Mapping, grid: Sequence, level: int,
                               refine: int = 64, tol: float = 1e-8) -> ConsistencyTable:
    """Compare ``(φ_j∘φ_i⁻¹)_* X_i`` with ``X_j`` on grid pairs inside both horizons.

    ``charts`` maps a name to ``(X, x0)`` with ``x0`` the chart coordinates at the
    start of ``X``'s horizon; ``transitions`` maps ``(i, j)`` to a polynomial map.
    """
    table = ConsistencyTable(tol=tol)
    for (i, j), phi in transitions.items():
        if i not in charts or j not in charts:
            raise KeyError(f"unknown chart in transition {(i, j)}")
        Xi, xi = charts[i]
        Xj, _ = charts[j]
        lo = max(Xi.horizon[0], Xj.horizon[0])
        hi = min(Xi.horizon[1], Xj.horizon[1])
        pts = sorted(g for g in grid if lo <= g <= hi)
        if len(pts) < 2:
            raise ValueError(f"charts {i} and {j} have no overlap on the grid")
        Y = pushforward(Xi, phi, level, xi, refine)
        for s, t in itertools.combinations(pts, 2):
            d = (Y(s, t) - Xj(s, t).truncate(level).to_float()).max_abs()
            table.rows.append((i, j, s, t, float(d)))
    return table

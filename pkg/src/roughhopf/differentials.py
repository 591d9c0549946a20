"""Connections, iterated covariant derivatives and elementary differentials.

The maps ``ℱ`` send basis keys of the tensor, GL or MKW structure to
differential operators built from driving vector fields ``V_1..V_n``:

* tensor: ``ℱ(w) = V_{w_1} ∘ ... ∘ V_{w_k}``;
* forests: ``ℱ(•_i) = V_i``, ``ℱ([τ_1..τ_k]_i) = ∇^k V_i(ℱτ_1, ..., ℱτ_k)`` and
  ``ℱ(τ_1...τ_k) ψ = ∇^k ψ(ℱτ_1, ..., ℱτ_k)``.

GL is only offered for the zero connection.
"""
from __future__ import annotations

import itertools
from random import Random
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import FormalSum
from .forests import NONPLANAR, canonicalize, graft, left_graft, planar_orderings, sg
from .grouplike import structure as get_structure
from .hopf import HopfAlgebra
from .polynomials import DiffOperator, Polynomial, PolyVectorField, random_polynomial
from .words import WORDS

__all__ = [
    "Connection",
    "vector_field_bracket",
    "cov_deriv_vector",
    "cov_deriv_scalar_n",
    "cov_deriv_scalar_operator",
    "cov_deriv_field_n",
    "cov_deriv_field_tensor",
    "torsion",
    "curvature",
    "PseudoBialgebraMap",
    "elementary_differential",
    "check_pseudo_bialgebra",
    "check_graft_compatibility",
    "LieMapExtension",
    "lie_map_extension",
    "pre_lie_associator",
    "symmetrized_level2_sum",
    "armstrong_level2_sum",
    "level2_comparison",
]


class Connection:
    """Christoffel symbols ``Γ^k_{ij}`` with ``∇_{∂_i} ∂_j = Γ^k_{ij} ∂_k``.

    Stored as ``gamma[k][i][j]``.
    """

    def __init__(self, dim: int, gamma: Sequence | None = None):
        self.dim = dim
        if gamma is None:
            z = Polynomial.zero(dim)
            gamma = [[[z] * dim for _ in range(dim)] for _ in range(dim)]
        rows = []
        for k in range(dim):
            rows.append([])
            for i in range(dim):
                row = []
                for j in range(dim):
                    g = gamma[k][i][j]
                    if not isinstance(g, Polynomial):
                        g = Polynomial.const(dim, g)
                    if g.dim != dim:
                        raise ValueError("Christoffel symbol has the wrong number of variables")
                    row.append(g)
                rows[-1].append(tuple(row))
            rows[-1] = tuple(rows[-1])
        self.gamma = tuple(rows)

    @classmethod
    def zero(cls, dim: int) -> "Connection":
        return cls(dim)

    @classmethod
    def random(cls, dim: int, degree: int, rng: Random, density: float = 1.0) -> "Connection":
        return cls(dim, [[[random_polynomial(dim, degree, rng, density) for _ in range(dim)]
                          for _ in range(dim)] for _ in range(dim)])

    def __getitem__(self, kij):
        k, i, j = kij
        return self.gamma[k][i][j]

    def is_zero(self) -> bool:
        return all(g.is_zero() for plane in self.gamma for row in plane for g in row)

    def symmetrized(self) -> "Connection":
        """``Γ̃^k_{ij} = (Γ^k_{ij} + Γ^k_{ji}) / 2``: same geodesics, no torsion."""
        half = Fraction(1, 2)
        d = self.dim
        return Connection(d, [[[(self.gamma[k][i][j] + self.gamma[k][j][i]) * half for j in range(d)]
                               for i in range(d)] for k in range(d)])

    def to_json(self) -> list:
        return [[[g.to_json() for g in row] for row in plane] for plane in self.gamma]

    @classmethod
    def from_json(cls, data: list) -> "Connection":
        d = len(data)
        return cls(d, [[[Polynomial.from_json(g, d) for g in row] for row in plane] for plane in data])

    def __eq__(self, other) -> bool:
        return isinstance(other, Connection) and self.gamma == other.gamma

    def __hash__(self):
        return hash(self.gamma)


def vector_field_bracket(U: PolyVectorField, V: PolyVectorField) -> PolyVectorField:
    """``[U, V] = U∘V − V∘U``, a first-order operator."""
    return PolyVectorField([U.apply(v) - V.apply(u) for u, v in zip(U.components, V.components)])


def cov_deriv_vector(conn: Connection | None, U: PolyVectorField, V: PolyVectorField) -> PolyVectorField:
    """``∇_U V = (U^i ∂_i V^k + U^i V^j Γ^k_{ij}) ∂_k``."""
    out = list(U.directional(V).components)
    if conn is None or conn.is_zero():
        return PolyVectorField(out)
    d = U.dim
    for k in range(d):
        acc = out[k]
        for i in range(d):
            ui = U[i]
            if ui.is_zero():
                continue
            for j in range(d):
                g = conn.gamma[k][i][j]
                if g.is_zero() or V[j].is_zero():
                    continue
                acc = acc + ui * V[j] * g
        out[k] = acc
    return PolyVectorField(out)


def _replace(seq, idx, val):
    return tuple(seq[:idx]) + (val,) + tuple(seq[idx + 1:])


def cov_deriv_scalar_n(conn: Connection | None, phi: Polynomial, fields: Sequence[PolyVectorField]) -> Polynomial:
    """``∇^n φ(U_1..U_n)`` by the recursion on the first slot."""
    n = len(fields)
    if n < 1:
        raise ValueError("need at least one field")
    if n == 1:
        return fields[0].apply(phi)
    U1, rest = fields[0], tuple(fields[1:])
    out = U1.apply(cov_deriv_scalar_n(conn, phi, rest))
    for k in range(len(rest)):
        out = out - cov_deriv_scalar_n(conn, phi, _replace(rest, k, cov_deriv_vector(conn, U1, rest[k])))
    return out


def cov_deriv_scalar_operator(conn: Connection | None, fields: Sequence[PolyVectorField], dim: int) -> DiffOperator:
    """The operator ``ψ ↦ ∇^n ψ(U_1..U_n)``; ``n = 0`` gives the identity."""
    n = len(fields)
    if n == 0:
        return DiffOperator.identity(dim)
    if n == 1:
        return fields[0].as_operator()
    U1, rest = fields[0], tuple(fields[1:])
    out = U1.as_operator().compose(cov_deriv_scalar_operator(conn, rest, dim))
    for k in range(len(rest)):
        out = out - cov_deriv_scalar_operator(conn, _replace(rest, k, cov_deriv_vector(conn, U1, rest[k])), dim)
    return out


def cov_deriv_field_n(conn: Connection | None, V: PolyVectorField, fields: Sequence[PolyVectorField]) -> PolyVectorField:
    """``∇^n V(U_1..U_n) = ∇_{U_1}(∇^{n-1}V(U_2..)) − Σ_k ∇^{n-1}V(.., ∇_{U_1}U_k, ..)``."""
    n = len(fields)
    if n == 0:
        return V
    if n == 1:
        return cov_deriv_vector(conn, fields[0], V)
    U1, rest = fields[0], tuple(fields[1:])
    out = cov_deriv_vector(conn, U1, cov_deriv_field_n(conn, V, rest))
    for k in range(len(rest)):
        out = out - cov_deriv_field_n(conn, V, _replace(rest, k, cov_deriv_vector(conn, U1, rest[k])))
    return out


def _tensor_derivative(conn: Connection | None, T: dict, dim: int) -> dict:
    """Components of ``∇T`` for a (1, r) tensor ``T[(k, i_1..i_r)]``; the new index goes first."""
    out = {}
    for key, comp in T.items():
        k, idx = key[0], key[1:]
        for a in range(dim):
            v = comp.deriv(a)
            if conn is not None:
                for m in range(dim):
                    g = conn.gamma[k][a][m]
                    if not g.is_zero():
                        v = v + g * T[(m,) + idx]
                    for r in range(len(idx)):
                        g = conn.gamma[m][a][idx[r]]
                        if not g.is_zero():
                            v = v - g * T[(k,) + idx[:r] + (m,) + idx[r + 1:]]
            out[(k, a) + idx] = v
    return out


def cov_deriv_field_tensor(conn: Connection | None, V: PolyVectorField, fields: Sequence[PolyVectorField]) -> PolyVectorField:
    """``∇^n V`` as a component tensor contracted with ``U_1..U_n``.

    Independent of :func:`cov_deriv_field_n`; covector slots use
    ``∇_a ω_i = ∂_a ω_i − ω_k Γ^k_{ai}``.
    """
    d = V.dim
    T = {(k,): V[k] for k in range(d)}
    for _ in fields:
        T = _tensor_derivative(conn, T, d)
    out = []
    for k in range(d):
        acc = Polynomial.zero(d)
        for idx in itertools.product(range(d), repeat=len(fields)):
            c = T[(k,) + idx]
            if c.is_zero():
                continue
            for U, i in zip(fields, idx):
                c = c * U[i]
                if c.is_zero():
                    break
            acc = acc + c
        out.append(acc)
    return PolyVectorField(out)


def torsion(conn: Connection | None, U: PolyVectorField, V: PolyVectorField) -> PolyVectorField:
    return cov_deriv_vector(conn, U, V) - cov_deriv_vector(conn, V, U) - vector_field_bracket(U, V)


def curvature(conn: Connection | None, U: PolyVectorField, V: PolyVectorField, W: PolyVectorField) -> PolyVectorField:
    nab = cov_deriv_vector
    return (nab(conn, U, nab(conn, V, W)) - nab(conn, V, nab(conn, U, W))
            - nab(conn, vector_field_bracket(U, V), W))


def pre_lie_associator(conn, U, V, W) -> PolyVectorField:
    """``a(U, V, W) = U ▷ (V ▷ W) − (U ▷ V) ▷ W`` with ``U ▷ V = ∇_U V``."""
    nab = cov_deriv_vector
    return nab(conn, U, nab(conn, V, W)) - nab(conn, nab(conn, U, V), W)


# ---------------------------------------------------------------------------
# elementary differentials


class PseudoBialgebraMap:
    """Elementary-differential map for the tensor, GL or MKW structure."""

    def __init__(self, structure_name, fields: Sequence[PolyVectorField], connection: Connection | None = None):
        self.alg: HopfAlgebra = get_structure(structure_name)
        self.structure = self.alg.name
        self.fields = tuple(fields)
        if not self.fields:
            raise ValueError("need at least one driving vector field")
        self.dim = self.fields[0].dim
        if any(V.dim != self.dim for V in self.fields):
            raise ValueError("all driving fields must have the same dimension")
        if connection is not None and connection.dim != self.dim:
            raise ValueError("connection dimension does not match the fields")
        if self.structure == "tensor" and connection is not None:
            raise ValueError("the tensor structure takes no connection")
        if self.structure == "GL" and connection is not None and not connection.is_zero():
            raise ValueError("GL elementary differentials are only well defined for the zero connection")
        if self.structure == "MKW" and connection is None:
            raise ValueError("the MKW structure needs a connection")
        self.connection = connection if connection is not None and not connection.is_zero() else None
        self._tree_cache: dict = {}
        self._key_cache: dict = {}

    @property
    def basis(self):
        return self.alg.basis

    def _check_letter(self, a):
        if not 1 <= a <= len(self.fields):
            raise ValueError(f"decoration {a} out of range 1..{len(self.fields)}")

    def tree_field(self, t) -> PolyVectorField:
        v = self._tree_cache.get(t)
        if v is None:
            a, children = t
            self._check_letter(a)
            v = cov_deriv_field_n(self.connection, self.fields[a - 1], [self.tree_field(c) for c in children])
            self._tree_cache[t] = v
        return v

    def key_operator(self, key) -> DiffOperator:
        op = self._key_cache.get(key)
        if op is not None:
            return op
        if self.structure == "tensor":
            op = DiffOperator.identity(self.dim)
            for a in reversed(key):
                self._check_letter(a)
                op = self.fields[a - 1].as_operator().compose(op)
        else:
            op = cov_deriv_scalar_operator(self.connection, [self.tree_field(t) for t in key], self.dim)
        self._key_cache[key] = op
        return op

    def __call__(self, x) -> DiffOperator:
        if not isinstance(x, FormalSum):
            return self.key_operator(self._as_key(x))
        if x.basis is not self.basis:
            raise TypeError(f"expected a sum over {self.basis.name}, got {x.basis.name}")
        out = DiffOperator.zero(self.dim)
        for k, c in x.items():
            out = out + self.key_operator(k).scale(c)
        return out

    def _as_key(self, k):
        k = tuple(k)
        return canonicalize(k) if self.basis is NONPLANAR else k

    def vector_field(self, x: FormalSum) -> PolyVectorField:
        """``ℱ(x)`` for primitive ``x``; raises if higher-order parts survive."""
        return self(x).to_field()


def elementary_differential(fmap: PseudoBialgebraMap, key) -> DiffOperator:
    return fmap(key)


def _as_sum(fmap: PseudoBialgebraMap, x) -> FormalSum:
    if isinstance(x, FormalSum):
        return x
    return FormalSum.of(fmap.basis, fmap._as_key(x))


def check_pseudo_bialgebra(fmap: PseudoBialgebraMap, x, y, phi: Polynomial, psi: Polynomial):
    """``(ℱ(x⋆y)φ − ℱ(x)ℱ(y)φ, ℱ(Δx)(φ⊗ψ) − ℱ(x)(φψ))``; both vanish for valid maps."""
    x, y = _as_sum(fmap, x), _as_sum(fmap, y)
    alg = fmap.alg
    d1 = fmap(alg.mul(x, y)).apply(phi) - fmap(x).apply(fmap(y).apply(phi))
    lhs = Polynomial.zero(fmap.dim)
    for (a, b), c in alg.coproduct(x).items():
        lhs = lhs + fmap.key_operator(a).apply(phi) * fmap.key_operator(b).apply(psi) * c
    d2 = lhs - fmap(x).apply(phi * psi)
    return d1, d2


def check_graft_compatibility(fmap: PseudoBialgebraMap, tau, sigma) -> PolyVectorField:
    """``ℱ(τ ↷ σ) − ∇_{ℱτ} ℱσ``: left grafting for MKW, plain grafting for GL."""
    if not tau or not sigma:
        raise ValueError("grafting compatibility needs two nonempty trees")
    if fmap.structure == "MKW":
        grafted = left_graft((tau,), sigma)
    elif fmap.structure == "GL":
        grafted = graft((tau,), sigma)
    else:
        raise ValueError("grafting is defined for the forest structures only")
    lhs = PolyVectorField.zero(fmap.dim)
    for f, c in grafted.items():
        lhs = lhs + fmap.tree_field(f[0]) * c
    return lhs - cov_deriv_vector(fmap.connection, fmap.tree_field(tau), fmap.tree_field(sigma))


def symmetrized_tree_field(fields, conn: Connection | None, t) -> PolyVectorField:
    """MKW tree field averaged over all planar orderings of the unordered tree ``t``."""
    fmap = PseudoBialgebraMap("MKW", fields, conn if conn is not None else Connection.zero(fields[0].dim))
    orders = planar_orderings(t)
    acc = PolyVectorField.zero(fmap.dim)
    for p in orders:
        acc = acc + fmap.tree_field(p)
    return acc * Fraction(1, len(orders))


# ---------------------------------------------------------------------------
# extension of a Lie map


class LieMapExtension:
    """Extends an assignment of fields to primitive generators (letters or trees)
    to all basis keys, using only compositions and the product of the structure.

    A key ``τ g`` (first factor ``τ``) is rewritten as
    ``c·τg = τ ⋆ g − (other terms of τ ⋆ g)``, all of which have fewer factors.
    """

    def __init__(self, assignments: Mapping, structure_name, dim: int):
        self.alg = get_structure(structure_name)
        self.dim = dim
        self.assignments = {}
        for k, V in assignments.items():
            key = self._generator_key(k)
            self.assignments[key] = V
        self._cache: dict = {}

    def _generator_key(self, k):
        if self.alg.basis is WORDS:
            return (k,) if isinstance(k, int) else tuple(k)
        if isinstance(k, tuple) and len(k) == 2 and isinstance(k[0], int):
            k = (k,)
        k = tuple(k)
        return canonicalize(k) if self.alg.basis is NONPLANAR else k

    def generator(self, key) -> DiffOperator:
        try:
            return self.assignments[key].as_operator()
        except KeyError:
            raise KeyError(f"no field assigned to the primitive {self.alg.basis.format_key(key)}") from None

    def key_operator(self, key) -> DiffOperator:
        if key in self._cache:
            return self._cache[key]
        if len(key) == 0:
            op = DiffOperator.identity(self.dim)
        elif len(key) == 1:
            op = self.generator(key)
        else:
            B = self.alg.basis
            first = key[:1]
            rest = key[1:]
            prod = self.alg.key_product(first, rest)
            c = prod[key]
            if c == 0:
                raise ValueError(f"cannot factor {B.format_key(key)}")
            op = self.generator(first).compose(self.key_operator(rest))
            for k, v in prod.items():
                if k != key:
                    op = op - self.key_operator(k).scale(v)
            op = op.scale(Fraction(1) / c)
        self._cache[key] = op
        return op

    def __call__(self, x) -> DiffOperator:
        if not isinstance(x, FormalSum):
            return self.key_operator(self._generator_key(x))
        out = DiffOperator.zero(self.dim)
        for k, c in x.items():
            out = out + self.key_operator(k).scale(c)
        return out


def lie_map_extension(assignments: Mapping, structure_name, dim: int) -> LieMapExtension:
    return LieMapExtension(assignments, structure_name, dim)


# ---------------------------------------------------------------------------
# level-2 comparison with the torsion-symmetrized connection


def _dot(U: PolyVectorField, V: PolyVectorField, conn: Connection, k: int) -> Polynomial:
    """``U^a V^b Γ^k_{ab}``."""
    d = U.dim
    acc = Polynomial.zero(d)
    for a in range(d):
        for b in range(d):
            g = conn.gamma[k][a][b]
            if not g.is_zero():
                acc = acc + U[a] * V[b] * g
    return acc


def symmetrized_level2_sum(fields: Sequence[PolyVectorField], conn: Connection, k: int) -> dict:
    """Coefficients of ``Σ_{1<=|τ|<=2} ℱ̃(τ) x^k / sg(τ)`` per GL forest ``τ``,
    with ``ℱ̃`` built from ``Γ̃ = (Γ + Γᵀ)/2``."""
    sym = conn.symmetrized()
    n, d = len(fields), fields[0].dim
    xk = Polynomial.var(d, k)
    out = {}
    letters = range(1, n + 1)
    forests = [((a, ()),) for a in letters]
    forests += [canonicalize(((a, ()), (b, ()))) for a in letters for b in letters if a <= b]
    forests += [((b, ((a, ()),)),) for a in letters for b in letters]
    for f in forests:
        if len(f) == 1:
            V = symmetrized_tree_field(fields, sym, f[0])
            val = V[k]
        else:
            U, W = fields[f[0][0] - 1], fields[f[1][0] - 1]
            val = cov_deriv_scalar_n(sym, xk, [U, W])
        out[f] = val * Fraction(1, sg(f))
    return {f: v for f, v in out.items() if not v.is_zero()}


def armstrong_level2_sum(fields: Sequence[PolyVectorField], conn: Connection, k: int) -> dict:
    """Coefficients of the level-2 expansion

    ``V_i^k X^i + V_i^a ∂_a V_j^k X^{[i]j} − ½ V_a^i V_b^j Γ^k_{ij} (X^{•a•b} − X^{[a]b} − X^{[b]a})``

    collected per GL forest, with ``X^{[i]j}`` the coefficient of the tree with
    root ``j`` and child ``i``.
    """
    n = len(fields)
    out: dict = {}

    def add(f, v):
        out[f] = out[f] + v if f in out else v

    for i in range(1, n + 1):
        add(((i, ()),), fields[i - 1][k])
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            Vi, Vj = fields[i - 1], fields[j - 1]
            add(((j, ((i, ()),)),), Vi.apply(Vj[k]))
            g = _dot(Vi, Vj, conn, k) * Fraction(-1, 2)
            add(canonicalize(((i, ()), (j, ()))), g)
            add(((j, ((i, ()),)),), -g)
            add(((i, ((j, ()),)),), -g)
    return {f: v for f, v in out.items() if not v.is_zero()}


def level2_comparison(fields: Sequence[PolyVectorField], conn: Connection) -> dict:
    """Per coordinate ``k`` and forest, the difference of the two level-2 sums."""
    d = fields[0].dim
    defects = {}
    for k in range(d):
        a = symmetrized_level2_sum(fields, conn, k)
        b = armstrong_level2_sum(fields, conn, k)
        for f in set(a) | set(b):
            diff = a.get(f, Polynomial.zero(d)) - b.get(f, Polynomial.zero(d))
            if not diff.is_zero():
                defects[(k, f)] = diff
    return defects

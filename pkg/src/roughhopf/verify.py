"""Exact identity suites behind ``roughhopf verify``.

Each suite returns a list of :class:`Check` rows; every row names the module
invariant it exercises.  All checks here are exact (rational arithmetic).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .algebra import FormalSum
from .differentials import (Connection, PseudoBialgebraMap, check_graft_compatibility, check_pseudo_bialgebra,
                            level2_comparison, pre_lie_associator, symmetrized_tree_field)
from .forests import (CK, GL, MKW, MKW_DUAL, NONPLANAR, gl_star, graft, nonplanar_forests,
                      nonplanar_trees, parse_forest, planar_forests, planar_trees)
from .grouplike import exp_n, log_n
from .polynomials import PolyVectorField, random_field, random_polynomial
from .pushforward import chain_rule_direct, chain_rule_words, factorization_check, set_A, set_B, zeta, zeta_inverse
from .roughpath import PiecewiseLinearPath, chen_check, signature_lift
from .words import SHUFFLE, TENSOR, WORDS, all_words, ordered_deshuffles, shuffle

__all__ = ["Check", "SUITES", "run_suite", "run", "format_matrix"]


@dataclass
class Check:
    suite: str
    invariant: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.suite:<18} {self.invariant:<58} {self.detail}"


class _Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.rows: list[Check] = []

    def check(self, invariant: str, fn: Callable[[], tuple]):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"error: {type(exc).__name__}: {exc}"
        self.rows.append(Check(self.suite, invariant, bool(ok), detail, time.perf_counter() - t0))


def _hopf_keys(alg, max_grade: int, letters: int) -> list:
    if alg.basis is WORDS:
        return all_words(letters, max_grade)
    gen = nonplanar_forests if alg.basis is NONPLANAR else planar_forests
    return [f for k in range(max_grade + 1) for f in gen(k, letters)]


def _count_nonzero(items) -> tuple:
    bad = total = 0
    for d in items:
        total += 1
        if isinstance(d, tuple):
            bad += any(bool(x) for x in d)
        else:
            bad += bool(d)
    return bad == 0, f"{total - bad}/{total} exact"


def suite_hopf_axioms(seed: int = 0, max_grade: int = 4, letters: int = 2) -> list[Check]:
    rec = _Recorder("hopf-axioms")
    for label, alg in [("shuffle", SHUFFLE), ("tensor", TENSOR), ("CK", CK), ("GL", GL),
                       ("MKW", MKW), ("MKW*", MKW_DUAL)]:
        keys = _hopf_keys(alg, max_grade, letters)
        pairs = [(a, b) for a in keys for b in keys if alg.basis.grade(a) + alg.basis.grade(b) <= max_grade]
        module = "word_hopf" if alg.basis is WORDS else "forest_hopf"
        rec.check(f"{module}: counit ({label})", lambda: _count_nonzero(alg.counit_defect(k) for k in keys))
        rec.check(f"{module}: coassociativity ({label})",
                  lambda: _count_nonzero(alg.coassociativity_defect(k) for k in keys))
        rec.check(f"{module}: product/coproduct compatibility ({label})",
                  lambda: _count_nonzero(alg.compatibility_defect(a, b) for a, b in pairs))
        rec.check(f"{module}: antipode identity ({label})",
                  lambda: _count_nonzero(alg.antipode_defect(k) for k in keys))
    return rec.rows


_GL_EXAMPLE = [
    "[3:[4:[1],[2]]]", "[3:[1],[4:[2]]]", "[3:[2],[4:[1]]]", "[3:[1],[2],[4]]", "[1].[3:[2],[4]]",
    "[1].[3:[4:[2]]]", "[2].[3:[1],[4]]", "[2].[3:[4:[1]]]", "[1].[2].[3:[4]]",
]


def suite_gl_example(seed: int = 0) -> list[Check]:
    rec = _Recorder("gl-example")

    def run():
        got = gl_star(parse_forest("[1].[2]"), parse_forest("[3:[4]]"))
        want = FormalSum(NONPLANAR, {parse_forest(s): 1 for s in _GL_EXAMPLE})
        return got == want and len(got) == 9, got.to_text()

    rec.check("forest_hopf: GL product worked example (nine terms)", run)
    return rec.rows


def suite_ordered_deshuffle(seed: int = 0) -> list[Check]:
    rec = _Recorder("ordered-deshuffle")

    def run():
        got = ordered_deshuffles((1, 2, 3), 2)
        want = [((1,), (2, 3)), ((2,), (1, 3)), ((1, 2), (3,))]
        return sorted(got) == sorted(want) and len(got) == 3, repr(got)

    rec.check("word_hopf: ordered deshuffle of 123 into two parts", run)
    return rec.rows


def _random_element(alg, level: int, rng: random.Random, letters: int = 2, terms: int = 5) -> FormalSum:
    keys = [k for k in _hopf_keys(alg, level, letters) if alg.basis.grade(k) > 0]
    picks = rng.sample(keys, min(terms, len(keys)))
    return FormalSum(alg.basis, {k: Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4)) for k in picks}, level)


def suite_exp_log(seed: int = 0, level: int = 4, samples: int = 20) -> list[Check]:
    rec = _Recorder("exp-log")
    for label, alg in [("tensor", TENSOR), ("GL", GL), ("MKW", MKW)]:
        def run(alg=alg):
            rng = random.Random(seed)
            bad = 0
            for _ in range(samples):
                h = _random_element(alg, level, rng)
                bad += log_n(exp_n(h, alg), alg) != h
                g = alg.unit(level) + _random_element(alg, level, rng)
                bad += exp_n(log_n(g, alg), alg) != g
            return bad == 0, f"{2 * samples - bad}/{2 * samples} exact at level {level}"
        rec.check(f"grouplike: exp_N and log_N are mutually inverse ({label})", run)
    return rec.rows


def _random_pl_path(rng: random.Random, dim: int = 2, segments: int = 4) -> PiecewiseLinearPath:
    times = [Fraction(0)] + sorted({Fraction(rng.randint(1, 15), 16) for _ in range(segments - 1)}) + [Fraction(1)]
    pts = [[Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(dim)] for _ in times]
    return PiecewiseLinearPath(times, pts)


def suite_chen(seed: int = 0, samples: int = 5, level: int = 3) -> list[Check]:
    rec = _Recorder("chen")
    rng = random.Random(seed)
    paths = [signature_lift(_random_pl_path(rng, segments=rng.randint(1, 4)), level) for _ in range(samples)]
    grid = [Fraction(k, 8) for k in range(9)]

    def chen():
        worst = max(chen_check(X, grid[::2]) for X in paths)
        return worst == 0, f"max defect {worst}"

    def shuffle_identity():
        bad = total = 0
        words = all_words(2, level, 1)
        for X in paths:
            val = X(grid[1], grid[7])
            for u in words:
                for w in words:
                    if len(u) + len(w) > level:
                        continue
                    total += 1
                    sh = sum((c * val.coeff(k) for k, c in shuffle(u, w).items()), Fraction(0))
                    bad += val.coeff(u) * val.coeff(w) != sh
        return bad == 0, f"{total - bad}/{total} exact"

    rec.check("rough_path: Chen identity of signature lifts", chen)
    rec.check("rough_path: shuffle identity of signature lifts", shuffle_identity)
    return rec.rows


def suite_pseudo_bialgebra(seed: int = 0, max_vertices: int = 3) -> list[Check]:
    rec = _Recorder("pseudo-bialgebra")
    rng = random.Random(seed)
    d = 2
    conn = Connection.random(d, 2, rng)
    V = [random_field(d, 2, rng) for _ in range(2)]
    fmap = PseudoBialgebraMap("MKW", V, conn)
    phi, psi = random_polynomial(d, 2, rng), random_polynomial(d, 2, rng)
    forests = [f for k in range(max_vertices + 1) for f in planar_forests(k, 2)]
    pairs = [(a, b) for a in forests for b in forests if len(_flat(a)) + len(_flat(b)) <= max_vertices]

    def product():
        return _count_nonzero(check_pseudo_bialgebra(fmap, a, b, phi, psi)[0] for a, b in pairs)

    def coproduct():
        return _count_nonzero(check_pseudo_bialgebra(fmap, a, b, phi, psi)[1] for a, b in pairs)

    def grafting():
        items = (not check_graft_compatibility(fmap, ta, tb).is_zero()
                 for ka in range(1, 4) for kb in range(1, 3)
                 for ta in planar_trees(ka, 2) for tb in planar_trees(kb, 2))
        return _count_nonzero(items)

    rec.check("elementary_differentials: F(x*y) = F(x)F(y) (MKW, random Γ)", product)
    rec.check("elementary_differentials: coproduct dual to Leibniz (MKW)", coproduct)
    rec.check("elementary_differentials: F(τ left-graft σ) = ∇_Fτ Fσ", grafting)
    return rec.rows


def _flat(f) -> list:
    out = []
    for t in f:
        out.append(t[0])
        out.extend(_flat(t[1]))
    return out


def _graft_sum(x: FormalSum, s: FormalSum) -> FormalSum:
    """Bilinear ``x ↷ s`` for sums of single trees."""
    out = FormalSum.zero(NONPLANAR)
    for a, ca in x.items():
        for b, cb in s.items():
            out = out + graft(a, b[0]).scale(ca * cb)
    return out


def suite_pre_lie(seed: int = 0) -> list[Check]:
    rec = _Recorder("pre-lie")
    rng = random.Random(seed)
    d = 2
    V = [random_field(d, 2, rng) for _ in range(2)]
    U = [random_field(d, 2, rng) for _ in range(3)]
    gl = PseudoBialgebraMap("GL", V)

    def associator_fields():
        a = pre_lie_associator(None, U[0], U[1], U[2])
        b = pre_lie_associator(None, U[1], U[0], U[2])
        return a == b, "a(U,V,W) = a(V,U,W) with Γ = 0"

    def associator_trees():
        trees = [t for k in (1, 2) for t in nonplanar_trees(k, 2)]
        bad = total = 0
        for x in trees:
            for y in trees:
                for z in trees:
                    X, Y, Z = (FormalSum.of(NONPLANAR, (t,)) for t in (x, y, z))
                    ax = _graft_sum(X, _graft_sum(Y, Z)) - _graft_sum(_graft_sum(X, Y), Z)
                    ay = _graft_sum(Y, _graft_sum(X, Z)) - _graft_sum(_graft_sum(Y, X), Z)
                    field = PolyVectorField.zero(d)
                    for f, c in ax.items():
                        field = field + gl.tree_field(f[0]) * c
                    want = pre_lie_associator(None, gl.tree_field(x), gl.tree_field(y), gl.tree_field(z))
                    total += 1
                    bad += ax != ay or field != want
        return bad == 0, f"{total - bad}/{total} exact"

    def symmetrized():
        trees = [t for k in range(1, 5) for t in nonplanar_trees(k, 2)]
        bad = sum(gl.tree_field(t) != symmetrized_tree_field(V, None, t) for t in trees)
        return bad == 0, f"{len(trees) - bad}/{len(trees)} trees"

    rec.check("elementary_differentials: flat associator is left-symmetric", associator_fields)
    rec.check("elementary_differentials: GL map sends grafting associator to field associator", associator_trees)
    rec.check("elementary_differentials: GL equals order-symmetrized MKW when Γ = 0", symmetrized)
    return rec.rows


def suite_level2(seed: int = 0, samples: int = 3) -> list[Check]:
    rec = _Recorder("level2")

    def run():
        rng = random.Random(seed)
        bad = 0
        for _ in range(samples):
            conn = Connection.random(2, 2, rng)
            V = [random_field(2, 2, rng) for _ in range(2)]
            bad += bool(level2_comparison(V, conn))
        return bad == 0, f"{samples - bad}/{samples} random connections"

    rec.check("elementary_differentials: symmetrized GL level-2 sum matches explicit expansion", run)
    return rec.rows


def suite_pushforward(seed: int = 0, level: int = 3) -> list[Check]:
    rec = _Recorder("pushforward")
    rng = random.Random(seed)
    phi = [random_polynomial(2, 2, rng) for _ in range(2)]
    psi = [random_polynomial(2, 2, rng) for _ in range(2)]

    def chain():
        words = all_words(2, level, 1)
        bad = sum(chain_rule_words(psi, phi, w) != chain_rule_direct(psi, phi, w) for w in words)
        return bad == 0, f"{len(words) - bad}/{len(words)} words"

    def factor():
        d = factorization_check(phi, psi, level)
        return d == 0, f"max defect {d}"

    def bijection():
        bad = total = 0
        for n in range(1, level + 1):
            for k in range(1, n + 1):
                A, B = set_A(n, k, 2), set_B(n, k, 2)
                total += len(A)
                bad += sum(zeta_inverse(zeta(a)) != a for a in A)
                bad += {zeta(a) for a in A} != set(B)
        return bad == 0, f"{total} elements"

    rec.check("pushforward: chain rule over words", chain)
    rec.check("pushforward: factorization of local expansions", factor)
    rec.check("pushforward: index-set bijection is invertible", bijection)
    return rec.rows


SUITES: dict[str, Callable] = {
    "hopf-axioms": suite_hopf_axioms,
    "gl-example": suite_gl_example,
    "ordered-deshuffle": suite_ordered_deshuffle,
    "exp-log": suite_exp_log,
    "chen": suite_chen,
    "pseudo-bialgebra": suite_pseudo_bialgebra,
    "pre-lie": suite_pre_lie,
    "level2": suite_level2,
    "pushforward": suite_pushforward,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}") from None
    return fn(seed=seed)


def run(names=None, seed: int = 0) -> list[Check]:
    out = []
    for name in names or SUITES:
        out.extend(run_suite(name, seed))
    return out


def format_matrix(checks: list[Check]) -> str:
    lines = [c.line() for c in checks]
    passed = sum(c.passed for c in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"

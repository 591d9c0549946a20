"""Rough paths as lazy two-parameter evaluators ``(s, t) -> X_{s,t}``."""
from __future__ import annotations

import bisect
import itertools
import threading
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import FormalSum, as_coefficient
from .grouplike import exp_n, inverse, is_grouplike, log_n, structure
from .words import WORDS

__all__ = [
    "RoughPath",
    "PiecewiseLinearPath",
    "signature_lift",
    "from_group_path",
    "group_path_from_primitives",
    "chen_check",
    "holder_norm",
    "log_norm_compare",
    "from_descriptor",
    "trivial_path",
]


class RoughPath:
    """A truncated group-like two-parameter family.

    ``evaluator(s, t)`` must return a ``FormalSum`` at ``level`` in the basis
    of ``structure``.  With ``strict=True`` the pair ``(level, alpha)`` must
    satisfy ``N α <= 1 < (N+1) α``; ``alpha = 1`` (smooth drivers) is exempt.
    """

    def __init__(self, evaluator: Callable, level: int, alpha: float = 1.0, structure_name="tensor",
                 horizon: tuple = (0, 1), strict: bool = False, cache: bool = True, dimension: int | None = None):
        if level < 1:
            raise ValueError("level must be >= 1")
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if strict and alpha != 1 and not (level * alpha <= 1 < (level + 1) * alpha):
            raise ValueError(f"level {level} does not match alpha {alpha}: need N α <= 1 < (N+1) α")
        self.alg = structure(structure_name)
        self.structure = self.alg.name
        self.level = level
        self.alpha = alpha
        self.horizon = (horizon[0], horizon[1])
        self.dimension = dimension
        self._evaluator = evaluator
        self._cache: dict | None = {} if cache else None
        self._lock = threading.Lock()

    def __call__(self, s, t) -> FormalSum:
        return self.evaluate(s, t)

    def evaluate(self, s, t) -> FormalSum:
        if s > t:
            raise ValueError(f"need s <= t, got s={s}, t={t}")
        lo, hi = self.horizon
        if s < lo or t > hi:
            raise ValueError(f"[{s}, {t}] is outside the horizon [{lo}, {hi}]")
        if self._cache is None:
            return self._evaluator(s, t)
        key = (s, t)
        val = self._cache.get(key)
        if val is None:
            val = self._evaluator(s, t)
            with self._lock:
                val = self._cache.setdefault(key, val)
        return val

    def log(self, s, t) -> FormalSum:
        return log_n(self.evaluate(s, t), self.alg)

    def to_float(self) -> "RoughPath":
        return RoughPath(lambda s, t: self.evaluate(s, t).to_float(), self.level, self.alpha,
                         self.alg, self.horizon, cache=self._cache is not None, dimension=self.dimension)

    def __repr__(self) -> str:
        return f"<RoughPath {self.structure} N={self.level} α={self.alpha} on {self.horizon}>"


def trivial_path(level: int, structure_name="tensor", horizon=(0, 1)) -> RoughPath:
    alg = structure(structure_name)
    return RoughPath(lambda s, t: alg.unit(level), level, 1.0, alg, horizon)


class PiecewiseLinearPath:
    def __init__(self, times: Sequence, points: Sequence[Sequence]):
        if len(times) != len(points) or len(times) < 2:
            raise ValueError("need at least two knots and one point per knot")
        times = [as_coefficient(t) for t in times]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("knot times must be strictly increasing")
        dims = {len(p) for p in points}
        if len(dims) != 1:
            raise ValueError("all points must have the same dimension")
        self.times = times
        self.points = [tuple(as_coefficient(c) for c in p) for p in points]
        self.dimension = dims.pop()

    def __call__(self, t):
        i = bisect.bisect_right(self.times, t) - 1
        i = min(max(i, 0), len(self.times) - 2)
        t0, t1 = self.times[i], self.times[i + 1]
        lam = (t - t0) / (t1 - t0)
        return tuple(a + lam * (b - a) for a, b in zip(self.points[i], self.points[i + 1]))

    def breakpoints(self, s, t) -> list:
        inner = [u for u in self.times if s < u < t]
        return [s] + inner + [t]


def _letters(increment, level) -> FormalSum:
    return FormalSum(WORDS, {(i + 1,): c for i, c in enumerate(increment)}, level)


def signature_lift(path: PiecewiseLinearPath, level: int) -> RoughPath:
    """Tensor-structure lift: Chen product of ``exp_N`` of segment increments."""
    if level < 1:
        raise ValueError("level must be >= 1")
    alg = structure("tensor")

    def evaluate(s, t):
        out = alg.unit(level)
        pts = path.breakpoints(s, t)
        for a, b in zip(pts, pts[1:]):
            xa, xb = path(a), path(b)
            inc = [q - p for p, q in zip(xa, xb)]
            out = alg.mul(out, exp_n(_letters(inc, level), alg))
        return out

    return RoughPath(evaluate, level, 1.0, alg, (path.times[0], path.times[-1]), dimension=path.dimension)


def from_group_path(g: Callable, level: int, alpha: float = 1.0, structure_name="tensor",
                    horizon=(0, 1), strict: bool = False, check: bool = True) -> RoughPath:
    """``X_{s,t} = g(s)⁻¹ ⋆ g(t)``; Chen's identity holds by construction."""
    alg = structure(structure_name)
    seen: dict = {}

    def value(t):
        v = seen.get(t)
        if v is None:
            v = g(t)
            if v.level != level:
                v = v.truncate(level)
            if check:
                tol = None if v.is_exact() else 1e-10
                if not is_grouplike(v, alg, tol):
                    raise ValueError(f"g({t}) is not group-like at level {level}")
            seen[t] = v
        return v

    def evaluate(s, t):
        return alg.mul(inverse(value(s), alg, check=False), value(t))

    return RoughPath(evaluate, level, alpha, alg, horizon, strict=strict)


def group_path_from_primitives(components: Sequence[tuple], level: int, alpha: float = 1.0,
                               structure_name="tensor", horizon=(0, 1), strict: bool = False) -> RoughPath:
    """``g_t = exp_N(Σ_j t^{k_j} p_j)`` from pairs ``(p_j, k_j)`` of primitives and powers."""
    alg = structure(structure_name)
    for p, _ in components:
        if p.counit() != 0:
            raise ValueError("primitive components must have zero grade-0 part")

    def g(t):
        h = sum((p.truncate(level).scale(t ** k) for p, k in components), FormalSum.zero(alg.basis, level))
        return exp_n(h, alg, level)

    return from_group_path(g, level, alpha, alg, horizon, strict, check=False)


# ---------------------------------------------------------------------------
# diagnostics


def _triples(grid):
    grid = sorted(grid)
    for i, j, k in itertools.combinations(range(len(grid)), 3):
        yield grid[i], grid[j], grid[k]


def chen_check(X: RoughPath, grid: Sequence):
    """Largest coefficient of ``X_{s,u} ⋆ X_{u,t} − X_{s,t}`` over grid triples."""
    worst = 0
    for s, u, t in _triples(grid):
        d = X.alg.mul(X(s, u), X(u, t)) - X(s, t)
        for c in d.terms.values():
            if abs(c) > worst:
                worst = abs(c)
    return worst


def _norm(values: Callable, basis, alpha, grid) -> float:
    grid = sorted(grid)
    if len(grid) < 2:
        raise ValueError("need at least two grid points")
    best = 0.0
    for s, t in itertools.combinations(grid, 2):
        if t == s:
            continue
        h = float(t - s) ** alpha
        for k, c in values(s, t).items():
            g = basis.grade(k)
            if g == 0:
                continue
            best = max(best, abs(float(c)) ** (1.0 / g) / h)
    return best


def holder_norm(X: RoughPath, alpha: float, grid: Sequence) -> float:
    """``max |⟨X_{s,t}, τ⟩|^{1/|τ|} / |t−s|^α`` over grid pairs and keys."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return _norm(X.evaluate, X.alg.basis, alpha, grid)


def log_norm_compare(X: RoughPath, alpha: float, grid: Sequence) -> tuple[float, float, float]:
    """Hölder-type estimates of ``X`` and of ``L = log_N X``, and their ratio ``‖L‖/‖X‖``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    nx = _norm(X.evaluate, X.alg.basis, alpha, grid)
    nl = _norm(X.log, X.alg.basis, alpha, grid)
    ratio = nl / nx if nx else float("nan")
    return nx, nl, ratio


# ---------------------------------------------------------------------------
# JSON descriptors


def _parse_scale(scale: str) -> int:
    scale = scale.replace(" ", "")
    if scale == "t":
        return 1
    if scale.startswith("t^") and scale[2:].isdigit():
        return int(scale[2:])
    raise ValueError(f"unsupported scale {scale!r}; use 't' or 't^k'")


def from_descriptor(desc: dict, level: int, alpha: float = 1.0, structure_name="tensor",
                    exact: bool = True, horizon=None) -> RoughPath:
    """Build a rough path from ``{"type": "piecewise_linear" | "group_path" | "trivial", ...}``."""
    kind = desc.get("type")
    conv = (lambda v: Fraction(str(v))) if exact else (lambda v: float(Fraction(str(v))))
    if kind == "piecewise_linear":
        if structure(structure_name).name != "tensor":
            raise ValueError("piecewise-linear lifts are tensor-structure only")
        path = PiecewiseLinearPath([conv(t) for t in desc["times"]],
                                   [[conv(c) for c in p] for p in desc["points"]])
        X = signature_lift(path, level)
        X.alpha = alpha
        return X if exact else X.to_float()
    alg = structure(structure_name)
    hz = tuple(conv(h) for h in (horizon or desc.get("horizon", (0, 1))))
    if kind == "trivial":
        return trivial_path(level, alg, hz)
    if kind == "group_path":
        prims = desc["primitive"]
        if isinstance(prims, str):
            prims = [{"primitive": prims, "scale": desc.get("scale", "t")}]
        comps = []
        for item in prims:
            p = FormalSum.parse(alg.basis, item["primitive"], level)
            if not exact:
                p = p.to_float()
            comps.append((p, _parse_scale(item.get("scale", "t"))))
        return group_path_from_primitives(comps, level, alpha, alg, hz)
    raise ValueError(f"unknown path type {kind!r}")

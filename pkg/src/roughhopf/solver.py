"""Log-ODE almost-flows, dyadic sewing and chart-wise solving.

One almost-flow step integrates the polynomial field ``ℱ(L_{s,t})``,
``L_{s,t} = log_N X_{s,t}``, over unit time with classical RK4.  Sewing
composes these steps over dyadic partitions until successive levels agree.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .algebra import FormalSum
from .differentials import PseudoBialgebraMap
from .forests import nonplanar_forests, planar_forests
from .grouplike import is_primitive
from .kernels import rk4_chain, rk4_many
from .polynomials import Polynomial, PolyVectorField
from .roughpath import RoughPath
from .words import all_words

__all__ = [
    "SolverConfig",
    "FlowDiagnostics",
    "FlowResult",
    "SewingError",
    "DomainExitError",
    "LogODEField",
    "log_increment",
    "almost_flow_step",
    "sew",
    "flow_defect",
    "apply_signature",
    "davie_residual",
    "DavieTable",
    "taylor_check",
    "composition_remainder",
    "estimate_horizon",
    "Transition",
    "Chart",
    "SolveResult",
    "solve_on_charts",
    "check_transitions",
]


class SewingError(RuntimeError):
    pass


class DomainExitError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    alpha: float = 1.0
    level: int = 2
    substeps: int = 32
    n_max: int = 14
    tol: float = 1e-9
    box: tuple | None = None
    horizon: float | None = None
    lattice: int = 9
    switch_fraction: float = 0.1
    max_switches: int = 1000
    consistency_tol: float = 1e-8
    require_convergence: bool = True
    diagnostics_levels: int = 6

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def bounds(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        if self.box is None:
            return np.full(dim, -np.inf), np.full(dim, np.inf)
        lo, hi = self.box
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def with_box(self, box) -> "SolverConfig":
        out = SolverConfig(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        out.box = box
        return out


@dataclass
class FlowDiagnostics:
    cauchy_increments: list = field(default_factory=list)
    rate: float | None = None
    lipschitz: list = field(default_factory=list)
    holder_constant: float = 0.0
    almost_flow_constant: float = 0.0
    almost_flow_defects: list = field(default_factory=list)
    joint_defect: float = 0.0
    davie_residuals: list = field(default_factory=list)


@dataclass
class FlowResult:
    s: float
    t: float
    x0: np.ndarray
    point: np.ndarray
    level_used: int
    converged: bool
    times: list
    states: np.ndarray
    diagnostics: FlowDiagnostics
    chart: str | None = None
    _field: "LogODEField | None" = None
    _coeffs: np.ndarray | None = None
    _cfg: SolverConfig | None = None

    def evaluate(self, s, t, x) -> np.ndarray:
        """``η_{s,t}(x)`` for ``s <= t`` on the sewing grid."""
        try:
            i, j = self.times.index(s), self.times.index(t)
        except ValueError:
            raise ValueError("evaluation times must lie on the sewing grid") from None
        if j < i:
            raise ValueError("need s <= t")
        if i == j:
            return np.array(x, dtype=float)
        lo, hi = self._cfg.bounds(len(self.x0))
        states, status = rk4_chain(self._field.E, self._coeffs[i:j], np.asarray(x, float),
                                   self._cfg.substeps, lo, hi)
        if status >= 0:
            raise DomainExitError("trajectory left the box")
        return states[-1]


# ---------------------------------------------------------------------------
# the log-ODE vector field


def basis_keys(structure: str, n: int, level: int) -> list:
    if structure == "tensor":
        return all_words(n, level, 1)
    if structure == "GL":
        return [f for k in range(1, level + 1) for f in nonplanar_forests(k, n)]
    if structure == "MKW":
        return [f for k in range(1, level + 1) for f in planar_forests(k, n)]
    raise ValueError(f"unknown structure {structure!r}")


class LogODEField:
    """Precomputed first-order parts of ``ℱ(k)`` for all keys up to ``level``.

    ``ℱ(L)`` for primitive ``L`` is a vector field, so only first-order parts
    contribute; it is assembled as ``Σ_k L_k C_k`` on a shared monomial list.
    """

    def __init__(self, fmap: PseudoBialgebraMap, level: int):
        self.fmap = fmap
        self.level = level
        self.dim = fmap.dim
        self.keys = basis_keys(fmap.structure, len(fmap.fields), level)
        self.fields: dict = {}
        for k in self.keys:
            V = fmap.key_operator(k).first_order_field()
            if not V.is_zero():
                self.fields[k] = V
        exps: dict = {}
        for V in self.fields.values():
            for c in V.components:
                for e in c.terms:
                    exps.setdefault(e, len(exps))
        if not exps:
            exps[(0,) * self.dim] = 0
        self.exponents = exps
        self.index = {k: i for i, k in enumerate(self.fields)}
        self.E = np.array(sorted(exps, key=exps.get), dtype=np.int64).reshape(len(exps), self.dim)
        self.C = np.zeros((max(len(self.fields), 1), len(exps), self.dim))
        for k, i in self.index.items():
            _, Ck = self.fields[k].to_arrays(exps)
            self.C[i] = Ck

    def coeff_matrix(self, L: FormalSum) -> np.ndarray:
        out = np.zeros(self.E.shape[0:1] + (self.dim,))
        for k, c in L.items():
            i = self.index.get(k)
            if i is not None:
                out += float(c) * self.C[i]
        return out

    def exact_field(self, L: FormalSum) -> PolyVectorField:
        return self.fmap.vector_field(L)

    def sup_norm(self, Cmat: np.ndarray, lo, hi, lattice: int) -> float:
        axes = [np.linspace(a, b, lattice) for a, b in zip(lo, hi)]
        pts = np.array(list(itertools.product(*axes)))
        mon = np.prod(np.power(pts[:, None, :], self.E[None, :, :]), axis=2)
        vals = mon @ Cmat
        return float(np.max(np.abs(vals))) if vals.size else 0.0


def _compiled(fmap: PseudoBialgebraMap, level: int) -> LogODEField:
    cache = fmap.__dict__.setdefault("_logode", {})
    if level not in cache:
        cache[level] = LogODEField(fmap, level)
    return cache[level]


def log_increment(X: RoughPath, s, t, tol: float | None = None) -> FormalSum:
    """``L_{s,t} = log_N X_{s,t}``, validated primitive."""
    if s > t:
        raise ValueError("need s <= t")
    L = X.log(s, t)
    if L.is_exact() and tol is None:
        ok = is_primitive(L, X.alg)
    else:
        ok = is_primitive(L, X.alg, tol if tol is not None else 1e-9 * max(1.0, L.max_abs() ** 2))
    if not ok:
        raise ValueError(f"X_{{{s},{t}}} is not group-like within tolerance")
    return L


def _float_log(X: RoughPath, a, b) -> FormalSum:
    return X.log(a, b)


def almost_flow_step(fmap: PseudoBialgebraMap, X: RoughPath, s, t, x, cfg: SolverConfig | None = None) -> np.ndarray:
    """``μ_{s,t}(x)``: time-one RK4 solution of ``dZ = ℱ(L_{s,t})(Z)``, ``Z_0 = x``."""
    cfg = cfg or SolverConfig(level=X.level)
    lf = _compiled(fmap, X.level)
    C = lf.coeff_matrix(log_increment(X, s, t))
    lo, hi = cfg.bounds(fmap.dim)
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise DomainExitError("start point is outside the box")
    states, status = rk4_chain(lf.E, C[None], x, cfg.substeps, lo, hi)
    if status >= 0:
        raise DomainExitError(f"trajectory of μ_{{{s},{t}}} left the box")
    return states[-1]


def _dyadic(s, t, k: int) -> list:
    n = 1 << k
    if isinstance(s, Fraction) or isinstance(t, Fraction):
        return [s + (t - s) * Fraction(i, n) for i in range(n + 1)]
    return [s + (t - s) * i / n for i in range(n + 1)]


def _level_coeffs(lf: LogODEField, X: RoughPath, times: list) -> np.ndarray:
    return np.stack([lf.coeff_matrix(_float_log(X, a, b)) for a, b in zip(times, times[1:])])


def sew(fmap: PseudoBialgebraMap, X: RoughPath, s, t, x, cfg: SolverConfig | None = None,
        diagnostics: bool = False, chart: str | None = None) -> FlowResult:
    """Compose almost-flow steps over dyadic partitions of ``[s, t]``."""
    cfg = cfg or SolverConfig(level=X.level, alpha=X.alpha)
    if s > t:
        raise ValueError("need s <= t")
    lf = _compiled(fmap, X.level)
    lo, hi = cfg.bounds(fmap.dim)
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise DomainExitError("start point is outside the box")
    diag = FlowDiagnostics()
    prev = None
    history = []
    converged = False
    for k in range(cfg.n_max + 1):
        times = _dyadic(s, t, k)
        Cs = _level_coeffs(lf, X, times)
        states, status = rk4_chain(lf.E, Cs, x, cfg.substeps, lo, hi)
        if status >= 0:
            raise DomainExitError(f"trajectory left the box on [{times[status]}, {times[status + 1]}] at level {k}")
        history.append((times, Cs, states))
        y = states[-1]
        if prev is not None:
            inc = float(np.max(np.abs(y - prev)))
            diag.cauchy_increments.append(inc)
            if inc < cfg.tol:
                converged = True
                break
        prev = y
    diag.rate = _rate(diag.cauchy_increments)
    level = len(history) - 1
    if not converged and cfg.require_convergence:
        raise SewingError(f"no convergence within n_max={cfg.n_max}: last increment "
                          f"{diag.cauchy_increments[-1]:.3e}, measured rate 2^-{diag.rate}")
    if diagnostics:
        _fill_diagnostics(diag, lf, X, history, cfg, lo, hi, s, t, x)
    times, Cs, states = history[-1]
    return FlowResult(s, t, x, states[-1], level, converged, list(times), states, diag, chart, lf, Cs, cfg)


def _rate(incs: list) -> float | None:
    vals = [v for v in incs if v > 1e-14]
    if len(vals) < 2:
        return None
    ratios = [math.log2(b / a) for a, b in zip(vals, vals[1:])]
    return -sum(ratios) / len(ratios)


def _fill_diagnostics(diag, lf, X, history, cfg, lo, hi, s, t, x):
    theta = (X.level + 1) * cfg.alpha
    top = min(len(history) - 1, cfg.diagnostics_levels)
    for k in range(top + 1):
        times, _, states = history[k]
        for j, (a, b) in enumerate(zip(times, times[1:])):
            if b > a:
                diag.holder_constant = max(diag.holder_constant,
                                           float(np.max(np.abs(states[j + 1] - states[j]))) / float(b - a) ** cfg.alpha)
    for k in range(1, top + 1):
        coarse_t, _, coarse_s = history[k - 1]
        fine_t, fine_C, _ = history[k]
        first, st1 = rk4_many(lf.E, fine_C[0::2], coarse_s[:-1], cfg.substeps, lo, hi)
        second, st2 = rk4_many(lf.E, fine_C[1::2], first, cfg.substeps, lo, hi)
        if np.any(st1 >= 0) or np.any(st2 >= 0):
            break
        defect = np.max(np.abs(second - coarse_s[1:]), axis=1)
        h = float(coarse_t[1] - coarse_t[0])
        worst = float(np.max(defect))
        diag.almost_flow_defects.append((h, worst))
        if h > 0:
            diag.almost_flow_constant = max(diag.almost_flow_constant, worst / h ** theta)
    # Lipschitz constant of μ_{s,s+h} near x over halving h
    d = len(x)
    delta = 1e-4
    for j in range(top + 1):
        times = history[j][0]
        C0 = history[j][1][0]
        pts = [x] + [x + delta * e for e in np.eye(d)] + [x - delta * e for e in np.eye(d)]
        pts = np.array([p for p in pts if np.all(p >= lo) and np.all(p <= hi)])
        out, st = rk4_many(lf.E, np.repeat(C0[None], len(pts), axis=0), pts, cfg.substeps, lo, hi)
        if np.any(st >= 0):
            continue
        L = 0.0
        for a, b in itertools.combinations(range(len(pts)), 2):
            dx = float(np.max(np.abs(pts[a] - pts[b])))
            if dx > 0:
                L = max(L, float(np.max(np.abs(out[a] - out[b]))) / dx)
        diag.lipschitz.append((float(times[1] - times[0]), L))
    # joint defect, read as D(x) − D(y) with D(z) = μ_{s,t}z − μ_{u,t}μ_{s,u}z (an interpretation)
    if len(history) > 1:
        Cc = history[0][1][0]
        Cf = history[1][1]
        pts = np.array([x] + [x + delta * e for e in np.eye(d)])
        ok = np.all((pts >= lo) & (pts <= hi), axis=1)
        pts = pts[ok]
        whole, s1 = rk4_many(lf.E, np.repeat(Cc[None], len(pts), 0), pts, cfg.substeps, lo, hi)
        half, s2 = rk4_many(lf.E, np.repeat(Cf[0][None], len(pts), 0), pts, cfg.substeps, lo, hi)
        comp, s3 = rk4_many(lf.E, np.repeat(Cf[1][None], len(pts), 0), half, cfg.substeps, lo, hi)
        if not (np.any(s1 >= 0) or np.any(s2 >= 0) or np.any(s3 >= 0)) and len(pts) > 1:
            D = whole - comp
            diag.joint_defect = max(float(np.max(np.abs(D[i] - D[0]))) / delta for i in range(1, len(pts)))


def flow_defect(fmap, X, s, u, t, x, cfg: SolverConfig | None = None) -> float:
    """``|η_{u,t}(η_{s,u}x) − η_{s,t}x|`` from three independent sewing runs."""
    a = sew(fmap, X, s, u, x, cfg).point
    b = sew(fmap, X, u, t, a, cfg).point
    c = sew(fmap, X, s, t, x, cfg).point
    return float(np.max(np.abs(b - c)))


# ---------------------------------------------------------------------------
# Davie and Taylor diagnostics


def apply_signature(fmap: PseudoBialgebraMap, value: FormalSum, phi: Polynomial) -> Polynomial:
    """``ℱ(X)φ = Σ_k X_k ℱ(k)φ``, including the unit term."""
    out = Polynomial.zero(fmap.dim)
    cache = fmap.__dict__.setdefault("_applied", {})
    for k, c in value.items():
        key = (k, phi)
        p = cache.get(key)
        if p is None:
            p = fmap.key_operator(k).apply(phi)
            cache[key] = p
        out = out + p * c
    return out


def _signature_value(fmap, value: FormalSum, phi: Polynomial, x) -> float:
    cache = fmap.__dict__.setdefault("_applied", {})
    total = 0.0
    for k, c in value.items():
        key = (k, phi)
        p = cache.get(key)
        if p is None:
            p = fmap.key_operator(k).apply(phi)
            cache[key] = p
        total += float(c) * float(p.to_float()(x))
    return total


@dataclass
class DavieTable:
    rows: list
    slope: float | None

    def to_csv(self) -> str:
        lines = ["h,max_residual"]
        lines += [f"{h!r},{r!r}" for h, r in self.rows]
        return "\n".join(lines) + "\n"


def _slope(rows) -> float | None:
    pts = [(math.log(h), math.log(r)) for h, r in rows if r > 0 and h > 0]
    if len(pts) < 2:
        return None
    a, b = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)
    return float(a)


def davie_residual(fmap: PseudoBialgebraMap, X: RoughPath, phi: Polynomial, x, scales: Sequence,
                   starts: Sequence | None = None, cfg: SolverConfig | None = None) -> DavieTable:
    """Per scale ``h``: ``max_s |φ(η_{s,s+h}x) − ℱ(X_{s,s+h})φ(x)|`` and the log-log slope."""
    cfg = cfg or SolverConfig(level=X.level, alpha=X.alpha)
    starts = list(starts) if starts is not None else [X.horizon[0]]
    x = np.asarray(x, dtype=float)
    phif = phi.to_float()
    rows = []
    for h in scales:
        worst = 0.0
        for s in starts:
            if s + h > X.horizon[1]:
                continue
            y = sew(fmap, X, s, s + h, x, cfg).point
            r = abs(phif(y) - _signature_value(fmap, X(s, s + h), phi, x))
            worst = max(worst, r)
        rows.append((float(h), float(worst)))
    return DavieTable(rows, _slope(rows))


def composition_remainder(X: RoughPath, s, u, t) -> FormalSum:
    """Grade > N part of the untruncated product ``X_{s,u} ⋆ X_{u,t}``."""
    N = X.level
    full = X.alg.mul(X(s, u).with_level(None), X(u, t).with_level(None), level=2 * N)
    out = {k: c for k, c in full.items() if X.alg.basis.grade(k) > N}
    return FormalSum(X.alg.basis, out)


def taylor_check(fmap: PseudoBialgebraMap, X: RoughPath, s, t, x, phi: Polynomial,
                 cfg: SolverConfig | None = None) -> tuple:
    """``(|φ(μ_{s,t}x) − ℱ(X_{s,t})φ(x)|, |(ℱ(X_{s,u})∘ℱ(X_{u,t}) − ℱ(X_{s,t}))φ(x)|)`` with ``u`` the midpoint."""
    y = almost_flow_step(fmap, X, s, t, x, cfg)
    one = abs(float(phi.to_float()(y)) - _signature_value(fmap, X(s, t), phi, x))
    u = (s + t) / 2
    inner = apply_signature(fmap, X(u, t), phi)
    outer = apply_signature(fmap, X(s, u), inner)
    direct = apply_signature(fmap, X(s, t), phi)
    xx = [Fraction(v) if isinstance(v, (int, Fraction)) else v for v in x]
    two = abs((outer - direct)(xx))
    return one, two


def estimate_horizon(fmap: PseudoBialgebraMap, X: RoughPath, s, t_max, x, box, lattice: int = 9,
                     min_steps: int = 30) -> float:
    """Largest ``h = (t_max − s)/2^j`` with ``‖ℱ(L_{s,s+h})‖_K <= min(1, dist(x, ∂K))``."""
    lf = _compiled(fmap, X.level)
    lo, hi = box
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    dist = float(np.min(np.minimum(np.asarray(x) - lo, hi - np.asarray(x))))
    bound = min(1.0, dist)
    h = t_max - s
    for _ in range(min_steps):
        C = lf.coeff_matrix(X.log(s, s + h))
        if lf.sup_norm(C, lo, hi, lattice) <= bound:
            return h
        h = h / 2
    return h


# ---------------------------------------------------------------------------
# charts


_OPS = {">": np.greater, ">=": np.greater_equal, "<": np.less, "<=": np.less_equal}


@dataclass
class Transition:
    """Rational map into the chart ``target``: component ``i`` is ``num[i] / den[i]``."""

    target: str
    num: list
    den: list
    domain: list = field(default_factory=list)

    def contains(self, x) -> bool:
        x = np.asarray(x, float)
        for p, op in self.domain:
            if not _OPS[op](float(p.to_float()(x)), 0.0):
                return False
        return all(abs(float(d.to_float()(x))) > 1e-300 for d in self.den)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.array([float(n.to_float()(x)) / float(d.to_float()(x)) for n, d in zip(self.num, self.den)])


@dataclass
class Chart:
    name: str
    dim: int
    lo: Sequence
    hi: Sequence
    transitions: dict = field(default_factory=dict)

    @property
    def box(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    @property
    def radius(self) -> float:
        lo, hi = self.box
        return float(np.min(hi - lo)) / 2

    def margin(self, x) -> float:
        lo, hi = self.box
        x = np.asarray(x, float)
        return float(np.min(np.minimum(x - lo, hi - x)))

    def inside(self, x) -> bool:
        return self.margin(x) >= 0


def check_transitions(atlas: Sequence[Chart], samples: int = 50, seed: int = 0) -> float:
    """Max of ``|τ_ji(τ_ij(x)) − x|`` over sampled overlap points."""
    rng = np.random.default_rng(seed)
    by_name = {c.name: c for c in atlas}
    worst = 0.0
    for c in atlas:
        lo, hi = c.box
        for name, T in c.transitions.items():
            back = by_name[name].transitions.get(c.name)
            if back is None:
                continue
            for _ in range(samples):
                x = lo + (hi - lo) * rng.random(c.dim)
                if not T.contains(x):
                    continue
                y = T(x)
                if not back.contains(y):
                    continue
                worst = max(worst, float(np.max(np.abs(back(y) - x))))
    return worst


@dataclass
class SolveResult:
    rows: list
    max_discrepancy: float
    consistent: bool
    switches: int
    overlap_checks: int

    def to_csv(self) -> str:
        d = len(self.rows[0][2]) if self.rows else 0
        head = ["t", "chart"] + [f"x{i + 1}" for i in range(d)] + ["davie_residual", "level_used"]
        lines = [",".join(head)]
        for t, chart, x, res, lvl in self.rows:
            lines.append(",".join([repr(float(t)), chart] + [repr(float(v)) for v in x] + [repr(float(res)), str(lvl)]))
        return "\n".join(lines) + "\n"


def _coordinate_residual(fmap, X, a, b, x, y) -> float:
    value = X(a, b)
    worst = 0.0
    for k in range(fmap.dim):
        phi = Polynomial.var(fmap.dim, k)
        worst = max(worst, abs(float(y[k]) - _signature_value(fmap, value, phi, x)))
    return worst


def _maybe_switch(chart, x, atlas, cfg):
    if chart.margin(x) >= cfg.switch_fraction * chart.radius:
        return chart, x, False
    best = None
    for c in atlas:
        T = chart.transitions.get(c.name)
        if c is chart or T is None or not T.contains(x):
            continue
        y = T(x)
        rel = c.margin(y) / c.radius
        # strict improvement only; earlier charts win ties
        if rel > chart.margin(x) / chart.radius and (best is None or rel > best[0]):
            best = (rel, c, y)
    if best is None:
        return chart, x, False
    return best[1], best[2], True


def _cross_check(maps, X, atlas, chart, u, v, x, y, cfg) -> float | None:
    worst = None
    for c in atlas:
        T = chart.transitions.get(c.name)
        if c is chart or T is None or c.name not in maps:
            continue
        if not (T.contains(x) and T.contains(y)):
            continue
        xc, yc = T(x), T(y)
        if c.margin(xc) <= 0 or c.margin(yc) <= 0:
            continue
        try:
            yo = sew(maps[c.name], X, u, v, xc, cfg.with_box(c.box), chart=c.name).point
        except DomainExitError:
            continue
        d = float(np.max(np.abs(yo - yc)))
        worst = d if worst is None else max(worst, d)
    return worst


def solve_on_charts(maps: Mapping[str, PseudoBialgebraMap], X: RoughPath, atlas: Sequence[Chart], x0,
                    chart0: str, times: Sequence, cfg: SolverConfig | None = None) -> SolveResult:
    """Advance ``x0`` (coordinates in ``chart0``) along ``times``.

    Each macro step is cut into dyadic sub-steps no longer than the horizon
    ``T(K)`` at the current point; before every sub-step the chart is switched
    if the state is near the box boundary.  Sub-steps whose endpoints lie in
    another chart are re-solved there and compared after the transition.
    """
    cfg = cfg or SolverConfig(level=X.level, alpha=X.alpha)
    by_name = {c.name: c for c in atlas}
    if chart0 not in by_name:
        raise ValueError(f"unknown chart {chart0!r}")
    chart = by_name[chart0]
    x = np.asarray(x0, float)
    if not chart.inside(x):
        raise DomainExitError("start point is outside its chart box")
    rows = [(times[0], chart.name, x.copy(), 0.0, 0)]
    switches = 0
    worst = 0.0
    checks = 0
    for a, b in zip(times, times[1:]):
        u = a
        level = 0
        res = 0.0
        while u < b:
            chart, x, switched = _maybe_switch(chart, x, atlas, cfg)
            if switched:
                switches += 1
                if switches > cfg.max_switches:
                    raise SewingError("chart switching exceeded max_switches")
            if chart.name not in maps:
                raise ValueError(f"no vector fields supplied for chart {chart.name!r}")
            fmap = maps[chart.name]
            h = cfg.horizon if cfg.horizon is not None else estimate_horizon(fmap, X, u, b, x, chart.box, cfg.lattice)
            h = min(h, b - u)
            v = b if u + h >= b - 1e-12 * (b - a) else u + h
            flow = sew(fmap, X, u, v, x, cfg.with_box(chart.box), chart=chart.name)
            y = flow.point
            level = max(level, flow.level_used)
            res = max(res, _coordinate_residual(fmap, X, u, v, x, y))
            d = _cross_check(maps, X, atlas, chart, u, v, x, y, cfg)
            if d is not None:
                checks += 1
                worst = max(worst, d)
            x, u = y, v
        rows.append((b, chart.name, x.copy(), res, level))
    return SolveResult(rows, worst, worst <= cfg.consistency_tol, switches, checks)

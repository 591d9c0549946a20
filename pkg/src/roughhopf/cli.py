"""Command-line front end: ``roughhopf {algebra,lift,solve,davie,pushforward,verify}``.

Configs are JSON files validated against the schemas below (unknown keys are
rejected).  Results go to stdout or ``--output`` as CSV or canonical text.
Exit status: 0 on success, 2 on an invalid config or arguments, 1 when the
computation fails (a JSON error object is written to stderr).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import jsonschema
import numpy as np

from . import __version__
from .algebra import FormalSum
from .differentials import Connection, PseudoBialgebraMap
from .forests import (CK, GL, MKW, MKW_DUAL, ck_coproduct, gl_dual_coproduct,
                      gl_star, graft, left_graft, mkw_coproduct, mkw_star, parse_forest, sg)
from .grouplike import exp_n, log_n
from .polynomials import Polynomial, PolyVectorField
from .pushforward import pushforward
from .roughpath import chen_check, from_descriptor
from .solver import (Chart, SolverConfig, Transition, _coordinate_residual, davie_residual, sew,
                     solve_on_charts)
from .verify import SUITES, format_matrix, run
from .words import SHUFFLE, TENSOR, WORDS, deconcat, deshuffle, format_word, ordered_deshuffles, parse_word, shuffle

THREADS_ENV = "ROUGHHOPF_THREADS"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# schemas

_NUM = {"type": ["number", "string", "integer"]}
_POLY = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "exp": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "num": {"type": "integer"},
            "den": {"type": "integer", "minimum": 1},
        },
        "required": ["exp", "num"],
        "additionalProperties": False,
    },
}
_FIELD = {"type": "array", "items": _POLY, "minItems": 1}
_STRUCTURE = {"enum": ["tensor", "GL", "MKW"]}
_PATH = {
    "type": "object",
    "properties": {
        "type": {"enum": ["piecewise_linear", "group_path", "trivial"]},
        "times": {"type": "array", "items": _NUM, "minItems": 2},
        "points": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "primitive": {"oneOf": [
            {"type": "string"},
            {"type": "array", "minItems": 1, "items": {
                "type": "object",
                "properties": {"primitive": {"type": "string"}, "scale": {"type": "string"}},
                "required": ["primitive"],
                "additionalProperties": False,
            }},
        ]},
        "scale": {"type": "string"},
        "horizon": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    },
    "required": ["type"],
    "additionalProperties": False,
}
_SOLVER = {
    "type": "object",
    "properties": {
        "substeps": {"type": "integer", "minimum": 1},
        "n_max": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "box": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "minItems": 2, "maxItems": 2},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "lattice": {"type": "integer", "minimum": 2},
        "switch_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "max_switches": {"type": "integer", "minimum": 0},
        "consistency_tol": {"type": "number", "exclusiveMinimum": 0},
        "require_convergence": {"type": "boolean"},
    },
    "additionalProperties": False,
}
_COMMON = {
    "structure": _STRUCTURE,
    "level": {"type": "integer", "minimum": 1},
    "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "path": _PATH,
    "exact": {"type": "boolean"},
    "seed": {"type": "integer"},
}
_DRIVEN = dict(_COMMON, fields={"type": "array", "items": _FIELD, "minItems": 1},
               connection={"type": "array"}, solver=_SOLVER)
_TRANSITION = {
    "type": "object",
    "properties": {
        "target": {"type": "string"},
        "num": {"type": "array", "items": _POLY},
        "den": {"type": "array", "items": _POLY},
        "domain": {"type": "array", "items": {
            "type": "object",
            "properties": {"poly": _POLY, "op": {"enum": [">", ">=", "<", "<="]}},
            "required": ["poly", "op"],
            "additionalProperties": False,
        }},
    },
    "required": ["target", "num", "den"],
    "additionalProperties": False,
}
_CHART = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "lo": {"type": "array", "items": {"type": "number"}},
        "hi": {"type": "array", "items": {"type": "number"}},
        "fields": {"type": "array", "items": _FIELD, "minItems": 1},
        "connection": {"type": "array"},
        "transitions": {"type": "array", "items": _TRANSITION},
    },
    "required": ["name", "lo", "hi", "fields"],
    "additionalProperties": False,
}

SCHEMAS = {
    "lift": {
        "type": "object",
        "properties": dict(_COMMON, grid={"type": "array", "items": _NUM, "minItems": 2},
                           pairs={"enum": ["consecutive", "from_start", "all"]}),
        "required": ["path", "level", "grid"],
        "additionalProperties": False,
    },
    "solve": {
        "type": "object",
        "properties": dict(_DRIVEN, x0={"type": "array", "items": {"type": "number"}, "minItems": 1},
                           times={"type": "array", "items": _NUM, "minItems": 2},
                           charts={"type": "array", "items": _CHART, "minItems": 1},
                           chart0={"type": "string"}),
        "required": ["path", "level", "x0", "times"],
        "additionalProperties": False,
    },
    "davie": {
        "type": "object",
        "properties": dict(_DRIVEN, x0={"type": "array", "items": {"type": "number"}, "minItems": 1},
                           phi=_POLY,
                           scales={"type": "array", "items": _NUM, "minItems": 2},
                           starts={"type": "array", "items": _NUM, "minItems": 1}),
        "required": ["path", "level", "fields", "phi", "x0", "scales"],
        "additionalProperties": False,
    },
    "pushforward": {
        "type": "object",
        "properties": dict(_COMMON, map={"type": "array", "items": _POLY, "minItems": 1},
                           dim={"type": "integer", "minimum": 1},
                           x0={"type": "array", "items": _NUM, "minItems": 1},
                           grid={"type": "array", "items": _NUM, "minItems": 2},
                           refine={"type": "integer", "minimum": 1}),
        "required": ["path", "level", "map", "x0", "grid"],
        "additionalProperties": False,
    },
}


def load_config(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    validate(cfg, command)
    return cfg


def validate(cfg: dict, command: str):
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


# ---------------------------------------------------------------------------
# helpers


def _num(v, exact: bool):
    if exact:
        return Fraction(str(v))
    return float(Fraction(str(v))) if isinstance(v, str) else float(v)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _ordered_map(fn, items: list) -> list:
    """``map`` over a thread pool; results keep the input order."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _fmt(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def _exact_mode(args, cfg) -> bool:
    if args.exact is not None:
        return args.exact
    return bool(cfg.get("exact", True))


def _path(cfg, exact: bool):
    return from_descriptor(cfg["path"], cfg["level"], cfg.get("alpha", 1.0), cfg.get("structure", "tensor"),
                           exact=exact)


def _field_list(data) -> list:
    return [PolyVectorField.from_json(f) for f in data]


def _fmap(cfg_fields, cfg_conn, structure: str) -> PseudoBialgebraMap:
    fields = _field_list(cfg_fields)
    conn = Connection.from_json(cfg_conn) if cfg_conn is not None else None
    if structure == "MKW" and conn is None:
        conn = Connection.zero(fields[0].dim)
    return PseudoBialgebraMap(structure, fields, conn)


def _solver_cfg(cfg) -> SolverConfig:
    opts = dict(cfg.get("solver", {}))
    if "box" in opts:
        opts["box"] = tuple(opts["box"])
    return SolverConfig(level=cfg["level"], alpha=cfg.get("alpha", 1.0), **opts)


def _pairs(grid, mode):
    if mode == "consecutive":
        return list(zip(grid, grid[1:]))
    if mode == "all":
        return [(grid[i], grid[j]) for i in range(len(grid)) for j in range(i + 1, len(grid))]
    return [(grid[0], t) for t in grid[1:]]


# ---------------------------------------------------------------------------
# subcommands

_FOREST_OPS = {
    "gl_star": ("GL", 2), "mkw_star": ("MKW", 2), "graft": ("GL", 2), "left_graft": ("MKW", 2),
    "ck_coproduct": ("CK", 1), "gl_coproduct": ("GL", 1), "mkw_coproduct": ("MKW", 1), "sg": ("GL", 1),
}
_WORD_OPS = {"shuffle": 2, "concat": 2, "deconcat": 1, "deshuffle": 1, "ordered_deshuffle": 1}
_GROUP_OPS = {"exp", "log", "antipode", "mul"}
ALGEBRA_OPS = sorted(set(_FOREST_OPS) | set(_WORD_OPS) | _GROUP_OPS)
_ALGS = {"shuffle": SHUFFLE, "tensor": TENSOR, "CK": CK, "GL": GL, "MKW": MKW, "MKW*": MKW_DUAL}


def _literal(parse, text: str):
    try:
        return parse(text)
    except ValueError as exc:
        raise ConfigError(f"malformed literal {text!r}: {exc}") from None


def _forest(text: str):
    return _literal(parse_forest, text)


def _word(text: str):
    return _literal(parse_word, text)


def _single_forest(text: str):
    f = _forest(text)
    if len(f) != 1:
        raise ConfigError(f"{text!r} must be a single tree")
    return f[0]


def cmd_algebra(args) -> str:
    op = args.op
    need = _FOREST_OPS.get(op, (None, _WORD_OPS.get(op, 2 if op == "mul" else 1)))[1]
    if args.lhs is None or (need == 2 and args.rhs is None):
        raise ConfigError(f"--op {op} needs --lhs" + (" and --rhs" if need == 2 else ""))
    if op == "gl_star":
        return gl_star(_forest(args.lhs), _forest(args.rhs)).to_text()
    if op == "mkw_star":
        return mkw_star(_forest(args.lhs), _forest(args.rhs)).to_text()
    if op == "graft":
        return graft(_forest(args.lhs), _single_forest(args.rhs)).to_text()
    if op == "left_graft":
        return left_graft(_forest(args.lhs), _single_forest(args.rhs)).to_text()
    if op == "ck_coproduct":
        return ck_coproduct(_forest(args.lhs)).to_text()
    if op == "gl_coproduct":
        return gl_dual_coproduct(_forest(args.lhs)).to_text()
    if op == "mkw_coproduct":
        return mkw_coproduct(_forest(args.lhs)).to_text()
    if op == "sg":
        return str(sg(_forest(args.lhs)))
    if op == "shuffle":
        return shuffle(_word(args.lhs), _word(args.rhs)).to_text()
    if op == "concat":
        return FormalSum.of(WORDS, _word(args.lhs) + _word(args.rhs)).to_text()
    if op == "deconcat":
        return deconcat(_word(args.lhs)).to_text()
    if op == "deshuffle":
        return deshuffle(_word(args.lhs)).to_text()
    if op == "ordered_deshuffle":
        parts = ordered_deshuffles(_word(args.lhs), args.parts)
        return "\n".join("(" + ", ".join(format_word(p) for p in split) + ")" for split in parts)
    alg = _ALGS[args.structure]
    level = args.level
    x = _literal(lambda t: FormalSum.parse(alg.basis, t, level), args.lhs)
    if args.exact is False:
        x = x.to_float()
    if op == "antipode":
        return alg.antipode(x).to_text()
    if op == "mul":
        y = _literal(lambda t: FormalSum.parse(alg.basis, t, level), args.rhs)
        return alg.mul(x, y, level).to_text()
    if level is None:
        raise ConfigError(f"--op {op} needs --level")
    if op == "exp":
        return exp_n(x, alg, level).to_text()
    return log_n(x, alg, level).to_text()


def cmd_lift(args, cfg) -> str:
    exact = _exact_mode(args, cfg)
    X = _path(cfg, exact)
    grid = [_num(g, exact) for g in cfg["grid"]]
    pairs = _pairs(grid, cfg.get("pairs", "from_start"))
    values = _ordered_map(lambda st: X(*st), pairs)
    lines = ["s,t,key,coefficient"]
    fmt = X.alg.basis.format_key
    for (s, t), v in zip(pairs, values):
        for k, c in v.sorted_items():
            lines.append(f"{_fmt(s)},{_fmt(t)},{fmt(k)},{_fmt(c)}")
    lines.append(f"# chen_defect,{_fmt(chen_check(X, grid[: min(len(grid), 6)]))}")
    return "\n".join(lines) + "\n"


def _atlas(cfg, structure):
    charts, maps = [], {}
    for c in cfg["charts"]:
        fmap = _fmap(c["fields"], c.get("connection"), structure)
        trans = {}
        for t in c.get("transitions", []):
            dim = fmap.dim
            num = [Polynomial.from_json(p, dim) for p in t["num"]]
            den = [Polynomial.from_json(p, dim) for p in t["den"]]
            dom = [(Polynomial.from_json(d["poly"], dim), d["op"]) for d in t.get("domain", [])]
            trans[t["target"]] = Transition(t["target"], num, den, dom)
        charts.append(Chart(c["name"], fmap.dim, c["lo"], c["hi"], trans))
        maps[c["name"]] = fmap
    return charts, maps


def cmd_solve(args, cfg) -> str:
    structure = cfg.get("structure", "tensor")
    exact = _exact_mode(args, cfg)
    X = _path(cfg, exact)
    times = [_num(t, exact) for t in cfg["times"]]
    scfg = _solver_cfg(cfg)
    if "charts" in cfg:
        atlas, maps = _atlas(cfg, structure)
        chart0 = cfg.get("chart0", atlas[0].name)
        res = solve_on_charts(maps, X, atlas, cfg["x0"], chart0, times, scfg)
        out = res.to_csv()
        out += f"# max_overlap_discrepancy,{res.max_discrepancy!r}\n# chart_switches,{res.switches}\n"
        return out
    if "fields" not in cfg:
        raise ConfigError("solve needs either 'fields' or 'charts'")
    fmap = _fmap(cfg["fields"], cfg.get("connection"), structure)
    x = np.asarray(cfg["x0"], float)
    head = ["t", "chart"] + [f"x{i + 1}" for i in range(len(x))] + ["davie_residual", "level_used"]
    lines = [",".join(head), ",".join([_fmt(times[0]), "R"] + [repr(float(v)) for v in x] + ["0.0", "0"])]
    for a, b in zip(times, times[1:]):
        flow = sew(fmap, X, a, b, x, scfg)
        res = _coordinate_residual(fmap, X, a, b, x, flow.point)
        x = flow.point
        lines.append(",".join([_fmt(b), "R"] + [repr(float(v)) for v in x] + [repr(res), str(flow.level_used)]))
    return "\n".join(lines) + "\n"


def cmd_davie(args, cfg) -> str:
    exact = _exact_mode(args, cfg)
    X = _path(cfg, exact)
    fmap = _fmap(cfg["fields"], cfg.get("connection"), cfg.get("structure", "tensor"))
    phi = Polynomial.from_json(cfg["phi"], fmap.dim)
    scales = [_num(h, exact) for h in cfg["scales"]]
    starts = [_num(s, exact) for s in cfg.get("starts", [X.horizon[0]])]
    table = davie_residual(fmap, X, phi, cfg["x0"], scales, starts, _solver_cfg(cfg))
    slope = "" if table.slope is None else repr(table.slope)
    lines = ["h,max_residual,fitted_slope"] + [f"{h!r},{r!r},{slope}" for h, r in table.rows]
    return "\n".join(lines) + "\n"


def cmd_pushforward(args, cfg) -> str:
    exact = _exact_mode(args, cfg)
    X = _path(cfg, exact)
    dim = cfg.get("dim")
    phi = [Polynomial.from_json(p, dim) for p in cfg["map"]]
    x0 = [_num(v, exact) for v in cfg["x0"]]
    Y = pushforward(X, phi, cfg["level"], x0, cfg.get("refine", 64), exact=exact)
    grid = [_num(g, exact) for g in cfg["grid"]]
    pairs = _pairs(grid, "from_start")
    values = _ordered_map(lambda st: Y(*st), pairs)
    lines = ["s,t,word,coefficient"]
    for (s, t), v in zip(pairs, values):
        for k, c in v.sorted_items():
            lines.append(f"{_fmt(s)},{_fmt(t)},{format_word(k)},{_fmt(c)}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> tuple[str, bool]:
    names = args.suite or list(SUITES)
    for n in names:
        if n not in SUITES:
            raise ConfigError(f"unknown suite {n!r}; expected one of {sorted(SUITES)}")
    checks = run(names, args.seed)
    return format_matrix(checks), all(c.passed for c in checks)


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="roughhopf", description="Hopf algebras, rough paths and RDE solvers on charts.")
    p.add_argument("--version", action="version", version=f"roughhopf {__version__}")
    mode = argparse.ArgumentParser(add_help=False)
    g = mode.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="exact", action="store_true", default=None, help="rational arithmetic")
    g.add_argument("--float", dest="exact", action="store_false", help="floating-point arithmetic")
    mode.add_argument("-o", "--output", help="write results here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("algebra", parents=[mode], help="products, coproducts, exp/log in canonical text")
    a.add_argument("--op", required=True, choices=ALGEBRA_OPS)
    a.add_argument("--lhs")
    a.add_argument("--rhs")
    a.add_argument("--parts", type=int, default=2, help="number of parts for ordered_deshuffle")
    a.add_argument("--structure", default="tensor", choices=sorted(_ALGS))
    a.add_argument("--level", type=int)

    for name, text in [("lift", "rough path increments on a grid"), ("solve", "RDE solution on a time grid"),
                       ("davie", "Davie residuals and fitted slope"),
                       ("pushforward", "push-forward of a rough path under a polynomial map")]:
        s = sub.add_parser(name, parents=[mode], help=text)
        s.add_argument("--config", required=True, help="JSON config file")

    v = sub.add_parser("verify", parents=[mode], help="exact identity suites")
    v.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)} (repeatable; default all)")
    v.add_argument("--seed", type=int, default=0)
    return p


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def _write(args, text: str):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ok = True
    try:
        if args.command == "algebra":
            text = cmd_algebra(args)
        elif args.command == "verify":
            text, ok = cmd_verify(args)
        else:
            cfg = load_config(args.config, args.command)
            text = {"lift": cmd_lift, "solve": cmd_solve, "davie": cmd_davie,
                    "pushforward": cmd_pushforward}[args.command](args, cfg)
    except ConfigError as exc:
        _emit_error("config", str(exc))
        return 2
    except Exception as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    _write(args, text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

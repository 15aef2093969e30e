"""Command-line front end.

Subcommands: check, classify, set-check, theorems, optimize,
catalog (list | run | export), report.  Exit codes: 0 when the outcome
is consistent/supported/matching, 1 on a refutation or mismatch, 2 on
usage errors.  Settings resolve as flags > config file > built-ins.

Config files are INI-style; expression values are quoted verbatim and
prefixed with their arity::

    [functions]
    h = 1 "z1"
    eta = 2 "z1 - y1 - 6"
    w = 1 "y1 - 7"

    [domain]
    kind = full
    dim = 1
    sampling_box = -10,10

    [check]
    seed = 0
    eta_mode = w-lifted
"""

from __future__ import annotations

import argparse
import configparser
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import catalog as catalog_mod
from . import invexity, optimize, report as report_mod, theorems
from .exprlang import ExprError, identity_map, parse
from .invexity import ClassId
from .optimize import OptProblem, SolverConfig
from .sampling import CheckConfig, Domain

_FN_VALUE = re.compile(r'^\s*(\d+)\s+"(.*)"\s*$')


class UsageError(Exception):
    pass


def _parse_intervals(text: str) -> tuple:
    out = []
    for part in text.split(";"):
        bits = part.split(",")
        if len(bits) != 2:
            raise UsageError(f"bad interval {part!r}, expected 'lo,hi'")
        out.append((float(bits[0]), float(bits[1])))
    return tuple(out)


@dataclass
class RunConfig:
    functions: dict = field(default_factory=dict)       # name -> FunctionDef
    raw_functions: dict = field(default_factory=dict)   # name -> (expr, arity)
    domain: Domain | None = None
    check: CheckConfig = field(default_factory=CheckConfig)
    classes: list = field(default_factory=list)
    theorem_opts: dict = field(default_factory=dict)
    problem_opts: dict = field(default_factory=dict)
    out_path: str | None = None


_CHECK_INT = ("pair_samples", "delta_points", "seed")
_CHECK_FLOAT = ("delta_margin", "tol_weak", "tol_strict", "tol_membership")


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    read = parser.read(path)
    if not read:
        raise UsageError(f"cannot read config file {path!r}")
    rc = RunConfig()

    if parser.has_section("functions"):
        for name, value in parser.items("functions"):
            m = _FN_VALUE.match(value)
            if not m:
                raise UsageError(
                    f"function {name}: expected '<arity> \"<expr>\"', got {value!r}")
            arity, expr = int(m.group(1)), m.group(2)
            rc.raw_functions[name] = (expr, arity)
            rc.functions[name] = parse(expr, arity, name=name)

    if parser.has_section("domain"):
        sec = dict(parser.items("domain"))
        kind = sec.get("kind", "box")
        sampling = _parse_intervals(sec["sampling_box"]) if "sampling_box" in sec else None
        if kind == "box":
            intervals = _parse_intervals(sec["intervals"])
            rc.domain = Domain.box(intervals, sampling)
        elif kind == "halfline":
            lower = tuple(float(v) for v in sec["lower"].split(";"))
            rc.domain = Domain.halfline(lower, sampling)
        elif kind == "full":
            dim = int(sec.get("dim", len(sampling) if sampling else 1))
            rc.domain = Domain.full(dim, sampling)
        else:
            raise UsageError(f"unknown domain kind {kind!r}")

    if parser.has_section("check"):
        kw = {}
        for key, value in parser.items("check"):
            if key in _CHECK_INT:
                kw[key] = int(value)
            elif key in _CHECK_FLOAT:
                kw[key] = float(value)
            elif key == "eta_mode":
                kw[key] = value.strip()
            else:
                raise UsageError(f"unknown check setting {key!r}")
        rc.check = CheckConfig(**kw)

    if parser.has_section("classes"):
        raw = parser.get("classes", "list", fallback="")
        rc.classes = [c.strip() for c in raw.split(",") if c.strip()]

    if parser.has_section("theorems"):
        rc.theorem_opts = dict(parser.items("theorems"))

    if parser.has_section("problem"):
        rc.problem_opts = dict(parser.items("problem"))

    if parser.has_section("output"):
        rc.out_path = parser.get("output", "path", fallback=None)
    return rc


def _apply_flags(rc: RunConfig, args) -> RunConfig:
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        kw["pair_samples"] = args.samples
    if getattr(args, "delta_points", None) is not None:
        kw["delta_points"] = args.delta_points
    if getattr(args, "eta_mode", None) is not None:
        kw["eta_mode"] = args.eta_mode
    if kw:
        rc.check = rc.check.replace(**kw)
    if getattr(args, "box", None) is not None:
        box = _parse_intervals(args.box)
        if rc.domain is None:
            rc.domain = Domain.full(len(box), box)
        else:
            d = rc.domain
            if d.kind == "box":
                rc.domain = Domain.box(d.intervals, box)
            elif d.kind == "halfline":
                rc.domain = Domain.halfline(d.lower, box)
            else:
                rc.domain = Domain.full(d.dim, box)
    if getattr(args, "out", None) is not None:
        rc.out_path = args.out
    return rc


def _need(rc: RunConfig, *names):
    missing = [n for n in names if n not in rc.functions]
    if missing:
        raise UsageError(f"config must define function(s): {', '.join(missing)}")
    if rc.domain is None:
        raise UsageError("config must define a [domain] section")


def _maps(rc: RunConfig):
    h = rc.functions.get("h")
    eta = rc.functions["eta"]
    w = rc.functions.get("w")
    return h, eta, w


def _emit(report: dict, rc: RunConfig, args) -> None:
    text = report_mod.write_report(report, rc.out_path)
    if getattr(args, "json", False):
        sys.stdout.write(text)
    else:
        sys.stdout.write(report_mod.render_text(report))
    if rc.out_path:
        print(f"report written to {rc.out_path}")


def _function_context(rc: RunConfig, *names) -> dict:
    return {n: rc.raw_functions[n] for n in names if n in rc.raw_functions}


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    rc = _apply_flags(load_config(args.config), args)
    labels = [args.cls] if args.cls else rc.classes
    if not labels:
        raise UsageError("no class given: use --class or a [classes] section")
    _need(rc, "eta")
    h, eta, w = _maps(rc)
    rep = report_mod.make_report("check", rc.check.seed, _echo(rc))
    exit_code = 0
    for label in labels:
        cid = ClassId.parse(label)
        if cid.mode == "w" and w is None:
            raise UsageError(f"{label} needs a w map in the config")
        if cid.family == "set-invex":
            verdict = invexity.check_set_invex(rc.domain, eta, w, rc.check, mode=cid.mode)
        elif cid.family == "pre-pseudo":
            _need(rc, "h", "w")
            verdict, pseudo = invexity.check_pre_pseudo(h, eta, w, rc.domain, rc.check)
            rep["pseudo_reports"].append(pseudo.to_dict())
        else:
            _need(rc, "h")
            verdict = invexity.check_class(cid, h, eta, w, rc.domain, rc.check)
        report_mod.add_verdict(rep, verdict, _function_context(rc, "h", "eta", "w"),
                               rc.domain, rc.check)
        if verdict.refuted:
            exit_code = 1
    _emit(rep, rc, args)
    return exit_code


def cmd_classify(args) -> int:
    rc = _apply_flags(load_config(args.config), args)
    _need(rc, "h", "eta", "w")
    h, eta, w = _maps(rc)
    result = invexity.classify(h, eta, w, rc.domain, rc.check)
    rep = report_mod.make_report("classify", rc.check.seed, _echo(rc))
    for verdict in result.verdicts.values():
        report_mod.add_verdict(rep, verdict, _function_context(rc, "h", "eta", "w"),
                               rc.domain, rc.check)
    if result.pseudo_report:
        rep["pseudo_reports"].append(result.pseudo_report.to_dict())
    rep["lattice_errors"] = list(result.lattice_errors)
    _emit(rep, rc, args)
    refuted = any(v.refuted for v in result.verdicts.values())
    return 1 if refuted or result.lattice_errors else 0


def cmd_set_check(args) -> int:
    rc = _apply_flags(load_config(args.config), args)
    _need(rc, "eta")
    _, eta, w = _maps(rc)
    mode = "w" if w is not None else "classical"
    verdict = invexity.check_set_invex(rc.domain, eta, w, rc.check, mode=mode)
    rep = report_mod.make_report("set-check", rc.check.seed, _echo(rc))
    report_mod.add_verdict(rep, verdict, _function_context(rc, "eta", "w"),
                           rc.domain, rc.check)
    _emit(rep, rc, args)
    return 1 if verdict.refuted else 0


_ALL_THEOREMS = ("epigraph", "level-set", "argmin-set", "scale", "sum",
                 "weighted-sum", "compose", "pseudo-implication")


def cmd_theorems(args) -> int:
    rc = _apply_flags(load_config(args.config), args)
    _need(rc, "h", "eta", "w")
    h, eta, w = _maps(rc)
    opts = rc.theorem_opts
    wanted = [t.strip() for t in
              (args.theorems or opts.get("list", ",".join(_ALL_THEOREMS))).split(",")
              if t.strip()]
    alpha = float(args.alpha if args.alpha is not None else opts.get("alpha", 0.0))
    scale_k = float(args.scale_k if args.scale_k is not None else opts.get("scale_k", 3.0))
    weights = [float(v) for v in
               (args.weights or opts.get("weights", "1,2")).split(",")]
    phi_text = args.phi or opts.get("phi", '"exp(z1)"').strip().strip('"')
    target = args.compose_target or opts.get("compose_target", "preinvex")
    phi = parse(phi_text, 1, name="phi")

    reports = []
    for name in wanted:
        if name == "epigraph":
            reports.append(theorems.epigraph_check(h, eta, w, rc.domain, rc.check))
        elif name == "level-set":
            reports.append(theorems.level_set_check(h, eta, w, rc.domain, alpha, rc.check))
        elif name == "argmin-set":
            reports.append(theorems.argmin_set_check(h, eta, w, rc.domain, rc.check))
        elif name == "scale":
            reports.append(theorems.scale_check(h, eta, w, rc.domain, rc.check, scale_k))
        elif name == "sum":
            reports.append(theorems.sum_check(h, h, eta, w, rc.domain, rc.check))
        elif name == "weighted-sum":
            reports.append(theorems.weighted_sum_check(
                [h] * len(weights), weights, eta, w, rc.domain, rc.check))
        elif name == "compose":
            reports.append(theorems.compose_check(phi, h, eta, w, rc.domain,
                                                  rc.check, target=target))
        elif name == "pseudo-implication":
            reports.append(theorems.pseudo_implication_check(h, eta, w, rc.domain, rc.check))
        else:
            raise UsageError(f"unknown theorem {name!r}")
    rep = report_mod.make_report("theorems", rc.check.seed, _echo(rc))
    rep["theorem_reports"] = [t.to_dict() for t in reports]
    _emit(rep, rc, args)
    bad = any(t.status == "counterexample-to-implication" for t in reports)
    return 1 if bad else 0


def cmd_optimize(args) -> int:
    rc = _apply_flags(load_config(args.config), args)
    _need(rc, "eta", "w")
    opts = rc.problem_opts
    if not opts:
        raise UsageError("config must define a [problem] section")
    box = _parse_intervals(opts["box"]) if "box" in opts else rc.domain.sampling_box
    n = len(box)

    def fn_from(key):
        m = _FN_VALUE.match(opts[key])
        if not m:
            raise UsageError(f"problem {key}: expected '<arity> \"<expr>\"'")
        return parse(m.group(2), int(m.group(1)), name=key)

    if "objective" in opts:
        objective = fn_from("objective")
    elif "h" in rc.functions:
        objective = rc.functions["h"]
    else:
        raise UsageError("problem needs an objective")
    constraints = tuple(fn_from(k) for k in sorted(opts) if re.fullmatch(r"g\d+", k))
    problem = OptProblem(objective=objective, constraints=constraints,
                         eta=rc.functions["eta"], w=rc.functions["w"],
                         box=Domain.box(box))
    sconf = SolverConfig(seed=rc.check.seed,
                         starts=int(args.starts or opts.get("starts", 16)))
    ppa = int(args.points_per_axis or opts.get("points_per_axis", 0)) or None
    theorem_report = optimize.verify_optimality_theorems(problem, rc.check, sconf,
                                                         points_per_axis=ppa)
    rep = report_mod.make_report("optimize", rc.check.seed, _echo(rc))
    rep["theorem_reports"] = [theorem_report.to_dict()]
    rep["solve_results"] = [theorem_report.details.get("multistart"),
                            theorem_report.details.get("oracle")]
    _emit(rep, rc, args)
    return 1 if theorem_report.status == "counterexample-to-implication" else 0


def cmd_catalog(args) -> int:
    if args.action == "list":
        for f in catalog_mod.list_fixtures():
            print(f"{f.id}: {f.title}")
        return 0
    if args.action == "export":
        outdir = Path(args.dir or "fixtures")
        outdir.mkdir(parents=True, exist_ok=True)
        for f in catalog_mod.list_fixtures():
            (outdir / f"{f.id}.cfg").write_text(
                catalog_mod.fixture_config_text(f), encoding="utf-8")
            print(f"wrote {outdir / (f.id + '.cfg')}")
        return 0
    # run
    if args.all:
        ids = [f.id for f in catalog_mod.list_fixtures()]
    elif args.ids:
        ids = args.ids
    else:
        raise UsageError("catalog run needs fixture ids or --all")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["pair_samples"] = args.samples
    if args.delta_points is not None:
        overrides["delta_points"] = args.delta_points

    rep = report_mod.make_report("catalog-run", overrides.get("seed", 0),
                                 {"fixtures": ids, "overrides": overrides})
    all_ok = True
    for fixture_id in ids:
        try:
            fixture = catalog_mod.get_fixture(fixture_id)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
        result = catalog_mod.run_fixture(fixture_id, overrides)
        rep["fixture_results"].append(result.to_dict())
        cfg = fixture.config(overrides)
        fns = {"eta": (fixture.eta, 2 * fixture.domain.dim)}
        if fixture.h:
            fns["h"] = (fixture.h, fixture.domain.dim)
        if fixture.w:
            fns["w"] = (fixture.w, fixture.domain.dim)
        for verdict in result.verdicts.values():
            for kind, ce in (("original", verdict.counterexample),
                             ("shrunk", verdict.shrunk_counterexample)):
                if ce is None:
                    continue
                rep["counterexamples"].append({
                    "class": verdict.label, "kind": kind,
                    "functions": report_mod.function_echo(fns),
                    "domain": fixture.domain.to_dict(),
                    "check": cfg.to_dict(),
                    "witness": ce.to_dict(),
                })
        all_ok &= result.ok
        state = "ok" if result.ok else "MISMATCH"
        print(f"fixture {fixture_id}: {state}")
        for m in result.mismatches:
            print(f"  {m}")
    if args.out:
        report_mod.write_report(rep, args.out)
        print(f"report written to {args.out}")
    elif args.json:
        sys.stdout.write(report_mod.write_report(rep))
    return 0 if all_ok else 1


def cmd_report(args) -> int:
    rep = report_mod.load_report(args.path)
    code = 0
    did_something = False
    if args.reverify:
        ok, lines = report_mod.reverify_report(rep)
        for line in lines:
            print(line)
        print("reverify: all witnesses reproduced" if ok else "reverify: MISMATCH")
        code = 0 if ok else 1
        did_something = True
    if args.curves:
        rows = report_mod.write_curves_csv(rep, args.curves)
        print(f"wrote {rows} curve rows to {args.curves}")
        did_something = True
    if args.figures:
        paths = report_mod.write_figures(rep, args.figures)
        for p in paths:
            print(f"wrote {p}")
        did_something = True
    if not did_something:
        sys.stdout.write(report_mod.render_text(rep))
    return code


def _echo(rc: RunConfig) -> dict:
    return {
        "functions": report_mod.function_echo(rc.raw_functions),
        "domain": rc.domain.to_dict() if rc.domain else None,
        "check": rc.check.to_dict(),
    }


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(sub):
    sub.add_argument("--config", required=True, help="path to a run config file")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--samples", type=int, default=None, help="pair sample count")
    sub.add_argument("--delta-points", type=int, default=None, dest="delta_points")
    sub.add_argument("--box", default=None, help="sampling box 'lo,hi;lo,hi'")
    sub.add_argument("--eta-mode", choices=("as-written", "w-lifted"),
                     default=None, dest="eta_mode")
    sub.add_argument("--out", default=None, help="write the JSON report here")
    sub.add_argument("--json", action="store_true", help="print the JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winvex",
        description="numerical classification of generalized invexity")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="check one class")
    _common(p)
    p.add_argument("--class", dest="cls", default=None,
                   help="class label, e.g. w-preinvex or preinvex")
    p.set_defaults(fn=cmd_check)

    p = subs.add_parser("classify", help="run every class checker")
    _common(p)
    p.set_defaults(fn=cmd_classify)

    p = subs.add_parser("set-check", help="check a domain for (w-)invexity")
    _common(p)
    p.set_defaults(fn=cmd_set_check)

    p = subs.add_parser("theorems", help="run the structural checks")
    _common(p)
    p.add_argument("--theorems", default=None, help="comma list of checks")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--scale-k", type=float, default=None, dest="scale_k")
    p.add_argument("--weights", default=None)
    p.add_argument("--phi", default=None)
    p.add_argument("--compose-target", default=None, dest="compose_target",
                   choices=("preinvex", "prequasi"))
    p.set_defaults(fn=cmd_theorems)

    p = subs.add_parser("optimize", help="solve and validate the program")
    _common(p)
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--points-per-axis", type=int, default=None,
                   dest="points_per_axis")
    p.set_defaults(fn=cmd_optimize)

    p = subs.add_parser("catalog", help="list, run or export fixtures")
    p.add_argument("action", choices=("list", "run", "export"))
    p.add_argument("ids", nargs="*", help="fixture ids for 'run'")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--delta-points", type=int, default=None, dest="delta_points")
    p.add_argument("--dir", default=None, help="output directory for 'export'")
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_catalog)

    p = subs.add_parser("report", help="re-render or re-verify a saved report")
    p.add_argument("path")
    p.add_argument("--reverify", action="store_true")
    p.add_argument("--curves", default=None, help="write witness curves as CSV")
    p.add_argument("--figures", default=None, help="render witness curves as PNGs")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExprError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

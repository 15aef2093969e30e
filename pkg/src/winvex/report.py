"""Machine-readable run reports.

Reports are JSON (schema_version 1) with deterministic serialization:
sorted keys, no timestamps, repr-stable floats.  Identical config and
seed therefore produce byte-identical files.  Every counterexample entry
embeds the function sources, domain and check settings that produced it,
so a saved report re-verifies on its own via `winvex report --reverify`.

The report path can also export the sampled (delta, lhs - rhs) curve of
each witness as CSV and render the same curves to PNG files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import invexity
from .exprlang import identity_map, parse
from .invexity import ClassId, Counterexample
from .sampling import CheckConfig, Domain, delta_grid

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def _py(obj):
    """Coerce numpy scalars/arrays into plain Python for json."""
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        # json emits NaN/Infinity literals that are not valid JSON
        return repr(obj)
    return obj


def make_report(command: str, seed: int, config_echo: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "command": command,
        "seed": seed,
        "config_echo": config_echo,
        "verdicts": [],
        "counterexamples": [],
        "pseudo_reports": [],
        "theorem_reports": [],
        "solve_results": [],
        "fixture_results": [],
    }


def function_echo(functions: dict) -> dict:
    return {name: {"expr": expr, "arity": arity}
            for name, (expr, arity) in functions.items()}


def add_verdict(report: dict, verdict, functions: dict, domain: Domain,
                config: CheckConfig) -> None:
    """Attach a verdict plus self-contained witness records.

    `functions` maps role names (h/eta/w) to (expr_text, arity) pairs;
    role h may be absent for set checks.
    """
    report["verdicts"].append(verdict.to_dict())
    for kind, ce in (("original", verdict.counterexample),
                     ("shrunk", verdict.shrunk_counterexample)):
        if ce is None:
            continue
        report["counterexamples"].append({
            "class": verdict.label,
            "kind": kind,
            "functions": function_echo(functions),
            "domain": domain.to_dict(),
            "check": config.to_dict(),
            "witness": ce.to_dict(),
        })


def write_report(report: dict, path: str | None = None) -> str:
    text = json.dumps(_py(report), indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_report(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# reconstruction and re-verification
# ---------------------------------------------------------------------------

def _rebuild_entry(entry: dict):
    fns = entry["functions"]
    domain = Domain.from_dict(entry["domain"])
    config = CheckConfig.from_dict(entry["check"])
    n = domain.dim
    h = parse(fns["h"]["expr"], fns["h"]["arity"], name="h") if "h" in fns else None
    eta = parse(fns["eta"]["expr"], fns["eta"]["arity"], name="eta")
    w = (parse(fns["w"]["expr"], fns["w"]["arity"], name="w")
         if "w" in fns else identity_map(n))
    ce = Counterexample.from_dict(entry["witness"])
    return entry["class"], ce, h, eta, w, domain, config


def reverify_report(report: dict) -> tuple[bool, list]:
    """Recompute every stored witness from the report file alone."""
    lines = []
    all_ok = True
    for entry in report.get("counterexamples", []):
        label, ce, h, eta, w, domain, config = _rebuild_entry(entry)
        ok, recomputed = invexity.reverify_counterexample(
            label, ce, h, eta, w, domain, config)
        all_ok &= ok
        state = "ok" if ok else "MISMATCH"
        lines.append(f"{label} [{entry['kind']}]: {state} "
                     f"(violation {recomputed['violation']:.6g})")
    if not report.get("counterexamples"):
        lines.append("no counterexamples recorded")
    return all_ok, lines


# ---------------------------------------------------------------------------
# witness curves: CSV and figures
# ---------------------------------------------------------------------------

def _witness_curve(entry: dict):
    label, ce, h, eta, w, domain, config = _rebuild_entry(entry)
    cid = ClassId.parse(label)
    z1 = np.asarray(ce.z1, dtype=np.float64).reshape(1, -1)
    z2 = np.asarray(ce.z2, dtype=np.float64).reshape(1, -1)
    warped = w.eval_many(z2) if cid.mode == "w" else z2
    direction = eta.eval_many(np.concatenate([z1, warped], axis=1))
    if cid.family == "pre-pseudo":
        mode = label.split("(", 1)[1].rstrip(")") if "(" in label else config.eta_mode
        deltas = delta_grid(config, "open")
        base = z2 if mode == "as-written" else warped
    else:
        grid_kind = "closed" if cid.family in ("set-invex", "preinvex", "prequasi") else "open"
        deltas = delta_grid(config, grid_kind)
        base = warped
    gps = base[0][None, :] + deltas[:, None] * direction[0][None, :]
    if cid.family == "set-invex":
        lhs = domain.distance_many(gps)
        rhs = np.zeros_like(lhs)
    else:
        lhs = h.eval_many(gps)[:, 0]
        h1 = float(h.eval_many(z1)[:, 0][0])
        h2 = float(h.eval_many(z2)[:, 0][0])
        if cid.family in ("preinvex", "strict-preinvex"):
            rhs = deltas * h1 + (1.0 - deltas) * h2
        elif cid.family == "pre-pseudo":
            rhs = h2 + deltas * (deltas - 1.0) * config.tol_strict
        else:
            rhs = np.full_like(deltas, max(h1, h2))
    return label, entry["kind"], deltas, lhs, rhs


def write_curves_csv(report: dict, path: str) -> int:
    """One row per (witness, delta); returns the number of rows written."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "witness", "delta", "lhs", "rhs", "margin"])
        for entry in report.get("counterexamples", []):
            label, kind, deltas, lhs, rhs = _witness_curve(entry)
            for d, a, b in zip(deltas, lhs, rhs):
                writer.writerow([label, kind, repr(float(d)), repr(float(a)),
                                 repr(float(b)), repr(float(a - b))])
                rows += 1
    return rows


def write_figures(report: dict, outdir: str) -> list:
    """Render each witness curve to a PNG next to the CSV output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, entry in enumerate(report.get("counterexamples", [])):
        label, kind, deltas, lhs, rhs = _witness_curve(entry)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(deltas, lhs - rhs, marker=".", lw=1, label="lhs - rhs")
        ax.axhline(0.0, color="k", lw=0.8)
        ax.axvline(entry["witness"]["delta"], color="r", ls="--", lw=0.8,
                   label="witness delta")
        ax.set_xlabel("delta")
        ax.set_ylabel("violation margin")
        ax.set_title(f"{label} ({kind})")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        safe = label.replace("(", "_").replace(")", "").replace("/", "-")
        path = out / f"{i:02d}_{safe}_{kind}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(str(path))
    return paths


# ---------------------------------------------------------------------------
# human-readable rendering
# ---------------------------------------------------------------------------

def render_text(report: dict) -> str:
    lines = [f"winvex report (schema {report.get('schema_version')}, "
             f"command {report.get('command')!r}, seed {report.get('seed')})"]
    for v in report.get("verdicts", []):
        lines.append(f"  {v['class']}: {v['outcome']} "
                     f"(checked {v['samples_checked']}, skipped {v['samples_skipped']})")
        ce = v.get("shrunk_counterexample") or v.get("counterexample")
        if ce:
            lines.append(f"    witness: z1={ce['z1']} z2={ce['z2']} "
                         f"delta={ce['delta']} violation={ce['violation']}")
    for t in report.get("theorem_reports", []):
        lines.append(f"  theorem {t['theorem']}: {t['status']}"
                     + (f" ({t['mismatch_count']} mismatches)" if t["mismatch_count"] else ""))
    for s in report.get("solve_results", []):
        lines.append(f"  solve: {s['status']} best={s['best_value']} "
                     f"oracle={s['oracle_value']} spread={s['spread']}")
    for f in report.get("fixture_results", []):
        state = "ok" if f["matched"] and not f["lattice_errors"] else "MISMATCH"
        lines.append(f"  fixture {f['fixture']}: {state}")
        for m in f["mismatches"]:
            lines.append(f"    {m}")
    return "\n".join(lines) + "\n"

"""Numerical verification of structural results on concrete instances.

Each check takes an explicit (h, eta, w, domain) instance, evaluates the
hypothesis classes by sampling, then tests the conclusion on the same
samples.  A report can end three ways: `supported` (hypotheses held and
the conclusion held on every sample), `refuted-hypothesis` (some
hypothesis already failed, so the implication was not exercised), or
`counterexample-to-implication` (hypotheses held but the conclusion
failed on a shared sample - for the pointwise-derivable closures this
indicates an internal error, not a property of the inputs).

Covered here: the epigraph characterization of the chord inequality, the
level-set characterization of the quasi class, near-minimizer structure
of the argmin set, closure under positive scaling, sums, weighted sums
and increasing(-convex) composition, and the implication from the chord
inequality to pseudo-invexity with the explicit witness
b(z1, z2) = h(z2) - h(z1).

Local/global minimum results are validated in the optimize module, which
owns the descent machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exprlang import Binary, FunctionDef, Num, substitute
from .invexity import (ClassId, check_class, check_pre_pseudo, check_set_invex,
                       evaluate_class_samples)
from .sampling import CheckConfig, Domain, delta_grid, sample_pairs


@dataclass(frozen=True)
class EpiPoint:
    """A point (z, level) of the epigraph {(z, a) : h(z) <= a}."""

    z: tuple
    level: float


def make_epi_point(h: FunctionDef, z: Sequence[float], level: float,
                   tol_weak: float = 1e-9) -> EpiPoint:
    value = h.eval1(z)
    if not (level >= value - tol_weak):
        raise ValueError(f"level {level} lies below h(z) = {value}")
    return EpiPoint(z=tuple(float(v) for v in z), level=float(level))


@dataclass
class TheoremReport:
    theorem: str
    status: str  # supported | refuted-hypothesis | counterexample-to-implication
    hypothesis: dict
    conclusion: str
    agreement_rate: Optional[float] = None
    mismatch_count: int = 0
    mismatches: list = field(default_factory=list)
    samples_checked: int = 0
    samples_skipped: int = 0
    vacuous: bool = False
    notes: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "hypothesis": dict(self.hypothesis),
            "conclusion": self.conclusion,
            "agreement_rate": self.agreement_rate,
            "mismatch_count": self.mismatch_count,
            "mismatches": list(self.mismatches),
            "samples_checked": self.samples_checked,
            "samples_skipped": self.samples_skipped,
            "vacuous": self.vacuous,
            "notes": self.notes,
            "details": dict(self.details),
        }


_MISMATCH_CAP = 20


def _sample_dict(z1, z2, delta, lhs, rhs) -> dict:
    return {"z1": [float(v) for v in z1], "z2": [float(v) for v in z2],
            "delta": float(delta), "lhs": float(lhs), "rhs": float(rhs)}


def _collect(mask: np.ndarray, table, cap: int = _MISMATCH_CAP) -> list:
    out = []
    for i, j in np.argwhere(mask)[:cap]:
        out.append(_sample_dict(table.z1[i], table.z2[i], table.deltas[j],
                                table.lhs[i, j], table.rhs[i, j]))
    return out


# ---------------------------------------------------------------------------
# epigraph and level sets
# ---------------------------------------------------------------------------

def epigraph_check(h: FunctionDef, eta: FunctionDef, w: FunctionDef,
                   domain: Domain, config: CheckConfig) -> TheoremReport:
    """Chord inequality of h versus membership of the lifted point in epi(h).

    For each sample and level offsets a, b in {0, 1} the lifted point
    (point, delta*(h(z1)+a) + (1-delta)*(h(z2)+b)) must satisfy
    h(point) <= level; with a = b = 0 this is exactly the chord
    inequality, so per-sample agreement must be 100%.
    """
    pairs = sample_pairs(domain, config)
    hyp = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config, pairs=pairs)
    table = evaluate_class_samples(ClassId("preinvex", "w"), h, eta, w, domain,
                                   config, pairs=pairs)
    H1 = h.eval_many(table.z1)[:, 0]
    H2 = h.eval_many(table.z2)[:, 0]
    D = table.deltas
    el = table.eligible
    direct_ok = table.lhs <= table.rhs + config.tol_weak

    member00 = table.lhs <= table.rhs + config.tol_weak  # level with zero offsets
    agree = int((el & (direct_ok == member00)).sum())
    checked = int(el.sum())
    agreement = agree / checked if checked else 1.0

    offset_fail = np.zeros_like(el)
    derivable_fail = np.zeros_like(el)
    for a in (0.0, 1.0):
        for b in (0.0, 1.0):
            level = D[None, :] * (H1 + a)[:, None] + (1.0 - D)[None, :] * (H2 + b)[:, None]
            bad = el & ~(table.lhs <= level + config.tol_weak)
            offset_fail |= bad
            derivable_fail |= bad & direct_ok

    mismatches = _collect(offset_fail, table)
    status = "supported"
    if agreement < 1.0 or derivable_fail.any():
        status = "counterexample-to-implication"
    conclusion = "consistent" if not offset_fail.any() else "refuted"
    return TheoremReport(
        theorem="epigraph-characterization", status=status,
        hypothesis={"w-preinvex": hyp.outcome}, conclusion=conclusion,
        agreement_rate=agreement, mismatch_count=int(offset_fail.sum()),
        mismatches=mismatches, samples_checked=checked,
        samples_skipped=int(table.skipped.sum()),
        notes="membership failures coincide with chord-inequality failures",
        details={"level_offsets": [0.0, 1.0]})


def level_set_check(h: FunctionDef, eta: FunctionDef, w: FunctionDef,
                    domain: Domain, alpha: float,
                    config: CheckConfig) -> TheoremReport:
    """Sub-level sets {h <= alpha} stay closed under the generated move.

    Also runs the per-pair version with alpha = max{h(z1), h(z2)} and
    cross-reports agreement with the quasi-class inequality.
    """
    pairs = sample_pairs(domain, config)
    hyp_pre = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config, pairs=pairs)
    hyp_quasi = check_class(ClassId("prequasi", "w"), h, eta, w, domain, config, pairs=pairs)
    table = evaluate_class_samples(ClassId("prequasi", "w"), h, eta, w, domain,
                                   config, pairs=pairs)
    H1 = h.eval_many(table.z1)[:, 0]
    H2 = h.eval_many(table.z2)[:, 0]
    qualifying = (H1 <= alpha) & (H2 <= alpha)
    el = table.eligible & qualifying[:, None]
    fixed_fail = el & ~(table.lhs <= alpha + config.tol_weak)

    # per-pair alpha = max{h(z1), h(z2)}: identical to the quasi inequality
    quasi_ok = table.lhs <= table.rhs + config.tol_weak
    member_ok = table.lhs <= table.rhs + config.tol_weak
    agree = int((table.eligible & (quasi_ok == member_ok)).sum())
    checked_all = int(table.eligible.sum())
    agreement = agree / checked_all if checked_all else 1.0

    vacuous = not bool(qualifying.any())
    if hyp_pre.outcome == "refuted":
        status = "refuted-hypothesis"
    elif fixed_fail.any() or agreement < 1.0:
        status = "counterexample-to-implication"
    else:
        status = "supported"
    return TheoremReport(
        theorem="level-set-invexity", status=status,
        hypothesis={"w-preinvex": hyp_pre.outcome, "w-prequasi": hyp_quasi.outcome},
        conclusion="consistent" if not fixed_fail.any() else "refuted",
        agreement_rate=agreement, mismatch_count=int(fixed_fail.sum()),
        mismatches=_collect(fixed_fail, table),
        samples_checked=int(el.sum()), samples_skipped=int(table.skipped.sum()),
        vacuous=vacuous,
        notes="" if not vacuous else "no sampled pair lies in the level set",
        details={"alpha": float(alpha), "qualifying_pairs": int(qualifying.sum())})


# ---------------------------------------------------------------------------
# argmin set structure
# ---------------------------------------------------------------------------

_GRID_DEFAULTS = {1: 2001, 2: 101, 3: 41}


def _box_grid(domain: Domain, points_per_axis: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in domain.sampling_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def argmin_set_check(h: FunctionDef, eta: FunctionDef, w: FunctionDef,
                     domain: Domain, config: CheckConfig,
                     cluster_tol: float = 1e-6, cluster_radius: float = 1e-3,
                     points_per_axis: int | None = None) -> TheoremReport:
    """Near-minimizer structure of h over the sampling box.

    The infimum is estimated by a grid scan (box-relative); generated
    points between near-minimizers must stay near-minimal and inside the
    domain, and a strict-consistent h must produce a single tight
    cluster.  The grid minimum is assumed attained; for open-ended
    domains this is an assumption, not a finding.
    """
    if points_per_axis is None:
        points_per_axis = _GRID_DEFAULTS.get(domain.dim, 25)
    grid = _box_grid(domain, points_per_axis)
    values = h.eval_many(grid)[:, 0]
    finite = ~np.isnan(values)
    if not finite.any():
        return TheoremReport(theorem="argmin-set", status="refuted-hypothesis",
                             hypothesis={}, conclusion="refuted",
                             notes="objective is NaN on the whole grid")
    nu = float(np.min(values[finite]))
    mins = grid[finite][values[finite] <= nu + cluster_tol]
    span = mins.max(axis=0) - mins.min(axis=0)
    diameter = float(np.sqrt((span ** 2).sum()))

    hyp_set = check_set_invex(domain, eta, w, config)
    hyp_pre = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config)
    hyp_strict = check_class(ClassId("strict-preinvex", "w"), h, eta, w, domain, config)

    # moves between representative near-minimizers
    take = mins[np.unique(np.linspace(0, len(mins) - 1, min(len(mins), 12)).astype(int))]
    deltas = delta_grid(config, "closed")
    fail_count = 0
    mismatches = []
    checked = 0
    for a in take:
        for b in take:
            wb = w.eval_many(b.reshape(1, -1))
            direction = eta.eval_many(np.concatenate([a.reshape(1, -1), wb], axis=1))
            gps = wb[0][None, :] + deltas[:, None] * direction[0][None, :]
            hv = h.eval_many(gps)[:, 0]
            dist = domain.distance_many(gps)
            ok = (hv <= nu + cluster_tol + config.tol_weak) & (dist <= config.tol_membership)
            bad = ~ok & ~np.isnan(hv)
            checked += int((~np.isnan(hv)).sum())
            fail_count += int(bad.sum())
            if bad.any() and len(mismatches) < _MISMATCH_CAP:
                j = int(np.argmax(bad))
                mismatches.append(_sample_dict(a, b, deltas[j], hv[j], nu))

    singleton_ok = True
    if hyp_strict.outcome == "consistent":
        singleton_ok = diameter <= cluster_radius

    hypotheses_hold = (hyp_set.outcome == "consistent"
                       and hyp_pre.outcome == "consistent")
    if not hypotheses_hold:
        status = "refuted-hypothesis"
    elif fail_count > 0 or not singleton_ok:
        status = "counterexample-to-implication"
    else:
        status = "supported"
    return TheoremReport(
        theorem="argmin-set", status=status,
        hypothesis={"w-set-invex": hyp_set.outcome,
                    "w-preinvex": hyp_pre.outcome,
                    "w-strict-preinvex": hyp_strict.outcome},
        conclusion="consistent" if fail_count == 0 and singleton_ok else "refuted",
        mismatch_count=fail_count, mismatches=mismatches,
        samples_checked=checked,
        details={"nu": nu, "near_minimizers": int(len(mins)),
                 "cluster_diameter": diameter,
                 "minimizer_sample": [float(v) for v in mins[0]],
                 "points_per_axis": points_per_axis})


# ---------------------------------------------------------------------------
# closure constructors and their checks
# ---------------------------------------------------------------------------

def scale(h: FunctionDef, k: float) -> FunctionDef:
    if not (k > 0):
        raise ValueError(f"scale factor must be positive, got {k}")
    outs = tuple(Binary("*", Num(float(k)), o) for o in h.outputs)
    return FunctionDef(name=f"{k}*{h.name}", arity=h.arity, outputs=outs)


def sum_of(h1: FunctionDef, h2: FunctionDef) -> FunctionDef:
    if h1.arity != h2.arity or h1.n_outputs != h2.n_outputs:
        raise ValueError("summands must share arity and output count")
    outs = tuple(Binary("+", a, b) for a, b in zip(h1.outputs, h2.outputs))
    return FunctionDef(name=f"{h1.name}+{h2.name}", arity=h1.arity, outputs=outs)


def weighted_sum(hs: Sequence[FunctionDef], ks: Sequence[float]) -> FunctionDef:
    if len(hs) != len(ks) or not hs:
        raise ValueError("need one positive weight per function")
    acc = scale(hs[0], ks[0])
    for h, k in zip(hs[1:], ks[1:]):
        acc = sum_of(acc, scale(h, k))
    return acc


def compose(phi: FunctionDef, h: FunctionDef) -> FunctionDef:
    if phi.arity != 1 or phi.n_outputs != 1:
        raise ValueError("phi must be a scalar map of one variable")
    if h.n_outputs != 1:
        raise ValueError("composition target must be scalar-valued")
    inner = h.outputs[0]
    mapping = {("z", 1): inner, ("y", 1): inner}
    return FunctionDef(name=f"{phi.name}({h.name})", arity=h.arity,
                       outputs=(substitute(phi.outputs[0], mapping),))


def _phi_hypotheses(phi: FunctionDef, t_lo: float, t_hi: float,
                    config: CheckConfig, need_convex: bool) -> dict:
    if not np.isfinite(t_lo) or not np.isfinite(t_hi) or t_hi <= t_lo:
        t_lo, t_hi = -1.0, 1.0
    grid = np.linspace(t_lo, t_hi, 257).reshape(-1, 1)
    vals = phi.eval_many(grid)[:, 0]
    scale_ = max(1.0, float(np.nanmax(np.abs(vals))) if np.isfinite(vals).any() else 1.0)
    tol = config.tol_weak * scale_
    d1 = np.diff(vals)
    increasing = bool(np.all(np.isnan(d1) | (d1 >= -tol)))
    out = {"phi-increasing": "consistent" if increasing else "refuted"}
    if need_convex:
        d2 = np.diff(vals, 2)
        convex = bool(np.all(np.isnan(d2) | (d2 >= -tol)))
        out["phi-convex"] = "consistent" if convex else "refuted"
    return out


def _closure_report(name: str, hypothesis: dict, conclusion_verdict,
                    derivable: bool, notes: str = "") -> TheoremReport:
    hyp_ok = all(v == "consistent" for v in hypothesis.values())
    if not hyp_ok:
        status = "refuted-hypothesis"
    elif conclusion_verdict.outcome == "refuted":
        status = "counterexample-to-implication"
    else:
        status = "supported"
    details = {}
    ce = conclusion_verdict.counterexample
    if ce is not None:
        details["counterexample"] = ce.to_dict()
    return TheoremReport(theorem=name, status=status, hypothesis=hypothesis,
                         conclusion=conclusion_verdict.outcome,
                         samples_checked=conclusion_verdict.samples_checked,
                         samples_skipped=conclusion_verdict.samples_skipped,
                         notes=notes, details=details)


def scale_check(h, eta, w, domain, config, k: float) -> TheoremReport:
    pairs = sample_pairs(domain, config)
    hyp = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config, pairs=pairs)
    conc = check_class(ClassId("preinvex", "w"), scale(h, k), eta, w, domain,
                       config, pairs=pairs)
    return _closure_report(f"positive-scaling(k={k})",
                           {"w-preinvex": hyp.outcome}, conc, derivable=True)


def sum_check(h1, h2, eta, w, domain, config) -> TheoremReport:
    pairs = sample_pairs(domain, config)
    hyp1 = check_class(ClassId("preinvex", "w"), h1, eta, w, domain, config, pairs=pairs)
    hyp2 = check_class(ClassId("preinvex", "w"), h2, eta, w, domain, config, pairs=pairs)
    conc = check_class(ClassId("preinvex", "w"), sum_of(h1, h2), eta, w, domain,
                       config, pairs=pairs)
    return _closure_report("sum", {"w-preinvex(h1)": hyp1.outcome,
                                   "w-preinvex(h2)": hyp2.outcome}, conc,
                           derivable=True)


def weighted_sum_check(hs, ks, eta, w, domain, config) -> TheoremReport:
    pairs = sample_pairs(domain, config)
    hypothesis = {}
    for i, h in enumerate(hs):
        v = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config, pairs=pairs)
        hypothesis[f"w-preinvex(h{i + 1})"] = v.outcome
    conc = check_class(ClassId("preinvex", "w"), weighted_sum(hs, ks), eta, w,
                       domain, config, pairs=pairs)
    return _closure_report(f"weighted-sum(k={list(ks)})", hypothesis, conc,
                           derivable=True)


def compose_check(phi, h, eta, w, domain, config,
                  target: str = "preinvex") -> TheoremReport:
    """Composition closure: increasing convex phi preserves the chord
    inequality; an increasing phi preserves the quasi class."""
    if target not in ("preinvex", "prequasi"):
        raise ValueError("target must be 'preinvex' or 'prequasi'")
    pairs = sample_pairs(domain, config)
    hyp = check_class(ClassId(target, "w"), h, eta, w, domain, config, pairs=pairs)
    table = evaluate_class_samples(ClassId(target, "w"), h, eta, w, domain,
                                   config, pairs=pairs)
    vals = np.concatenate([h.eval_many(table.z1)[:, 0],
                           h.eval_many(table.z2)[:, 0],
                           table.lhs.reshape(-1)])
    vals = vals[np.isfinite(vals)]
    t_lo = float(vals.min()) if vals.size else -1.0
    t_hi = float(vals.max()) if vals.size else 1.0
    hypothesis = {f"w-{target}": hyp.outcome}
    hypothesis.update(_phi_hypotheses(phi, t_lo, t_hi, config,
                                      need_convex=(target == "preinvex")))
    conc = check_class(ClassId(target, "w"), compose(phi, h), eta, w, domain,
                       config, pairs=pairs)
    return _closure_report(f"composition({target})", hypothesis, conc,
                           derivable=False,
                           notes=f"phi hypotheses sampled on [{t_lo:.6g}, {t_hi:.6g}]")


# ---------------------------------------------------------------------------
# chord inequality implies pseudo-invexity
# ---------------------------------------------------------------------------

def pseudo_implication_check(h, eta, w, domain, config) -> TheoremReport:
    """With b(z1, z2) = h(z2) - h(z1) the pseudo inequality must follow
    from the chord inequality at every qualifying sample (w-lifted base)."""
    pairs = sample_pairs(domain, config)
    hyp = check_class(ClassId("preinvex", "w"), h, eta, w, domain, config, pairs=pairs)
    if hyp.outcome == "refuted":
        return TheoremReport(theorem="preinvex-implies-pseudo",
                             status="refuted-hypothesis",
                             hypothesis={"w-preinvex": hyp.outcome},
                             conclusion="not-tested",
                             notes="hypothesis refuted; implication not tested")
    Z1, Z2 = pairs[:, 0, :], pairs[:, 1, :]
    H1 = h.eval_many(Z1)[:, 0]
    H2 = h.eval_many(Z2)[:, 0]
    qualifying = H1 < (H2 - config.tol_strict)
    if not qualifying.any():
        return TheoremReport(theorem="preinvex-implies-pseudo", status="supported",
                             hypothesis={"w-preinvex": hyp.outcome},
                             conclusion="consistent", vacuous=True,
                             notes="no sampled pair has h(z1) < h(z2)")
    idx = np.flatnonzero(qualifying)
    deltas = delta_grid(config, "open")
    warped = w.eval_many(Z2[idx])
    direction = eta.eval_many(np.concatenate([Z1[idx], warped], axis=1))
    GP = warped[:, None, :] + deltas[None, :, None] * direction[:, None, :]
    Nq, m, n = GP.shape
    LHS = h.eval_many(GP.reshape(-1, n)).reshape(Nq, m)
    b = (H2 - H1)[idx]
    pseudo_rhs = H2[idx][:, None] + (deltas * (deltas - 1.0))[None, :] * b[:, None]
    pre_rhs = deltas[None, :] * H1[idx][:, None] + (1.0 - deltas)[None, :] * H2[idx][:, None]
    nan_mask = np.isnan(LHS)
    concl_fail = ~nan_mask & (LHS > pseudo_rhs + config.tol_weak)
    hyp_holds = ~nan_mask & (LHS <= pre_rhs + config.tol_weak)
    implication_broken = concl_fail & hyp_holds

    mismatches = []
    for i, j in np.argwhere(implication_broken)[:_MISMATCH_CAP]:
        mismatches.append(_sample_dict(Z1[idx[i]], Z2[idx[i]], deltas[j],
                                       LHS[i, j], pseudo_rhs[i, j]))
    status = "counterexample-to-implication" if implication_broken.any() else "supported"
    margins = np.where(nan_mask, np.inf, pseudo_rhs - LHS)
    return TheoremReport(
        theorem="preinvex-implies-pseudo", status=status,
        hypothesis={"w-preinvex": hyp.outcome},
        conclusion="refuted" if concl_fail.any() else "consistent",
        mismatch_count=int(implication_broken.sum()), mismatches=mismatches,
        samples_checked=int((~nan_mask).sum()), samples_skipped=int(nan_mask.sum()),
        details={"qualifying_pairs": int(qualifying.sum()),
                 "witness_margin_min": float(margins.min()) if margins.size else None,
                 "b_witness": "h(z2) - h(z1)"})

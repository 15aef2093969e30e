"""Sampling-based checkers for generalized invexity classes.

Given maps eta : R^n x R^n -> R^n and w : R^n -> R^n, the checkers test
the defining inequality of each class on a deterministic grid of sampled
(z1, z2, delta) triples, where the inspected point is

    w(z2) + delta * eta(z1, w(z2))          (w mode)
    z2    + delta * eta(z1, z2)             (classical mode, w = identity)

A check either refutes a class with a concrete witness or reports
consistency over all evaluated samples.  Consistency is never a proof:
the definitions quantify over all of X x X x [0, 1] and sampling can
only disprove them.

Class semantics (scalar h, rhs abbreviations mix = delta*h(z1) +
(1-delta)*h(z2), top = max{h(z1), h(z2)}):

    preinvex             h(point) <= mix       delta in [0, 1]
    strict-preinvex      h(point) <  mix       z1 != z2, delta in (0, 1)
    prequasi             h(point) <= top       delta in [0, 1]
    strict-prequasi      h(point) <  top       z1 != z2, delta in (0, 1)
    semistrict-prequasi  h(point) <  top       h(z1) != h(z2), delta in (0, 1)
    set-invex            point in X            delta in [0, 1]
    pre-pseudo           for pairs with h(z1) < h(z2) there must exist a
                         positive per-pair constant b with
                         h(base + delta*eta(z1, w(z2)))
                             <= h(z2) + delta*(delta-1)*b
                         where base is z2 in 'as-written' mode and w(z2)
                         in 'w-lifted' mode.

Weak (<=) checks refute when lhs > rhs + tol_weak; strict (<) checks
refute when lhs >= rhs - tol_strict.  NaN on either side skips the
sample; verdicts with a skip ratio above one half are flagged low
confidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exprlang import FunctionDef
from .sampling import CheckConfig, Domain, delta_grid, sample_pairs

FAMILIES = (
    "set-invex",
    "preinvex",
    "strict-preinvex",
    "prequasi",
    "strict-prequasi",
    "semistrict-prequasi",
    "pre-pseudo",
)

# family -> (grid, pair filter, comparison, rhs kind)
_CLASS_SPECS = {
    "preinvex": ("closed", None, "weak", "mix"),
    "strict-preinvex": ("open", "z-distinct", "strict", "mix"),
    "prequasi": ("closed", None, "weak", "max"),
    "strict-prequasi": ("open", "z-distinct", "strict", "max"),
    "semistrict-prequasi": ("open", "h-distinct", "strict", "max"),
}


@dataclass(frozen=True)
class ClassId:
    family: str
    mode: str = "w"  # 'w' | 'classical'

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown class family {self.family!r}")
        if self.mode not in ("w", "classical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.family == "pre-pseudo" and self.mode != "w":
            raise ValueError("pre-pseudo is defined for w mode only")

    def label(self, eta_mode: str | None = None) -> str:
        base = self.family if self.mode == "classical" else f"w-{self.family}"
        if self.family == "pre-pseudo":
            return f"{base}({eta_mode})" if eta_mode else base
        return base

    @classmethod
    def parse(cls, text: str) -> "ClassId":
        name = text.strip()
        mode = "classical"
        if name.startswith("w-"):
            mode = "w"
            name = name[2:]
        if "(" in name:
            name = name.split("(", 1)[0]
        return cls(family=name, mode=mode)


@dataclass(frozen=True)
class Counterexample:
    z1: tuple
    z2: tuple
    delta: float
    generated_point: tuple
    lhs: float
    rhs: float
    violation: float

    def to_dict(self) -> dict:
        return {
            "z1": list(self.z1),
            "z2": list(self.z2),
            "delta": self.delta,
            "generated_point": list(self.generated_point),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violation": self.violation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Counterexample":
        return cls(z1=tuple(d["z1"]), z2=tuple(d["z2"]), delta=float(d["delta"]),
                   generated_point=tuple(d["generated_point"]),
                   lhs=float(d["lhs"]), rhs=float(d["rhs"]),
                   violation=float(d["violation"]))


@dataclass(frozen=True)
class Verdict:
    label: str
    outcome: str  # 'refuted' | 'consistent'  (consistent-on-samples, never proof)
    samples_checked: int
    samples_skipped: int
    low_confidence: bool
    counterexample: Optional[Counterexample]
    shrunk_counterexample: Optional[Counterexample]
    config_echo: dict = field(default_factory=dict)

    @property
    def refuted(self) -> bool:
        return self.outcome == "refuted"

    def to_dict(self) -> dict:
        return {
            "class": self.label,
            "outcome": self.outcome,
            "samples_checked": self.samples_checked,
            "samples_skipped": self.samples_skipped,
            "low_confidence": self.low_confidence,
            "counterexample": self.counterexample.to_dict() if self.counterexample else None,
            "shrunk_counterexample": (self.shrunk_counterexample.to_dict()
                                      if self.shrunk_counterexample else None),
            "config_echo": dict(self.config_echo),
        }


@dataclass(frozen=True)
class PseudoWitnessReport:
    qualifying_pairs: int
    no_positive_b_pairs: int
    b_infimum: Optional[float]
    infimum_pair: Optional[tuple]

    def to_dict(self) -> dict:
        return {
            "qualifying_pairs": self.qualifying_pairs,
            "no_positive_b_pairs": self.no_positive_b_pairs,
            "b_infimum": self.b_infimum,
            "infimum_pair": ([list(self.infimum_pair[0]), list(self.infimum_pair[1])]
                             if self.infimum_pair else None),
        }


@dataclass
class SampleTable:
    """Raw per-sample evaluation of one class inequality."""

    label: str
    deltas: np.ndarray   # (m,)
    z1: np.ndarray       # (N, n)
    z2: np.ndarray       # (N, n)
    generated: np.ndarray  # (N, m, n)
    lhs: np.ndarray      # (N, m)
    rhs: np.ndarray      # (N, m)
    eligible: np.ndarray  # (N, m) bool
    skipped: np.ndarray   # (N, m) bool


# ---------------------------------------------------------------------------
# shared evaluation plumbing
# ---------------------------------------------------------------------------

def _validate(h, eta, w, domain, mode, need_h=True):
    n = domain.dim
    if need_h:
        if h.arity != n:
            raise ValueError(f"objective arity {h.arity} != domain dimension {n}")
        if h.n_outputs != 1:
            raise ValueError("objective must be scalar-valued")
    if eta.arity != 2 * n:
        raise ValueError(f"eta arity {eta.arity} != 2 * domain dimension {2 * n}")
    if eta.n_outputs != n:
        raise ValueError(f"eta must have {n} outputs, has {eta.n_outputs}")
    if mode == "w":
        if w is None:
            raise ValueError("w map required in w mode")
        if w.arity != n or w.n_outputs != n:
            raise ValueError(f"w must map R^{n} to R^{n}")


class _Maps:
    """Scalar and batch evaluation of the generated point machinery."""

    def __init__(self, h, eta, w, domain, config, mode):
        self.h = h
        self.eta = eta
        self.w = w
        self.domain = domain
        self.config = config
        self.mode = mode

    def warped(self, Z2: np.ndarray) -> np.ndarray:
        if self.mode == "w":
            return self.w.eval_many(Z2)
        return np.array(Z2, dtype=np.float64, copy=True)

    def direction(self, Z1: np.ndarray, warped: np.ndarray) -> np.ndarray:
        return self.eta.eval_many(np.concatenate([Z1, warped], axis=1))

    def h_of(self, P: np.ndarray) -> np.ndarray:
        return self.h.eval_many(P)[:, 0]


def _generated(base: np.ndarray, direction: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    return base[:, None, :] + deltas[None, :, None] * direction[:, None, :]


def _pair_filter(kind, Z1, Z2, H1, H2, tol_strict):
    if kind is None:
        return np.ones(Z1.shape[0], dtype=bool)
    if kind == "z-distinct":
        return (Z1 != Z2).any(axis=1)
    if kind == "h-distinct":
        # NaN values stay eligible so they are counted as skipped samples
        return ~(np.abs(H1 - H2) <= tol_strict)
    raise AssertionError(kind)


def _config_echo(config: CheckConfig, domain: Domain) -> dict:
    echo = config.to_dict()
    echo["sampling_box"] = [list(iv) for iv in domain.sampling_box]
    return echo


def evaluate_class_samples(class_id: ClassId, h: FunctionDef, eta: FunctionDef,
                           w: Optional[FunctionDef], domain: Domain,
                           config: CheckConfig,
                           pairs: np.ndarray | None = None) -> SampleTable:
    """Evaluate one class inequality on every sample; no verdict logic."""
    family = class_id.family
    if family not in _CLASS_SPECS:
        raise ValueError(f"evaluate_class_samples does not handle {family!r}")
    grid_kind, filter_kind, _, rhs_kind = _CLASS_SPECS[family]
    _validate(h, eta, w, domain, class_id.mode)
    maps = _Maps(h, eta, w, domain, config, class_id.mode)
    if pairs is None:
        pairs = sample_pairs(domain, config)
    Z1, Z2 = pairs[:, 0, :], pairs[:, 1, :]
    warped = maps.warped(Z2)
    direction = maps.direction(Z1, warped)
    H1, H2 = maps.h_of(Z1), maps.h_of(Z2)
    deltas = delta_grid(config, grid_kind)
    GP = _generated(warped, direction, deltas)
    N, m, n = GP.shape
    LHS = maps.h_of(GP.reshape(-1, n)).reshape(N, m)
    if rhs_kind == "mix":
        RHS = deltas[None, :] * H1[:, None] + (1.0 - deltas)[None, :] * H2[:, None]
    else:
        RHS = np.broadcast_to(np.maximum(H1, H2)[:, None], (N, m)).copy()
    eligible = np.broadcast_to(
        _pair_filter(filter_kind, Z1, Z2, H1, H2, config.tol_strict)[:, None], (N, m)).copy()
    nan_mask = np.isnan(LHS) | np.isnan(RHS)
    skipped = eligible & nan_mask
    return SampleTable(label=class_id.label(), deltas=deltas, z1=Z1, z2=Z2,
                       generated=GP, lhs=LHS, rhs=RHS,
                       eligible=eligible & ~nan_mask, skipped=skipped)


# ---------------------------------------------------------------------------
# witnesses and shrinking
# ---------------------------------------------------------------------------

def _violates_value(comparison: str, violation: float, config: CheckConfig) -> bool:
    if np.isnan(violation):
        return False
    if comparison == "weak":
        return violation > config.tol_weak
    if comparison == "strict":
        return violation >= -config.tol_strict
    if comparison == "membership":
        return violation > config.tol_membership
    raise AssertionError(comparison)


def _eval_single(family, maps: _Maps, config, z1, z2, delta):
    """Recompute one sample; returns (eligible, lhs, rhs, gp, violation)."""
    z1 = np.asarray(z1, dtype=np.float64).reshape(1, -1)
    z2 = np.asarray(z2, dtype=np.float64).reshape(1, -1)
    warped = maps.warped(z2)
    direction = maps.direction(z1, warped)
    gp = (warped + delta * direction)[0]
    if family == "set-invex":
        dist = float(maps.domain.distance_many(gp.reshape(1, -1))[0])
        return True, dist, 0.0, gp, dist
    _, filter_kind, _, rhs_kind = _CLASS_SPECS[family]
    h1 = float(maps.h_of(z1)[0])
    h2 = float(maps.h_of(z2)[0])
    eligible = bool(_pair_filter(filter_kind, z1, z2,
                                 np.array([h1]), np.array([h2]), config.tol_strict)[0])
    lhs = float(maps.h_of(gp.reshape(1, -1))[0])
    if rhs_kind == "mix":
        rhs = delta * h1 + (1.0 - delta) * h2
    else:
        rhs = max(h1, h2)
    return eligible, lhs, rhs, gp, lhs - rhs


def _make_ce(family, maps, config, z1, z2, delta) -> Counterexample:
    _, lhs, rhs, gp, violation = _eval_single(family, maps, config, z1, z2, delta)
    return Counterexample(z1=tuple(float(v) for v in np.atleast_1d(z1)),
                          z2=tuple(float(v) for v in np.atleast_1d(z2)),
                          delta=float(delta),
                          generated_point=tuple(float(v) for v in gp),
                          lhs=lhs, rhs=rhs, violation=violation)


def _shrink_witness(family, comparison, maps, config, domain, z1, z2, delta):
    """Pull the witness toward the sampling-box center, keeping it violating.

    delta already sits at the smallest violating grid value for its pair
    (the scan visits deltas in ascending order).  Each coordinate of z1
    then z2 is moved toward the center: jump straight to the center when
    the center still violates, otherwise halve greedily and stop at the
    first non-violating midpoint.
    """

    def violates(a, b):
        eligible, _, _, _, violation = _eval_single(family, maps, config, a, b, delta)
        return eligible and _violates_value(comparison, violation, config)

    center = np.array([(lo + hi) / 2.0 for lo, hi in domain.sampling_box])
    z1 = np.array(z1, dtype=np.float64)
    z2 = np.array(z2, dtype=np.float64)
    for vec, other_first in ((z1, True), (z2, False)):
        for k in range(domain.dim):
            target = center[k]
            cur = vec[k]
            if cur == target:
                continue
            vec[k] = target
            if violates(z1, z2):
                continue
            vec[k] = cur
            for _ in range(60):
                mid = 0.5 * (vec[k] + target)
                if mid == vec[k] or mid == target:
                    break
                keep = vec[k]
                vec[k] = mid
                if not violates(z1, z2):
                    vec[k] = keep
                    break
    return _make_ce(family, maps, config, z1, z2, delta)


def _verdict_from_masks(label, family, comparison, maps, config, domain,
                        Z1, Z2, deltas, eligible, skipped, violation_arr):
    if comparison == "weak":
        viol_mask = eligible & (violation_arr > config.tol_weak)
    elif comparison == "strict":
        viol_mask = eligible & (violation_arr >= -config.tol_strict)
    else:
        viol_mask = eligible & (violation_arr > config.tol_membership)
    checked = int(eligible.sum())
    n_skip = int(skipped.sum())
    low_conf = n_skip > 0 and n_skip / max(1, checked + n_skip) > 0.5
    echo = _config_echo(config, domain)
    if not viol_mask.any():
        return Verdict(label=label, outcome="consistent", samples_checked=checked,
                       samples_skipped=n_skip, low_confidence=low_conf,
                       counterexample=None, shrunk_counterexample=None,
                       config_echo=echo)
    flat = int(np.argmax(viol_mask.reshape(-1)))
    i, j = divmod(flat, viol_mask.shape[1])
    z1, z2, delta = Z1[i], Z2[i], float(deltas[j])
    original = _make_ce(family, maps, config, z1, z2, delta)
    shrunk = _shrink_witness(family, comparison, maps, config, domain, z1, z2, delta)
    return Verdict(label=label, outcome="refuted", samples_checked=checked,
                   samples_skipped=n_skip, low_confidence=low_conf,
                   counterexample=original, shrunk_counterexample=shrunk,
                   config_echo=echo)


# ---------------------------------------------------------------------------
# public checkers
# ---------------------------------------------------------------------------

def check_set_invex(domain: Domain, eta: FunctionDef, w: Optional[FunctionDef],
                    config: CheckConfig, mode: str = "w",
                    pairs: np.ndarray | None = None) -> Verdict:
    """Test closure of the domain under the generated-point move."""
    _validate(None, eta, w, domain, mode, need_h=False)
    maps = _Maps(None, eta, w, domain, config, mode)
    if pairs is None:
        pairs = sample_pairs(domain, config)
    Z1, Z2 = pairs[:, 0, :], pairs[:, 1, :]
    warped = maps.warped(Z2)
    direction = maps.direction(Z1, warped)
    deltas = delta_grid(config, "closed")
    GP = _generated(warped, direction, deltas)
    N, m, n = GP.shape
    dist = domain.distance_many(GP.reshape(-1, n)).reshape(N, m)
    nan_mask = np.isnan(dist)
    eligible = ~nan_mask
    label = ClassId("set-invex", mode).label()
    return _verdict_from_masks(label, "set-invex", "membership", maps, config,
                               domain, Z1, Z2, deltas, eligible, nan_mask, dist)


def check_class(class_id: ClassId, h: FunctionDef, eta: FunctionDef,
                w: Optional[FunctionDef], domain: Domain, config: CheckConfig,
                pairs: np.ndarray | None = None) -> Verdict:
    """Check one function class; see the module docstring for semantics."""
    if class_id.family == "set-invex":
        return check_set_invex(domain, eta, w, config, mode=class_id.mode, pairs=pairs)
    if class_id.family == "pre-pseudo":
        raise ValueError("use check_pre_pseudo for the pseudo class")
    table = evaluate_class_samples(class_id, h, eta, w, domain, config, pairs=pairs)
    _, _, comparison, _ = _CLASS_SPECS[class_id.family]
    maps = _Maps(h, eta, w, domain, config, class_id.mode)
    return _verdict_from_masks(table.label, class_id.family, comparison, maps,
                               config, domain, table.z1, table.z2, table.deltas,
                               table.eligible, table.skipped, table.lhs - table.rhs)


def _pseudo_base(mode: str, Z2: np.ndarray, warped: np.ndarray) -> np.ndarray:
    return Z2 if mode == "as-written" else warped


def _pseudo_ratios(h, eta, w, config, z1: np.ndarray, z2: np.ndarray, mode: str):
    """Admissible-b bounds (h(z2) - h(point)) / (delta * (1 - delta)) per delta."""
    deltas = delta_grid(config, "open")
    warped = w.eval_many(z2)
    direction = eta.eval_many(np.concatenate([z1, warped], axis=1))
    base = _pseudo_base(mode, z2, warped)
    GP = _generated(base, direction, deltas)
    N, m, n = GP.shape
    H2 = h.eval_many(z2)[:, 0]
    LHS = h.eval_many(GP.reshape(-1, n)).reshape(N, m)
    denom = deltas * (1.0 - deltas)
    ratios = (H2[:, None] - LHS) / denom[None, :]
    return deltas, GP, LHS, H2, ratios


def required_b(h: FunctionDef, eta: FunctionDef, w: FunctionDef,
               z1, z2, config: CheckConfig, mode: str | None = None) -> float:
    """Largest per-pair constant b admissible in the pseudo inequality.

    Minimum over the open delta grid of (h(z2) - h(point)) / (delta*(1-delta));
    a non-positive value means no positive b works for this pair.  Requires
    h(z1) < h(z2) - tol_strict.  NaN when every grid sample is NaN.
    """
    mode = mode or config.eta_mode
    z1 = np.asarray(z1, dtype=np.float64).reshape(1, -1)
    z2 = np.asarray(z2, dtype=np.float64).reshape(1, -1)
    h1 = float(h.eval_many(z1)[:, 0][0])
    h2 = float(h.eval_many(z2)[:, 0][0])
    if not (h1 < h2 - config.tol_strict):
        raise ValueError("required_b needs h(z1) < h(z2) - tol_strict")
    _, _, _, _, ratios = _pseudo_ratios(h, eta, w, config, z1, z2, mode)
    row = ratios[0]
    good = ~np.isnan(row)
    if not good.any():
        return float("nan")
    return float(np.min(row[good]))


def check_pre_pseudo(h: FunctionDef, eta: FunctionDef, w: FunctionDef,
                     domain: Domain, config: CheckConfig,
                     mode: str | None = None,
                     pairs: np.ndarray | None = None):
    """Pseudo-invexity check with per-pair b-witness search.

    Refutes when a sampled pair with h(z1) < h(z2) admits no b above
    tol_strict; the counterexample records the inequality at b = tol_strict
    for the worst delta.  Returns (Verdict, PseudoWitnessReport).
    """
    mode = mode or config.eta_mode
    _validate(h, eta, w, domain, "w")
    if pairs is None:
        pairs = sample_pairs(domain, config)
    Z1, Z2 = pairs[:, 0, :], pairs[:, 1, :]
    H1 = h.eval_many(Z1)[:, 0]
    H2 = h.eval_many(Z2)[:, 0]
    qualifying = H1 < (H2 - config.tol_strict)
    label = ClassId("pre-pseudo", "w").label(mode)
    echo = _config_echo(config, domain)
    echo["eta_mode"] = mode

    checked = skipped = 0
    b_inf = None
    inf_pair = None
    no_positive = 0
    first_bad = None
    if qualifying.any():
        idx = np.flatnonzero(qualifying)
        deltas, GP, LHS, H2q, ratios = _pseudo_ratios(
            h, eta, w, config, Z1[idx], Z2[idx], mode)
        nan_mask = np.isnan(ratios)
        checked = int((~nan_mask).sum())
        skipped = int(nan_mask.sum())
        with np.errstate(invalid="ignore"):
            req = np.where((~nan_mask).any(axis=1),
                           np.nanmin(np.where(nan_mask, np.inf, ratios), axis=1),
                           np.nan)
        usable = ~np.isnan(req)
        if usable.any():
            k = int(np.nanargmin(np.where(usable, req, np.inf)))
            b_inf = float(req[k])
            inf_pair = (tuple(float(v) for v in Z1[idx[k]]),
                        tuple(float(v) for v in Z2[idx[k]]))
            bad = usable & (req <= config.tol_strict)
            no_positive = int(bad.sum())
            if bad.any():
                first = int(np.flatnonzero(bad)[0])
                j = int(np.nanargmin(np.where(nan_mask[first], np.inf, ratios[first])))
                first_bad = (idx[first], deltas[j])

    report = PseudoWitnessReport(qualifying_pairs=int(qualifying.sum()),
                                 no_positive_b_pairs=no_positive,
                                 b_infimum=b_inf, infimum_pair=inf_pair)
    low_conf = skipped > 0 and skipped / max(1, checked + skipped) > 0.5
    if first_bad is None:
        verdict = Verdict(label=label, outcome="consistent", samples_checked=checked,
                          samples_skipped=skipped, low_confidence=low_conf,
                          counterexample=None, shrunk_counterexample=None,
                          config_echo=echo)
        return verdict, report

    def pseudo_ce(z1, z2):
        z1r = np.asarray(z1, dtype=np.float64).reshape(1, -1)
        z2r = np.asarray(z2, dtype=np.float64).reshape(1, -1)
        deltas_, GP_, LHS_, H2_, ratios_ = _pseudo_ratios(h, eta, w, config, z1r, z2r, mode)
        row = ratios_[0]
        j_ = int(np.nanargmin(np.where(np.isnan(row), np.inf, row)))
        d = float(deltas_[j_])
        lhs = float(LHS_[0, j_])
        rhs = float(H2_[0]) + d * (d - 1.0) * config.tol_strict
        return Counterexample(z1=tuple(float(v) for v in np.atleast_1d(z1)),
                              z2=tuple(float(v) for v in np.atleast_1d(z2)),
                              delta=d,
                              generated_point=tuple(float(v) for v in GP_[0, j_]),
                              lhs=lhs, rhs=rhs, violation=lhs - rhs)

    def pair_fails(z1, z2):
        z1r = np.asarray(z1, dtype=np.float64).reshape(1, -1)
        z2r = np.asarray(z2, dtype=np.float64).reshape(1, -1)
        h1v = float(h.eval_many(z1r)[:, 0][0])
        h2v = float(h.eval_many(z2r)[:, 0][0])
        if not (h1v < h2v - config.tol_strict):
            return False
        _, _, _, _, ratios_ = _pseudo_ratios(h, eta, w, config, z1r, z2r, mode)
        row = ratios_[0]
        good = ~np.isnan(row)
        return bool(good.any() and float(np.min(row[good])) <= config.tol_strict)

    pi, _ = first_bad
    z1w = np.array(Z1[pi], dtype=np.float64)
    z2w = np.array(Z2[pi], dtype=np.float64)
    original = pseudo_ce(z1w, z2w)
    center = np.array([(lo + hi) / 2.0 for lo, hi in domain.sampling_box])
    for vec in (z1w, z2w):
        for k in range(domain.dim):
            target, cur = center[k], vec[k]
            if cur == target:
                continue
            vec[k] = target
            if pair_fails(z1w, z2w):
                continue
            vec[k] = cur
            for _ in range(60):
                mid = 0.5 * (vec[k] + target)
                if mid == vec[k] or mid == target:
                    break
                keep = vec[k]
                vec[k] = mid
                if not pair_fails(z1w, z2w):
                    vec[k] = keep
                    break
    shrunk = pseudo_ce(z1w, z2w)
    verdict = Verdict(label=label, outcome="refuted", samples_checked=checked,
                      samples_skipped=skipped, low_confidence=low_conf,
                      counterexample=original, shrunk_counterexample=shrunk,
                      config_echo=echo)
    return verdict, report


# ---------------------------------------------------------------------------
# aggregate classification
# ---------------------------------------------------------------------------

@dataclass
class ClassReport:
    verdicts: dict  # label -> Verdict, insertion-ordered
    pseudo_report: Optional[PseudoWitnessReport]
    lattice_errors: list
    config_echo: dict

    def outcome(self, label: str) -> str:
        return self.verdicts[label].outcome

    def to_dict(self) -> dict:
        return {
            "verdicts": [v.to_dict() for v in self.verdicts.values()],
            "pseudo_report": self.pseudo_report.to_dict() if self.pseudo_report else None,
            "lattice_errors": list(self.lattice_errors),
            "config_echo": dict(self.config_echo),
        }


_LATTICE_EDGES = (
    # (stronger, weaker): same grid and pair filter, pointwise implication
    ("w-preinvex", "w-prequasi"),
    ("w-strict-preinvex", "w-strict-prequasi"),
)


def classify(h: FunctionDef, eta: FunctionDef, w: FunctionDef, domain: Domain,
             config: CheckConfig) -> ClassReport:
    """Run every applicable checker on one shared sample set.

    The pseudo class runs in the configured eta_mode.  Lattice flags mark
    verdict combinations that are impossible pointwise on shared samples;
    any such flag is an internal error, not a property of the inputs.
    """
    pairs = sample_pairs(domain, config)
    verdicts: dict = {}
    v = check_set_invex(domain, eta, w, config, mode="w", pairs=pairs)
    verdicts[v.label] = v
    for family in ("preinvex", "strict-preinvex", "prequasi",
                   "strict-prequasi", "semistrict-prequasi"):
        cid = ClassId(family, "w")
        v = check_class(cid, h, eta, w, domain, config, pairs=pairs)
        verdicts[v.label] = v
    pseudo_verdict, pseudo_report = check_pre_pseudo(h, eta, w, domain, config,
                                                     pairs=pairs)
    verdicts[pseudo_verdict.label] = pseudo_verdict

    errors = []
    for stronger, weaker in _LATTICE_EDGES:
        if verdicts[stronger].outcome == "consistent" and verdicts[weaker].outcome == "refuted":
            errors.append(f"{stronger} consistent but {weaker} refuted on shared samples")
    strict_q = verdicts["w-strict-prequasi"]
    semi_q = verdicts["w-semistrict-prequasi"]
    if strict_q.outcome == "consistent" and semi_q.outcome == "refuted":
        ce = semi_q.counterexample
        if ce is not None and tuple(ce.z1) != tuple(ce.z2):
            errors.append("w-strict-prequasi consistent but w-semistrict-prequasi "
                          "refuted at a pair with z1 != z2")
    return ClassReport(verdicts=verdicts, pseudo_report=pseudo_report,
                       lattice_errors=errors, config_echo=_config_echo(config, domain))


# ---------------------------------------------------------------------------
# witness re-verification
# ---------------------------------------------------------------------------

def reverify_counterexample(label: str, ce: Counterexample, h, eta, w,
                            domain: Domain, config: CheckConfig) -> tuple[bool, dict]:
    """Recompute lhs/rhs/violation from a stored witness.

    Returns (ok, recomputed); ok means every stored value is reproduced to
    ulp-scale tolerance.
    """
    cid = ClassId.parse(label)
    if cid.family == "pre-pseudo":
        mode = label.split("(", 1)[1].rstrip(")") if "(" in label else config.eta_mode
        z1 = np.asarray(ce.z1, dtype=np.float64).reshape(1, -1)
        z2 = np.asarray(ce.z2, dtype=np.float64).reshape(1, -1)
        warped = w.eval_many(z2)
        direction = eta.eval_many(np.concatenate([z1, warped], axis=1))
        base = _pseudo_base(mode, z2, warped)
        gp = (base + ce.delta * direction)[0]
        lhs = float(h.eval_many(gp.reshape(1, -1))[:, 0][0])
        h2 = float(h.eval_many(z2)[:, 0][0])
        rhs = h2 + ce.delta * (ce.delta - 1.0) * config.tol_strict
        violation = lhs - rhs
    else:
        maps = _Maps(h, eta, w, domain, config, cid.mode)
        _, lhs, rhs, gp, violation = _eval_single(cid.family, maps, config,
                                                  ce.z1, ce.z2, ce.delta)
    recomputed = {"lhs": lhs, "rhs": rhs, "violation": violation,
                  "generated_point": [float(v) for v in gp]}

    def close(a, b):
        if np.isnan(a) and np.isnan(b):
            return True
        scale = max(1.0, abs(a), abs(b))
        return abs(a - b) <= 1e-9 * scale

    ok = (close(lhs, ce.lhs) and close(rhs, ce.rhs)
          and close(violation, ce.violation)
          and all(close(a, b) for a, b in zip(gp, ce.generated_point)))
    return ok, recomputed

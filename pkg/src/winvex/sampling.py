"""Domains, deterministic pair sampling and delta grids.

A Domain is a subset of R^n that supports approximate membership tests:
an axis-aligned box, a product of half-lines [a_i, inf), or the whole
space.  Unbounded domains always carry an explicit sampling box; every
verdict produced from samples is therefore relative to that box, which
is echoed into reports.

Pair samples are deterministic given (domain, config): a fixed stratum
of structured pairs (corner diagonals, the center, corner/center crosses
and opposite corners) is emitted first, then the remainder is filled by
a counter-based seeded generator (Philox), so the sequence never depends
on how consumers schedule evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, asdict, field
from typing import Optional, Sequence

import numpy as np

_ETA_MODES = ("as-written", "w-lifted")


@dataclass(frozen=True)
class Domain:
    kind: str  # 'box' | 'halfline' | 'full'
    dim: int
    intervals: Optional[tuple] = None  # box kind: ((lo, hi), ...)
    lower: Optional[tuple] = None      # halfline kind: (a_1, ..., a_n)
    sampling_box: tuple = ()           # ((lo, hi), ...) always set

    def __post_init__(self):
        if self.kind not in ("box", "halfline", "full"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("domain dimension must be >= 1")
        box = tuple((float(lo), float(hi)) for lo, hi in self.sampling_box)
        object.__setattr__(self, "sampling_box", box)
        if len(box) != self.dim:
            raise ValueError("sampling box must cover every coordinate")
        for lo, hi in box:
            if not (hi > lo):
                raise ValueError(f"degenerate sampling interval [{lo}, {hi}]")
        if self.kind == "box":
            ivs = tuple((float(lo), float(hi)) for lo, hi in (self.intervals or ()))
            object.__setattr__(self, "intervals", ivs)
            if len(ivs) != self.dim:
                raise ValueError("box domain needs one interval per coordinate")
            for (lo, hi), (slo, shi) in zip(ivs, box):
                if not (hi > lo):
                    raise ValueError(f"degenerate box interval [{lo}, {hi}]")
                if slo < lo or shi > hi:
                    raise ValueError("sampling box must be contained in the box domain")
        elif self.kind == "halfline":
            low = tuple(float(a) for a in (self.lower or ()))
            object.__setattr__(self, "lower", low)
            if len(low) != self.dim:
                raise ValueError("halfline domain needs one lower bound per coordinate")
            for a, (slo, _) in zip(low, box):
                if slo < a:
                    raise ValueError("sampling box must sit inside the half-lines")

    # -- constructors -------------------------------------------------------

    @classmethod
    def box(cls, intervals: Sequence, sampling_box: Sequence | None = None) -> "Domain":
        intervals = tuple(tuple(iv) for iv in intervals)
        return cls(kind="box", dim=len(intervals), intervals=intervals,
                   sampling_box=tuple(sampling_box) if sampling_box else intervals)

    @classmethod
    def halfline(cls, lower: Sequence[float], sampling_box: Sequence) -> "Domain":
        lower = tuple(lower)
        return cls(kind="halfline", dim=len(lower), lower=lower,
                   sampling_box=tuple(sampling_box))

    @classmethod
    def full(cls, dim: int, sampling_box: Sequence) -> "Domain":
        return cls(kind="full", dim=dim, sampling_box=tuple(sampling_box))

    # -- membership ---------------------------------------------------------

    def distance_many(self, P: np.ndarray) -> np.ndarray:
        """Per-point distance outside the domain (sup-norm), 0 when inside."""
        P = np.asarray(P, dtype=np.float64)
        if self.kind == "full":
            out = np.zeros(P.shape[0])
            bad = np.isnan(P).any(axis=1)
            return np.where(bad, np.nan, out)
        if self.kind == "halfline":
            low = np.asarray(self.lower)
            d = np.maximum(low[None, :] - P, 0.0)
        else:
            iv = np.asarray(self.intervals)
            d = np.maximum(np.maximum(iv[None, :, 0] - P, P - iv[None, :, 1]), 0.0)
        return np.max(np.where(np.isnan(P), np.nan, d), axis=1)

    def contains(self, point: Sequence[float], tol: float) -> bool:
        p = np.asarray(point, dtype=np.float64).reshape(1, -1)
        if p.shape[1] != self.dim:
            raise ValueError(f"point has {p.shape[1]} coordinates, domain has {self.dim}")
        d = float(self.distance_many(p)[0])
        return bool(d <= tol)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim,
             "sampling_box": [list(iv) for iv in self.sampling_box]}
        if self.intervals is not None:
            d["intervals"] = [list(iv) for iv in self.intervals]
        if self.lower is not None:
            d["lower"] = list(self.lower)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        return cls(kind=d["kind"], dim=int(d["dim"]),
                   intervals=tuple(tuple(iv) for iv in d["intervals"]) if "intervals" in d else None,
                   lower=tuple(d["lower"]) if "lower" in d else None,
                   sampling_box=tuple(tuple(iv) for iv in d["sampling_box"]))


@dataclass(frozen=True)
class CheckConfig:
    """Sampling resolution, tolerances and evaluation mode for the checkers.

    tol_weak slackens <= checks; tol_strict is the margin demanded of
    strict (<) checks; delta_margin trims the open interval (0, 1) to the
    closed [margin, 1 - margin] so the delta grid stays deterministic.
    """

    pair_samples: int = 2000
    delta_points: int = 33
    delta_margin: float = 1e-3
    tol_weak: float = 1e-9
    tol_strict: float = 1e-12
    tol_membership: float = 1e-9
    seed: int = 0
    eta_mode: str = "as-written"

    def __post_init__(self):
        if self.pair_samples < 1:
            raise ValueError("pair_samples must be >= 1")
        if self.delta_points < 2:
            raise ValueError("delta_points must be >= 2")
        if not (0.0 <= self.delta_margin < 0.5):
            raise ValueError("delta_margin must lie in [0, 0.5)")
        for name in ("tol_weak", "tol_strict", "tol_membership"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.eta_mode not in _ETA_MODES:
            raise ValueError(f"eta_mode must be one of {_ETA_MODES}")

    def replace(self, **kw) -> "CheckConfig":
        d = asdict(self)
        d.update(kw)
        return CheckConfig(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CheckConfig":
        return cls(**d)


def delta_grid(config: CheckConfig, interval: str = "closed") -> np.ndarray:
    """Uniform delta grid: 'closed' covers [0, 1] with exact endpoints,
    'open' covers [margin, 1 - margin].  Built symmetrically about 0.5."""
    if interval not in ("closed", "open"):
        raise ValueError("interval must be 'closed' or 'open'")
    m = config.delta_points
    lo = 0.0 if interval == "closed" else config.delta_margin
    hi = 1.0 - lo
    grid = np.empty(m)
    step = (hi - lo) / (m - 1)
    for i in range(m // 2):
        off = i * step
        grid[i] = lo + off
        grid[m - 1 - i] = hi - off
    if m % 2 == 1:
        grid[m // 2] = 0.5
    return grid


def _corners(box: tuple) -> list[np.ndarray]:
    return [np.array(c, dtype=np.float64)
            for c in itertools.product(*[(lo, hi) for lo, hi in box])]


def sample_pairs(domain: Domain, config: CheckConfig) -> np.ndarray:
    """Deterministic (z1, z2) pairs from the sampling box, shape (N, 2, n).

    Stratum order: corner diagonals, center diagonal, (corner, center),
    (center, corner), opposite-corner pairs; then seeded random fill.
    """
    n = domain.dim
    box = domain.sampling_box
    total = config.pair_samples
    center = np.array([(lo + hi) / 2.0 for lo, hi in box])

    stratum: list[tuple[np.ndarray, np.ndarray]] = []
    if n <= 20 and 2 ** n <= total:
        corners = _corners(box)
        stratum.extend((c, c) for c in corners)
        stratum.append((center, center))
        stratum.extend((c, center) for c in corners)
        stratum.extend((center, c) for c in corners)
        stratum.extend((c, corners[len(corners) - 1 - i]) for i, c in enumerate(corners))
    else:
        stratum.append((center, center))
    stratum = stratum[:total]

    n_fill = total - len(stratum)
    pairs = np.empty((total, 2, n))
    for i, (a, b) in enumerate(stratum):
        pairs[i, 0] = a
        pairs[i, 1] = b
    if n_fill > 0:
        rng = np.random.Generator(np.random.Philox(key=config.seed & 0xFFFFFFFFFFFFFFFF))
        lo = np.array([iv[0] for iv in box])
        hi = np.array([iv[1] for iv in box])
        pairs[len(stratum):] = rng.uniform(lo, hi, size=(n_fill, 2, n))
    return pairs

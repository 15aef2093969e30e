"""Constrained minimization with moves along invexity paths, plus a
brute-force grid oracle and validators for the local/global, uniqueness
and solution-set results.

The program is  min h(z)  over  X = {z : g_i(z) <= 0 for all i},
searched inside an explicit box.  The solver is derivative-free: from
the current iterate z it samples a target z1 inside the box and tries
moves to  w(z) + delta * eta(z1, w(z))  over a shrinking delta ladder,
falling back to plain coordinate steps when the path moves stall.
Constraints are handled by rejection; accepted moves must stay inside
the search box so results remain comparable with the grid oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exprlang import FunctionDef
from .invexity import ClassId, check_class, check_set_invex
from .sampling import CheckConfig, Domain, delta_grid
from .theorems import TheoremReport

_ORACLE_DEFAULTS = {1: 4001, 2: 201, 3: 61}
_DELTA_LADDER = 0.5 ** np.arange(0, 21)  # 1, 1/2, ..., 2^-20


@dataclass(frozen=True)
class OptProblem:
    objective: FunctionDef
    constraints: tuple
    eta: FunctionDef
    w: FunctionDef
    box: Domain  # search box (kind 'box')

    def __post_init__(self):
        n = self.box.dim
        if self.box.kind != "box":
            raise ValueError("search region must be a box domain")
        if self.objective.arity != n or self.objective.n_outputs != 1:
            raise ValueError("objective must be scalar on the box dimension")
        for g in self.constraints:
            if g.arity != n or g.n_outputs != 1:
                raise ValueError(f"constraint {g.name} must be scalar on R^{n}")
        if self.eta.arity != 2 * n or self.eta.n_outputs != n:
            raise ValueError("eta must map R^n x R^n to R^n")
        if self.w.arity != n or self.w.n_outputs != n:
            raise ValueError("w must map R^n to R^n")

    def residual_many(self, Z: np.ndarray) -> np.ndarray:
        """max_i max(g_i(z), 0); NaN constraint values poison the point."""
        Z = np.asarray(Z, dtype=np.float64)
        res = np.zeros(Z.shape[0])
        for g in self.constraints:
            gv = g.eval_many(Z)[:, 0]
            res = np.maximum(res, np.maximum(gv, 0.0))
            res = np.where(np.isnan(gv), np.nan, res)
        return res

    def values_many(self, Z: np.ndarray) -> np.ndarray:
        return self.objective.eval_many(np.asarray(Z, dtype=np.float64))[:, 0]


@dataclass(frozen=True)
class SolverConfig:
    eps_feas: float = 1e-9
    eps_decrease: float = 1e-12
    local_global_tol: float = 1e-6
    max_iters: int = 10_000
    stall_limit: int = 500
    starts: int = 16
    cluster_tol: float = 1e-6
    cluster_radius: float = 1e-3
    seed: int = 0


@dataclass
class SolveResult:
    status: str  # 'optimal-vs-oracle' | 'local-only' | 'infeasible'
    best_point: Optional[tuple]
    best_value: Optional[float]
    feasibility_residual: float
    starts_attempted: int
    trace_lengths: tuple
    oracle_value: Optional[float] = None
    spread: Optional[float] = None
    near_minimizers: list = field(default_factory=list)
    near_min_count: int = 0
    cluster_diameter: Optional[float] = None
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "best_point": list(self.best_point) if self.best_point is not None else None,
            "best_value": self.best_value,
            "feasibility_residual": self.feasibility_residual,
            "starts_attempted": self.starts_attempted,
            "trace_lengths": list(self.trace_lengths),
            "oracle_value": self.oracle_value,
            "spread": self.spread,
            "near_minimizers": [list(p) for p in self.near_minimizers],
            "near_min_count": self.near_min_count,
            "cluster_diameter": self.cluster_diameter,
            "notes": self.notes,
        }


def _box_arrays(box: Domain):
    iv = np.asarray(box.sampling_box, dtype=np.float64)
    return iv[:, 0], iv[:, 1]


def _in_box(box: Domain, Z: np.ndarray) -> np.ndarray:
    lo, hi = _box_arrays(box)
    return ((Z >= lo[None, :]) & (Z <= hi[None, :])).all(axis=1)


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def brute_force_min(problem: OptProblem, points_per_axis: int | None = None,
                    sconf: SolverConfig = SolverConfig()) -> SolveResult:
    """Exhaustive grid scan of the search box (dimension <= 3)."""
    n = problem.box.dim
    if n > 3:
        raise ValueError("the grid oracle is limited to dimension <= 3")
    if points_per_axis is None:
        points_per_axis = _ORACLE_DEFAULTS[n]
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in problem.box.sampling_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.reshape(-1) for m in mesh], axis=1)
    values = problem.values_many(grid)
    residual = problem.residual_many(grid)
    feasible = (residual <= sconf.eps_feas) & ~np.isnan(values)
    if not feasible.any():
        return SolveResult(status="infeasible", best_point=None, best_value=None,
                           feasibility_residual=float("inf"), starts_attempted=0,
                           trace_lengths=(), notes="no feasible grid point")
    vals = np.where(feasible, values, np.inf)
    k = int(np.argmin(vals))
    best_value = float(values[k])
    near = feasible & (values <= best_value + sconf.cluster_tol)
    pts = grid[near]
    span = pts.max(axis=0) - pts.min(axis=0)
    diameter = float(np.sqrt((span ** 2).sum()))
    keep = pts[np.unique(np.linspace(0, len(pts) - 1, min(len(pts), 64)).astype(int))]
    return SolveResult(status="local-only", best_point=tuple(float(v) for v in grid[k]),
                       best_value=best_value,
                       feasibility_residual=float(residual[k]),
                       starts_attempted=0, trace_lengths=(),
                       near_minimizers=[tuple(float(v) for v in p) for p in keep],
                       near_min_count=int(near.sum()),
                       cluster_diameter=diameter,
                       notes=f"grid oracle, {points_per_axis} points per axis")


# ---------------------------------------------------------------------------
# descent
# ---------------------------------------------------------------------------

def _admissible(problem, sconf, Z):
    vals = problem.values_many(Z)
    res = problem.residual_many(Z)
    ok = _in_box(problem.box, Z) & ~np.isnan(vals) & ~np.isnan(res) & (res <= sconf.eps_feas)
    return vals, res, ok


def local_descent(problem: OptProblem, start: Sequence[float],
                  sconf: SolverConfig = SolverConfig(),
                  seed_salt: int = 0) -> SolveResult:
    """Seeded single-start descent along generated-point moves.

    Each iteration draws a target z1 in the box and evaluates the whole
    delta ladder of path moves at once; if none is an accepting move the
    coordinate fallback tries axis steps with a halving step size.  The
    accepted-value sequence decreases strictly by at least eps_decrease.
    """
    n = problem.box.dim
    rng = np.random.Generator(np.random.Philox(
        key=[sconf.seed & 0xFFFFFFFFFFFFFFFF, seed_salt & 0xFFFFFFFFFFFFFFFF]))
    lo, hi = _box_arrays(problem.box)
    z = np.asarray(start, dtype=np.float64).copy()
    if not _in_box(problem.box, z.reshape(1, -1))[0]:
        raise ValueError("start must lie inside the search box")

    cur_val, cur_res, cur_ok = _admissible(problem, sconf, z.reshape(1, -1))
    feasible = bool(cur_ok[0])
    fval = float(cur_val[0])
    iters = 0
    # Phase 1: from an infeasible start, hunt for any feasible point.
    while not feasible and iters < sconf.max_iters:
        cand = rng.uniform(lo, hi).reshape(1, -1)
        vals, res, ok = _admissible(problem, sconf, cand)
        iters += 1
        if ok[0]:
            z = cand[0].copy()
            fval = float(vals[0])
            feasible = True
    if not feasible:
        return SolveResult(status="infeasible", best_point=None, best_value=None,
                           feasibility_residual=float(problem.residual_many(
                               np.asarray(start, dtype=np.float64).reshape(1, -1))[0]),
                           starts_attempted=1, trace_lengths=(0,),
                           notes="no feasible candidate found")

    trace = [fval]
    step = (hi - lo) / 4.0
    step_floor = (hi - lo) * 1e-12
    stall = 0
    while iters < sconf.max_iters and stall < sconf.stall_limit:
        iters += 1
        accepted = False
        target = rng.uniform(lo, hi)
        wz = problem.w.eval_many(z.reshape(1, -1))
        direction = problem.eta.eval_many(
            np.concatenate([target.reshape(1, -1), wz], axis=1))[0]
        moves = wz[0][None, :] + _DELTA_LADDER[:, None] * direction[None, :]
        vals, res, ok = _admissible(problem, sconf, moves)
        good = ok & (vals <= fval - sconf.eps_decrease)
        if good.any():
            j = int(np.argmin(np.where(good, vals, np.inf)))
            z = moves[j].copy()
            fval = float(vals[j])
            trace.append(fval)
            accepted = True
        if not accepted:
            cand = np.repeat(z[None, :], 2 * n, axis=0)
            for i in range(n):
                cand[2 * i, i] += step[i]
                cand[2 * i + 1, i] -= step[i]
            vals, res, ok = _admissible(problem, sconf, cand)
            good = ok & (vals <= fval - sconf.eps_decrease)
            if good.any():
                j = int(np.argmin(np.where(good, vals, np.inf)))
                z = cand[j].copy()
                fval = float(vals[j])
                trace.append(fval)
                accepted = True
            else:
                step = step * 0.5
                if (step < step_floor).all():
                    break
        stall = 0 if accepted else stall + 1

    return SolveResult(status="local-only",
                       best_point=tuple(float(v) for v in z),
                       best_value=fval,
                       feasibility_residual=float(problem.residual_many(z.reshape(1, -1))[0]),
                       starts_attempted=1, trace_lengths=(len(trace),))


def multistart_solve(problem: OptProblem, sconf: SolverConfig = SolverConfig(),
                     starts: int | None = None,
                     oracle_value: float | None = None) -> SolveResult:
    """Best of `starts` seeded descents; spread measures minimizer scatter."""
    if starts is None:
        starts = sconf.starts
    if starts < 1:
        raise ValueError("starts must be >= 1")
    lo, hi = _box_arrays(problem.box)
    rng = np.random.Generator(np.random.Philox(
        key=[sconf.seed & 0xFFFFFFFFFFFFFFFF, 0xA11]))
    points = [0.5 * (lo + hi)]
    points.extend(rng.uniform(lo, hi) for _ in range(starts - 1))
    results = [local_descent(problem, p, sconf, seed_salt=i + 1)
               for i, p in enumerate(points)]
    feasible = [r for r in results if r.status != "infeasible"]
    traces = tuple(r.trace_lengths[0] for r in results)
    if not feasible:
        return SolveResult(status="infeasible", best_point=None, best_value=None,
                           feasibility_residual=float("inf"),
                           starts_attempted=starts, trace_lengths=traces,
                           oracle_value=oracle_value)
    best = min(feasible, key=lambda r: (r.best_value, results.index(r)))
    near = [np.asarray(r.best_point) for r in feasible
            if r.best_value <= best.best_value + sconf.local_global_tol]
    spread = 0.0
    for i in range(len(near)):
        for j in range(i + 1, len(near)):
            spread = max(spread, float(np.linalg.norm(near[i] - near[j])))
    status = "local-only"
    if oracle_value is not None and best.best_value <= oracle_value + sconf.local_global_tol:
        status = "optimal-vs-oracle"
    return SolveResult(status=status, best_point=best.best_point,
                       best_value=best.best_value,
                       feasibility_residual=best.feasibility_residual,
                       starts_attempted=starts, trace_lengths=traces,
                       oracle_value=oracle_value, spread=spread,
                       near_minimizers=[tuple(p) for p in
                                        (tuple(float(v) for v in q) for q in near)])


# ---------------------------------------------------------------------------
# optimality theorems
# ---------------------------------------------------------------------------

def verify_optimality_theorems(problem: OptProblem,
                               config: CheckConfig = CheckConfig(),
                               sconf: SolverConfig = SolverConfig(),
                               points_per_axis: int | None = None) -> TheoremReport:
    """Oracle-backed validation of the optimality structure.

    (a) local = global: every feasible multistart endpoint must match the
        oracle value; a strictly worse stuck endpoint is a counterexample
        candidate against the chord-inequality hypothesis.
    (b) uniqueness: a strict-consistent objective must produce an oracle
        near-minimizer cluster of diameter <= cluster_radius.
    (c) solution-set structure: generated points between oracle
        near-minimizers must stay feasible and near-minimal.  Moves use
        the orientation eta(z1, w(z2)) throughout; a mirrored orientation
        appearing in one statement of the source material is noted here.
    """
    oracle = brute_force_min(problem, points_per_axis=points_per_axis, sconf=sconf)
    if oracle.status == "infeasible":
        return TheoremReport(theorem="optimality", status="refuted-hypothesis",
                             hypothesis={}, conclusion="not-tested",
                             notes="problem is infeasible on the oracle grid",
                             details={"oracle": oracle.to_dict()})
    ms = multistart_solve(problem, sconf, oracle_value=oracle.best_value)

    hyp_pre = check_class(ClassId("preinvex", "w"), problem.objective, problem.eta,
                          problem.w, problem.box, config)
    hyp_strict = check_class(ClassId("strict-preinvex", "w"), problem.objective,
                             problem.eta, problem.w, problem.box, config)
    hyp_quasi = check_class(ClassId("prequasi", "w"), problem.objective, problem.eta,
                            problem.w, problem.box, config)

    failures = []
    # (a) local = global
    stuck = [r for r in [ms] if r.status != "infeasible"
             and r.best_value > oracle.best_value + sconf.local_global_tol]
    if stuck:
        failures.append("multistart best value exceeds the oracle value")
    # (b) uniqueness under the strict hypothesis
    uniqueness_checked = hyp_strict.outcome == "consistent"
    if uniqueness_checked and oracle.cluster_diameter > sconf.cluster_radius:
        failures.append(
            f"strict objective but minimizer cluster diameter {oracle.cluster_diameter}")
    # (c) solution-set structure
    deltas = delta_grid(config, "closed")
    sol_fail = 0
    sol_checked = 0
    pts = [np.asarray(p) for p in oracle.near_minimizers[:12]]
    for a in pts:
        for b in pts:
            wb = problem.w.eval_many(b.reshape(1, -1))
            direction = problem.eta.eval_many(
                np.concatenate([a.reshape(1, -1), wb], axis=1))
            gps = wb[0][None, :] + deltas[:, None] * direction[0][None, :]
            hv = problem.values_many(gps)
            res = problem.residual_many(gps)
            ok = ((hv <= oracle.best_value + sconf.cluster_tol + config.tol_weak)
                  & (res <= sconf.eps_feas + config.tol_membership))
            valid = ~np.isnan(hv) & ~np.isnan(res)
            sol_checked += int(valid.sum())
            sol_fail += int((valid & ~ok).sum())
    solution_set_gated = hyp_quasi.outcome == "consistent"
    if solution_set_gated and sol_fail:
        failures.append(f"{sol_fail} generated points left the near-minimal set")

    hypothesis = {"w-preinvex": hyp_pre.outcome,
                  "w-strict-preinvex": hyp_strict.outcome,
                  "w-prequasi": hyp_quasi.outcome}
    core_hypotheses = hyp_pre.outcome == "consistent" or hyp_quasi.outcome == "consistent"
    if failures and core_hypotheses:
        status = "counterexample-to-implication"
    elif not core_hypotheses:
        status = "refuted-hypothesis"
    else:
        status = "supported"
    return TheoremReport(
        theorem="optimality", status=status, hypothesis=hypothesis,
        conclusion="refuted" if failures else "consistent",
        mismatch_count=len(failures), mismatches=[{"reason": f} for f in failures],
        samples_checked=sol_checked,
        notes="solution-set moves use the orientation eta(z1, w(z2))",
        details={"oracle": oracle.to_dict(), "multistart": ms.to_dict(),
                 "uniqueness_checked": uniqueness_checked,
                 "solution_set_gated": solution_set_gated})

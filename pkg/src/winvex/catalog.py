"""Named fixtures: concrete (h, eta, w, domain) instances with recorded
claims and independently derived expected verdicts.

Every fixture pins its own sampling box, seed and eta mode, because some
verdicts need specific coordinates to surface (the quintic refutation
needs |z| in the thousands; the half-line set refutation needs a box
wide enough for a macroscopic witness).  Expected verdicts come from the
checkers and hand algebra, never from the recorded claims: when the two
disagree the fixture carries a discrepancy note and the suite asserts
the computed verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import invexity, theorems
from .exprlang import FunctionDef, identity_map, parse
from .invexity import ClassId, ClassReport, check_class, check_pre_pseudo, check_set_invex
from .optimize import OptProblem
from .sampling import CheckConfig, Domain


@dataclass(frozen=True)
class ProblemSpec:
    objective: str
    constraints: tuple
    box: tuple  # ((lo, hi), ...)
    points_per_axis: int = 4001


@dataclass(frozen=True)
class Fixture:
    id: str
    title: str
    eta: str
    w: Optional[str]  # None -> identity map (classical mode)
    domain: Domain
    h: Optional[str] = None
    stated_class: tuple = ()
    expected_verdicts: dict = field(default_factory=dict)
    discrepancy_note: Optional[str] = None
    eta_mode: str = "as-written"
    seed: int = 0
    level_set_alpha: float = 0.0
    problem: Optional[ProblemSpec] = None

    def functions(self):
        n = self.domain.dim
        h = parse(self.h, n, name="h") if self.h else None
        eta = parse(self.eta, 2 * n, name="eta")
        w = parse(self.w, n, name="w") if self.w else identity_map(n)
        return h, eta, w

    @property
    def mode(self) -> str:
        return "w" if self.w else "classical"

    def config(self, overrides: dict | None = None) -> CheckConfig:
        cfg = CheckConfig(seed=self.seed, eta_mode=self.eta_mode)
        if overrides:
            cfg = cfg.replace(**overrides)
        return cfg

    def build_problem(self) -> OptProblem:
        if self.problem is None:
            raise ValueError(f"fixture {self.id} has no pinned problem")
        n = len(self.problem.box)
        h, eta, w = self.functions()
        objective = parse(self.problem.objective, n, name="objective")
        constraints = tuple(parse(g, n, name=f"g{i + 1}")
                            for i, g in enumerate(self.problem.constraints))
        return OptProblem(objective=objective, constraints=constraints,
                          eta=eta, w=w, box=Domain.box(self.problem.box))


_HALFLINE = Domain.halfline(lower=(0.0,), sampling_box=((0.0, 100.0),))

FIXTURES: tuple = (
    Fixture(
        id="set-halfline",
        title="half-line closed under the shifted product move",
        eta="z1 * (y1 - 2)",
        w="y1 + 2",
        domain=_HALFLINE,
        stated_class=("[0, inf) is a w-invex set for these maps",),
        expected_verdicts={"w-set-invex": "consistent"},
    ),
    Fixture(
        id="set-halfline-classical",
        title="same direction map without the point map",
        eta="z1 * (y1 - 2)",
        w=None,
        domain=_HALFLINE,
        stated_class=("[0, inf) is not an invex set under the direction map alone",),
        expected_verdicts={"set-invex": "refuted"},
    ),
    Fixture(
        id="preinvex-minus7",
        title="affine objective with the minus-7 point map",
        h="z1",
        eta="z1 - y1 - 6",
        w="y1 - 7",
        domain=Domain.full(1, sampling_box=((-10.0, 10.0),)),
        stated_class=("h is w-preinvex for these maps",),
        eta_mode="w-lifted",
        expected_verdicts={
            "w-set-invex": "consistent",
            "w-preinvex": "consistent",
            "w-strict-preinvex": "consistent",
            "w-prequasi": "consistent",
            "w-strict-prequasi": "consistent",
            "w-semistrict-prequasi": "consistent",
            "w-pre-pseudo(w-lifted)": "consistent",
        },
        problem=ProblemSpec(objective="z1 + 5", constraints=("1 - z1",),
                            box=((-10.0, 10.0),)),
    ),
    Fixture(
        id="shifted-plus6",
        title="affine objective with the plus-6 point map",
        h="z1",
        eta="z1 - y1 + 6",
        w="y1 + 6",
        domain=Domain.full(1, sampling_box=((-10.0, 10.0),)),
        stated_class=(
            "h is w-preinvex for these maps, but neither w-strictly preinvex nor preinvex",
            "h is w-preinvex for these maps but not preinvex under the direction map alone",
        ),
        expected_verdicts={
            "w-set-invex": "consistent",
            "w-preinvex": "refuted",
            "w-strict-preinvex": "refuted",
            "w-prequasi": "refuted",
            "w-strict-prequasi": "refuted",
            "w-semistrict-prequasi": "refuted",
            "w-pre-pseudo(as-written)": "consistent",
            "preinvex": "refuted",
        },
        discrepancy_note=(
            "the recorded claim says w-preinvex, but lhs - rhs evaluates to +6 at "
            "every sampled (z1, z2, delta) including delta = 0, so the checker "
            "refutes it; the companion claim that h is not preinvex under the "
            "direction map alone is confirmed"
        ),
    ),
    Fixture(
        id="quintic",
        title="fifth power with the minus-6 point map",
        h="z1^5",
        eta="z1 - y1 - 6",
        w="y1 - 6",
        domain=Domain.full(1, sampling_box=((-4000.0, 4000.0),)),
        stated_class=("h is w-prequasi-invex but not w-preinvex for these maps",),
        expected_verdicts={
            "w-set-invex": "consistent",
            "w-preinvex": "refuted",
            "w-strict-preinvex": "refuted",
            "w-prequasi": "consistent",
            "w-strict-prequasi": "consistent",
            "w-semistrict-prequasi": "consistent",
            "w-pre-pseudo(as-written)": "consistent",
        },
        problem=ProblemSpec(objective="z1^5", constraints=("0 - z1",),
                            box=((0.0, 2.0),)),
    ),
    Fixture(
        id="piecewise-11",
        title="step objective with the plus-11 point map",
        h="piecewise(z1 < 11, 11, -11)",
        eta="z1^2 + y1^2 + 11",
        w="y1 + 11",
        domain=_HALFLINE,
        stated_class=("h is w-prequasi-invex for these maps",),
        expected_verdicts={
            "w-set-invex": "consistent",
            "w-preinvex": "consistent",
            "w-strict-preinvex": "refuted",
            "w-prequasi": "consistent",
            "w-strict-prequasi": "refuted",
            "w-semistrict-prequasi": "consistent",
            "w-pre-pseudo(as-written)": "refuted",
        },
        problem=ProblemSpec(objective="piecewise(z1 < 11, 11, -11)",
                            constraints=("0 - z1",), box=((0.0, 100.0),)),
    ),
)

_BY_ID = {f.id: f for f in FIXTURES}


def list_fixtures() -> tuple:
    return FIXTURES


def get_fixture(fixture_id: str) -> Fixture:
    if fixture_id not in _BY_ID:
        raise KeyError(f"unknown fixture {fixture_id!r}")
    return _BY_ID[fixture_id]


@dataclass
class FixtureReport:
    fixture_id: str
    outcomes: dict           # label -> 'consistent' | 'refuted'
    expected: dict
    matched: bool
    mismatches: list
    lattice_errors: list
    theorem_statuses: dict   # theorem name -> status
    class_report: Optional[ClassReport]
    verdicts: dict           # label -> Verdict (everything that ran)
    theorem_reports: list
    discrepancy_note: Optional[str]
    stated_class: tuple

    @property
    def ok(self) -> bool:
        bad_status = any(s == "counterexample-to-implication"
                         for s in self.theorem_statuses.values())
        return self.matched and not self.lattice_errors and not bad_status

    def to_dict(self) -> dict:
        return {
            "fixture": self.fixture_id,
            "outcomes": dict(self.outcomes),
            "expected": dict(self.expected),
            "matched": self.matched,
            "mismatches": list(self.mismatches),
            "lattice_errors": list(self.lattice_errors),
            "theorem_statuses": dict(self.theorem_statuses),
            "verdicts": [v.to_dict() for v in self.verdicts.values()],
            "pseudo_report": (self.class_report.pseudo_report.to_dict()
                              if self.class_report and self.class_report.pseudo_report
                              else None),
            "theorem_reports": [t.to_dict() for t in self.theorem_reports],
            "discrepancy_note": self.discrepancy_note,
            "stated_class": list(self.stated_class),
        }


def run_fixture(fixture_id: str, overrides: dict | None = None,
                with_theorems: bool = True) -> FixtureReport:
    """Run classify plus the applicable structural checks on one fixture
    and compare the verdicts against the recorded expectations."""
    fixture = get_fixture(fixture_id)
    cfg = fixture.config(overrides)
    h, eta, w = fixture.functions()

    verdicts: dict = {}
    class_report = None
    if h is not None:
        class_report = invexity.classify(h, eta, w, fixture.domain, cfg)
        verdicts.update(class_report.verdicts)
    for label in fixture.expected_verdicts:
        if label in verdicts:
            continue
        cid = ClassId.parse(label)
        if cid.family == "set-invex":
            v = check_set_invex(fixture.domain, eta,
                                w if cid.mode == "w" else None, cfg, mode=cid.mode)
        elif cid.family == "pre-pseudo":
            mode = label.split("(", 1)[1].rstrip(")") if "(" in label else cfg.eta_mode
            v, _ = check_pre_pseudo(h, eta, w, fixture.domain, cfg, mode=mode)
        else:
            v = check_class(cid, h, eta, w, fixture.domain, cfg)
        verdicts[v.label] = v

    outcomes = {label: v.outcome for label, v in verdicts.items()}
    mismatches = [f"{label}: expected {want}, got {outcomes.get(label, 'missing')}"
                  for label, want in fixture.expected_verdicts.items()
                  if outcomes.get(label) != want]

    theorem_reports = []
    if with_theorems and h is not None:
        theorem_reports.append(theorems.epigraph_check(h, eta, w, fixture.domain, cfg))
        theorem_reports.append(theorems.level_set_check(
            h, eta, w, fixture.domain, fixture.level_set_alpha, cfg))
        theorem_reports.append(theorems.pseudo_implication_check(
            h, eta, w, fixture.domain, cfg))

    return FixtureReport(
        fixture_id=fixture.id,
        outcomes=outcomes,
        expected=dict(fixture.expected_verdicts),
        matched=not mismatches,
        mismatches=mismatches,
        lattice_errors=list(class_report.lattice_errors) if class_report else [],
        theorem_statuses={t.theorem: t.status for t in theorem_reports},
        class_report=class_report,
        verdicts=verdicts,
        theorem_reports=theorem_reports,
        discrepancy_note=fixture.discrepancy_note,
        stated_class=fixture.stated_class,
    )


# ---------------------------------------------------------------------------
# config-file export (the CLI consumes these directly)
# ---------------------------------------------------------------------------

def fixture_config_text(fixture: Fixture) -> str:
    lines = [f"# fixture {fixture.id}: {fixture.title}", "[functions]"]
    n = fixture.domain.dim
    if fixture.h:
        lines.append(f'h = {n} "{fixture.h}"')
    lines.append(f'eta = {2 * n} "{fixture.eta}"')
    if fixture.w:
        lines.append(f'w = {n} "{fixture.w}"')
    d = fixture.domain
    lines.append("")
    lines.append("[domain]")
    lines.append(f"kind = {d.kind}")
    if d.kind == "box":
        lines.append("intervals = " + "; ".join(f"{lo},{hi}" for lo, hi in d.intervals))
    elif d.kind == "halfline":
        lines.append("lower = " + "; ".join(str(a) for a in d.lower))
    else:
        lines.append(f"dim = {d.dim}")
    lines.append("sampling_box = " + "; ".join(f"{lo},{hi}" for lo, hi in d.sampling_box))
    cfg = fixture.config()
    lines.append("")
    lines.append("[check]")
    for key, val in cfg.to_dict().items():
        lines.append(f"{key} = {val}")
    if fixture.problem is not None:
        p = fixture.problem
        lines.append("")
        lines.append("[problem]")
        lines.append(f'objective = {len(p.box)} "{p.objective}"')
        for i, g in enumerate(p.constraints):
            lines.append(f'g{i + 1} = {len(p.box)} "{g}"')
        lines.append("box = " + "; ".join(f"{lo},{hi}" for lo, hi in p.box))
        lines.append(f"points_per_axis = {p.points_per_axis}")
    return "\n".join(lines) + "\n"

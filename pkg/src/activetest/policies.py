"""Next-action strategies for shrinking the hypothesis set.

All policies are one-step lookahead: greedy control flipping, exhaustive
control search, ATPG-targeted sequencing, probe selection, and a random
baseline. Each returns a Suggestion carrying the proposed action and the
expected number of remaining diagnoses after applying it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expectation import (
    ExpectationEstimate,
    SamplerConfig,
    control_expectation,
    expectation_single_var,
)
from .model import FaultSemantics, SystemModel
from .rand import random_assignment
from .terms import DiagnosisSet, Term
from . import kernel


@dataclass(frozen=True)
class ComponentScore:
    component: str
    faulty_count: int
    expected_remaining: float


@dataclass(frozen=True)
class Suggestion:
    kind: str  # "control" | "probe"
    control: Term | None
    probe: str | None
    predicted_expectation: ExpectationEstimate | None
    rationale: str

    def __post_init__(self):
        if (self.kind == "control") == (self.control is None):
            raise ValueError("control suggestions carry a control term")
        if (self.kind == "probe") == (self.probe is None):
            raise ValueError("probe suggestions carry a probe variable")

    @property
    def predicted_value(self) -> float | None:
        return self.predicted_expectation.value if self.predicted_expectation else None


def component_scores(diagnoses: DiagnosisSet, comps) -> list[ComponentScore]:
    """Expected remaining diagnoses if the health of each component were
    known: (f^2 + (|D| - f)^2) / |D| with f the number of members where the
    component is faulty. Sorted ascending, ties by variable order."""
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")
    n = len(diagnoses)
    scores = []
    for c in comps:  # caller passes components in variable-id order
        f = sum(1 for d in diagnoses if d.is_faulty(c))
        scores.append(ComponentScore(c, f, (f * f + (n - f) * (n - f)) / n))
    return sorted(scores, key=lambda s: s.expected_remaining)  # stable: ties keep id order


def atpg_vector(model: SystemModel, fixed_inputs: Term, comp: str) -> Term | None:
    """A control assignment under which the healthy circuit and the circuit
    with ``comp`` as the single fault produce different outputs, with the
    non-controllable inputs fixed; None if no such assignment exists.

    Built as a miter: the system description plus a copy with all variables
    except inputs/controls renamed, the original pinned all-healthy, the
    copy pinned healthy-except-comp, and at least one pair of corresponding
    outputs forced to differ.
    """
    if model.fault_semantics is not FaultSemantics.STRONG_OPPOSITE:
        raise ValueError("test generation needs a strong-opposite model")
    if comp not in model.partition.comps:
        raise KeyError(f"unknown component {comp!r}")

    shared = {model.vid(n) for n in model.input_names + model.control_names}
    n = model.n_vars
    rename: dict[int, int] = {}
    nxt = n
    for v in model.variables:
        if v.vid not in shared:
            nxt += 1
            rename[v.vid] = nxt

    clauses: list[tuple[int, ...]] = list(model.clauses)
    for cl in model.clauses:
        clauses.append(tuple((1 if lit > 0 else -1) * rename.get(abs(lit), abs(lit)) for lit in cl))
    # healthy original, single-fault copy
    for c in model.comp_names:
        vid = model.vid(c)
        clauses.append((vid,))
        clauses.append((-rename[vid],) if c == comp else (rename[vid],))
    for name, val in fixed_inputs.items():
        vid = model.vid(name)
        clauses.append((vid,) if val else (-vid,))
    # difference detectors d <-> (o xor o'), at least one set
    diff_lits = []
    for out in model.output_names:
        o = model.vid(out)
        op = rename[o]
        nxt += 1
        d = nxt
        clauses.extend([(-d, o, op), (-d, -o, -op), (d, -o, op), (d, o, -op)])
        diff_lits.append(d)
    clauses.append(tuple(diff_lits))

    lits = np.fromiter((lit for cl in clauses for lit in cl), dtype=np.int32,
                       count=sum(len(cl) for cl in clauses))
    offsets = np.zeros(len(clauses) + 1, dtype=np.int32)
    np.cumsum([len(cl) for cl in clauses], out=offsets[1:])
    assign = np.full(nxt + 1, -1, dtype=np.int8)
    if not kernel.solve(lits, offsets, assign):
        return None
    return Term({c: bool(assign[model.vid(c)]) for c in model.control_names})


def next_control_atpg(
    model: SystemModel, alpha: Term, diagnoses: DiagnosisSet, rng: np.random.Generator
) -> Suggestion:
    """Target the component whose known health would most reduce the
    expected remaining diagnoses; fall back to random controls when no
    component is testable."""
    fixed = alpha.restrict(model.input_names)
    for score in component_scores(diagnoses, model.comp_names):
        gamma = atpg_vector(model, fixed, score.component)
        if gamma is not None:
            return Suggestion(
                kind="control", control=gamma, probe=None,
                predicted_expectation=_safe_expectation(model, diagnoses, gamma),
                rationale=f"atpg target {score.component}",
            )
    gamma = Term(random_assignment(model.control_names, rng))
    return Suggestion(
        kind="control", control=gamma, probe=None,
        predicted_expectation=_safe_expectation(model, diagnoses, gamma),
        rationale="fallback",
    )


def _safe_expectation(model, diagnoses, gamma, cfg=None):
    try:
        return control_expectation(model, diagnoses, gamma, cfg)
    except ValueError:
        return None


def next_control_greedy(
    model: SystemModel,
    seed_gamma: Term,
    diagnoses: DiagnosisSet,
    cfg: SamplerConfig | None = None,
) -> Suggestion:
    """Single pass over the control literals in declaration order: flip,
    re-evaluate, keep the flip iff the expectation strictly decreases.
    Performs |CTL| + 1 expectation evaluations."""
    missing = set(model.control_names) - set(seed_gamma.assignments)
    if missing:
        raise ValueError(f"seed control term must be total over CTL; missing {sorted(missing)}")
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")
    gamma = dict(seed_gamma.items())
    best = control_expectation(model, diagnoses, Term(gamma), cfg)
    flips = []
    for name in model.control_names:
        flipped = dict(gamma)
        flipped[name] = not flipped[name]
        cand = control_expectation(model, diagnoses, Term(flipped), cfg)
        if cand.value < best.value:
            gamma = flipped
            best = cand
            flips.append(name)
    return Suggestion(
        kind="control", control=Term(gamma), probe=None, predicted_expectation=best,
        rationale="greedy" + (f" flips={','.join(flips)}" if flips else " no-flip"),
    )


def next_control_exhaustive(
    model: SystemModel,
    alpha: Term,
    diagnoses: DiagnosisSet,
    cfg: SamplerConfig | None = None,
    guard: int = 12,
) -> Suggestion:
    """Evaluate every control assignment and return the argmin expectation;
    ties go to the lexicographically smallest assignment (false < true,
    controls in declaration order). The observation is already summarized
    by the diagnosis set and is not needed by the evaluator."""
    ctl = model.control_names
    if len(ctl) > guard:
        raise ValueError(f"|CTL| = {len(ctl)} exceeds the exhaustive-search guard ({guard})")
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")
    best_gamma = None
    best = None
    for bits in _lex_assignments(len(ctl)):
        gamma = Term({c: b for c, b in zip(ctl, bits)})
        est = control_expectation(model, diagnoses, gamma, cfg)
        if best is None or est.value < best.value:
            best, best_gamma = est, gamma
    return Suggestion(
        kind="control", control=best_gamma, probe=None, predicted_expectation=best,
        rationale="exhaustive",
    )


def _lex_assignments(n):
    import itertools

    return itertools.product((False, True), repeat=n)


def next_probe(model: SystemModel, alpha_psi: Term, diagnoses: DiagnosisSet) -> Suggestion:
    """The unassigned internal variable whose measurement minimizes the
    single-variable expectation; ties by variable order."""
    candidates = [v for v in model.internal_names if v not in alpha_psi]
    if not candidates:
        raise ValueError("no unassigned internal variables to probe")
    best_v = None
    best = None
    for v in candidates:
        est = expectation_single_var(model, diagnoses, v, alpha_psi)
        if best is None or est.value < best.value:
            best, best_v = est, v
    return Suggestion(
        kind="probe", control=None, probe=best_v, predicted_expectation=best,
        rationale="probe",
    )


def next_control_random(model: SystemModel, rng: np.random.Generator) -> Suggestion:
    gamma = Term(random_assignment(model.control_names, rng))
    return Suggestion(
        kind="control", control=gamma, probe=None, predicted_expectation=None,
        rationale="random",
    )

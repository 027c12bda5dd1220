"""Consistency checking and minimal-cardinality diagnosis.

Checks run unit propagation first and fall back to complete chronological
backtracking, so ``is_consistent`` is sound and complete. On strong-opposite
models whose observation assigns every input and control, consistency of a
total health assignment reduces to comparing its simulated response with the
observed values; that fast path and the search path are interchangeable.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import kernel
from .model import FaultSemantics, SystemModel
from .simulator import Simulator
from .terms import Diagnosis, DiagnosisSet, Term


class NoDiagnosisError(ValueError):
    """No health assignment is consistent with the observation."""


def _assign_array(model: SystemModel, term: Term) -> np.ndarray:
    assign = np.full(model.n_vars + 1, -1, dtype=np.int8)
    for name, val in term.items():
        assign[model.vid(name)] = int(val)
    return assign


def propagate(model: SystemModel, seed: Term) -> Term | None:
    """Unit-propagation closure of ``seed`` over the clause set, or None on
    conflict. Sound but incomplete: no conflict does not prove consistency."""
    lits, offsets = model.cnf_arrays
    assign = _assign_array(model, seed)
    if not kernel.propagate(lits, offsets, assign):
        return None
    return Term({v.name: bool(assign[v.vid]) for v in model.variables if assign[v.vid] >= 0})


def is_consistent(model: SystemModel, term: Term) -> bool:
    """True iff SD conjoined with the term is satisfiable (complete check)."""
    lits, offsets = model.cnf_arrays
    assign = _assign_array(model, term)
    return bool(kernel.solve(lits, offsets, assign))


class _ConsistencyChecker:
    """Checks diagnoses against one observation term, choosing between the
    simulation fast path and CNF search once per term."""

    def __init__(self, model: SystemModel, term: Term):
        self.model = model
        self.term = term
        self._sim = None
        self._obs_items: list[tuple[int, int]] = []
        if model.fault_semantics is FaultSemantics.STRONG_OPPOSITE and model.sim_arrays is not None:
            names = term.assignments
            stim = set(model.input_names) | set(model.control_names)
            comps = set(model.comp_names)
            if stim <= set(names) and not (comps & set(names)):
                sim = Simulator(model)
                self._stim_values = sim.stimulus_array(term)
                self._obs_items = [
                    (model.vid(n), int(v)) for n, v in term.items() if n not in stim
                ]
                self._sim = sim
        if self._sim is None:
            lits, offsets = model.cnf_arrays
            self._lits, self._offsets = lits, offsets
            self._base = _assign_array(model, term)

    def consistent(self, diag: Diagnosis) -> bool:
        if self._sim is not None:
            values = self._sim.run(self._stim_values, self._sim.fault_mask(diag))
            return all(values[vid] == val for vid, val in self._obs_items)
        assign = self._base.copy()
        for c in self.model.comp_names:
            assign[self.model.vid(c)] = 0 if c in diag.faulty else 1
        return bool(kernel.solve(self._lits, self._offsets, assign))


def count_all_diagnoses(model: SystemModel, alpha: Term, guard: int = 20) -> int:
    """Number of total health assignments consistent with SD and alpha."""
    comps = model.comp_names
    if len(comps) > guard:
        raise ValueError(f"{len(comps)} components exceeds the enumeration guard ({guard})")
    checker = _ConsistencyChecker(model, alpha)
    count = 0
    for faulty in _health_assignments(comps):
        if checker.consistent(Diagnosis(faulty)):
            count += 1
    return count


def _health_assignments(comps):
    for bits in itertools.product((False, True), repeat=len(comps)):
        yield tuple(c for c, b in zip(comps, bits) if b)


def mc_diagnoses(model: SystemModel, alpha: Term) -> DiagnosisSet:
    """All diagnoses of the lowest cardinality at which any diagnosis exists.

    Iterative cardinality deepening: enumerate health assignments with
    exactly c faults (components in ascending variable-id order) and stop at
    the first c with a non-empty result.
    """
    comps = model.comp_names
    checker = _ConsistencyChecker(model, alpha)
    for c in range(len(comps) + 1):
        found = [
            Diagnosis(combo)
            for combo in itertools.combinations(comps, c)
            if checker.consistent(Diagnosis(combo))
        ]
        if found:
            return DiagnosisSet(members=tuple(found), provenance=alpha)
    raise NoDiagnosisError("observation is inconsistent with every health assignment")


def intersect(model: SystemModel, diagnoses: DiagnosisSet, alpha: Term) -> DiagnosisSet:
    """Consistency-based intersection: members of the set still consistent
    with the new observation, in the original order."""
    checker = _ConsistencyChecker(model, alpha)
    kept = tuple(d for d in diagnoses if checker.consistent(d))
    return DiagnosisSet(members=kept, provenance=alpha)


def remaining(model: SystemModel, initial: DiagnosisSet, steps) -> DiagnosisSet:
    """Fold of intersections over an observation sequence.

    ``steps`` is an ObservationSequence or any iterable of Terms.
    """
    terms = steps.terms() if hasattr(steps, "terms") else list(steps)
    current = initial
    for term in terms:
        current = intersect(model, current, term)
    return current

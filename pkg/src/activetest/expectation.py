"""Expected number of remaining minimal-cardinality diagnoses.

Three evaluators:

- ``expectation_exhaustive`` marginalizes over every assignment of a
  variable set M, weighting each distinct observation by its intersection
  size (E = sum |I|^2 / sum |I|); ``expectation_single_var`` is its
  closed form for M = {v}.
- ``expectation_sampled`` draws random inputs, infers each prior
  diagnosis's response, deduplicates observations and terminates on the
  standard error of the running estimate (or on a stable integer value).
- ``control_expectation`` scores a candidate control assignment the way
  the search policies need it: every (input, diagnosis) trial contributes
  its observation's intersection size, without deduplication. On weak
  models it falls back to exhaustive marginalization over IN u OUT.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import FaultSemantics, SystemModel
from .rand import derive_rng, random_assignment
from .reasoner import _ConsistencyChecker, intersect
from .simulator import Simulator
from .terms import Diagnosis, DiagnosisSet, Term


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    samples_drawn: int
    distinct_observations: int
    sem: float | None
    exact: bool
    numerator: int = 0
    denominator: int = 0


@dataclass(frozen=True)
class SamplerConfig:
    theta: float = 0.1
    min_samples: int = 15
    max_samples: int = 100
    seed: int = 0
    termination: str = "sem"  # "sem" | "stable_integer"
    stable_window: int = 10
    exhaustive_inputs: bool = False

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.max_samples < self.min_samples:
            raise ValueError("max_samples must be >= min_samples")
        if self.termination not in ("sem", "stable_integer"):
            raise ValueError(f"unknown termination rule {self.termination!r}")


def sem(values) -> float:
    """Standard error of the mean: sample standard deviation over sqrt(n)."""
    values = list(values)
    if len(values) < 2:
        raise ValueError("sem needs at least two values")
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def infer_outputs(model: SystemModel, in_alpha: Term, diag: Diagnosis) -> Term:
    """The unique output response of a strong-opposite model to a total
    input/control assignment under the given health state."""
    if model.fault_semantics is not FaultSemantics.STRONG_OPPOSITE:
        raise ValueError("output inference requires a strong-opposite model")
    sim = Simulator(model)
    return sim.outputs_term(sim.run_term(in_alpha, diag))


def random_inputs(model: SystemModel, rng: np.random.Generator) -> Term:
    """Uniform total assignment over the non-controllable inputs."""
    return Term(random_assignment(model.input_names, rng))


def expectation_exhaustive(
    model: SystemModel, diagnoses: DiagnosisSet, M, filter: Term = Term({}), guard: int = 24
) -> ExpectationEstimate:
    """Exact expected remaining diagnoses over all assignments of M.

    Observations with an empty intersection contribute nothing; raises if
    no assignment is consistent with any member.
    """
    m_names = [v.name for v in model.variables if v.name in set(M)]
    if len(m_names) != len(set(M)):
        missing = set(M) - set(m_names)
        raise KeyError(f"unknown variables in M: {sorted(missing)}")
    if len(m_names) > guard:
        raise ValueError(f"|M| = {len(m_names)} exceeds the enumeration guard ({guard})")
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")

    s = 0
    q = 0
    distinct = 0
    fast = _StrongScan.try_build(model, diagnoses, m_names, filter)
    if fast is not None:
        for group_size in fast.group_sizes():
            s += group_size
            q += group_size * group_size
            distinct += 1
    else:
        for alpha in _assignments(m_names, filter):
            checker = _ConsistencyChecker(model, alpha)
            g = sum(1 for d in diagnoses if checker.consistent(d))
            if g:
                s += g
                q += g * g
                distinct += 1
    if s == 0:
        raise ValueError("no reachable observation is consistent with any member")
    return ExpectationEstimate(
        value=q / s, samples_drawn=distinct, distinct_observations=distinct,
        sem=None, exact=True, numerator=q, denominator=s,
    )


def _assignments(names, filter: Term):
    """All total assignments over ``names`` compatible with ``filter``,
    conjoined with it; ascending variable order, false first."""
    fixed = filter.assignments
    free = [n for n in names if n not in fixed]
    base = {n: fixed[n] for n in names if n in fixed}
    for bits in itertools.product((False, True), repeat=len(free)):
        a = dict(fixed)
        a.update(base)
        a.update(zip(free, bits))
        yield Term(a)


class _StrongScan:
    """Response enumeration for strong models: iterate free input patterns,
    simulate every diagnosis, group identical observations."""

    def __init__(self, model, diagnoses, free_inputs, stimulus_base, check_items):
        self.model = model
        self.sim = Simulator(model)
        self.diagnoses = list(diagnoses)
        self.masks = [self.sim.fault_mask(d) for d in self.diagnoses]
        self.free_inputs = free_inputs  # vids
        self.base = stimulus_base  # int8 values array with fixed stim set
        self.check_items = check_items  # (vid, required value) beyond stimulus
        self.obs_vids = None  # set by builder: vids whose values key an observation

    @classmethod
    def try_build(cls, model: SystemModel, diagnoses, m_names, filter: Term):
        if model.fault_semantics is not FaultSemantics.STRONG_OPPOSITE or model.sim_arrays is None:
            return None
        m_set = set(m_names)
        out = set(model.output_names)
        stim = set(model.input_names) | set(model.control_names)
        if not out <= m_set or not m_set <= stim | out:
            return None
        fixed = dict(filter.items())
        if not stim <= (m_set | set(fixed)):
            return None
        base = np.full(model.n_vars + 1, -1, dtype=np.int8)
        for n, v in fixed.items():
            if n in stim:
                base[model.vid(n)] = int(v)
        free = [model.vid(n) for n in m_names if n in stim and n not in fixed]
        check = [(model.vid(n), int(v)) for n, v in fixed.items() if n not in stim]
        scan = cls(model, diagnoses, free, base, check)
        scan.obs_vids = [model.vid(n) for n in m_names]
        return scan

    def iter_patterns(self):
        for bits in itertools.product((0, 1), repeat=len(self.free_inputs)):
            values = self.base.copy()
            for vid, b in zip(self.free_inputs, bits):
                values[vid] = b
            yield values

    def group_sizes(self):
        """Sizes of identical-observation groups per input pattern, each
        distinct observation once."""
        for stim_values in self.iter_patterns():
            groups: dict[bytes, int] = {}
            for mask in self.masks:
                values = self.sim.run(stim_values, mask)
                if any(values[vid] != val for vid, val in self.check_items):
                    continue
                key = bytes(values[vid] for vid in self.obs_vids)
                groups[key] = groups.get(key, 0) + 1
            yield from groups.values()

    def trial_sizes(self):
        """Group size seen by each (input pattern, diagnosis) trial, i.e.
        every trial repeats its group's size."""
        for stim_values in self.iter_patterns():
            groups: dict[bytes, int] = {}
            keys = []
            for mask in self.masks:
                values = self.sim.run(stim_values, mask)
                if any(values[vid] != val for vid, val in self.check_items):
                    keys.append(None)
                    continue
                key = bytes(values[vid] for vid in self.obs_vids)
                keys.append(key)
                groups[key] = groups.get(key, 0) + 1
            for key in keys:
                if key is not None:
                    yield groups[key]


def expectation_single_var(
    model: SystemModel, diagnoses: DiagnosisSet, v: str, alpha: Term
) -> ExpectationEstimate:
    """Closed-form expectation for measuring a single variable:
    (p^2 + q^2) / (p + q) with p, q the intersection sizes for v true/false."""
    if v in alpha:
        raise ValueError(f"variable {v!r} is already assigned")
    p = len(intersect(model, diagnoses, alpha.conjoin(Term({v: True}))))
    q = len(intersect(model, diagnoses, alpha.conjoin(Term({v: False}))))
    if p + q == 0:
        raise ValueError("no member is consistent with either value")
    return ExpectationEstimate(
        value=(p * p + q * q) / (p + q), samples_drawn=2, distinct_observations=int(p > 0) + int(q > 0),
        sem=None, exact=True, numerator=p * p + q * q, denominator=p + q,
    )


def _terminated(cfg: SamplerConfig, history: list[float]) -> tuple[bool, float | None]:
    current_sem = sem(history) if len(history) >= 2 else None
    if cfg.termination == "sem":
        if len(history) > cfg.min_samples and current_sem is not None and current_sem < cfg.theta:
            return True, current_sem
    else:
        w = cfg.stable_window
        if len(history) > w and len({int(e) for e in history[-w - 1:]}) == 1:
            return True, current_sem
    return False, current_sem


def expectation_sampled(
    model: SystemModel,
    gamma: Term,
    diagnoses: DiagnosisSet,
    cfg: SamplerConfig,
    free_inputs=None,
    fixed: Term = Term({}),
) -> ExpectationEstimate:
    """Sampling estimator of the expected remaining MC diagnoses.

    Repeatedly draws random inputs, infers each member's response, and for
    every previously unseen observation accumulates its intersection size
    (s) and squared size (q); the estimate is q/s. ``free_inputs``/``fixed``
    restrict the sampled input subspace (used by calibration).
    """
    if model.fault_semantics is not FaultSemantics.STRONG_OPPOSITE:
        raise ValueError("the sampling estimator needs a strong-opposite model")
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")
    missing = set(model.control_names) - set(gamma.assignments)
    if missing:
        raise ValueError(f"control term must be total over CTL; missing {sorted(missing)}")

    sim = Simulator(model)
    if free_inputs is None:
        free_inputs = model.input_names
    free_vids = [model.vid(n) for n in free_inputs]
    base = np.full(model.n_vars + 1, -1, dtype=np.int8)
    for term in (gamma, fixed):
        for n, v in term.items():
            base[model.vid(n)] = int(v)
    stim_ids = [model.vid(n) for n in model.input_names + model.control_names]
    masks = [sim.fault_mask(d) for d in diagnoses]
    obs_vids = [model.vid(n) for n in model.input_names + model.control_names + model.output_names]

    rng = derive_rng(cfg.seed)
    seen: set[bytes] = set()
    s = 0
    q = 0
    history: list[float] = []
    last_sem: float | None = None
    n_drawn = 0

    if cfg.exhaustive_inputs:
        draws = itertools.product((0, 1), repeat=len(free_vids))
    else:
        draws = iter(lambda: tuple(rng.integers(0, 2, size=len(free_vids))), None)

    for bits in draws:
        n_drawn += 1
        stim = base.copy()
        for vid, b in zip(free_vids, bits):
            stim[vid] = int(b)
        if any(stim[v] < 0 for v in stim_ids):
            raise ValueError("inputs + fixed + gamma must cover all inputs and controls")
        sims = [sim.run(stim, mask) for mask in masks]
        groups: dict[bytes, int] = {}
        for values in sims:
            key = bytes(values[vid] for vid in obs_vids)
            groups[key] = groups.get(key, 0) + 1
        for key, g in groups.items():
            if key not in seen:
                seen.add(key)
                s += g
                q += g * g
        if s > 0:
            history.append(q / s)
            if not cfg.exhaustive_inputs:
                done, last_sem = _terminated(cfg, history)
                if done:
                    break
        if not cfg.exhaustive_inputs and n_drawn >= cfg.max_samples:
            if len(history) >= 2:
                last_sem = sem(history)
            break

    if s == 0:
        raise ValueError("sampling produced no consistent observation")
    if cfg.exhaustive_inputs and len(history) >= 2:
        last_sem = sem(history)
    return ExpectationEstimate(
        value=q / s, samples_drawn=n_drawn, distinct_observations=len(seen),
        sem=last_sem, exact=bool(cfg.exhaustive_inputs), numerator=q, denominator=s,
    )


def control_expectation(
    model: SystemModel,
    diagnoses: DiagnosisSet,
    gamma: Term,
    cfg: SamplerConfig | None = None,
    exact_input_limit: int = 14,
) -> ExpectationEstimate:
    """Expected remaining diagnoses after applying the control assignment
    ``gamma``, as used to rank candidate controls.

    Strong models: every (input pattern, prior diagnosis) trial contributes
    the intersection size of the observation it produces — exactly over all
    input patterns when feasible, otherwise by sampling with the
    configured termination. Weak models: exhaustive marginalization over
    IN u OUT (consistency-based).
    """
    if not len(diagnoses):
        raise ValueError("empty diagnosis set")
    if model.fault_semantics is FaultSemantics.WEAK or model.sim_arrays is None:
        M = model.input_names + model.output_names
        return expectation_exhaustive(model, diagnoses, M, filter=gamma)

    n_in = len(model.input_names)
    if n_in <= exact_input_limit:
        scan = _StrongScan.try_build(
            model, diagnoses, list(model.input_names + model.output_names), gamma
        )
        s = 0
        q = 0
        trials = 0
        for g in scan.trial_sizes():
            s += g
            q += g * g
            trials += 1
        if s == 0:
            raise ValueError("no reachable observation is consistent with any member")
        return ExpectationEstimate(
            value=q / s, samples_drawn=trials, distinct_observations=0,
            sem=None, exact=True, numerator=q, denominator=s,
        )

    cfg = cfg or SamplerConfig()
    sim = Simulator(model)
    masks = [sim.fault_mask(d) for d in diagnoses]
    base = np.full(model.n_vars + 1, -1, dtype=np.int8)
    for n, v in gamma.items():
        base[model.vid(n)] = int(v)
    free_vids = [model.vid(n) for n in model.input_names]
    obs_vids = [model.vid(n) for n in model.input_names + model.control_names + model.output_names]
    rng = derive_rng(cfg.seed)
    s = 0
    q = 0
    history: list[float] = []
    last_sem = None
    n_drawn = 0
    while n_drawn < cfg.max_samples:
        n_drawn += 1
        stim = base.copy()
        for vid in free_vids:
            stim[vid] = int(rng.integers(0, 2))
        groups: dict[bytes, int] = {}
        keys = []
        for mask in masks:
            values = sim.run(stim, mask)
            key = bytes(values[vid] for vid in obs_vids)
            keys.append(key)
            groups[key] = groups.get(key, 0) + 1
        for key in keys:
            g = groups[key]
            s += g
            q += g * g
        history.append(q / s)
        done, last_sem = _terminated(cfg, history)
        if done:
            break
    return ExpectationEstimate(
        value=q / s, samples_drawn=n_drawn, distinct_observations=0,
        sem=last_sem, exact=False, numerator=q, denominator=s,
    )


def calibrate_theta(
    model: SystemModel,
    probe_inputs,
    runs: int = 10,
    seed: int = 0,
    rel_tol: float = 0.05,
    max_samples: int = 300,
) -> float:
    """Smallest observed SEM whose running estimate is within ``rel_tol``
    of the exact expectation, over seeded sampler executions against a
    fixed arbitrary initial observation."""
    probe_inputs = list(probe_inputs)
    if len(probe_inputs) > 8:
        raise ValueError("exact reference expectation needs at most 8 probe inputs")
    unknown = set(probe_inputs) - set(model.input_names)
    if unknown:
        raise ValueError(f"not non-controllable inputs: {sorted(unknown)}")

    from . import harness, reasoner

    rng = derive_rng(seed, 0xCA11)
    sim = Simulator(model)
    diagnoses = None
    for _ in range(50):  # an informative observation needs >= 2 hypotheses
        diag, stimulus = harness.draw_nonmasking_fault(model, 2, rng)
        alpha = stimulus.conjoin(sim.outputs_term(sim.run_term(stimulus, diag)))
        diagnoses = reasoner.mc_diagnoses(model, alpha)
        if len(diagnoses) >= 2:
            break
    if diagnoses is None or len(diagnoses) < 2:
        raise ValueError("could not draw an observation with a non-trivial hypothesis set")

    gamma = alpha.restrict(model.control_names)
    frozen = alpha.restrict(n for n in model.input_names if n not in probe_inputs)
    M = list(probe_inputs) + list(model.output_names)
    exact = expectation_exhaustive(model, diagnoses, M, filter=gamma.conjoin(frozen))

    best: float | None = None
    for r in range(runs):
        cfg = SamplerConfig(
            theta=1e-12, min_samples=max_samples, max_samples=max_samples,
            seed=int(derive_rng(seed, 0xCA12, r).integers(0, 2**31)),
        )
        est = _sampled_with_trace(model, gamma, diagnoses, cfg, probe_inputs, frozen)
        for e_hat, e_sem in est:
            if e_sem is None or e_sem <= 0.0:
                continue  # a zero SEM cannot serve as a strict threshold
            if abs(e_hat - exact.value) / exact.value <= rel_tol:
                if best is None or e_sem < best:
                    best = e_sem
    if best is None:
        raise ValueError("no sampler iteration reached the accuracy target")
    return best


def _sampled_with_trace(model, gamma, diagnoses, cfg, free_inputs, fixed):
    """(Ê_n, SEM_n) pairs of a sampler execution; used by calibration."""
    sim = Simulator(model)
    masks = [sim.fault_mask(d) for d in diagnoses]
    base = np.full(model.n_vars + 1, -1, dtype=np.int8)
    for term in (gamma, fixed):
        for n, v in term.items():
            base[model.vid(n)] = int(v)
    free_vids = [model.vid(n) for n in free_inputs]
    obs_vids = [model.vid(n) for n in model.input_names + model.control_names + model.output_names]
    rng = derive_rng(cfg.seed)
    seen: set[bytes] = set()
    s = 0
    q = 0
    history: list[float] = []
    out: list[tuple[float, float | None]] = []
    for _ in range(cfg.max_samples):
        stim = base.copy()
        for vid in free_vids:
            stim[vid] = int(rng.integers(0, 2))
        groups: dict[bytes, int] = {}
        for mask in masks:
            values = sim.run(stim, mask)
            key = bytes(values[vid] for vid in obs_vids)
            groups[key] = groups.get(key, 0) + 1
        for key, g in groups.items():
            if key not in seen:
                seen.add(key)
                s += g
                q += g * g
        if s > 0:
            history.append(q / s)
            out.append((q / s, sem(history) if len(history) >= 2 else None))
    return out

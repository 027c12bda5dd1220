"""Fault-injection experiments: closed-loop scenarios, benchmark
generation, geometric decay fitting and summary statistics.

A scenario injects a non-masking fault, computes the initial
minimal-cardinality set, then repeatedly applies the configured policy's
suggestion, simulates the hidden fault's response, and intersects the
remaining set, recording one row per step.
"""

from __future__ import annotations

import enum
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .expectation import SamplerConfig, random_inputs
from .model import SystemModel
from .policies import (
    Suggestion,
    next_control_atpg,
    next_control_exhaustive,
    next_control_greedy,
    next_control_random,
    next_probe,
)
from .rand import derive_rng, random_assignment
from .reasoner import intersect, mc_diagnoses
from .simulator import Simulator
from .terms import Diagnosis, Term


class Policy(str, enum.Enum):
    GREEDY = "greedy"
    ATPG = "atpg"
    PROBE = "probe"
    RANDOM = "random"
    EXHAUSTIVE = "exhaustive"


class InputPolicy(str, enum.Enum):
    STATIONARY = "stationary"
    RANDOM = "random"


class Outcome(str, enum.Enum):
    ISOLATED = "isolated"
    EXHAUSTED = "exhausted"
    EMPTY_SET = "empty_set"


@dataclass(frozen=True)
class ScenarioConfig:
    policy: Policy = Policy.GREEDY
    input_policy: InputPolicy = InputPolicy.STATIONARY
    fault_cardinality: int = 2
    max_steps: int = 10
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    seed: int = 0
    # descriptive fields for config files / reports
    model: str | None = None
    controls: tuple[str, ...] | None = None
    semantics: str = "strong"

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.fault_cardinality < 0:
            raise ValueError("fault_cardinality must be >= 0")
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "input_policy", InputPolicy(self.input_policy))


@dataclass(frozen=True)
class StepRecord:
    k: int
    action_kind: str  # "init" | "control" | "probe"
    action: str  # control term / probe variable, empty for init
    obs: Term
    remaining: int
    expected: float | None
    ms: float


@dataclass
class ScenarioTrace:
    injected: Diagnosis
    steps: list[StepRecord]
    outcome: Outcome
    model_name: str = ""
    policy: str = ""

    @property
    def remaining_series(self) -> list[tuple[int, int]]:
        return [(s.k, s.remaining) for s in self.steps]

    @property
    def expected_series(self) -> list[tuple[int, float]]:
        return [(s.k, s.expected) for s in self.steps if s.expected is not None]


def draw_nonmasking_fault(
    model: SystemModel, cardinality: int, rng: np.random.Generator, budget: int = 10_000
) -> tuple[Diagnosis, Term]:
    """A uniformly drawn health state with exactly ``cardinality`` faults,
    redrawn until its response to its own drawn stimulus differs from the
    healthy response; returns the diagnosis and that stimulus."""
    comps = model.comp_names
    if cardinality > len(comps):
        raise ValueError("cardinality exceeds the number of components")
    sim = Simulator(model)
    healthy = sim.fault_mask(Diagnosis(()))
    stim_names = model.input_names + model.control_names
    for _ in range(budget):
        faulty = tuple(rng.choice(len(comps), size=cardinality, replace=False)) if cardinality else ()
        diag = Diagnosis(comps[i] for i in faulty)
        stimulus = Term(random_assignment(stim_names, rng))
        if cardinality == 0:
            return diag, stimulus
        values = sim.stimulus_array(stimulus)
        if sim.output_bits(sim.run(values, sim.fault_mask(diag))) != sim.output_bits(
            sim.run(values, healthy)
        ):
            return diag, stimulus
    raise RuntimeError(f"no non-masking fault of cardinality {cardinality} found in {budget} draws")


def inject_fault(model: SystemModel, cardinality: int, rng: np.random.Generator) -> Diagnosis:
    return draw_nonmasking_fault(model, cardinality, rng)[0]


def run_scenario(
    model: SystemModel,
    cfg: ScenarioConfig,
    model_name: str = "",
    preset: tuple[Diagnosis, Term] | None = None,
) -> ScenarioTrace:
    """Closed-loop sequential diagnosis against a hidden injected fault.

    ``preset`` supplies a (fault, stimulus) pair, e.g. a benchmark entry;
    otherwise a non-masking fault is drawn from the scenario seed.
    """
    if cfg.policy is Policy.PROBE and cfg.input_policy is InputPolicy.RANDOM:
        raise ValueError("probe scenarios need stationary inputs")

    rng_inject = derive_rng(cfg.seed, 1)
    rng_inputs = derive_rng(cfg.seed, 2)
    rng_policy = derive_rng(cfg.seed, 3)

    t0 = time.perf_counter()
    if preset is not None:
        injected, stimulus = preset
    else:
        injected, stimulus = draw_nonmasking_fault(model, cfg.fault_cardinality, rng_inject)
    sim = Simulator(model)
    fault_mask = sim.fault_mask(injected)
    alpha1 = stimulus.conjoin(sim.outputs_term(sim.run(sim.stimulus_array(stimulus), fault_mask)))
    diagnoses = mc_diagnoses(model, alpha1)
    injected_tracked = injected in diagnoses
    steps = [
        StepRecord(
            k=0, action_kind="init", action="", obs=alpha1, remaining=len(diagnoses),
            expected=None, ms=(time.perf_counter() - t0) * 1e3,
        )
    ]

    gamma = stimulus.restrict(model.control_names)
    probed = Term({})
    outcome = Outcome.EXHAUSTED
    if len(diagnoses) <= 1:
        outcome = Outcome.ISOLATED if len(diagnoses) == 1 else Outcome.EMPTY_SET

    k = 0
    while k < cfg.max_steps and len(diagnoses) > 1:
        k += 1
        t0 = time.perf_counter()
        if cfg.input_policy is InputPolicy.STATIONARY:
            inputs_k = stimulus.restrict(model.input_names)
        else:
            inputs_k = random_inputs(model, rng_inputs)

        if cfg.policy is Policy.PROBE:
            state = alpha1.conjoin(probed)
            suggestion = next_probe(model, state, diagnoses)
        elif cfg.policy is Policy.GREEDY:
            suggestion = next_control_greedy(model, gamma, diagnoses, cfg.sampler)
        elif cfg.policy is Policy.ATPG:
            suggestion = next_control_atpg(model, inputs_k, diagnoses, rng_policy)
        elif cfg.policy is Policy.EXHAUSTIVE:
            suggestion = next_control_exhaustive(model, alpha1, diagnoses, cfg.sampler)
        else:
            suggestion = next_control_random(model, rng_policy)

        if suggestion.kind == "probe":
            values = sim.run(sim.stimulus_array(stimulus), fault_mask)
            literal = Term({suggestion.probe: bool(values[model.vid(suggestion.probe)])})
            probed = probed.conjoin(literal)
            obs_k = stimulus.conjoin(literal)
            action = suggestion.probe
        else:
            gamma = suggestion.control
            stim_k = inputs_k.conjoin(gamma)
            values = sim.run(sim.stimulus_array(stim_k), fault_mask)
            obs_k = stim_k.conjoin(sim.outputs_term(values))
            action = gamma.format()

        new_diagnoses = intersect(model, diagnoses, obs_k)
        assert len(new_diagnoses) <= len(diagnoses), "remaining set grew"
        if injected_tracked:
            assert injected in new_diagnoses, "injected fault left the remaining set"
        diagnoses = new_diagnoses
        steps.append(
            StepRecord(
                k=k, action_kind=suggestion.kind, action=action, obs=obs_k,
                remaining=len(diagnoses), expected=suggestion.predicted_value,
                ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        if len(diagnoses) == 0:
            outcome = Outcome.EMPTY_SET
            break
        if len(diagnoses) == 1:
            outcome = Outcome.ISOLATED
            break
        if cfg.policy is Policy.PROBE and all(v in probed for v in model.internal_names):
            break  # probe pool exhausted

    return ScenarioTrace(
        injected=injected, steps=steps, outcome=outcome,
        model_name=model_name or (cfg.model or ""), policy=cfg.policy.value,
    )


@dataclass(frozen=True)
class BenchmarkEntry:
    injected: Diagnosis
    observation: Term
    mc_count: int


def generate_benchmark(
    model: SystemModel, n_faults: int, top_k: int, cardinality: int, rng: np.random.Generator
) -> list[BenchmarkEntry]:
    """Draw non-masking faults with random stimuli, rank their initial
    observations by the number of MC diagnoses, and keep the top_k.
    Entries whose MC set does not contain the injected fault are discarded
    before ranking."""
    sim = Simulator(model)
    entries: list[BenchmarkEntry] = []
    for _ in range(n_faults):
        diag, stimulus = draw_nonmasking_fault(model, cardinality, rng)
        alpha = stimulus.conjoin(sim.outputs_term(sim.run_term(stimulus, diag)))
        mc = mc_diagnoses(model, alpha)
        if diag in mc:
            entries.append(BenchmarkEntry(diag, alpha, len(mc)))
    if len(entries) < top_k:
        raise ValueError(f"only {len(entries)} usable entries for top_k={top_k}")
    entries.sort(key=lambda e: -e.mc_count)  # stable: ties keep draw order
    return entries[:top_k]


@dataclass(frozen=True)
class DecayFit:
    n0: float
    rate: float  # decay constant p in (0, 1]
    n_inf: float
    r_squared: float


def fit_decay(series) -> DecayFit:
    """Least-squares fit of N(k) = n0 * rate^k + n_inf.

    One-dimensional search over the rate (dense grid, then ternary
    refinement) with a closed-form linear solve for (n0, n_inf) at each
    candidate. A constant series fits the constant model exactly (n0 = 0,
    R^2 = 1 by convention).
    """
    pts = [(float(k), float(n)) for k, n in series]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    ks = np.array([p[0] for p in pts])
    ns = np.array([p[1] for p in pts])
    if np.ptp(ks) == 0:
        raise ValueError("degenerate series: all k identical")
    sst = float(np.sum((ns - ns.mean()) ** 2))
    if sst == 0:
        return DecayFit(n0=0.0, rate=1.0, n_inf=float(ns[0]), r_squared=1.0)

    def solve_at(p: float) -> tuple[float, float, float]:
        """Best (n0, n_inf) at a fixed rate with n0, n_inf >= 0, which keeps
        the curve non-negative and the coefficients interpretable as counts
        (an unconstrained solve degenerates on linear data as p -> 1)."""
        if p >= 1.0:
            return 0.0, float(ns.mean()), float(np.sum((ns - ns.mean()) ** 2))
        basis = p ** ks
        a = np.column_stack([basis, np.ones_like(ks)])
        coef, *_ = np.linalg.lstsq(a, ns, rcond=None)
        candidates = []
        if coef[0] >= 0 and coef[1] >= 0:
            candidates.append((float(coef[0]), float(coef[1])))
        candidates.append((max(float(np.dot(basis, ns) / np.dot(basis, basis)), 0.0), 0.0))
        candidates.append((0.0, float(ns.mean())))
        best = min(
            candidates, key=lambda c: float(np.sum((c[0] * basis + c[1] - ns) ** 2))
        )
        return best[0], best[1], float(np.sum((best[0] * basis + best[1] - ns) ** 2))

    grid = np.linspace(0.002, 1.0, 500)
    errors = [solve_at(p)[2] for p in grid]
    best_i = int(np.argmin(errors))
    lo = grid[max(best_i - 1, 0)]
    hi = grid[min(best_i + 1, len(grid) - 1)]
    for _ in range(80):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if solve_at(m1)[2] <= solve_at(m2)[2]:
            hi = m2
        else:
            lo = m1
    p = (lo + hi) / 2
    if solve_at(grid[best_i])[2] < solve_at(p)[2]:
        p = float(grid[best_i])
    n0, n_inf, sse = solve_at(p)
    return DecayFit(n0=n0, rate=float(p), n_inf=n_inf, r_squared=1.0 - sse / sst)


def pearson(xs, ys) -> float:
    xs = np.asarray(list(xs), dtype=float)
    ys = np.asarray(list(ys), dtype=float)
    if len(xs) != len(ys):
        raise ValueError("sequences must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least two points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for a constant sequence")
    return float(np.sum(dx * dy) / (sx * sy))


@dataclass(frozen=True)
class SummaryRow:
    model: str
    policy: str
    traces: int
    p_min: float
    p_max: float
    p_avg: float
    r2_avg: float
    rho_min: float | None
    rho_avg: float | None
    frac_rho_95: float | None
    frac_rho_975: float | None


@dataclass(frozen=True)
class SummaryReport:
    rows: tuple[SummaryRow, ...]

    CSV_HEADER = "model,policy,traces,p_min,p_max,p_avg,r2_avg,rho_min,rho_avg,frac_rho_gt_0.95,frac_rho_gt_0.975"

    def to_csv(self) -> str:
        out = [self.CSV_HEADER]
        for r in self.rows:
            out.append(
                ",".join(
                    [r.model, r.policy, str(r.traces)]
                    + [f"{v:.4f}" for v in (r.p_min, r.p_max, r.p_avg, r.r2_avg)]
                    + [("" if v is None else f"{v:.4f}") for v in (r.rho_min, r.rho_avg, r.frac_rho_95, r.frac_rho_975)]
                )
            )
        return "\n".join(out) + "\n"

    def to_text(self) -> str:
        header = ["model", "policy", "n", "p_min", "p_max", "p_avg", "R2_avg", "rho_min", "rho_avg", ">0.95", ">0.975"]
        rows = [header]
        for r in self.rows:
            rows.append(
                [r.model, r.policy, str(r.traces)]
                + [f"{v:.3f}" for v in (r.p_min, r.p_max, r.p_avg, r.r2_avg)]
                + [("-" if v is None else f"{v:.3f}") for v in (r.rho_min, r.rho_avg, r.frac_rho_95, r.frac_rho_975)]
            )
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n"


def summarize(traces) -> SummaryReport:
    """Per (model, policy): decay-fit statistics of the remaining-count
    series and Pearson correlation of predicted vs actual remaining."""
    traces = list(traces)
    if not traces:
        raise ValueError("no traces")
    groups: dict[tuple[str, str], list[ScenarioTrace]] = {}
    for t in traces:
        groups.setdefault((t.model_name, t.policy), []).append(t)
    rows = []
    for (model_name, policy), group in sorted(groups.items()):
        fits = [fit_decay(t.remaining_series) for t in group if len(t.steps) >= 3]
        rhos = []
        for t in group:
            pairs = [(s.expected, s.remaining) for s in t.steps if s.expected is not None]
            if len(pairs) < 2:
                continue
            try:
                rhos.append(pearson([p[0] for p in pairs], [p[1] for p in pairs]))
            except ValueError:
                continue
        rates = [f.rate for f in fits] or [float("nan")]
        r2s = [f.r_squared for f in fits] or [float("nan")]
        rows.append(
            SummaryRow(
                model=model_name, policy=policy, traces=len(group),
                p_min=min(rates), p_max=max(rates), p_avg=float(np.mean(rates)),
                r2_avg=float(np.mean(r2s)),
                rho_min=min(rhos) if rhos else None,
                rho_avg=float(np.mean(rhos)) if rhos else None,
                frac_rho_95=float(np.mean([r > 0.95 for r in rhos])) if rhos else None,
                frac_rho_975=float(np.mean([r > 0.975 for r in rhos])) if rhos else None,
            )
        )
    return SummaryReport(rows=tuple(rows))


# --- serialization ---------------------------------------------------------

TRACE_CSV_HEADER = "k,action_kind,action,obs,remaining,expected,ms"


def trace_to_csv(trace: ScenarioTrace) -> str:
    buf = io.StringIO()
    buf.write(TRACE_CSV_HEADER + "\n")
    for s in trace.steps:
        expected = "" if s.expected is None else f"{s.expected:.6f}"
        buf.write(f"{s.k},{s.action_kind},{s.action},{s.obs.format()},{s.remaining},{expected},{s.ms:.3f}\n")
    return buf.getvalue()


def benchmark_to_csv(entries) -> str:
    buf = io.StringIO()
    buf.write("injected,observation,mc_count\n")
    for e in entries:
        buf.write(f"{'|'.join(sorted(e.injected.faulty))},{e.observation.format()},{e.mc_count}\n")
    return buf.getvalue()


def config_from_dict(data: dict) -> ScenarioConfig:
    sampler = SamplerConfig(**data.get("sampler", {}))
    known = {
        "policy", "input_policy", "fault_cardinality", "max_steps", "seed",
        "model", "semantics",
    }
    kwargs = {k: v for k, v in data.items() if k in known}
    controls = data.get("controls")
    return ScenarioConfig(
        sampler=sampler,
        controls=tuple(controls) if controls is not None else None,
        **kwargs,
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))

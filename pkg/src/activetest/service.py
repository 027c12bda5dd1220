"""Session-oriented HTTP service for live sequential diagnosis.

An operator (or the harness, in simulated mode) creates a session from a
model and an initial observation, alternates suggestion requests with
observation submissions, and watches the hypothesis set shrink. Sessions
live in memory; mutations can be appended to a JSONL log for replay.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .expectation import SamplerConfig
from .harness import (
    Outcome,
    Policy,
    ScenarioTrace,
    StepRecord,
    fit_decay,
    trace_to_csv,
)
from .model import FaultSemantics, SystemModel, builtin_demux, encode
from .circuits import load_netlist
from .policies import (
    Suggestion,
    next_control_atpg,
    next_control_exhaustive,
    next_control_greedy,
    next_control_random,
    next_probe,
)
from .rand import derive_rng
from .reasoner import intersect, mc_diagnoses, remaining
from .simulator import Simulator
from .terms import Diagnosis, DiagnosisSet, Term


class ServiceError(HTTPException):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(status_code=status, detail={"code": code, "message": message})


@dataclass
class ModelCatalog:
    """Named models the service can diagnose; built-ins plus .bench files
    from a directory. Control designation comes from the session request."""

    bench_dir: Path | None = None

    def names(self) -> list[str]:
        names = ["demux"]
        if self.bench_dir is not None:
            names += sorted(p.stem for p in self.bench_dir.glob("*.bench"))
        return names

    def describe(self, name: str) -> dict:
        """Variable metadata for the console's per-variable entry forms
        (partition tags depend on the session's control designation, so
        only the structural net classes are reported)."""
        if name == "demux":
            from .circuits import demux_circuit

            circuit = demux_circuit()
        else:
            path = (self.bench_dir or Path(".")) / f"{name}.bench"
            if not path.exists():
                raise ServiceError(404, "unknown_model", f"no model named {name!r}")
            circuit = load_netlist(path)
        driven = {g.output for g in circuit.gates}
        return {
            "name": name,
            "inputs": list(circuit.primary_inputs),
            "outputs": list(circuit.primary_outputs),
            "internals": [n for n in driven if n not in set(circuit.primary_outputs)],
            "gates": len(circuit.gates),
        }

    def build(self, name: str, semantics: str, controls) -> SystemModel:
        sem = FaultSemantics.STRONG_OPPOSITE if semantics == "strong" else FaultSemantics.WEAK
        if name == "demux":
            return builtin_demux(sem, controls=tuple(controls) if controls else ("i",))
        if self.bench_dir is not None:
            path = self.bench_dir / f"{name}.bench"
            if path.exists():
                circuit = load_netlist(path)
                return encode(circuit, sem, controls=tuple(controls or ()))
        raise ServiceError(404, "unknown_model", f"no model named {name!r}")


class CreateSessionRequest(BaseModel):
    model: str
    observation: dict[str, int]
    mode: str = "operator"  # "operator" | "simulated"
    policy: str = "probe"
    seed: int = 0
    controls: list[str] | None = None
    semantics: str = "weak"
    theta: float = 0.1
    fault: list[str] | None = None  # simulated mode: explicit hidden fault


class ObserveRequest(BaseModel):
    values: dict[str, int] = {}
    control_override: dict[str, int] | None = None


@dataclass
class Session:
    id: str
    model: SystemModel
    model_name: str
    mode: str
    policy: Policy
    seed: int
    sampler: SamplerConfig
    initial: DiagnosisSet
    current: DiagnosisSet
    alpha1: Term
    probed: Term
    gamma: Term
    steps: list[StepRecord]
    pending: Suggestion | None = None
    outcome: Outcome | None = None
    hidden_fault: Diagnosis | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def step_count(self) -> int:
        return len(self.steps) - 1

    def submitted_terms(self) -> list[Term]:
        return [s.obs for s in self.steps[1:]]


class SessionStore:
    def __init__(self, catalog: ModelCatalog, log_dir: Path | None = None):
        self.catalog = catalog
        self.log_dir = log_dir
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session):
        with self._lock:
            self.sessions[session.id] = session

    def get(self, sid: str) -> Session:
        try:
            return self.sessions[sid]
        except KeyError:
            raise ServiceError(404, "unknown_session", f"no session {sid!r}") from None

    def log(self, sid: str, record: dict):
        if self.log_dir is None:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        with open(self.log_dir / f"{sid}.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _term_from_wire(model: SystemModel, values: dict[str, int]) -> Term:
    for name in values:
        if name not in model.var_index:
            raise ServiceError(422, "unknown_variable", f"unknown variable {name!r}")
    return Term({k: bool(v) for k, v in values.items()})


def _suggestion_json(s: Suggestion) -> dict:
    return {
        "kind": s.kind,
        "control": {k: int(v) for k, v in s.control.items()} if s.control else None,
        "probe": s.probe,
        "expected_remaining": s.predicted_value,
        "rationale": s.rationale,
    }


def _outcome_value(session: Session) -> str | None:
    return session.outcome.value if session.outcome else None


def _snapshot(session: Session) -> dict:
    comps = session.model.comp_names
    fit = None
    if len(session.steps) >= 3:
        f = fit_decay([(s.k, s.remaining) for s in session.steps])
        fit = {"n0": f.n0, "rate": f.rate, "n_inf": f.n_inf, "r_squared": f.r_squared}
    return {
        "id": session.id,
        "model": session.model_name,
        "mode": session.mode,
        "policy": session.policy.value,
        "components": list(comps),
        "remaining": len(session.current),
        "step": session.step_count,
        "outcome": _outcome_value(session),
        "pending": _suggestion_json(session.pending) if session.pending else None,
        "hypotheses": [
            {
                "faulty": sorted(d.faulty),
                "marks": [d.is_faulty(c) for c in comps],
                "cardinality": d.cardinality,
            }
            for d in session.current
        ],
        "history": [
            {
                "k": s.k,
                "action_kind": s.action_kind,
                "action": s.action,
                "obs": {k: int(v) for k, v in s.obs.items()},
                "remaining": s.remaining,
                "expected": s.expected,
            }
            for s in session.steps
        ],
        "fit": fit,
    }


def create_app(
    catalog: ModelCatalog | None = None,
    log_dir: Path | None = None,
    static_dir: Path | None = None,
) -> FastAPI:
    catalog = catalog or ModelCatalog()
    store = SessionStore(catalog, log_dir)
    app = FastAPI(title="activetest session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=static_dir, html=True), name="console")

    @app.get("/models")
    def models():
        return {"models": [catalog.describe(n) for n in catalog.names()]}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        if req.mode not in ("operator", "simulated"):
            raise ServiceError(422, "bad_mode", f"unknown mode {req.mode!r}")
        try:
            policy = Policy(req.policy)
        except ValueError:
            raise ServiceError(422, "bad_policy", f"unknown policy {req.policy!r}") from None
        model = catalog.build(req.model, req.semantics, req.controls)
        alpha1 = _term_from_wire(model, req.observation)
        try:
            initial = mc_diagnoses(model, alpha1)
        except ValueError:
            raise ServiceError(
                422, "inconsistent_observation",
                "observation is inconsistent with every health state",
            ) from None

        hidden = None
        if req.mode == "simulated":
            if req.fault is not None:
                for c in req.fault:
                    if c not in model.partition.comps:
                        raise ServiceError(422, "unknown_variable", f"unknown component {c!r}")
                hidden = Diagnosis(req.fault)
            else:
                rng = derive_rng(req.seed, 0xFA)
                hidden = initial[int(rng.integers(0, len(initial)))]
            missing = (set(model.input_names) | set(model.control_names)) - set(
                alpha1.assignments
            )
            if missing:
                raise ServiceError(
                    422, "partial_stimulus",
                    f"simulated mode needs all inputs and controls observed; missing {sorted(missing)}",
                )

        session = Session(
            id=uuid.uuid4().hex, model=model, model_name=req.model, mode=req.mode,
            policy=policy, seed=req.seed,
            sampler=SamplerConfig(theta=req.theta, seed=req.seed),
            initial=initial, current=initial, alpha1=alpha1,
            probed=Term({}), gamma=alpha1.restrict(model.control_names),
            steps=[
                StepRecord(
                    k=0, action_kind="init", action="", obs=alpha1,
                    remaining=len(initial), expected=None, ms=0.0,
                )
            ],
            hidden_fault=hidden,
        )
        if len(initial) <= 1:
            session.outcome = Outcome.ISOLATED if len(initial) == 1 else Outcome.EMPTY_SET
        store.add(session)
        store.log(session.id, {"event": "create", "model": req.model, "mode": req.mode,
                               "policy": req.policy, "seed": req.seed,
                               "observation": dict(sorted(req.observation.items()))})
        return _snapshot(session)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return _snapshot(store.get(sid))

    @app.post("/sessions/{sid}/suggest")
    def suggest(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.outcome is not None:
                raise ServiceError(409, "terminal_session", "session is already terminal")
            if session.pending is not None:
                raise ServiceError(409, "pending_suggestion", "observe before suggesting again")
            model = session.model
            if session.policy is Policy.PROBE:
                state = session.alpha1.conjoin(session.probed)
                suggestion = next_probe(model, state, session.current)
            elif session.policy is Policy.GREEDY:
                suggestion = next_control_greedy(model, session.gamma, session.current, session.sampler)
            elif session.policy is Policy.ATPG:
                suggestion = next_control_atpg(
                    model, session.alpha1.restrict(model.input_names), session.current,
                    derive_rng(session.seed, 0xA7, session.step_count),
                )
            elif session.policy is Policy.EXHAUSTIVE:
                suggestion = next_control_exhaustive(model, session.alpha1, session.current, session.sampler)
            else:
                suggestion = next_control_random(
                    model, derive_rng(session.seed, 0xA7, session.step_count)
                )
            session.pending = suggestion
            store.log(sid, {"event": "suggest", **_suggestion_json(suggestion)})
            return _suggestion_json(suggestion)

    @app.post("/sessions/{sid}/observe")
    def observe(sid: str, req: ObserveRequest):
        session = store.get(sid)
        with session.lock:
            if session.pending is None:
                raise ServiceError(409, "no_pending_suggestion", "request a suggestion first")
            model = session.model
            suggestion = session.pending
            gamma = suggestion.control
            if req.control_override is not None:
                if suggestion.kind != "control":
                    raise ServiceError(422, "bad_override", "cannot override a probe suggestion")
                gamma = _term_from_wire(model, req.control_override)
                extra = set(gamma.assignments) - model.partition.controls
                if extra:
                    raise ServiceError(
                        422, "bad_override", f"override assigns non-control variables: {sorted(extra)}"
                    )

            if session.mode == "simulated":
                obs_k = _simulate_step(session, suggestion, gamma)
            else:
                observed = _term_from_wire(model, req.values)
                if suggestion.kind == "probe":
                    allowed = {suggestion.probe}
                    bad = set(observed.assignments) - allowed
                    if bad:
                        raise ServiceError(
                            422, "invalid_variable",
                            f"probe step accepts only {sorted(allowed)}; got {sorted(bad)}",
                        )
                    if suggestion.probe not in observed:
                        raise ServiceError(422, "missing_value", "probe value not supplied")
                    obs_k = session.alpha1.restrict(
                        model.input_names + model.control_names
                    ).conjoin(observed)
                else:
                    allowed = set(model.output_names) | set(model.input_names)
                    bad = set(observed.assignments) - allowed
                    if bad:
                        raise ServiceError(
                            422, "invalid_variable",
                            f"control step accepts output/input variables; got {sorted(bad)}",
                        )
                    obs_k = observed.conjoin(gamma)

            if suggestion.kind == "probe":
                session.probed = session.probed.conjoin(obs_k.restrict([suggestion.probe]))
            else:
                session.gamma = gamma
            new = intersect(model, session.current, obs_k)
            session.current = new
            session.pending = None
            session.steps.append(
                StepRecord(
                    k=session.step_count + 1,
                    action_kind=suggestion.kind,
                    action=suggestion.probe if suggestion.kind == "probe" else gamma.format(),
                    obs=obs_k, remaining=len(new),
                    expected=suggestion.predicted_value, ms=0.0,
                )
            )
            if len(new) == 0:
                session.outcome = Outcome.EMPTY_SET
            elif len(new) == 1:
                session.outcome = Outcome.ISOLATED
            recomputed = remaining(model, session.initial, session.submitted_terms())
            assert recomputed.fault_sets() == new.fault_sets(), "session fold drifted"
            store.log(sid, {"event": "observe", "obs": obs_k.format(), "remaining": len(new)})
            return {"remaining": len(new), "outcome": _outcome_value(session)}

    @app.get("/sessions/{sid}/trace.csv", response_class=PlainTextResponse)
    def trace(sid: str):
        session = store.get(sid)
        tr = ScenarioTrace(
            injected=session.hidden_fault or Diagnosis(()),
            steps=session.steps,
            outcome=session.outcome or Outcome.EXHAUSTED,
            model_name=session.model_name, policy=session.policy.value,
        )
        return trace_to_csv(tr)

    return app


def _simulate_step(session: Session, suggestion: Suggestion, gamma: Term | None) -> Term:
    model = session.model
    sim = Simulator(model)
    mask = sim.fault_mask(session.hidden_fault)
    stationary_inputs = session.alpha1.restrict(model.input_names)
    if suggestion.kind == "probe":
        stim = stationary_inputs.conjoin(session.alpha1.restrict(model.control_names))
        values = sim.run(sim.stimulus_array(stim), mask)
        v = suggestion.probe
        return stim.conjoin(Term({v: bool(values[model.vid(v)])}))
    stim = stationary_inputs.conjoin(gamma)
    values = sim.run(sim.stimulus_array(stim), mask)
    return stim.conjoin(sim.outputs_term(values))


def replay_log(path, catalog: ModelCatalog):
    """Rebuild the observation fold of a logged session; returns the event
    list (used to resume an interrupted operator session)."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            events.append(json.loads(line))
    return events

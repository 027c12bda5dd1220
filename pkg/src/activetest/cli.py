"""Command-line interface.

Subcommands: parse, diagnose, expect, suggest, run, bench, fit, serve.
Models are referenced by built-in name (demux, 74182, c17) or a path to a
bench netlist; controls are designated with --controls (never in the
netlist itself).
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys
from pathlib import Path

from . import __version__
from .circuits import load_netlist, parse_netlist
from .expectation import (
    SamplerConfig,
    expectation_exhaustive,
    expectation_sampled,
    expectation_single_var,
)
from .harness import (
    ScenarioConfig,
    benchmark_to_csv,
    config_from_dict,
    fit_decay,
    generate_benchmark,
    run_scenario,
    summarize,
    trace_to_csv,
)
from .model import FaultSemantics, builtin_demux, encode
from .policies import (
    next_control_atpg,
    next_control_exhaustive,
    next_control_greedy,
    next_control_random,
    next_probe,
)
from .rand import derive_rng
from .reasoner import count_all_diagnoses, mc_diagnoses
from .terms import Term


def _semantics(name: str) -> FaultSemantics:
    return FaultSemantics.STRONG_OPPOSITE if name == "strong" else FaultSemantics.WEAK


def _load_circuit(ref: str):
    packaged = importlib.resources.files("activetest") / "data" / f"{ref}.bench"
    if Path(ref).exists():
        return load_netlist(ref)
    if packaged.is_file():
        return parse_netlist(packaged.read_text(encoding="utf-8"))
    raise SystemExit(f"error: no model named {ref!r} and no such file")


def _build_model(args):
    controls = tuple(c for c in (args.controls or "").split(",") if c)
    if args.model == "demux":
        return builtin_demux(_semantics(args.semantics), controls=controls or ("i",))
    return encode(_load_circuit(args.model), _semantics(args.semantics), controls=controls)


def _write_out(args, text: str):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _add_model_args(p):
    p.add_argument("--model", required=True, help="demux | 74182 | c17 | path to .bench")
    p.add_argument("--controls", default="", help="comma-separated control inputs")
    p.add_argument("--semantics", choices=("weak", "strong"), default="strong")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="activetest", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("parse", help="parse a netlist and report its structure")
    _add_model_args(p)

    p = sub.add_parser("diagnose", help="minimal-cardinality diagnoses of an observation")
    _add_model_args(p)
    p.add_argument("--obs", required=True, help="observation, e.g. 'a=0,b=0,i=1,o4=1'")
    p.add_argument("--count-all", action="store_true", help="also count all consistent health states")

    p = sub.add_parser("expect", help="expected remaining MC diagnoses")
    _add_model_args(p)
    p.add_argument("--obs", required=True)
    p.add_argument("--gamma", default="", help="control filter, e.g. 'i=0'")
    p.add_argument("--var", default="", help="single variable (closed form) instead of full OBS")
    p.add_argument("--sampled", action="store_true", help="use the sampling estimator")
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("suggest", help="one policy step")
    _add_model_args(p)
    p.add_argument("--obs", required=True)
    p.add_argument("--policy", choices=("greedy", "atpg", "probe", "random", "exhaustive"), default="greedy")
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run a fault-injection scenario")
    _add_model_args(p)
    p.add_argument("--policy", choices=("greedy", "atpg", "probe", "random", "exhaustive"), default="greedy")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--input-policy", choices=("stationary", "random"), default="stationary")
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=1, help="number of scenarios (seeds seed..seed+n-1)")
    p.add_argument("--config", help="JSON scenario config (overrides the flags above)")
    p.add_argument("--out", help="trace CSV path (single scenario) or summary CSV path")
    p.add_argument("--summary", action="store_true", help="print the summary table")

    p = sub.add_parser("bench", help="generate a ranked fault/observation benchmark")
    _add_model_args(p)
    p.add_argument("--n-faults", type=int, default=1000)
    p.add_argument("--top", type=int, default=100)
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("fit", help="fit a geometric decay curve to a trace CSV")
    p.add_argument("--infile", required=True, help="CSV with k,remaining columns (trace format)")

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--models-dir", help="directory of .bench files to expose")
    p.add_argument("--log-dir", help="append-only session logs")
    p.add_argument("--static", help="directory to serve at / (the built console)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    args = ap.parse_args(argv)
    args.out = getattr(args, "out", None)
    return _dispatch(args)


def _dispatch(args) -> int:
    if args.cmd == "parse":
        model = _build_model(args)
        c = model.source_circuit
        print(f"gates: {len(c.gates)}  inputs: {len(c.primary_inputs)}  outputs: {len(c.primary_outputs)}")
        print(f"variables: {model.n_vars}  clauses: {len(model.clauses)}  semantics: {model.fault_semantics.value}")
        print(f"comps: {' '.join(model.comp_names)}")
        print(f"controls: {' '.join(model.control_names) or '-'}")
        return 0

    if args.cmd == "diagnose":
        model = _build_model(args)
        obs = Term.parse(args.obs)
        mc = mc_diagnoses(model, obs)
        card = min(mc.cardinalities) if len(mc) else 0
        print(f"{len(mc)} minimal-cardinality diagnoses (cardinality {card})")
        for d in mc:
            print("  " + (" ".join(sorted(d.faulty)) or "(all healthy)"))
        if args.count_all:
            print(f"all consistent health states: {count_all_diagnoses(model, obs)}")
        return 0

    if args.cmd == "expect":
        model = _build_model(args)
        obs = Term.parse(args.obs)
        gamma = Term.parse(args.gamma)
        diagnoses = mc_diagnoses(model, obs)
        if args.var:
            est = expectation_single_var(model, diagnoses, args.var, obs)
        elif args.sampled:
            cfg = SamplerConfig(theta=args.theta, seed=args.seed)
            est = expectation_sampled(model, gamma, diagnoses, cfg)
        else:
            M = model.input_names + model.output_names
            est = expectation_exhaustive(model, diagnoses, M, filter=gamma)
        kind = "exact" if est.exact else "sampled"
        sem_txt = "" if est.sem is None else f"  sem={est.sem:.4g}"
        print(f"E = {est.value:.6g}  ({kind}, n={est.samples_drawn}{sem_txt})")
        return 0

    if args.cmd == "suggest":
        model = _build_model(args)
        obs = Term.parse(args.obs)
        diagnoses = mc_diagnoses(model, obs)
        cfg = SamplerConfig(theta=args.theta, seed=args.seed)
        rng = derive_rng(args.seed, 0x5E)
        if args.policy == "probe":
            s = next_probe(model, obs, diagnoses)
        elif args.policy == "greedy":
            s = next_control_greedy(model, obs.restrict(model.control_names), diagnoses, cfg)
        elif args.policy == "atpg":
            s = next_control_atpg(model, obs.restrict(model.input_names), diagnoses, rng)
        elif args.policy == "exhaustive":
            s = next_control_exhaustive(model, obs, diagnoses, cfg)
        else:
            s = next_control_random(model, rng)
        action = s.probe if s.kind == "probe" else s.control.format()
        expected = "-" if s.predicted_value is None else f"{s.predicted_value:.4f}"
        print(f"{s.kind}: {action}  expected remaining: {expected}  [{s.rationale}]")
        return 0

    if args.cmd == "run":
        model = _build_model(args)
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = config_from_dict(json.load(fh))
        else:
            cfg = ScenarioConfig(
                policy=args.policy, input_policy=args.input_policy,
                fault_cardinality=args.cardinality, max_steps=args.steps,
                sampler=SamplerConfig(theta=args.theta, seed=args.seed), seed=args.seed,
                model=args.model, semantics=args.semantics,
            )
        traces = []
        for i in range(args.repeat):
            run_cfg = cfg if args.repeat == 1 else _reseed(cfg, cfg.seed + i)
            traces.append(run_scenario(model, run_cfg, model_name=args.model))
        if args.repeat == 1:
            text = trace_to_csv(traces[0])
            _write_out(args, text)
            t = traces[0]
            print(f"outcome: {t.outcome.value}  remaining: {[s.remaining for s in t.steps]}", file=sys.stderr)
        else:
            report = summarize(traces)
            if args.out:
                Path(args.out).write_text(report.to_csv(), encoding="utf-8")
                print(f"wrote {args.out}")
            print(report.to_text())
        return 0

    if args.cmd == "bench":
        model = _build_model(args)
        entries = generate_benchmark(model, args.n_faults, args.top, args.cardinality, derive_rng(args.seed, 0xBE))
        text = benchmark_to_csv(entries)
        _write_out(args, text)
        counts = [e.mc_count for e in entries]
        print(f"kept {len(entries)}: mc min={min(counts)} max={max(counts)} mean={sum(counts)/len(counts):.1f}",
              file=sys.stderr)
        return 0

    if args.cmd == "fit":
        series = _read_series(args.infile)
        f = fit_decay(series)
        print(f"n0={f.n0:.6g} rate={f.rate:.6g} n_inf={f.n_inf:.6g} r_squared={f.r_squared:.6g}")
        return 0

    if args.cmd == "serve":
        import uvicorn

        from .service import ModelCatalog, create_app

        catalog = ModelCatalog(bench_dir=Path(args.models_dir) if args.models_dir else _data_dir())
        app = create_app(
            catalog,
            log_dir=Path(args.log_dir) if args.log_dir else None,
            static_dir=Path(args.static) if args.static else None,
        )
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    raise SystemExit(f"unknown command {args.cmd!r}")


def _reseed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    from dataclasses import replace

    return replace(cfg, seed=seed, sampler=SamplerConfig(
        theta=cfg.sampler.theta, min_samples=cfg.sampler.min_samples,
        max_samples=cfg.sampler.max_samples, seed=seed,
        termination=cfg.sampler.termination, stable_window=cfg.sampler.stable_window,
        exhaustive_inputs=cfg.sampler.exhaustive_inputs,
    ))


def _data_dir() -> Path:
    return Path(str(importlib.resources.files("activetest") / "data"))


def _read_series(path) -> list[tuple[float, float]]:
    series = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            k_idx = header.index("k")
            n_idx = header.index("remaining")
        except ValueError:
            k_idx, n_idx = 0, 1
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) <= max(k_idx, n_idx) or not parts[k_idx]:
                continue
            series.append((float(parts[k_idx]), float(parts[n_idx])))
    return series


if __name__ == "__main__":
    raise SystemExit(main())

import importlib.resources
import itertools

import pytest

from activetest import builtin_demux, encode, parse_netlist
from activetest.model import FaultSemantics
from activetest.terms import Term


def bench_text(name: str) -> str:
    return (importlib.resources.files("activetest") / "data" / f"{name}.bench").read_text()


@pytest.fixture(scope="session")
def demux_weak():
    return builtin_demux(FaultSemantics.WEAK)


@pytest.fixture(scope="session")
def demux_strong():
    return builtin_demux(FaultSemantics.STRONG_OPPOSITE)


@pytest.fixture(scope="session")
def demux_strong_ab():
    """Strong demux with the inverter inputs as controls (CTL = {a, b})."""
    return builtin_demux(FaultSemantics.STRONG_OPPOSITE, controls=("a", "b"))


@pytest.fixture(scope="session")
def demux_weak_ab():
    return builtin_demux(FaultSemantics.WEAK, controls=("a", "b"))


@pytest.fixture(scope="session")
def c74182_circuit():
    return parse_netlist(bench_text("74182"))


@pytest.fixture(scope="session")
def c74182_strong(c74182_circuit):
    return encode(
        c74182_circuit,
        FaultSemantics.STRONG_OPPOSITE,
        controls=c74182_circuit.primary_inputs[:4],
    )


# --- independent oracles (no kernel involvement) ---------------------------


def clauses_satisfied(model, assignment: dict[str, bool]) -> bool:
    names = model.names
    return all(
        any((lit > 0) == assignment[names[abs(lit) - 1]] for lit in clause)
        for clause in model.clauses
    )


def brute_force_satisfiable(model, term: Term) -> bool:
    """Truth-table satisfiability of SD conjoined with the term."""
    fixed = dict(term.items())
    free = [v.name for v in model.variables if v.name not in fixed]
    for bits in itertools.product((False, True), repeat=len(free)):
        assignment = dict(fixed)
        assignment.update(zip(free, bits))
        if clauses_satisfied(model, assignment):
            return True
    return False


# test-local observations on the demultiplexer; short aliases number the
# health variables in gate order: h_p=h1, h_r=h2, h_q=h3, h_s=h4,
# h_o1..h_o4=h5..h8
ALPHA_1 = Term.parse("a=0,b=0,i=1,o4=1")
ALPHA_2 = Term.parse("a=0,b=0,i=1,o1=0,o4=1")
ALPHA_3_G3 = Term.parse("a=1,b=1,i=1,o1=1,o2=0,o3=0,o4=0")
ALPHA_4 = Term.parse("a=1,b=1,i=1,o1=1,o4=0")
ALPHA_5 = Term.parse("a=0,b=0,i=1,o1=0,o2=1,o3=1,o4=1")

FIG3_DIAGNOSES = (
    ("h_p", "h_q"),
    ("h_p", "h_o1"),
    ("h_r", "h_o1"),
    ("h_q", "h_o1"),
    ("h_s", "h_o1"),
    ("h_o1", "h_o4"),
)

TRIPLE_FAULT_DIAGNOSES = (
    ("h_p", "h_s", "h_o3"),
    ("h_p", "h_o3", "h_o4"),
    ("h_r", "h_q", "h_o2"),
    ("h_r", "h_s", "h_o1"),
    ("h_q", "h_o2", "h_o4"),
)

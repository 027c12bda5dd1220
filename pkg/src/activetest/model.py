"""Propositional system descriptions of circuits with a health-variable
per gate and a COMPS/IN/OUT/CTL/INT variable partition.

Under weak fault semantics each gate contributes h => (o <-> f(inputs));
strong (stuck-at-opposite) semantics additionally contributes
not h => (o <-> not f(inputs)), which makes the circuit's response to any
total input/health assignment deterministic.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circuits import Circuit, demux_circuit


class FaultSemantics(enum.Enum):
    WEAK = "weak"
    STRONG_OPPOSITE = "strong"


@dataclass(frozen=True)
class Variable:
    vid: int  # 1-based, also the DIMACS-style literal magnitude
    name: str
    role: str  # comp | input | output | control | internal


@dataclass(frozen=True)
class VariablePartition:
    comps: frozenset[str]
    inputs: frozenset[str]
    outputs: frozenset[str]
    controls: frozenset[str]
    internals: frozenset[str]

    def __post_init__(self):
        obs = self.inputs | self.outputs
        if self.comps & obs or self.comps & self.controls or obs & self.controls:
            raise ValueError("comps, observables and controls must be pairwise disjoint")
        if self.inputs & self.outputs:
            raise ValueError("inputs and outputs must be disjoint")

    @property
    def observables(self) -> frozenset[str]:
        return self.inputs | self.outputs


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class SystemModel:
    variables: tuple[Variable, ...]
    clauses: tuple[tuple[int, ...], ...]
    fault_semantics: FaultSemantics
    partition: VariablePartition
    source_circuit: Circuit | None = None

    def __post_init__(self):
        n = len(self.variables)
        for cl in self.clauses:
            for lit in cl:
                if lit == 0 or abs(lit) > n:
                    raise EncodingError(f"clause literal {lit} references an undeclared variable")
        from . import reasoner  # deferred: reasoner imports this module

        if not reasoner.is_consistent(self, _EMPTY_TERM()):
            raise EncodingError("system description is unsatisfiable")

    # --- lookups ---------------------------------------------------------

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {v.name: v.vid for v in self.variables}

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def vid(self, name: str) -> int:
        try:
            return self.var_index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    @cached_property
    def comp_names(self) -> tuple[str, ...]:
        """COMPS in variable-id order."""
        return tuple(v.name for v in self.variables if v.role == "comp")

    @cached_property
    def internal_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.role == "internal")

    @cached_property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.role == "input")

    @cached_property
    def control_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.role == "control")

    @cached_property
    def output_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.role == "output")

    # --- kernel-ready arrays ---------------------------------------------

    @cached_property
    def cnf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(lits, offsets): flattened signed literals plus clause offsets."""
        lits = np.fromiter(
            (lit for cl in self.clauses for lit in cl), dtype=np.int32,
            count=sum(len(cl) for cl in self.clauses),
        )
        offsets = np.zeros(len(self.clauses) + 1, dtype=np.int32)
        np.cumsum([len(cl) for cl in self.clauses], out=offsets[1:])
        return lits, offsets

    @cached_property
    def sim_arrays(self):
        """Compiled circuit tables for the simulation kernel, or None."""
        if self.source_circuit is None:
            return None
        from .circuits import GATE_KINDS

        circ = self.source_circuit
        net_vid = {n: self.vid(n) for n in circ.nets}
        kinds = np.fromiter((GATE_KINDS.index(g.kind) for g in circ.gates), dtype=np.int32)
        out_vid = np.fromiter((net_vid[g.output] for g in circ.gates), dtype=np.int32)
        fanin_offsets = np.zeros(len(circ.gates) + 1, dtype=np.int32)
        np.cumsum([len(g.inputs) for g in circ.gates], out=fanin_offsets[1:])
        fanins = np.fromiter(
            (net_vid[n] for g in circ.gates for n in g.inputs), dtype=np.int32,
            count=int(fanin_offsets[-1]),
        )
        topo = np.asarray(circ.topo_order, dtype=np.int32)
        return kinds, fanin_offsets, fanins, out_vid, topo

    @cached_property
    def gate_health_vids(self) -> np.ndarray:
        """Health variable id per gate, aligned with source_circuit.gates."""
        if self.source_circuit is None:
            raise EncodingError("model has no source circuit")
        return np.fromiter(
            (self.vid(health_name(g.output)) for g in self.source_circuit.gates), dtype=np.int32
        )

    @property
    def n_vars(self) -> int:
        return len(self.variables)


def _EMPTY_TERM():
    from .terms import Term

    return Term({})


def health_name(output_net: str) -> str:
    return f"h_{output_net}"


def _iff_clauses(kind: str, out: int, ins: list[int], negate: bool) -> list[tuple[int, ...]]:
    """CNF of out <-> f(ins) (or its negation) by direct expansion."""
    o = -out if negate else out
    if kind in ("NAND", "NOR", "XNOR"):
        # fold the gate's own negation into the output literal
        o = -o
        kind = {"NAND": "AND", "NOR": "OR", "XNOR": "XOR"}[kind]
    if kind == "BUF":
        kind, ins = "AND", ins  # single-input AND
    if kind == "NOT":
        return [(-o, -ins[0]), (o, ins[0])]
    if kind == "AND":
        return [(-o, i) for i in ins] + [tuple([o] + [-i for i in ins])]
    if kind == "OR":
        return [(o, -i) for i in ins] + [tuple([-o] + list(ins))]
    if kind == "XOR":
        clauses = []
        for bits in itertools.product((0, 1), repeat=len(ins)):
            parity = sum(bits) % 2
            lits = [(-i if b else i) for i, b in zip(ins, bits)]
            lits.append(o if parity else -o)
            clauses.append(tuple(lits))
        return clauses
    raise EncodingError(f"unknown gate kind {kind!r}")


def encode(circuit: Circuit, semantics: FaultSemantics, controls=()) -> SystemModel:
    """Encode a circuit as a SystemModel.

    Variable order: one health variable per gate (in gate order), then one
    variable per net (in first-mention order); the ordering is stable so
    identical inputs produce identical numbering and clause sets.
    """
    controls = tuple(controls)
    for c in controls:
        if c not in circuit.primary_inputs:
            raise EncodingError(f"control {c!r} is not a primary input")
    if set(circuit.primary_inputs) & set(circuit.primary_outputs):
        raise EncodingError("a net cannot be both primary input and output")

    variables: list[Variable] = []
    for g in circuit.gates:
        variables.append(Variable(len(variables) + 1, health_name(g.output), "comp"))
    ctl = set(controls)
    outs = set(circuit.primary_outputs)
    ins = set(circuit.primary_inputs)
    net_vid: dict[str, int] = {}
    for net in circuit.nets:
        if net in ctl:
            role = "control"
        elif net in ins:
            role = "input"
        elif net in outs:
            role = "output"
        else:
            role = "internal"
        v = Variable(len(variables) + 1, net, role)
        variables.append(v)
        net_vid[net] = v.vid

    clauses: list[tuple[int, ...]] = []
    for gi, g in enumerate(circuit.gates):
        h = gi + 1
        out = net_vid[g.output]
        fanin = [net_vid[n] for n in g.inputs]
        for cl in _iff_clauses(g.kind, out, fanin, negate=False):
            clauses.append((-h,) + cl)
        if semantics is FaultSemantics.STRONG_OPPOSITE:
            for cl in _iff_clauses(g.kind, out, fanin, negate=True):
                clauses.append((h,) + cl)

    partition = VariablePartition(
        comps=frozenset(health_name(g.output) for g in circuit.gates),
        inputs=frozenset(ins - ctl),
        outputs=frozenset(outs),
        controls=frozenset(ctl),
        internals=frozenset(n for n in circuit.nets if n not in ins and n not in outs),
    )
    return SystemModel(
        variables=tuple(variables),
        clauses=tuple(clauses),
        fault_semantics=semantics,
        partition=partition,
        source_circuit=circuit,
    )


def builtin_demux(semantics: FaultSemantics = FaultSemantics.WEAK, controls=("i",)) -> SystemModel:
    """The running-example demultiplexer model.

    Defaults give the weak model with COMPS = {h_p, h_r, h_q, h_s,
    h_o1..h_o4}, OBS = {a, b, o1..o4} and CTL = {i}.
    """
    return encode(demux_circuit(), semantics, controls=controls)

"""Gate-level combinational circuits and the bench netlist format.

A circuit is a list of gates over named nets. Nets with no driving gate
must be declared primary inputs; every net has at most one driver and the
gate graph is acyclic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

GATE_KINDS = ("AND", "NAND", "OR", "NOR", "NOT", "BUF", "XOR", "XNOR")

# common bench-file spelling
_KIND_ALIASES = {"BUFF": "BUF"}

_NAME_RE = re.compile(r"^[A-Za-z0-9_\[\]]+$")
_INPUT_RE = re.compile(r"^INPUT\s*\(\s*([^()]+?)\s*\)$")
_OUTPUT_RE = re.compile(r"^OUTPUT\s*\(\s*([^()]+?)\s*\)$")
_GATE_RE = re.compile(r"^([^=]+?)\s*=\s*([A-Za-z][A-Za-z0-9]*)\s*\(\s*(.*?)\s*\)$")


class NetlistError(ValueError):
    """Raised for malformed netlists or invalid circuit structure."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str
    inputs: tuple[str, ...]
    output: str


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    # gate indices in evaluation order, filled by validation
    topo_order: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "topo_order", _validate(self))

    @property
    def nets(self) -> tuple[str, ...]:
        """All nets in first-mention order: declared inputs, then per gate
        its input nets then its output net."""
        seen: dict[str, None] = {}
        for n in self.primary_inputs:
            seen.setdefault(n, None)
        for g in self.gates:
            for n in g.inputs:
                seen.setdefault(n, None)
            seen.setdefault(g.output, None)
        return tuple(seen)

    def driver_of(self, net: str) -> Gate | None:
        for g in self.gates:
            if g.output == net:
                return g
        return None


def _validate(circuit: Circuit) -> tuple[int, ...]:
    drivers: dict[str, int] = {}
    for idx, g in enumerate(circuit.gates):
        if g.kind not in GATE_KINDS:
            raise NetlistError(f"unknown gate kind {g.kind!r}")
        if g.kind in ("NOT", "BUF"):
            if len(g.inputs) != 1:
                raise NetlistError(f"gate {g.name!r}: {g.kind} takes exactly one input")
        elif len(g.inputs) < 2:
            raise NetlistError(f"gate {g.name!r}: {g.kind} needs at least two inputs")
        if g.output in drivers:
            raise NetlistError(f"net {g.output!r} has more than one driving gate")
        drivers[g.output] = idx

    inputs = set(circuit.primary_inputs)
    if len(inputs) != len(circuit.primary_inputs):
        raise NetlistError("duplicate primary input declaration")
    for g in circuit.gates:
        if g.output in inputs:
            raise NetlistError(f"primary input {g.output!r} is driven by gate {g.name!r}")
        for n in g.inputs:
            if n not in inputs and n not in drivers:
                raise NetlistError(f"net {n!r} is neither a declared input nor driven by a gate")
    for n in circuit.primary_outputs:
        if n not in inputs and n not in drivers:
            raise NetlistError(f"declared output {n!r} does not exist")

    # Kahn topological sort over gates; a leftover gate means a cycle.
    indeg = [0] * len(circuit.gates)
    dependents: dict[int, list[int]] = {i: [] for i in range(len(circuit.gates))}
    for idx, g in enumerate(circuit.gates):
        for n in g.inputs:
            if n in drivers:
                dependents[drivers[n]].append(idx)
                indeg[idx] += 1
    ready = [i for i, d in enumerate(indeg) if d == 0]
    order: list[int] = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in dependents[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if len(order) != len(circuit.gates):
        raise NetlistError("circuit contains a combinational cycle")
    return tuple(order)


def parse_netlist(text: str) -> Circuit:
    """Parse a bench-style netlist.

    Lines are ``# comment``, ``INPUT(x)``, ``OUTPUT(y)`` or
    ``net = KIND(a, b, ...)``; gate order is preserved from file order.
    """
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _INPUT_RE.match(line)
        if m:
            inputs.append(_check_name(m.group(1), lineno, raw))
            continue
        m = _OUTPUT_RE.match(line)
        if m:
            outputs.append(_check_name(m.group(1), lineno, raw))
            continue
        m = _GATE_RE.match(line)
        if m:
            out = _check_name(m.group(1).strip(), lineno, raw)
            kind = m.group(2).upper()
            kind = _KIND_ALIASES.get(kind, kind)
            if kind not in GATE_KINDS:
                raise NetlistError(f"unknown gate kind {m.group(2)!r}", lineno, raw.index(m.group(2)) + 1)
            args = [a.strip() for a in m.group(3).split(",")] if m.group(3).strip() else []
            if any(not a for a in args):
                raise NetlistError("empty gate argument", lineno)
            for a in args:
                _check_name(a, lineno, raw)
            gates.append(Gate(name=out, kind=kind, inputs=tuple(args), output=out))
            continue
        raise NetlistError(f"cannot parse line: {line!r}", lineno, 1)

    return Circuit(gates=tuple(gates), primary_inputs=tuple(inputs), primary_outputs=tuple(outputs))


def _check_name(name: str, lineno: int, raw: str) -> str:
    if not _NAME_RE.match(name):
        col = raw.find(name)
        raise NetlistError(f"invalid net name {name!r}", lineno, col + 1 if col >= 0 else None)
    return name


def load_netlist(path) -> Circuit:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_netlist(fh.read())


def demux_circuit() -> Circuit:
    """The 2-to-4 demultiplexer used as the running example: four inverters
    (a->p->r, b->q->s) feeding four three-input and-gates o1..o4."""
    src = """
    INPUT(a)
    INPUT(b)
    INPUT(i)
    OUTPUT(o1)
    OUTPUT(o2)
    OUTPUT(o3)
    OUTPUT(o4)
    p = NOT(a)
    r = NOT(p)
    q = NOT(b)
    s = NOT(q)
    o1 = AND(i, p, q)
    o2 = AND(i, r, q)
    o3 = AND(i, p, s)
    o4 = AND(i, r, s)
    """
    return parse_netlist(src)


def simulate(circuit: Circuit, input_values: dict[str, bool], faulty: frozenset[str] | set[str] = frozenset()) -> dict[str, bool]:
    """Evaluate all nets. Gates whose *output net* is in ``faulty`` emit the
    negation of their nominal function (stuck-at-opposite).

    Reference implementation; hot paths go through the kernel module.
    """
    values: dict[str, bool] = {}
    for n in circuit.primary_inputs:
        values[n] = bool(input_values[n])
    for idx in circuit.topo_order:
        g = circuit.gates[idx]
        values[g.output] = eval_gate(g.kind, [values[n] for n in g.inputs]) ^ (g.output in faulty)
    return values


def eval_gate(kind: str, ins: list[bool]) -> bool:
    if kind == "AND":
        return all(ins)
    if kind == "NAND":
        return not all(ins)
    if kind == "OR":
        return any(ins)
    if kind == "NOR":
        return not any(ins)
    if kind == "NOT":
        return not ins[0]
    if kind == "BUF":
        return ins[0]
    if kind == "XOR":
        return sum(ins) % 2 == 1
    if kind == "XNOR":
        return sum(ins) % 2 == 0
    raise ValueError(f"unknown gate kind {kind!r}")

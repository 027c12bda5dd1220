import pytest

from activetest.circuits import (
    Circuit,
    Gate,
    NetlistError,
    demux_circuit,
    parse_netlist,
    simulate,
)

from conftest import bench_text


def test_parse_74182_shape(c74182_circuit):
    c = c74182_circuit
    assert len(c.gates) == 19
    assert len(c.primary_inputs) == 9
    assert len(c.primary_outputs) == 5


def test_gate_order_preserved():
    c = parse_netlist("INPUT(a)\nOUTPUT(c)\nb = NOT(a)\nc = NOT(b)\n")
    assert [g.output for g in c.gates] == ["b", "c"]
    assert c.primary_inputs == ("a",)
    assert c.primary_outputs == ("c",)


def test_minimal_chain():
    c = parse_netlist("INPUT(a)\nOUTPUT(c)\nb = NOT(a)\nc = NOT(b)\n")
    assert len(c.gates) == 2 and len(c.primary_inputs) == 1 and len(c.primary_outputs) == 1


def test_undeclared_net_is_error():
    with pytest.raises(NetlistError, match="neither a declared input"):
        parse_netlist("OUTPUT(y)\ny = AND(a, b)\n")


def test_duplicate_driver_is_error():
    with pytest.raises(NetlistError, match="more than one driving gate"):
        parse_netlist("INPUT(a)\nINPUT(b)\nx = NOT(a)\nx = NOT(b)\n")


def test_unknown_kind_is_error():
    with pytest.raises(NetlistError, match="unknown gate kind"):
        parse_netlist("INPUT(a)\nINPUT(b)\nx = MAJ3(a, b, a)\n")


def test_arity_violations():
    with pytest.raises(NetlistError, match="exactly one input"):
        parse_netlist("INPUT(a)\nINPUT(b)\nx = NOT(a, b)\n")
    with pytest.raises(NetlistError, match="at least two"):
        parse_netlist("INPUT(a)\nx = AND(a)\n")


def test_cycle_is_error():
    with pytest.raises(NetlistError, match="cycle"):
        parse_netlist("INPUT(a)\nx = AND(a, y)\ny = AND(a, x)\n")


def test_syntax_error_reports_line():
    with pytest.raises(NetlistError, match="line 2"):
        parse_netlist("INPUT(a)\nwhat is this\n")


def test_comments_and_blank_lines_ignored():
    c = parse_netlist("# header\n\nINPUT(a)\n# mid\nOUTPUT(b)\nb = BUFF(a)\n")
    assert c.gates[0].kind == "BUF"


def test_names_allow_brackets_and_underscore():
    c = parse_netlist("INPUT(in_a[0])\nOUTPUT(out[1])\nout[1] = NOT(in_a[0])\n")
    assert c.primary_inputs == ("in_a[0]",)


def test_demux_structure():
    c = demux_circuit()
    assert len(c.gates) == 8
    assert c.primary_inputs == ("a", "b", "i")
    assert [g.output for g in c.gates] == ["p", "r", "q", "s", "o1", "o2", "o3", "o4"]


def test_demux_nominal_simulation():
    c = demux_circuit()
    vals = simulate(c, {"a": False, "b": False, "i": True})
    assert (vals["o1"], vals["o2"], vals["o3"], vals["o4"]) == (True, False, False, False)
    vals = simulate(c, {"a": True, "b": True, "i": True})
    assert (vals["o1"], vals["o2"], vals["o3"], vals["o4"]) == (False, False, False, True)


def test_simulate_stuck_at_opposite_flips_only_faulty_gate():
    c = demux_circuit()
    nominal = simulate(c, {"a": False, "b": False, "i": True})
    faulted = simulate(c, {"a": False, "b": False, "i": True}, faulty={"o1"})
    assert faulted["o1"] == (not nominal["o1"])
    assert all(faulted[n] == nominal[n] for n in ("o2", "o3", "o4", "p", "q", "r", "s"))


def test_c17_parses(tmp_path):
    c = parse_netlist(bench_text("c17"))
    assert len(c.gates) == 6 and len(c.primary_inputs) == 5 and len(c.primary_outputs) == 2


def test_programmatic_circuit_validation():
    with pytest.raises(NetlistError):
        Circuit(
            gates=(Gate("x", "AND", ("a", "b"), "x"),),
            primary_inputs=("a",),  # b undeclared
            primary_outputs=("x",),
        )


def test_xor_gates_simulate():
    c = parse_netlist("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(x)\nOUTPUT(y)\nx = XOR(a, b, c)\ny = XNOR(a, b)\n")
    vals = simulate(c, {"a": True, "b": True, "c": True})
    assert vals["x"] is True and vals["y"] is True
    vals = simulate(c, {"a": True, "b": False, "c": False})
    assert vals["x"] is True and vals["y"] is False

"""Kernel-backed circuit evaluation under injected faults.

Simulation is behavioral (gate functions with stuck-at-opposite inversion
for faulty gates) and therefore independent of the model's CNF fault
semantics; consistency *checks* against the CNF are the reasoner's job.
"""

from __future__ import annotations

import numpy as np

from . import kernel
from .model import SystemModel
from .terms import Diagnosis, Term


class Simulator:
    def __init__(self, model: SystemModel):
        if model.sim_arrays is None:
            raise ValueError("model has no source circuit to simulate")
        self.model = model
        self.kinds, self.fanin_offsets, self.fanins, self.out_vid, self.topo = model.sim_arrays
        self.n_gates = len(self.kinds)
        base = np.full(model.n_vars + 1, -1, dtype=np.int8)
        self._base = base
        self._stim_vids = np.fromiter(
            (model.vid(n) for n in model.input_names + model.control_names), dtype=np.int32
        )
        self._out_vids = np.fromiter((model.vid(n) for n in model.output_names), dtype=np.int32)

    def fault_mask(self, diag: Diagnosis) -> np.ndarray:
        mask = np.zeros(self.n_gates, dtype=np.uint8)
        for name in diag.faulty:
            mask[self.model.vid(name) - 1] = 1  # health vars are first, in gate order
        return mask

    def stimulus_array(self, stimulus: Term) -> np.ndarray:
        """int8 values array with every input/control set from the term."""
        values = self._base.copy()
        for vid in self._stim_vids:
            v = stimulus.get(self.model.variables[vid - 1].name)
            if v is None:
                raise ValueError(
                    f"stimulus must assign all inputs and controls; missing "
                    f"{self.model.variables[vid - 1].name!r}"
                )
            values[vid] = int(v)
        return values

    def run(self, stimulus_values: np.ndarray, fault_mask: np.ndarray) -> np.ndarray:
        values = stimulus_values.copy()
        kernel.simulate(
            self.kinds, self.fanin_offsets, self.fanins, self.out_vid, self.topo, values, fault_mask
        )
        return values

    def run_term(self, stimulus: Term, diag: Diagnosis) -> np.ndarray:
        return self.run(self.stimulus_array(stimulus), self.fault_mask(diag))

    def output_bits(self, values: np.ndarray) -> tuple[int, ...]:
        return tuple(int(values[v]) for v in self._out_vids)

    def outputs_term(self, values: np.ndarray) -> Term:
        return Term({n: bool(values[self.model.vid(n)]) for n in self.model.output_names})

    def full_term(self, values: np.ndarray) -> Term:
        """All net values as a term (inputs, controls, outputs, internals)."""
        out = {}
        for v in self.model.variables:
            if v.role != "comp":
                out[v.name] = bool(values[v.vid])
        return Term(out)

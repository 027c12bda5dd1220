"""Model-based sequential diagnosis of combinational circuits.

Minimal-cardinality diagnosis over propositional circuit models, expected
remaining-diagnosis computation (exact and sampled), next-action policies
(greedy and exhaustive control search, ATPG-based sequencing, probing,
random baseline), a fault-injection scenario harness with geometric decay
fitting, and an HTTP session service for live troubleshooting.
"""

from .circuits import Circuit, Gate, NetlistError, demux_circuit, load_netlist, parse_netlist
from .kernel import BACKEND as KERNEL_BACKEND
from .model import (
    EncodingError,
    FaultSemantics,
    SystemModel,
    VariablePartition,
    builtin_demux,
    encode,
)
from .reasoner import (
    NoDiagnosisError,
    count_all_diagnoses,
    intersect,
    is_consistent,
    mc_diagnoses,
    propagate,
    remaining,
)
from .terms import Diagnosis, DiagnosisSet, ObservationSequence, Term

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Gate",
    "NetlistError",
    "parse_netlist",
    "load_netlist",
    "demux_circuit",
    "FaultSemantics",
    "VariablePartition",
    "SystemModel",
    "EncodingError",
    "encode",
    "builtin_demux",
    "Term",
    "Diagnosis",
    "DiagnosisSet",
    "ObservationSequence",
    "propagate",
    "is_consistent",
    "count_all_diagnoses",
    "mc_diagnoses",
    "intersect",
    "remaining",
    "NoDiagnosisError",
    "KERNEL_BACKEND",
    "__version__",
]

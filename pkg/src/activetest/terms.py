"""Partial assignments (terms), diagnoses and diagnosis sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping


@dataclass(frozen=True, init=False)
class Term:
    """An assignment of truth values to a subset of variables, by name."""

    assignments: Mapping[str, bool]

    def __init__(self, assignments: Mapping[str, bool] | Iterable[tuple[str, bool]] = ()):
        object.__setattr__(self, "assignments", MappingProxyType(dict(assignments)))

    @classmethod
    def of(cls, **kwargs: bool) -> "Term":
        return cls({k: bool(v) for k, v in kwargs.items()})

    @classmethod
    def parse(cls, text: str) -> "Term":
        """Parse ``a=0,b=1`` (also accepts ';' separators)."""
        pairs = {}
        text = text.strip()
        if not text:
            return cls({})
        for chunk in text.replace(";", ",").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            name, _, val = chunk.partition("=")
            name, val = name.strip(), val.strip()
            if val not in ("0", "1"):
                raise ValueError(f"bad assignment {chunk!r}: value must be 0 or 1")
            if name in pairs and pairs[name] != (val == "1"):
                raise ValueError(f"variable {name!r} assigned twice")
            pairs[name] = val == "1"
        return cls(pairs)

    def format(self) -> str:
        """Canonical ``var=0;var=1`` rendering, name-sorted."""
        return ";".join(f"{k}={int(v)}" for k, v in sorted(self.assignments.items()))

    def conjoin(self, other: "Term") -> "Term":
        merged = dict(self.assignments)
        for k, v in other.assignments.items():
            if merged.get(k, v) != v:
                raise ValueError(f"conflicting assignment for {k!r}")
            merged[k] = v
        return Term(merged)

    def restrict(self, names: Iterable[str]) -> "Term":
        keep = set(names)
        return Term({k: v for k, v in self.assignments.items() if k in keep})

    def get(self, name: str, default=None):
        return self.assignments.get(name, default)

    def __contains__(self, name: str) -> bool:
        return name in self.assignments

    def __len__(self) -> int:
        return len(self.assignments)

    def __bool__(self) -> bool:
        return bool(self.assignments)

    def items(self):
        return self.assignments.items()

    def __hash__(self):
        return hash(frozenset(self.assignments.items()))

    def __eq__(self, other):
        if not isinstance(other, Term):
            return NotImplemented
        return dict(self.assignments) == dict(other.assignments)

    def __repr__(self):
        return f"Term({self.format()!r})"


EMPTY_TERM = Term({})


@dataclass(frozen=True)
class Diagnosis:
    """A total health assignment, stored as the set of faulty components."""

    faulty: frozenset[str]

    def __init__(self, faulty: Iterable[str]):
        object.__setattr__(self, "faulty", frozenset(faulty))

    @property
    def cardinality(self) -> int:
        return len(self.faulty)

    def as_term(self, comp_names: Iterable[str]) -> Term:
        return Term({c: c not in self.faulty for c in comp_names})

    def is_faulty(self, comp: str) -> bool:
        return comp in self.faulty

    def __repr__(self):
        inner = ", ".join(sorted(self.faulty)) or "healthy"
        return f"Diagnosis({inner})"


@dataclass(frozen=True)
class DiagnosisSet:
    """Duplicate-free, insertion-ordered collection of diagnoses."""

    members: tuple[Diagnosis, ...]
    provenance: Term = field(default=EMPTY_TERM)

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate diagnoses")

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __contains__(self, d: Diagnosis):
        return d in self.members

    @property
    def cardinalities(self) -> set[int]:
        return {d.cardinality for d in self.members}

    def fault_sets(self) -> set[frozenset[str]]:
        return {d.faulty for d in self.members}


@dataclass(frozen=True)
class ObservationSequence:
    """Ordered (observation, control) steps of a diagnostic session.

    Observation terms may assign OBS variables and, for probe steps,
    internal variables; control terms assign CTL variables only.
    """

    steps: tuple[tuple[Term, Term], ...]

    def validate(self, partition) -> None:
        allowed_obs = partition.observables | partition.internals
        for alpha, gamma in self.steps:
            bad = set(alpha.assignments) - allowed_obs
            if bad:
                raise ValueError(f"observation assigns non-observable variables: {sorted(bad)}")
            bad = set(gamma.assignments) - partition.controls
            if bad:
                raise ValueError(f"control term assigns non-control variables: {sorted(bad)}")

    def terms(self) -> list[Term]:
        return [alpha.conjoin(gamma) for alpha, gamma in self.steps]

    def __len__(self):
        return len(self.steps)

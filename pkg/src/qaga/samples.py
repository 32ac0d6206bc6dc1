"""Spin samples and sample sets."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

import numpy as np

from .ising import DomainMismatchError, IsingModel

__all__ = ["Sample", "SampleSet"]


@dataclass(frozen=True, eq=False)
class Sample:
    """One spin assignment, optionally with its energy."""

    assignment: Mapping[int, int]
    energy: float | None = None

    def __post_init__(self):
        a = {int(v): int(s) for v, s in self.assignment.items()}
        if any(s not in (-1, 1) for s in a.values()):
            raise DomainMismatchError("spin values must be -1 or +1")
        object.__setattr__(self, "assignment", MappingProxyType(dict(sorted(a.items()))))
        if self.energy is not None:
            object.__setattr__(self, "energy", float(self.energy))

    def __getitem__(self, label: int) -> int:
        return self.assignment[label]

    def __len__(self):
        return len(self.assignment)

    def __eq__(self, other):
        if isinstance(other, Sample):
            return dict(self.assignment) == dict(other.assignment)
        if isinstance(other, Mapping):
            return dict(self.assignment) == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.assignment.items()))

    def __reduce__(self):
        return (Sample, (dict(self.assignment), self.energy))

    def __repr__(self):
        return f"Sample({dict(self.assignment)}, energy={self.energy!r})"


class SampleSet:
    """Ordered collection of reads over one variable set.

    Spins are stored as an ``(n, N)`` int8 matrix whose columns follow
    ``labels``. Duplicate rows are kept; each row is one read.

    Args:
        labels: Variable labels, one per column.
        spins: Spin matrix with entries in {-1, +1}.
        energies: Per-read energies. Computed from ``model`` when omitted.
        model: Model the reads were drawn for.
    """

    def __init__(self, labels: Sequence[int], spins, energies=None, model: IsingModel | None = None):
        self.labels = tuple(int(v) for v in labels)
        spins = np.asarray(spins, dtype=np.int8)
        if spins.ndim != 2 or spins.shape[1] != len(self.labels):
            raise DomainMismatchError(
                f"spin matrix shape {spins.shape} does not match {len(self.labels)} labels")
        if spins.shape[0] < 1:
            raise ValueError("a SampleSet needs at least one read")
        if spins.size and not np.all(np.abs(spins) == 1):
            raise DomainMismatchError("spin values must be -1 or +1")
        if model is not None and tuple(model.variables) != tuple(sorted(self.labels)):
            raise DomainMismatchError("sample labels do not match the model's variables")
        if model is not None and self.labels != model.variables:
            order = np.argsort(self.labels)
            self.labels = tuple(self.labels[k] for k in order)
            spins = spins[:, order]
        if energies is None:
            if model is None:
                raise ValueError("energies or model is required")
            energies = model.energies(spins)
        energies = np.asarray(energies, dtype=float)
        if energies.shape != (spins.shape[0],):
            raise ValueError("one energy per read is required")
        spins.flags.writeable = False
        energies.flags.writeable = False
        self.spins = spins
        self.energies = energies
        self.model = model

    @classmethod
    def from_samples(cls, samples: Sequence, model: IsingModel) -> SampleSet:
        """Build from mappings or :class:`Sample` objects; energies are recomputed."""
        if not samples:
            raise ValueError("a SampleSet needs at least one read")
        spins = np.stack([model.spin_vector(s) for s in samples]) if model.num_vars else \
            np.zeros((len(samples), 0), dtype=np.int8)
        return cls(model.variables, spins, model=model)

    @property
    def num_reads(self) -> int:
        return self.spins.shape[0]

    def __len__(self):
        return self.num_reads

    def __getitem__(self, k: int) -> Sample:
        return Sample(dict(zip(self.labels, self.spins[k].tolist())), float(self.energies[k]))

    def __iter__(self) -> Iterator[Sample]:
        for k in range(self.num_reads):
            yield self[k]

    def __repr__(self):
        return f"SampleSet(num_reads={self.num_reads}, num_vars={len(self.labels)})"

    @property
    def first(self) -> Sample:
        """Lowest-energy read (earliest on ties)."""
        return self[int(np.argmin(self.energies))]

    def column(self, label: int) -> np.ndarray:
        try:
            k = self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label}") from None
        return self.spins[:, k]

    def restrict(self, labels: Sequence[int], model: IsingModel | None = None) -> SampleSet:
        """Keep only the given columns; energies are recomputed on ``model``."""
        pos = {v: k for k, v in enumerate(self.labels)}
        missing = [v for v in labels if v not in pos]
        if missing:
            raise DomainMismatchError(f"labels not in sample set: {missing}")
        cols = [pos[v] for v in labels]
        spins = self.spins[:, cols]
        if model is None:
            return SampleSet(labels, spins, energies=np.zeros(self.num_reads))
        return SampleSet(labels, spins, model=model)

    @classmethod
    def concatenate(cls, parts: Sequence[SampleSet], model: IsingModel | None = None) -> SampleSet:
        labels = parts[0].labels
        if any(p.labels != labels for p in parts):
            raise DomainMismatchError("cannot concatenate sample sets over different labels")
        spins = np.concatenate([p.spins for p in parts])
        energies = np.concatenate([p.energies for p in parts])
        return cls(labels, spins, energies, model=model if model is not None else parts[0].model)

"""Quantum-assisted greedy algorithm (QAGA).

Each stage draws ``num_reads`` samples of the current Hamiltonian, treats
every spin as a +/-1 random variable, and fixes the spins whose samples
(nearly) agree. Fixed spins are substituted into the Hamiltonian, so the next
stage samples a smaller and sparser model. The loop ends when a stage fixes
nothing, when every spin is fixed, or when ``max_stages`` is reached. Spins
still free at the end are set by multi-qubit correction over the last
stage's samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .ising import DomainMismatchError, IsingModel, ising_energy
from .postprocess import mqc_reduce, sqc
from .samplers import Sampler, SimulatedAnnealingSampler
from .samples import Sample, SampleSet

__all__ = [
    "ContractViolation",
    "QagaConfig",
    "StageRecord",
    "QagaResult",
    "estimate_uncertainty",
    "majority_sign",
    "select_fixable",
    "contract",
    "qaga_solve",
    "stage_trace",
]

TIE_TOL = 1e-9


class ContractViolation(RuntimeError):
    """An internal precondition was broken (e.g. majority of a zero-sum column)."""


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta < 0.5:
        raise ValueError(f"theta must be in [0, 0.5), got {theta}")
    return theta


@dataclass
class QagaConfig:
    """Settings for :func:`qaga_solve`.

    Attributes:
        theta: Uncertainty threshold; spins with uncertainty ``<= theta`` are
            fixed. 0 means only unanimous spins are fixed.
        num_reads: Samples drawn per stage.
        max_stages: Upper bound on the number of stages.
        sampler: Sampler used at every stage. Defaults to simulated annealing.
        final_local_search: Polish the assembled solution with SQC.
    """

    theta: float = 0.0
    num_reads: int = 1000
    max_stages: int = 64
    sampler: Sampler = field(default_factory=SimulatedAnnealingSampler)
    final_local_search: bool = True

    def __post_init__(self):
        self.theta = _check_theta(self.theta)
        if int(self.num_reads) < 1:
            raise ValueError(f"num_reads must be >= 1, got {self.num_reads}")
        if int(self.max_stages) < 1:
            raise ValueError(f"max_stages must be >= 1, got {self.max_stages}")


@dataclass(frozen=True)
class StageRecord:
    """One stage: model size on entry, spins fixed, and the stage's best sample energy.

    ``best_energy`` is measured on the original model, completing the best
    sample with the spins fixed in earlier stages.
    """

    t: int
    num_vars: int
    num_couplers: int
    fixed: Mapping[int, int]
    best_energy: float

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "vars": self.num_vars,
            "couplers": self.num_couplers,
            "fixed": {str(v): s for v, s in sorted(self.fixed.items())},
            "best_energy": self.best_energy,
        }


@dataclass(frozen=True)
class QagaResult:
    solution: Sample
    energy: float
    stages: list[StageRecord]
    used_mqc_fallback: bool
    used_incumbent: bool

    @property
    def num_stages(self) -> int:
        return len(self.stages)


def _column_sums(Z: SampleSet) -> np.ndarray:
    return Z.spins.sum(axis=0, dtype=np.int64)


def estimate_uncertainty(Z: SampleSet, label: int) -> float:
    """``1 - |sum of the label's spins| / n``; 0 for a unanimous column, 1 for a balanced one."""
    col = Z.column(label)
    return 1.0 - abs(int(col.sum(dtype=np.int64))) / col.size


def majority_sign(Z: SampleSet, label: int) -> int:
    total = int(Z.column(label).sum(dtype=np.int64))
    if total == 0:
        raise ContractViolation(f"column {label} sums to zero; its majority sign is undefined")
    return 1 if total > 0 else -1


def select_fixable(Z: SampleSet, theta: float) -> dict[int, int]:
    """Map each label with uncertainty ``<= theta`` to its majority sign."""
    theta = _check_theta(theta)
    n = Z.num_reads
    sums = _column_sums(Z)
    # u <= theta  <=>  n - |sum| <= theta * n, evaluated exactly
    limit = math.floor(Fraction(theta) * n)
    keep = (n - np.abs(sums)) <= limit
    return {v: (1 if s > 0 else -1) for v, s, k in zip(Z.labels, sums.tolist(), keep.tolist()) if k}


def contract(model: IsingModel, fixed: Mapping[int, int]) -> tuple[IsingModel, float]:
    """Substitute fixed spins into ``model``.

    Returns the model over the remaining variables (offset 0) and the
    constant that restores the original energy::

        E_model(fixed | r) == E_reduced(r) + offset
    """
    for v, s in fixed.items():
        if v not in model.index:
            raise DomainMismatchError(f"cannot fix unknown variable {v}")
        if s not in (-1, 1):
            raise ValueError(f"fixed value for {v} must be -1 or +1, got {s!r}")
    offset = model.offset
    h = {v: model.h.get(v, 0.0) for v in model.variables if v not in fixed}
    for v, s in fixed.items():
        offset += s * model.h.get(v, 0.0)
    J = {}
    for (i, j), c in model.J.items():
        if i in fixed and j in fixed:
            offset += fixed[i] * fixed[j] * c
        elif i in fixed:
            h[j] += fixed[i] * c
        elif j in fixed:
            h[i] += fixed[j] * c
        else:
            J[(i, j)] = c
    return IsingModel(h, J, variables=h.keys()), offset


def _next_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.spawn(1)[0].generate_state(1, dtype=np.uint64)[0])


def qaga_solve(model: IsingModel, config: QagaConfig | None = None, seed: int | None = None) -> QagaResult:
    """Minimize ``model`` with QAGA.

    Stage ``t`` seeds the sampler with the ``t``-th child of
    ``SeedSequence(seed)``.

    Besides the assembled solution, the best single sample seen at any stage
    (completed with the spins fixed before that stage) is kept as an
    incumbent. The incumbent is returned instead when it is strictly lower in
    energy (by more than 1e-9); ``used_incumbent`` reports that case.
    """
    config = config if config is not None else QagaConfig()
    seq = np.random.SeedSequence(seed)
    current = model
    fixed: dict[int, int] = {}
    stages: list[StageRecord] = []
    last: tuple[SampleSet, IsingModel] | None = None
    incumbent, incumbent_energy = None, math.inf

    for t in range(int(config.max_stages)):
        if current.num_vars == 0:
            break
        Z = config.sampler.sample(current, int(config.num_reads), _next_seed(seq))
        if Z.labels != current.variables:
            Z = Z.restrict(current.variables, model=current)
        energies = current.energies(Z.spins)
        k = int(np.argmin(energies))
        candidate = dict(fixed)
        candidate.update(zip(Z.labels, Z.spins[k].tolist()))
        candidate_energy = ising_energy(model, candidate)
        if candidate_energy < incumbent_energy:
            incumbent, incumbent_energy = candidate, candidate_energy

        fix = select_fixable(Z, config.theta)
        stages.append(StageRecord(t, current.num_vars, current.num_couplers, fix, candidate_energy))
        last = (Z, current)
        if not fix:
            break
        current, _ = contract(current, fix)
        fixed.update(fix)

    used_fallback = current.num_vars > 0
    if used_fallback:
        Z, drawn_for = last
        if drawn_for is not current:
            Z = Z.restrict(current.variables, model=current)
        fixed.update(mqc_reduce(current, Z).assignment)

    solution = Sample(fixed)
    if config.final_local_search:
        solution = sqc(model, solution)
    energy = ising_energy(model, solution)

    used_incumbent = incumbent is not None and incumbent_energy < energy - TIE_TOL
    if used_incumbent:
        solution, energy = Sample(incumbent), incumbent_energy
    return QagaResult(Sample(solution.assignment, energy), energy, stages, used_fallback, used_incumbent)


def stage_trace(result: QagaResult) -> dict:
    """JSON-ready summary of a run's stages."""
    return {
        "num_stages": result.num_stages,
        "sizes": [[s.num_vars, s.num_couplers] for s in result.stages],
        "fixed_counts": [len(s.fixed) for s in result.stages],
        "used_mqc_fallback": result.used_mqc_fallback,
        "used_incumbent": result.used_incumbent,
        "stages": [s.to_dict() for s in result.stages],
    }

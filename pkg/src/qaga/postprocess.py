"""Sample post-processing: multi-qubit correction (MQC) and single-qubit correction (SQC).

MQC recombines two samples. The variables where they disagree split into
connected components of the coupling graph. No coupler joins two different
components, so each component's contribution to the energy depends only on
its own values and the agreed-upon rest. Each component therefore takes
whichever parent's values give the lower energy, independently of the others.
A whole sample set is reduced by folding this pairwise step over it in order.

SQC is steepest single-spin-flip descent to a 1-flip local minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .ising import IsingModel
from .samples import Sample, SampleSet

__all__ = ["MqcPolicy", "mqc_pair", "mqc_reduce", "sqc"]

# flips must lower the energy by more than this; guards against rounding cycles
SQC_MIN_GAIN = 1e-10


@dataclass(frozen=True)
class MqcPolicy:
    """Choices the pairwise recombination leaves open.

    ``order="sequential"`` folds over the sample set in stored order;
    ``tie_break="first"`` keeps the first parent's values on a component when
    both choices give the same energy.
    """

    order: str = "sequential"
    tie_break: str = "first"

    def __post_init__(self):
        if self.order != "sequential":
            raise ValueError(f"unsupported reduction order {self.order!r}")
        if self.tie_break != "first":
            raise ValueError(f"unsupported tie break {self.tie_break!r}")


def _pair_vec(model: IsingModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return a.copy()
    Jm = model.coupling_matrix
    agree = np.flatnonzero(a == b)
    sub = Jm[np.ix_(diff, diff)]
    ncomp, comp = _cc(csr_matrix(sub != 0), directed=False)
    af = a.astype(float)
    local = af[diff] * (model.linear_array[diff] + Jm[np.ix_(diff, agree)] @ af[agree])
    # energy change from taking b's values (= flipped a) on each component
    delta = -2.0 * np.bincount(comp, weights=local, minlength=ncomp)
    take_b = diff[delta[comp] < 0.0]
    out = a.copy()
    out[take_b] = b[take_b]
    return out


def _as_sample(model: IsingModel, spins: np.ndarray) -> Sample:
    spins = np.asarray(spins)
    return Sample(dict(zip(model.variables, spins.tolist())),
                  float(model.energies(spins[None, :])[0]))


def mqc_pair(model: IsingModel, a, b, policy: MqcPolicy | None = None) -> Sample:
    """Recombine two samples; the result is never worse than either parent.

    >>> m = IsingModel({}, {(1, 2): -1.0, (3, 4): -1.0})
    >>> mqc_pair(m, {1: 1, 2: 1, 3: -1, 4: 1}, {1: -1, 2: 1, 3: 1, 4: 1}).energy
    -2.0
    """
    return _as_sample(model, _pair_vec(model, model.spin_vector(a), model.spin_vector(b)))


def mqc_reduce(model: IsingModel, samples: SampleSet, policy: MqcPolicy | None = None) -> Sample:
    """Fold :func:`mqc_pair` over ``samples`` in order.

    The result's energy is at most the lowest energy in ``samples``.
    """
    if samples is None or len(samples) == 0:
        raise ValueError("cannot reduce an empty sample set")
    if tuple(sorted(samples.labels)) != model.variables:
        raise ValueError("sample set labels do not match the model's variables")
    spins = samples.spins
    if samples.labels != model.variables:
        spins = samples.restrict(model.variables).spins
    current = spins[0].copy()
    for row in spins[1:]:
        current = _pair_vec(model, current, row)
    return _as_sample(model, current)


def _sqc_vec(model: IsingModel, z: np.ndarray, flips: list | None = None) -> np.ndarray:
    Jm = model.coupling_matrix
    z = z.astype(float)
    field = model.linear_array + Jm @ z
    while z.size:
        gain = -2.0 * z * field
        k = int(np.argmin(gain))
        if gain[k] >= -SQC_MIN_GAIN:
            break
        z[k] = -z[k]
        if flips is not None:
            flips.append(k)
        field += 2.0 * z[k] * Jm[:, k]
    return z.astype(np.int8)


def sqc(model: IsingModel, z) -> Sample:
    """Steepest-descent single-spin local search.

    Repeatedly flips the spin whose flip lowers the energy the most (smallest
    label on ties) until no flip helps.
    """
    return _as_sample(model, _sqc_vec(model, model.spin_vector(z)))

r"""Sparse Ising and QUBO models.

An Ising model over spins :math:`z_i \in \{-1,+1\}` has energy

.. math::

    E(z) = \sum_i h_i z_i + \sum_{i<j} J_{ij} z_i z_j + c

and the equivalent QUBO over :math:`x_i \in \{0,1\}` (with :math:`z = 2x - 1`)
has energy :math:`\sum_{i \le j} x_i Q_{ij} x_j` plus a constant offset.

Variables are identified by integer labels, not positions. Removing a
variable (see :func:`qaga.solver.contract`) never renumbers the others.
Zero coefficients are never stored.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Literal, Mapping

import numpy as np

__all__ = [
    "DomainMismatchError",
    "IsingModel",
    "QuboModel",
    "Gauge",
    "ProblemSpec",
    "ising_energy",
    "qubo_energy",
    "ising_to_qubo",
    "qubo_to_ising",
    "apply_gauge",
    "ungauge_sample",
    "normalize",
    "random_model",
    "connected_components",
]

Distribution = Literal["binary", "uniform", "normal"]
DISTRIBUTIONS: tuple[str, ...] = ("binary", "uniform", "normal")


class DomainMismatchError(ValueError):
    """An assignment does not match the variable set of a model."""


def _pair(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise ValueError(f"self-coupler ({i}, {i}) is not allowed")
    return (i, j) if i < j else (j, i)


def _check_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Immutable sparse Ising Hamiltonian.

    Args:
        h: Linear biases keyed by variable label. A zero entry still
            declares the variable.
        J: Couplers keyed by label pairs. Either orientation is accepted on
            input; keys are stored as ``(i, j)`` with ``i < j`` and repeated
            pairs are summed.
        variables: Extra labels to declare (for variables with no nonzero
            coefficient).
        offset: Constant energy term.

    Examples:
        >>> m = IsingModel({1: 1.0, 2: -1.0}, {(1, 2): -1.0})
        >>> m.energy({1: 1, 2: -1})
        3.0
    """

    h: Mapping[int, float] = field(default_factory=dict)
    J: Mapping[tuple[int, int], float] = field(default_factory=dict)
    variables: Iterable[int] = ()
    offset: float = 0.0

    def __post_init__(self):
        labels = {int(v) for v in self.variables}
        h: dict[int, float] = {}
        for v, bias in self.h.items():
            v = int(v)
            labels.add(v)
            bias = _check_finite(bias, f"h[{v}]")
            if bias != 0.0:
                h[v] = bias
        J: dict[tuple[int, int], float] = {}
        for (i, j), coupler in self.J.items():
            key = _pair(int(i), int(j))
            labels.update(key)
            J[key] = J.get(key, 0.0) + _check_finite(coupler, f"J[{i},{j}]")
        J = {k: J[k] for k in sorted(J) if J[k] != 0.0}
        object.__setattr__(self, "h", MappingProxyType({v: h[v] for v in sorted(h)}))
        object.__setattr__(self, "J", MappingProxyType(J))
        object.__setattr__(self, "variables", tuple(sorted(labels)))
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_couplers(self) -> int:
        return len(self.J)

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (self.variables == other.variables and dict(self.h) == dict(other.h)
                and dict(self.J) == dict(other.J) and self.offset == other.offset)

    def __hash__(self):
        return hash((self.variables, tuple(self.h.items()), tuple(self.J.items()), self.offset))

    def __reduce__(self):
        return (IsingModel, (dict(self.h), dict(self.J), self.variables, self.offset))

    def __repr__(self):
        return (f"IsingModel(num_vars={self.num_vars}, num_couplers={self.num_couplers}, "
                f"offset={self.offset!r})")

    @cached_property
    def adjacency(self) -> Mapping[int, Mapping[int, float]]:
        """Neighbor map ``label -> {neighbor: coupler}``."""
        adj: dict[int, dict[int, float]] = {v: {} for v in self.variables}
        for (i, j), c in self.J.items():
            adj[i][j] = c
            adj[j][i] = c
        return MappingProxyType(adj)

    @cached_property
    def index(self) -> Mapping[int, int]:
        """Position of each label in :attr:`variables`."""
        return MappingProxyType({v: k for k, v in enumerate(self.variables)})

    @cached_property
    def linear_array(self) -> np.ndarray:
        out = np.zeros(self.num_vars)
        for v, bias in self.h.items():
            out[self.index[v]] = bias
        out.flags.writeable = False
        return out

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coupler endpoints (as positions) and weights."""
        idx = self.index
        rows = np.fromiter((idx[i] for i, _ in self.J), dtype=np.intp, count=len(self.J))
        cols = np.fromiter((idx[j] for _, j in self.J), dtype=np.intp, count=len(self.J))
        w = np.fromiter(self.J.values(), dtype=float, count=len(self.J))
        for a in (rows, cols, w):
            a.flags.writeable = False
        return rows, cols, w

    @cached_property
    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric coupling matrix with zero diagonal."""
        n = self.num_vars
        out = np.zeros((n, n))
        rows, cols, w = self.edge_arrays
        out[rows, cols] = w
        out[cols, rows] = w
        out.flags.writeable = False
        return out

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric adjacency in CSR form: ``(indptr, indices, data)``."""
        n = self.num_vars
        rows, cols, w = self.edge_arrays
        r = np.concatenate([rows, cols])
        c = np.concatenate([cols, rows])
        d = np.concatenate([w, w])
        order = np.lexsort((c, r))
        r, c, d = r[order], c[order], d[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, r + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, c.astype(np.int64), d

    def energy(self, z) -> float:
        return ising_energy(self, z)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Vectorized energies of the rows of ``spins`` (columns in label order)."""
        spins = np.asarray(spins, dtype=float)
        if spins.ndim != 2 or spins.shape[1] != self.num_vars:
            raise DomainMismatchError(
                f"expected spin matrix with {self.num_vars} columns, got shape {spins.shape}")
        rows, cols, w = self.edge_arrays
        e = spins @ self.linear_array
        if len(w):
            e = e + (spins[:, rows] * spins[:, cols]) @ w
        return e + self.offset

    def spin_vector(self, z) -> np.ndarray:
        """Assignment as an int8 vector in label order, checking the domain."""
        assignment = getattr(z, "assignment", z)
        _check_domain(self.variables, assignment)
        return np.array([assignment[v] for v in self.variables], dtype=np.int8)


def _check_domain(variables: tuple[int, ...], assignment: Mapping[int, int],
                  values: tuple[int, int] = (-1, 1)) -> None:
    if len(assignment) != len(variables) or any(v not in assignment for v in variables):
        missing = sorted(set(variables) - set(assignment))
        extra = sorted(set(assignment) - set(variables))
        raise DomainMismatchError(f"assignment mismatch: missing={missing} extra={extra}")
    for v in variables:
        if assignment[v] not in values:
            raise DomainMismatchError(f"variable {v} has value {assignment[v]!r}, expected one of {values}")


def ising_energy(model: IsingModel, z) -> float:
    """Energy of a spin assignment (a mapping or a :class:`~qaga.samples.Sample`).

    Raises:
        DomainMismatchError: ``z`` does not cover exactly the model's variables
            or holds a value other than -1/+1.
    """
    assignment = getattr(z, "assignment", z)
    _check_domain(model.variables, assignment)
    energy = 0.0
    for v, bias in model.h.items():
        energy += bias * assignment[v]
    for (i, j), c in model.J.items():
        energy += c * assignment[i] * assignment[j]
    return energy + model.offset


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Immutable sparse QUBO; diagonal entries ``Q[(i, i)]`` are linear terms.

    ``offset`` is the constant that makes ``qubo_energy(x) + offset`` equal the
    Ising energy of ``z = 2x - 1``. :func:`qubo_energy` does not add it.
    """

    Q: Mapping[tuple[int, int], float] = field(default_factory=dict)
    variables: Iterable[int] = ()
    offset: float = 0.0

    def __post_init__(self):
        labels = {int(v) for v in self.variables}
        Q: dict[tuple[int, int], float] = {}
        for (i, j), value in self.Q.items():
            i, j = int(i), int(j)
            key = (i, j) if i <= j else (j, i)
            labels.update(key)
            Q[key] = Q.get(key, 0.0) + _check_finite(value, f"Q[{i},{j}]")
        object.__setattr__(self, "Q", MappingProxyType({k: Q[k] for k in sorted(Q) if Q[k] != 0.0}))
        object.__setattr__(self, "variables", tuple(sorted(labels)))
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (self.variables == other.variables and dict(self.Q) == dict(other.Q)
                and self.offset == other.offset)

    def __hash__(self):
        return hash((self.variables, tuple(self.Q.items()), self.offset))

    def __reduce__(self):
        return (QuboModel, (dict(self.Q), self.variables, self.offset))

    def __repr__(self):
        return f"QuboModel(num_vars={self.num_vars}, nnz={len(self.Q)}, offset={self.offset!r})"


def qubo_energy(qubo: QuboModel, x: Mapping[int, int]) -> float:
    """``sum_{i<=j} x_i Q_ij x_j`` for binary ``x``; the offset is not included."""
    _check_domain(qubo.variables, x, values=(0, 1))
    return sum(value * x[i] * x[j] for (i, j), value in qubo.Q.items())


def ising_to_qubo(model: IsingModel) -> QuboModel:
    """Rewrite an Ising model over ``x = (z + 1) / 2``."""
    Q: dict[tuple[int, int], float] = {}
    for v, bias in model.h.items():
        Q[(v, v)] = 2.0 * bias
    offset = model.offset - sum(model.h.values())
    for (i, j), c in model.J.items():
        Q[(i, j)] = 4.0 * c
        Q[(i, i)] = Q.get((i, i), 0.0) - 2.0 * c
        Q[(j, j)] = Q.get((j, j), 0.0) - 2.0 * c
        offset += c
    return QuboModel(Q, variables=model.variables, offset=offset)


def qubo_to_ising(qubo: QuboModel) -> IsingModel:
    """Inverse of :func:`ising_to_qubo`; the QUBO offset is folded into the model offset."""
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = qubo.offset
    for (i, j), value in qubo.Q.items():
        if i == j:
            h[i] = h.get(i, 0.0) + value / 2.0
            offset += value / 2.0
        else:
            J[(i, j)] = value / 4.0
            h[i] = h.get(i, 0.0) + value / 4.0
            h[j] = h.get(j, 0.0) + value / 4.0
            offset += value / 4.0
    return IsingModel(h, J, variables=qubo.variables, offset=offset)


@dataclass(frozen=True)
class Gauge:
    """Spin-reversal transform: ``g[v] = -1`` reinterprets spin up as down for ``v``."""

    g: Mapping[int, int]

    def __post_init__(self):
        g = {int(v): int(s) for v, s in self.g.items()}
        if any(s not in (-1, 1) for s in g.values()):
            raise ValueError("gauge values must be -1 or +1")
        object.__setattr__(self, "g", MappingProxyType(dict(sorted(g.items()))))

    def __hash__(self):
        return hash(tuple(self.g.items()))

    def __reduce__(self):
        return (Gauge, (dict(self.g),))

    def __eq__(self, other):
        return isinstance(other, Gauge) and dict(self.g) == dict(other.g)

    @classmethod
    def identity(cls, variables: Iterable[int]) -> Gauge:
        return cls({v: 1 for v in variables})

    @classmethod
    def random(cls, variables: Iterable[int], rng: np.random.Generator) -> Gauge:
        variables = list(variables)
        signs = rng.integers(0, 2, size=len(variables)) * 2 - 1
        return cls(dict(zip(variables, signs.tolist())))

    def _covers(self, variables: Iterable[int]) -> None:
        variables = tuple(variables)
        if len(variables) != len(self.g) or any(v not in self.g for v in variables):
            raise DomainMismatchError("gauge does not cover the model's variables")


def apply_gauge(model: IsingModel, gauge: Gauge) -> IsingModel:
    """Transformed model whose energy at ``g * z`` equals the original energy at ``z``."""
    gauge._covers(model.variables)
    g = gauge.g
    h = {v: g[v] * bias for v, bias in model.h.items()}
    J = {(i, j): g[i] * g[j] * c for (i, j), c in model.J.items()}
    return IsingModel(h, J, variables=model.variables, offset=model.offset)


def ungauge_sample(sample, gauge: Gauge):
    """Map a sample of the gauged model back to the original model.

    Accepts a mapping or a :class:`~qaga.samples.Sample` and returns the same
    kind. The energy of a ``Sample`` is preserved since the transform is
    energy-invariant.
    """
    from .samples import Sample

    assignment = getattr(sample, "assignment", sample)
    gauge._covers(assignment)
    out = {v: gauge.g[v] * s for v, s in assignment.items()}
    if isinstance(sample, Sample):
        return Sample(out, sample.energy)
    return out


def normalize(model: IsingModel) -> tuple[IsingModel, float]:
    """Scale a model so that ``|h| <= 2`` and ``|J| <= 1``.

    The scale is never below 1, so in-range models come back unchanged.

    Returns:
        The scaled model and the positive divisor that was applied.
    """
    hmax = max((abs(b) for b in model.h.values()), default=0.0)
    jmax = max((abs(c) for c in model.J.values()), default=0.0)
    scale = max(hmax / 2.0, jmax, 1.0)
    if scale == 1.0:
        return model, 1.0
    h = {v: b / scale for v, b in model.h.items()}
    J = {k: c / scale for k, c in model.J.items()}
    return IsingModel(h, J, variables=model.variables, offset=model.offset / scale), scale


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters of a random benchmark instance.

    Attributes:
        N: Number of spins, labelled ``0..N-1``.
        sparsity: Independent inclusion probability of each of the
            ``N(N-1)/2`` candidate couplers.
        distribution: ``binary`` (uniform over {-1,+1}), ``uniform``
            (U[-1,1]) or ``normal`` (standard normal).
        seed: Unsigned 64-bit seed.
    """

    N: int
    sparsity: float
    distribution: str = "normal"
    seed: int = 0

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 0.0 <= float(self.sparsity) <= 1.0:
            raise ValueError(f"sparsity must be in [0, 1], got {self.sparsity}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _draw(rng: np.random.Generator, distribution: str, size: int) -> np.ndarray:
    if distribution == "binary":
        return (rng.integers(0, 2, size=size) * 2 - 1).astype(float)
    if distribution == "uniform":
        return rng.uniform(-1.0, 1.0, size=size)
    return rng.standard_normal(size)


def random_model(spec: ProblemSpec) -> IsingModel:
    """Random Ising instance on an Erdos-Renyi coupling graph.

    Randomness comes from PCG64 streams spawned off
    ``SeedSequence(spec.seed)``: child 0 decides edges (one uniform per
    candidate pair, pairs in lexicographic order), child 1 draws the ``N``
    biases, child 2 draws the coupler values in edge order.
    """
    edge_ss, h_ss, j_ss = np.random.SeedSequence(int(spec.seed)).spawn(3)
    n = int(spec.N)
    rows, cols = np.triu_indices(n, k=1)
    keep = np.random.Generator(np.random.PCG64(edge_ss)).random(rows.size) < spec.sparsity
    rows, cols = rows[keep], cols[keep]
    h_vals = _draw(np.random.Generator(np.random.PCG64(h_ss)), spec.distribution, n)
    j_vals = _draw(np.random.Generator(np.random.PCG64(j_ss)), spec.distribution, rows.size)
    h = dict(zip(range(n), h_vals.tolist()))
    J = dict(zip(zip(rows.tolist(), cols.tolist()), j_vals.tolist()))
    return IsingModel(h, J, variables=range(n))


def connected_components(model: IsingModel, subset: Iterable[int]) -> list[set[int]]:
    """Components of the coupling graph induced on ``subset``, ordered by smallest label."""
    subset = set(subset)
    unknown = subset.difference(model.index)
    if unknown:
        raise DomainMismatchError(f"labels not in model: {sorted(unknown)}")
    adj = model.adjacency
    seen: set[int] = set()
    components = []
    for start in sorted(subset):
        if start in seen:
            continue
        seen.add(start)
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in subset and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        components.append(comp)
    return components

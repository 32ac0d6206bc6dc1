"""Samplers: anything that turns an Ising model into ``num_reads`` spin assignments.

Every sampler implements ``sample(model, num_reads, seed=None) -> SampleSet``.
The returned set has exactly ``num_reads`` rows over exactly the model's
variables, and a fixed seed gives identical output.

Seeds are unsigned 64-bit integers. Where a sampler needs several
independent streams it spawns children with :func:`spawn_seeds`, so the
seed-to-output mapping does not depend on Python or platform details.
"""

from __future__ import annotations

import json
import math
import socket
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from numba import njit

from .ising import DomainMismatchError, Gauge, IsingModel, apply_gauge
from .samples import SampleSet
from .serialization import model_to_dict, sampleset_from_dict

__all__ = [
    "Sampler",
    "SaConfig",
    "ExactSampler",
    "SimulatedAnnealingSampler",
    "GaugeAveragedSampler",
    "RemoteSampler",
    "TooManyVariablesError",
    "RemoteError",
    "RemoteTransportError",
    "RemoteTimeoutError",
    "MalformedResponseError",
    "RemoteDomainError",
    "spawn_seeds",
    "exact_sample",
    "sa_sample",
    "gauge_averaged_sample",
    "remote_sample",
]

EXACT_MAX_VARS = 24
GROUND_TOL = 1e-9


def spawn_seeds(seed: int | None, n: int) -> list[int]:
    """``n`` child seeds: ``SeedSequence(seed).spawn(n)[k].generate_state(1, uint64)[0]``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@runtime_checkable
class Sampler(Protocol):
    def sample(self, model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
        ...


def _check_reads(num_reads: int) -> int:
    num_reads = int(num_reads)
    if num_reads < 1:
        raise ValueError(f"num_reads must be >= 1, got {num_reads}")
    return num_reads


def _empty(model: IsingModel, num_reads: int) -> SampleSet:
    return SampleSet((), np.zeros((num_reads, 0), dtype=np.int8), model=model)


class TooManyVariablesError(ValueError):
    """Exhaustive enumeration was requested for too large a model."""


class ExactSampler:
    """Brute-force sampler returning reads drawn uniformly from the ground states.

    Intended as a verification oracle; refuses models with more than
    24 variables. Configurations within ``1e-9`` of the minimum count as
    ground states.
    """

    max_vars = EXACT_MAX_VARS

    def sample(self, model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
        num_reads = _check_reads(num_reads)
        n = model.num_vars
        if n > self.max_vars:
            raise TooManyVariablesError(f"exact sampling is limited to {self.max_vars} variables, got {n}")
        if n == 0:
            return _empty(model, num_reads)
        ground, _ = ground_states(model)
        picks = _rng(seed).integers(0, len(ground), size=num_reads)
        return SampleSet(model.variables, ground[picks], model=model)


def ground_states(model: IsingModel, chunk: int = 1 << 14) -> tuple[np.ndarray, float]:
    """All minimizing spin vectors (rows, in enumeration order) and the minimum energy."""
    n = model.num_vars
    bits = np.arange(n, dtype=np.int64)
    best = math.inf
    cand_idx, cand_e = [], []
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        spins = ((idx[:, None] >> bits) & 1).astype(np.int8) * 2 - 1
        e = model.energies(spins)
        best = min(best, float(e.min()))
        keep = e <= best + GROUND_TOL
        cand_idx.append(idx[keep])
        cand_e.append(e[keep])
    idx = np.concatenate(cand_idx)
    e = np.concatenate(cand_e)
    idx = idx[e <= best + GROUND_TOL]
    spins = ((idx[:, None] >> bits) & 1).astype(np.int8) * 2 - 1
    return spins, best


def exact_sample(model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
    return ExactSampler().sample(model, num_reads, seed)


@dataclass(frozen=True)
class SaConfig:
    """Simulated annealing schedule.

    ``beta`` runs geometrically from ``beta_initial`` to ``beta_final`` over
    ``num_sweeps`` sweeps, one value per sweep. The defaults were picked so
    that small instances (up to a dozen spins) are solved reliably; they are
    not derived from any hardware model.
    """

    num_sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0

    def __post_init__(self):
        if int(self.num_sweeps) < 1:
            raise ValueError(f"num_sweeps must be >= 1, got {self.num_sweeps}")
        if not 0 < self.beta_initial < self.beta_final:
            raise ValueError("need 0 < beta_initial < beta_final")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_initial, self.beta_final, int(self.num_sweeps))


@njit(cache=True)
def _anneal(h, indptr, indices, data, betas, spins, uniforms):
    n = h.shape[0]
    field = h.copy()
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            field[i] += data[k] * spins[indices[k]]
    for t in range(betas.shape[0]):
        beta = betas[t]
        for i in range(n):
            delta = -2.0 * spins[i] * field[i]
            if delta <= 0.0 or uniforms[t, i] < math.exp(-beta * delta):
                s = -spins[i]
                spins[i] = s
                for k in range(indptr[i], indptr[i + 1]):
                    field[indices[k]] += 2.0 * s * data[k]
    return spins


class SimulatedAnnealingSampler:
    """Metropolis single-spin-flip annealer.

    Each read is an independent chain with its own PCG64 stream (child ``k``
    of the call seed, see :func:`spawn_seeds`). A chain draws its initial
    spins and then one uniform per proposed flip from that stream, visiting
    spins in label order every sweep. Flips are accepted with probability
    ``min(1, exp(-beta * dE))`` and the final state is returned.
    """

    def __init__(self, config: SaConfig | None = None):
        self.config = config if config is not None else SaConfig()

    def __repr__(self):
        return f"SimulatedAnnealingSampler({self.config!r})"

    def sample(self, model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
        num_reads = _check_reads(num_reads)
        n = model.num_vars
        if n == 0:
            return _empty(model, num_reads)
        betas = self.config.betas()
        h = np.ascontiguousarray(model.linear_array, dtype=np.float64)
        indptr, indices, data = model.csr
        out = np.empty((num_reads, n), dtype=np.int8)
        for k, read_seed in enumerate(spawn_seeds(seed, num_reads)):
            rng = _rng(read_seed)
            spins = (rng.integers(0, 2, size=n) * 2 - 1).astype(np.float64)
            uniforms = rng.random((betas.size, n))
            out[k] = _anneal(h, indptr, indices, data, betas, spins, uniforms)
        return SampleSet(model.variables, out, model=model)


def sa_sample(model: IsingModel, num_reads: int, seed: int | None = None,
              config: SaConfig | None = None) -> SampleSet:
    return SimulatedAnnealingSampler(config).sample(model, num_reads, seed)


class GaugeAveragedSampler:
    """Wrap a sampler with random spin-reversal transforms.

    ``num_reads`` is split over ``num_gauges`` gauges as evenly as possible,
    with the remainder going one read each to the earliest gauges. Gauge 0 is
    the identity. Call seed children: 0 draws the gauges, ``1..k`` seed the
    inner sampler for each gauge. Every call draws fresh gauges.
    """

    def __init__(self, inner: Sampler, num_gauges: int = 10):
        if int(num_gauges) < 1:
            raise ValueError(f"num_gauges must be >= 1, got {num_gauges}")
        self.inner = inner
        self.num_gauges = int(num_gauges)

    def __repr__(self):
        return f"GaugeAveragedSampler({self.inner!r}, num_gauges={self.num_gauges})"

    def reads_per_gauge(self, num_reads: int) -> list[int]:
        base, rem = divmod(num_reads, self.num_gauges)
        return [base + (1 if g < rem else 0) for g in range(self.num_gauges)]

    def sample(self, model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
        num_reads = _check_reads(num_reads)
        if num_reads < self.num_gauges:
            raise ValueError(f"num_reads={num_reads} is smaller than num_gauges={self.num_gauges}")
        seeds = spawn_seeds(seed, self.num_gauges + 1)
        gauge_rng = _rng(seeds[0])
        gauges = [Gauge.identity(model.variables)]
        gauges += [Gauge.random(model.variables, gauge_rng) for _ in range(self.num_gauges - 1)]
        parts = []
        for gauge, reads, inner_seed in zip(gauges, self.reads_per_gauge(num_reads), seeds[1:]):
            result = self.inner.sample(apply_gauge(model, gauge), reads, inner_seed)
            g = np.array([gauge.g[v] for v in result.labels], dtype=np.int8)
            parts.append(result.spins * g)
        spins = np.concatenate(parts)
        return SampleSet(model.variables, spins, model=model)


def gauge_averaged_sample(inner: Sampler, k: int, model: IsingModel, num_reads: int,
                          seed: int | None = None) -> SampleSet:
    return GaugeAveragedSampler(inner, k).sample(model, num_reads, seed)


class RemoteError(RuntimeError):
    """Base class for remote sampling failures; ``payload`` holds the raw response, if any."""

    def __init__(self, message: str, payload: bytes | str | None = None):
        super().__init__(message)
        self.payload = payload


class RemoteTransportError(RemoteError):
    pass


class RemoteTimeoutError(RemoteError):
    pass


class MalformedResponseError(RemoteError):
    pass


class RemoteDomainError(RemoteError, DomainMismatchError):
    pass


class RemoteSampler:
    """Client for an HTTP sampling service.

    POSTs the model document plus ``num_reads`` and ``seed`` as JSON and
    expects a sample set document back. Energies in the response are ignored
    and recomputed locally.
    """

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def __repr__(self):
        return f"RemoteSampler({self.endpoint!r}, timeout={self.timeout})"

    def sample(self, model: IsingModel, num_reads: int, seed: int | None = None) -> SampleSet:
        num_reads = _check_reads(num_reads)
        body = model_to_dict(model)
        body["num_reads"] = num_reads
        body["seed"] = seed
        request = urllib.request.Request(
            self.endpoint,
            data=json.dumps(body, allow_nan=False).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = response.read()
        except urllib.error.HTTPError as exc:
            raise RemoteTransportError(f"HTTP {exc.code} from {self.endpoint}", exc.read()) from exc
        except (socket.timeout, TimeoutError) as exc:
            raise RemoteTimeoutError(f"no response from {self.endpoint} within {self.timeout}s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise RemoteTimeoutError(f"no response from {self.endpoint} within {self.timeout}s") from exc
            raise RemoteTransportError(f"cannot reach {self.endpoint}: {exc.reason}") from exc
        except OSError as exc:
            raise RemoteTransportError(f"transport failure talking to {self.endpoint}: {exc}") from exc

        try:
            doc = json.loads(payload)
        except ValueError as exc:
            raise MalformedResponseError(f"response is not JSON: {exc}", payload) from exc
        try:
            result = sampleset_from_dict(doc, model)
        except DomainMismatchError as exc:
            raise RemoteDomainError(str(exc), payload) from exc
        except ValueError as exc:
            raise MalformedResponseError(str(exc), payload) from exc
        if result.num_reads != num_reads:
            raise MalformedResponseError(
                f"asked for {num_reads} reads, got {result.num_reads}", payload)
        return result


def remote_sample(endpoint: str, model: IsingModel, num_reads: int, seed: int | None = None,
                  timeout: float = 60.0) -> SampleSet:
    return RemoteSampler(endpoint, timeout).sample(model, num_reads, seed)

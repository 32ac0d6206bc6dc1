"""Quantum-assisted greedy minimization of Ising Hamiltonians with pluggable samplers."""

from .ising import (DomainMismatchError, Gauge, IsingModel, ProblemSpec, QuboModel, apply_gauge,
                    connected_components, ising_energy, ising_to_qubo, normalize, qubo_energy,
                    qubo_to_ising, random_model, ungauge_sample)
from .postprocess import MqcPolicy, mqc_pair, mqc_reduce, sqc
from .samplers import (ExactSampler, GaugeAveragedSampler, RemoteSampler, SaConfig, Sampler,
                       SimulatedAnnealingSampler, exact_sample, gauge_averaged_sample,
                       remote_sample, sa_sample)
from .samples import Sample, SampleSet
from .solver import (QagaConfig, QagaResult, StageRecord, contract, estimate_uncertainty,
                     majority_sign, qaga_solve, select_fixable, stage_trace)

__version__ = "0.1.0"

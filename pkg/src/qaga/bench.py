"""Benchmark experiments on random Ising instances.

Experiment A compares QAGA against two baselines on every generated problem:

* QA: the best read of a gauge-averaged sampler,
* MQC: multi-qubit correction folded over those same reads,

and tallies QAGA's win/tie/loss counts per (distribution, sparsity) cell.
Experiment B records how many stages QAGA needs for a grid of thresholds
and sparsities.

Seeding: the instance for problem ``p`` of a cell is generated from
``SeedSequence(master, spawn_key=(dist_code, round(s * 1e6), p))`` reduced to
one uint64, where ``dist_code`` indexes ``("binary", "uniform", "normal")``.
That problem seed then yields two method seeds via
:func:`qaga.samplers.spawn_seeds`: child 0 drives the QA reads, child 1
drives QAGA. Experiment B reuses the same instances and QAGA seed for every
threshold.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .ising import DISTRIBUTIONS, ProblemSpec, random_model
from .postprocess import mqc_reduce
from .samplers import (ExactSampler, GaugeAveragedSampler, RemoteSampler, SaConfig,
                       SimulatedAnnealingSampler, spawn_seeds)
from .solver import QagaConfig, qaga_solve

__all__ = [
    "ExperimentAConfig",
    "ExperimentBConfig",
    "ComparisonRecord",
    "StageCountRecord",
    "ExperimentAReport",
    "ExperimentBReport",
    "problem_seed",
    "verdict",
    "build_sampler",
    "run_experiment_a",
    "run_experiment_b",
    "write_records_csv",
    "read_records_csv",
    "write_records_json",
    "read_records_json",
    "persist_results",
]

TIE_TOL = 1e-9
SAMPLERS = ("sa", "exact", "remote")
OUTCOMES = ("win", "tie", "loss")


def problem_seed(master: int, distribution: str, sparsity: float, index: int) -> int:
    key = (DISTRIBUTIONS.index(distribution), int(round(sparsity * 1e6)), int(index))
    ss = np.random.SeedSequence(int(master), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def verdict(qaga_energy: float, other_energy: float, tol: float = TIE_TOL) -> str:
    """Outcome for QAGA against a baseline: lower energy wins, within ``tol`` ties."""
    if qaga_energy < other_energy - tol:
        return "win"
    if qaga_energy > other_energy + tol:
        return "loss"
    return "tie"


@dataclass
class _SamplerSettings:
    sampler: str = "sa"
    sa: SaConfig = field(default_factory=SaConfig)
    endpoint: str | None = None
    timeout: float = 60.0
    num_gauges: int = 10

    def _validate_sampler(self):
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.sampler == "remote" and not self.endpoint:
            raise ValueError("the remote sampler needs an endpoint")
        if int(self.num_gauges) < 1:
            raise ValueError("num_gauges must be >= 1")


def build_sampler(settings: _SamplerSettings) -> GaugeAveragedSampler:
    if settings.sampler == "sa":
        inner = SimulatedAnnealingSampler(settings.sa)
    elif settings.sampler == "exact":
        inner = ExactSampler()
    else:
        inner = RemoteSampler(settings.endpoint, settings.timeout)
    return GaugeAveragedSampler(inner, settings.num_gauges)


@dataclass
class ExperimentAConfig(_SamplerSettings):
    num_problems: int = 100
    N: int = 50
    sparsities: tuple[float, ...] = (0.05, 0.25, 0.5, 0.75, 1.0)
    distributions: tuple[str, ...] = DISTRIBUTIONS
    num_reads: int = 1000
    theta: float = 0.0
    max_stages: int = 64
    final_local_search: bool = True
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self._validate_sampler()
        self.sparsities = tuple(float(s) for s in self.sparsities)
        self.distributions = tuple(self.distributions)
        if not self.sparsities or not self.distributions:
            raise ValueError("sparsities and distributions must be nonempty")
        for d in self.distributions:
            if d not in DISTRIBUTIONS:
                raise ValueError(f"unknown distribution {d!r}")
        for s in self.sparsities:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"sparsity {s} outside [0, 1]")
        if int(self.num_problems) < 1 or int(self.N) < 1:
            raise ValueError("num_problems and N must be positive")
        if int(self.num_reads) < int(self.num_gauges):
            raise ValueError("num_reads must be at least num_gauges")
        QagaConfig(theta=self.theta, num_reads=self.num_reads, max_stages=self.max_stages, sampler=None)

    def describe(self) -> dict:
        out = asdict(self)
        out.pop("jobs")
        return out


@dataclass
class ExperimentBConfig(_SamplerSettings):
    thetas: tuple[float, ...] = (0.25, 0.15, 0.05, 0.0)
    num_problems: int = 100
    N: int = 50
    sparsities: tuple[float, ...] = (0.05, 0.25, 0.5, 0.75, 1.0)
    distribution: str = "normal"
    num_reads: int = 1000
    max_stages: int = 64
    final_local_search: bool = True
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self._validate_sampler()
        self.thetas = tuple(float(t) for t in self.thetas)
        self.sparsities = tuple(float(s) for s in self.sparsities)
        if not self.thetas or not self.sparsities:
            raise ValueError("thetas and sparsities must be nonempty")
        for t in self.thetas:
            QagaConfig(theta=t, num_reads=self.num_reads, max_stages=self.max_stages, sampler=None)
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if int(self.num_reads) < int(self.num_gauges):
            raise ValueError("num_reads must be at least num_gauges")

    def describe(self) -> dict:
        out = asdict(self)
        out.pop("jobs")
        return out


@dataclass
class ComparisonRecord:
    distribution: str
    sparsity: float
    problem: int
    seed: int
    qa_energy: float | None = None
    mqc_energy: float | None = None
    qaga_energy: float | None = None
    qaga_vs_qa: str | None = None
    qaga_vs_mqc: str | None = None
    stages: int | None = None
    used_mqc_fallback: bool | None = None
    used_incumbent: bool | None = None
    error: str | None = None
    wall_time: float | None = None


@dataclass
class StageCountRecord:
    theta: float
    sparsity: float
    problem: int
    seed: int
    stages: int | None = None
    energy: float | None = None
    used_mqc_fallback: bool | None = None
    error: str | None = None
    wall_time: float | None = None


def _solve_a(config: ExperimentAConfig, distribution: str, sparsity: float, index: int) -> ComparisonRecord:
    pseed = problem_seed(config.seed, distribution, sparsity, index)
    record = ComparisonRecord(distribution, sparsity, index, pseed)
    start = time.perf_counter()
    try:
        model = random_model(ProblemSpec(config.N, sparsity, distribution, pseed))
        qa_seed, qaga_seed = spawn_seeds(pseed, 2)
        sampler = build_sampler(config)
        reads = sampler.sample(model, config.num_reads, qa_seed)
        record.qa_energy = float(reads.energies.min())
        record.mqc_energy = mqc_reduce(model, reads).energy
        qconf = QagaConfig(config.theta, config.num_reads, config.max_stages, sampler,
                           config.final_local_search)
        result = qaga_solve(model, qconf, qaga_seed)
        record.qaga_energy = result.energy
        record.stages = result.num_stages
        record.used_mqc_fallback = result.used_mqc_fallback
        record.used_incumbent = result.used_incumbent
        record.qaga_vs_qa = verdict(result.energy, record.qa_energy)
        record.qaga_vs_mqc = verdict(result.energy, record.mqc_energy)
    except Exception as exc:  # recorded per problem; the batch continues
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - start
    return record


def _solve_b(config: ExperimentBConfig, theta: float, sparsity: float, index: int) -> StageCountRecord:
    pseed = problem_seed(config.seed, config.distribution, sparsity, index)
    record = StageCountRecord(theta, sparsity, index, pseed)
    start = time.perf_counter()
    try:
        model = random_model(ProblemSpec(config.N, sparsity, config.distribution, pseed))
        _, qaga_seed = spawn_seeds(pseed, 2)
        qconf = QagaConfig(theta, config.num_reads, config.max_stages, build_sampler(config),
                           config.final_local_search)
        result = qaga_solve(model, qconf, qaga_seed)
        record.stages = result.num_stages
        record.energy = result.energy
        record.used_mqc_fallback = result.used_mqc_fallback
    except Exception as exc:
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - start
    return record


def _run(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order regardless of completion order
        return list(pool.map(fn, *zip(*tasks)))


@dataclass
class ExperimentAReport:
    config: ExperimentAConfig
    records: list[ComparisonRecord]

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    def counts(self) -> list[dict]:
        """Win/tie/loss counts for every (distribution, sparsity, baseline) cell."""
        cells = []
        for d in self.config.distributions:
            for s in self.config.sparsities:
                cell = [r for r in self.records if r.distribution == d and r.sparsity == s and r.error is None]
                for name, attr in (("QA", "qaga_vs_qa"), ("MQC", "qaga_vs_mqc")):
                    tally = {o: sum(getattr(r, attr) == o for r in cell) for o in OUTCOMES}
                    cells.append({"distribution": d, "sparsity": s, "baseline": name, **tally})
        return cells

    def summary(self) -> dict:
        return {"experiment": "A", "config": self.config.describe(), "cells": self.counts(),
                "num_records": len(self.records), "failures": self.failures}

    def format_table(self) -> str:
        lines = [f"{'dist':<8} {'s':>5} {'baseline':<8} {'win':>5} {'tie':>5} {'loss':>5}"]
        for c in self.counts():
            lines.append(f"{c['distribution']:<8} {c['sparsity']:>5.2f} {c['baseline']:<8} "
                         f"{c['win']:>5} {c['tie']:>5} {c['loss']:>5}")
        return "\n".join(lines)


@dataclass
class ExperimentBReport:
    config: ExperimentBConfig
    records: list[StageCountRecord]

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    def table(self) -> list[list[float]]:
        """Mean stage count; rows follow ``thetas``, columns ``sparsities``. NaN if a cell has no result."""
        rows = []
        for t in self.config.thetas:
            row = []
            for s in self.config.sparsities:
                vals = [r.stages for r in self.records
                        if r.theta == t and r.sparsity == s and r.error is None]
                row.append(float(np.mean(vals)) if vals else math.nan)
            rows.append(row)
        return rows

    def summary(self) -> dict:
        table = self.table()
        return {"experiment": "B", "config": self.config.describe(),
                "thetas": list(self.config.thetas), "sparsities": list(self.config.sparsities),
                "mean_stages": [[None if math.isnan(v) else v for v in row] for row in table],
                "num_records": len(self.records), "failures": self.failures}

    def format_table(self) -> str:
        head = "theta  | " + " ".join(f"{s:>6.2f}" for s in self.config.sparsities)
        lines = [head, "-" * len(head)]
        for t, row in zip(self.config.thetas, self.table()):
            lines.append(f"{t:<6.2f} | " + " ".join(f"{v:>6.2f}" for v in row))
        return "\n".join(lines)


def run_experiment_a(config: ExperimentAConfig) -> ExperimentAReport:
    tasks = [(config, d, s, p) for d in config.distributions for s in config.sparsities
             for p in range(config.num_problems)]
    return ExperimentAReport(config, _run(_solve_a, tasks, config.jobs))


def run_experiment_b(config: ExperimentBConfig) -> ExperimentBReport:
    tasks = [(config, t, s, p) for t in config.thetas for s in config.sparsities
             for p in range(config.num_problems)]
    return ExperimentBReport(config, _run(_solve_b, tasks, config.jobs))


# --- persistence ----------------------------------------------------------

def _record_type(records):
    return type(records[0]) if records else ComparisonRecord


def _columns(cls, timings: bool) -> list[str]:
    names = [f.name for f in fields(cls)]
    return names if timings else [n for n in names if n != "wall_time"]


def _to_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _from_cell(text: str, annotation: str):
    if text == "":
        return None
    if "bool" in annotation:
        return text == "True"
    if "float" in annotation:
        return float(text)
    if "int" in annotation:
        return int(text)
    return text


def write_records_csv(records, path, timings: bool = False, record_type=None) -> None:
    """One record per row. ``wall_time`` is only written with ``timings=True`` so that
    output stays byte-identical across runs."""
    cls = record_type or _record_type(records)
    cols = _columns(cls, timings)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        writer.writerow([_to_cell(getattr(r, c)) for c in cols])
    _write(path, buf.getvalue())


def read_records_csv(path, record_type=ComparisonRecord) -> list:
    types = {f.name: str(f.type) for f in fields(record_type)}
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [record_type(**{k: _from_cell(v, types[k]) for k, v in row.items()}) for row in rows]


def write_records_json(records, path, timings: bool = False) -> None:
    out = []
    for r in records:
        d = asdict(r)
        if not timings:
            d.pop("wall_time")
        out.append(d)
    _write(path, json.dumps(out, indent=1, allow_nan=False) + "\n")


def read_records_json(path, record_type=ComparisonRecord) -> list:
    return [record_type(**d) for d in json.loads(Path(path).read_text())]


def _write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def persist_results(report, out_dir, fmt: str = "csv", timings: bool = False) -> list[Path]:
    """Write an experiment report to ``out_dir``.

    Files: ``records.csv`` or ``records.json`` (per ``fmt``), ``summary.json``,
    and a plot-ready long table: ``winloss.csv`` (distribution, sparsity,
    baseline, outcome, count) for experiment A or ``stages.csv`` (theta,
    sparsity, mean_stages) for experiment B.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    records_path = out_dir / f"records.{fmt}"
    record_type = ComparisonRecord if isinstance(report, ExperimentAReport) else StageCountRecord
    if fmt == "csv":
        write_records_csv(report.records, records_path, timings, record_type)
    else:
        write_records_json(report.records, records_path, timings)
    written.append(records_path)

    summary_path = out_dir / "summary.json"
    _write(summary_path, json.dumps(report.summary(), indent=1, allow_nan=False) + "\n")
    written.append(summary_path)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(report, ExperimentAReport):
        plot_path = out_dir / "winloss.csv"
        writer.writerow(["distribution", "sparsity", "baseline", "outcome", "count"])
        for c in report.counts():
            for o in OUTCOMES:
                writer.writerow([c["distribution"], repr(c["sparsity"]), c["baseline"], o, c[o]])
    else:
        plot_path = out_dir / "stages.csv"
        writer.writerow(["theta", "sparsity", "mean_stages"])
        for t, row in zip(report.config.thetas, report.table()):
            for s, v in zip(report.config.sparsities, row):
                writer.writerow([repr(t), repr(s), "" if math.isnan(v) else repr(v)])
    _write(plot_path, buf.getvalue())
    written.append(plot_path)
    return written

"""Command-line interface: ``qaga generate|solve|expa|expb``.

Exit codes: 0 success, 1 some problems failed (recorded in the output),
2 usage, parse or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .bench import (ExperimentAConfig, ExperimentBConfig, build_sampler, persist_results,
                    run_experiment_a, run_experiment_b)
from .ising import DISTRIBUTIONS, ProblemSpec, random_model
from .postprocess import mqc_reduce, sqc
from .samplers import ExactSampler, SaConfig, SimulatedAnnealingSampler, TooManyVariablesError
from .serialization import dumps_model, loads_model
from .solver import QagaConfig, qaga_solve, stage_trace

METHODS = ("qa", "mqc", "qaga", "sa", "exact", "sqc-polish")


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output file (generate, solve) or directory (expa, expb)")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def _add_sampler(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampler")
    g.add_argument("--sampler", choices=("sa", "exact", "remote"), default="sa")
    g.add_argument("--reads", type=int, default=1000)
    g.add_argument("--gauges", type=int, default=10, help="spin-reversal transforms per call")
    g.add_argument("--sweeps", type=int, default=1000)
    g.add_argument("--beta-initial", type=float, default=0.1)
    g.add_argument("--beta-final", type=float, default=10.0)
    g.add_argument("--endpoint", help="URL of a remote sampling service")
    g.add_argument("--timeout", type=float, default=60.0)


def _add_qaga(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("qaga")
    g.add_argument("--theta", type=float, default=0.0)
    g.add_argument("--max-stages", type=int, default=64)
    g.add_argument("--no-local-search", action="store_true", help="skip the final SQC polish")


def _add_problem(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("random problem")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--sparsity", type=float, default=1.0)
    g.add_argument("--distribution", choices=DISTRIBUTIONS, default="normal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random Ising model")
    _add_common(p)
    _add_problem(p)

    p = sub.add_parser("solve", help="minimize one model")
    _add_common(p)
    _add_problem(p)
    _add_sampler(p)
    _add_qaga(p)
    p.add_argument("--model", help="model JSON file (otherwise a random model is generated)")
    p.add_argument("--method", choices=METHODS, default="qaga")

    p = sub.add_parser("expa", help="QAGA vs QA vs MQC win/tie/loss")
    _add_common(p)
    _add_sampler(p)
    _add_qaga(p)
    p.add_argument("--problems", type=int, default=100)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--sparsities", type=_floats, default=(0.05, 0.25, 0.5, 0.75, 1.0))
    p.add_argument("--distributions", type=_names, default=DISTRIBUTIONS)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="include wall times (breaks byte-identity)")

    p = sub.add_parser("expb", help="mean QAGA stage count per threshold and sparsity")
    _add_common(p)
    _add_sampler(p)
    p.add_argument("--max-stages", type=int, default=64)
    p.add_argument("--no-local-search", action="store_true")
    p.add_argument("--thetas", type=_floats, default=(0.25, 0.15, 0.05, 0.0))
    p.add_argument("--problems", type=int, default=100)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--sparsities", type=_floats, default=(0.05, 0.25, 0.5, 0.75, 1.0))
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="normal")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timings", action="store_true")
    return parser


def _sampler_kwargs(args) -> dict:
    return dict(
        sampler=args.sampler,
        sa=SaConfig(args.sweeps, args.beta_initial, args.beta_final),
        endpoint=args.endpoint,
        timeout=args.timeout,
        num_gauges=args.gauges,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> int:
    model = random_model(ProblemSpec(args.n, args.sparsity, args.distribution, args.seed))
    if args.format == "json":
        text = dumps_model(model, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "value"])
        for v in model.variables:
            w.writerow([v, v, repr(model.h.get(v, 0.0))])
        for (i, j), c in model.J.items():
            w.writerow([i, j, repr(c)])
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def _load(args):
    if args.model:
        try:
            text = Path(args.model).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.model}: {exc.strerror}") from exc
        try:
            return loads_model(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.model}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        except ValueError as exc:
            raise UsageError(f"{args.model}: {exc}") from exc
    return random_model(ProblemSpec(args.n, args.sparsity, args.distribution, args.seed))


def _cmd_solve(args) -> int:
    try:
        sa = SaConfig(args.sweeps, args.beta_initial, args.beta_final)
        qconf = None
        if args.method == "qaga":
            qconf = QagaConfig(args.theta, args.reads, args.max_stages, None, not args.no_local_search)
        if args.method in ("qa", "mqc", "qaga"):
            settings = ExperimentAConfig(num_problems=1, num_reads=args.reads, **_sampler_kwargs(args))
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    model = _load(args)

    trace = None
    if args.method == "qaga":
        qconf.sampler = build_sampler(settings)
        result = qaga_solve(model, qconf, args.seed)
        solution, trace = result.solution, stage_trace(result)
    elif args.method in ("qa", "mqc"):
        reads = build_sampler(settings).sample(model, args.reads, args.seed)
        solution = reads.first if args.method == "qa" else mqc_reduce(model, reads)
    elif args.method == "exact":
        if model.num_vars > ExactSampler.max_vars:
            raise UsageError(f"exact method is limited to {ExactSampler.max_vars} variables, model has {model.num_vars}")
        solution = ExactSampler().sample(model, 1, args.seed).first
    else:
        reads = SimulatedAnnealingSampler(sa).sample(model, args.reads, args.seed)
        solution = reads.first if args.method == "sa" else sqc(model, reads.first)

    energy = model.energy(solution)
    report = {
        "method": args.method,
        "num_vars": model.num_vars,
        "energy": energy,
        "solution": {str(v): s for v, s in solution.assignment.items()},
        "stages": trace,
    }
    print(f"method: {args.method}")
    print(f"energy: {energy!r}")
    print("solution: " + " ".join(f"{v}:{s:+d}" for v, s in solution.assignment.items()))
    if trace is not None:
        for st in trace["stages"]:
            print(f"stage {st['t']}: vars={st['vars']} couplers={st['couplers']} "
                  f"fixed={len(st['fixed'])} best_energy={st['best_energy']!r}")
        print(f"fallback={trace['used_mqc_fallback']} incumbent={trace['used_incumbent']}")
    if args.out:
        if args.format == "json":
            Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["label", "spin"])
            w.writerows(solution.assignment.items())
            Path(args.out).write_text(buf.getvalue())
    return 0


def _cmd_expa(args) -> int:
    try:
        config = ExperimentAConfig(
            num_problems=args.problems, N=args.n, sparsities=args.sparsities,
            distributions=args.distributions, num_reads=args.reads, theta=args.theta,
            max_stages=args.max_stages, final_local_search=not args.no_local_search,
            seed=args.seed, jobs=args.jobs, **_sampler_kwargs(args))
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    report = run_experiment_a(config)
    print(report.format_table())
    return _finish(report, args)


def _cmd_expb(args) -> int:
    try:
        config = ExperimentBConfig(
            thetas=args.thetas, num_problems=args.problems, N=args.n, sparsities=args.sparsities,
            distribution=args.distribution, num_reads=args.reads, max_stages=args.max_stages,
            final_local_search=not args.no_local_search, seed=args.seed, jobs=args.jobs,
            **_sampler_kwargs(args))
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    report = run_experiment_b(config)
    print(report.format_table())
    return _finish(report, args)


def _finish(report, args) -> int:
    if args.out:
        for path in persist_results(report, args.out, args.format, args.timings):
            print(f"wrote {path}")
    if report.failures:
        for r in report.records:
            if r.error:
                print(f"problem {r.problem} (seed {r.seed}) failed: {r.error}", file=sys.stderr)
        print(f"{report.failures} of {len(report.records)} problems failed", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"generate": _cmd_generate, "solve": _cmd_solve, "expa": _cmd_expa, "expb": _cmd_expb}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TooManyVariablesError) as exc:
        print(f"qaga: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"qaga: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qaga: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

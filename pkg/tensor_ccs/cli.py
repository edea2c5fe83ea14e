# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Command-line interface: ``tensor-ccs <command> [options]``."""

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import pydantic

from tensor_ccs._version import VERSION
from tensor_ccs.exceptions import EXIT_OK, ParameterError, TensorCcsError, exit_code_for
from tensor_ccs.experiments import (
    CONVERGENCE_HEADER,
    PHASE_HEADER,
    REPORT_HEADER,
    CompletionJob,
    gen_lowrank,
    run_complete,
    run_convergence,
    run_phase_transition,
    slice_count,
    write_csv,
)
from tensor_ccs.io import read_factors, read_tensor, write_plan, write_tensor
from tensor_ccs.metrics import psnr, rel_error, ssim_avg
from tensor_ccs.models import BoundInputs, ExperimentConfig
from tensor_ccs.sampling import capture, make_ccs_plan, overall_rate
from tensor_ccs.tcur import cur_reconstruct
from tensor_ccs.theory import bound_inputs_for, bounds

logger = logging.getLogger(__name__)

Row = Tuple[str, object]


def _emit(rows: List[Row], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", "value"])
    for name, value in rows:
        writer.writerow([name, repr(value) if isinstance(value, float) else value])


def _shape(args: argparse.Namespace) -> Tuple[int, int, int]:
    n1, n2, n3 = args.shape
    return n1, n2, n3


def cmd_gen(args: argparse.Namespace, out: TextIO) -> None:
    n1, n2, n3 = _shape(args)
    t = gen_lowrank(n1, n2, n3, args.rank, seed=args.seed)
    write_tensor(args.out, t)
    logger.info("wrote rank-%d tensor %s to %s", args.rank, t.dims, args.out)


def cmd_sample(args: argparse.Namespace, out: TextIO) -> None:
    truth = read_tensor(args.tensor) if args.tensor else None
    if truth is None and args.shape is None:
        raise ParameterError("sample needs --shape or --tensor")
    dims = truth.dims if truth is not None else _shape(args)
    plan = make_ccs_plan(
        dims,
        args.size_i or slice_count(args.delta, dims[0]),
        args.size_j or slice_count(args.delta, dims[1]),
        args.prob_r,
        args.prob_c,
        replacement=args.replacement,
        seed=args.seed,
    )
    if truth is not None:
        plan = capture(truth, plan)
    write_plan(args.out, plan)
    _emit([("observed", len(plan.union())), ("alpha", overall_rate(plan))], out)


def cmd_solve(args: argparse.Namespace, out: TextIO) -> None:
    job = CompletionJob(
        tensor=args.tensor,
        out=args.out,
        r=args.rank,
        solver=args.solver,
        plan=args.plan,
        delta=args.delta,
        p_R=args.prob_r,
        p_C=args.prob_c,
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        step_rule=args.step_rule,
        dense=args.dense,
        max_dense_entries=args.max_dense_entries,
        report=args.report,
        trace=args.trace,
        require_convergence=args.require_convergence,
    )
    report = run_complete(job)
    if args.report is None:
        write_csv(None, REPORT_HEADER, [report], out)


def _experiment_config(args: argparse.Namespace, kind: str) -> ExperimentConfig:
    fields = {
        "kind": kind,
        "dims": _shape(args),
        "ranks": args.ranks,
        "deltas": args.deltas,
        "probabilities": args.probs,
        "alphas": args.alphas,
        "trials": args.trials,
        "seed": args.seed,
        "max_iter": args.max_iter,
        "step_rule": args.step_rule,
        "workers": args.workers,
        "output": args.out,
    }
    if args.tol is not None:
        fields["success_tol" if kind == "phase" else "eps_tol"] = args.tol
    return ExperimentConfig(**{k: v for k, v in fields.items() if v is not None})


def cmd_phase(args: argparse.Namespace, out: TextIO) -> None:
    cfg = _experiment_config(args, "phase")
    write_csv(cfg.output, PHASE_HEADER, run_phase_transition(cfg), out)


def cmd_converge(args: argparse.Namespace, out: TextIO) -> None:
    cfg = _experiment_config(args, "convergence")
    write_csv(cfg.output, CONVERGENCE_HEADER, run_convergence(cfg), out)


def cmd_bounds(args: argparse.Namespace, out: TextIO) -> None:
    if args.tensor:
        inputs = bound_inputs_for(read_tensor(args.tensor), args.beta, args.rank)
        inputs = inputs.model_copy(update={"size_I": args.size_i, "size_J": args.size_j})
    else:
        if args.shape is None or args.rank is None or args.mu0 is None:
            raise ParameterError("bounds needs --tensor, or --shape with --rank and --mu0")
        n1, n2, n3 = _shape(args)
        inputs = BoundInputs(
            n1=n1, n2=n2, n3=n3, r=args.rank, mu0=args.mu0, kappa=args.kappa, beta=args.beta,
            rvec_inf=args.rank, rvec_1=args.rank * n3, size_I=args.size_i, size_J=args.size_j,
        )
    result = bounds(inputs, args.mode)
    rows: List[Row] = [("mode", result.mode)]
    for name in ("size_I", "size_J", "p_R", "p_C", "p", "success_probability",
                 "success_probability_simplified"):
        value = getattr(result, name)
        if value is not None:
            rows.append((name, value))
    rows.append(("clamped", result.clamped))
    rows.extend((f"raw_{name}", value) for name, value in result.raw.items())
    _emit(rows, out)


def cmd_metrics(args: argparse.Namespace, out: TextIO) -> None:
    truth = read_tensor(args.truth)
    if args.factors:
        factors = read_factors(args.factors)
        rows: List[Row] = [("rel_error", rel_error(truth, factors))]
        estimate = cur_reconstruct(factors)
    elif args.estimate:
        estimate = read_tensor(args.estimate)
        rows = [("rel_error", rel_error(truth, estimate))]
    else:
        raise ParameterError("metrics needs --estimate or --factors")
    rows += [("psnr", psnr(truth, estimate)), ("ssim", ssim_avg(truth, estimate))]
    _emit(rows, out)


COMMANDS: Dict[str, Callable[[argparse.Namespace, TextIO], None]] = {
    "gen": cmd_gen,
    "sample": cmd_sample,
    "solve": cmd_solve,
    "phase": cmd_phase,
    "converge": cmd_converge,
    "bounds": cmd_bounds,
    "metrics": cmd_metrics,
}


def _add_shape(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--shape", type=int, nargs=3, metavar=("N1", "N2", "N3"), required=required)


def _add_experiment(parser: argparse.ArgumentParser, trials: int) -> None:
    parser.add_argument("--shape", type=int, nargs=3, metavar=("N1", "N2", "N3"), default=(60, 60, 16))
    parser.add_argument("--rank", dest="ranks", type=int, nargs="+")
    parser.add_argument("--delta", dest="deltas", type=float, nargs="+")
    parser.add_argument("--prob", dest="probs", type=float, nargs="+")
    parser.add_argument("--alpha", dest="alphas", type=float, nargs="+")
    parser.add_argument("--trials", type=int, default=trials)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, help="Success threshold (phase) or eps stop (converge)")
    parser.add_argument("--max-iter", type=int)
    parser.add_argument("--step-rule", choices=("unit", "unbiased"))
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensor-ccs", description="Low-tubal-rank tensor completion from t-CCS samples"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Write a random low-tubal-rank tensor")
    _add_shape(gen, required=True)
    gen.add_argument("--rank", type=int, required=True)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", type=Path, required=True)

    sample = sub.add_parser("sample", help="Draw a t-CCS plan")
    _add_shape(sample)
    sample.add_argument("--tensor", type=Path, help="Capture values from this tensor file")
    sample.add_argument("--delta", type=float, default=0.25)
    sample.add_argument("--size-i", type=int)
    sample.add_argument("--size-j", type=int)
    sample.add_argument("--prob-r", type=float, default=0.5)
    sample.add_argument("--prob-c", type=float, default=0.5)
    sample.add_argument("--replacement", action="store_true")
    sample.add_argument("--seed", type=int)
    sample.add_argument("--out", type=Path, required=True)

    solve = sub.add_parser("solve", help="Complete a tensor file")
    solve.add_argument("--tensor", type=Path, required=True)
    solve.add_argument("--plan", type=Path)
    solve.add_argument("--rank", type=int, required=True)
    solve.add_argument("--solver", choices=("itcurtc", "tstc"), default="itcurtc")
    solve.add_argument("--delta", type=float)
    solve.add_argument("--prob-r", type=float, default=0.5)
    solve.add_argument("--prob-c", type=float, default=0.5)
    solve.add_argument("--seed", type=int)
    solve.add_argument("--tol", type=float, default=1e-10)
    solve.add_argument("--max-iter", type=int, default=500)
    solve.add_argument("--step-rule", choices=("unit", "unbiased"), default="unit")
    solve.add_argument("--dense", action="store_true", help="Write the assembled tensor")
    solve.add_argument("--max-dense-entries", type=int, default=10**7)
    solve.add_argument("--report", type=Path)
    solve.add_argument("--trace", type=Path)
    solve.add_argument("--require-convergence", action="store_true")
    solve.add_argument("--out", type=Path, required=True)

    _add_experiment(sub.add_parser("phase", help="Phase-transition grid"), trials=25)
    _add_experiment(sub.add_parser("converge", help="Convergence study"), trials=10)

    bound = sub.add_parser("bounds", help="Evaluate sampling-complexity bounds")
    bound.add_argument("--mode", choices=("ccs", "tcur", "bernoulli"), default="ccs")
    bound.add_argument("--tensor", type=Path, help="Measure rank, mu0 and kappa on this tensor")
    _add_shape(bound)
    bound.add_argument("--rank", type=int)
    bound.add_argument("--mu0", type=float)
    bound.add_argument("--kappa", type=float, default=1.0)
    bound.add_argument("--beta", type=float, default=2.0)
    bound.add_argument("--size-i", type=int)
    bound.add_argument("--size-j", type=int)

    metrics = sub.add_parser("metrics", help="Score an estimate against the truth")
    metrics.add_argument("--truth", type=Path, required=True)
    metrics.add_argument("--estimate", type=Path)
    metrics.add_argument("--factors", type=Path)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """Run a command and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args, out or sys.stdout)
    except (TensorCcsError, pydantic.ValidationError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return exit_code_for(e)
    return EXIT_OK

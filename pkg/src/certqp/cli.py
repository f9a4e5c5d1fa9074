"""Command-line interface: ``certqp certify | solve | simulate``.

Exit codes: 0 success, 2 usage error, 3 invalid problem file, 4 numerical
failure (a Cholesky pivot was not positive).
"""

import argparse
import dataclasses
import sys

import numpy as np

from . import certificate, io
from .condense import double_integrator, load_config
from .errors import CertQPError, NotPositiveDefinite
from .penalty import solve_soft_qp
from .simulate import SimConfig, run

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3, 4


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="certqp",
        description="Execution-time certified QP solver for l1 soft-constrained MPC.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="print the iteration count and flop certificate")
    p.add_argument("--n", type=_positive_int, required=True, help="box-QP dimension")
    p.add_argument("--epsilon", type=_positive_float, default=1e-6, help="duality-gap tolerance")
    p.add_argument("--m", type=_positive_int, help="number of decision variables")
    p.add_argument("--flops-per-sec", type=_positive_float, default=1e9,
                   help="sustained flop rate for the time estimate")
    p.add_argument("--lti", action="store_true",
                   help="exclude the cached Q factor and H from the online count")
    p.add_argument("--json", metavar="PATH", help="also write the certificate as JSON")

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("--input", required=True, help="problem JSON file")
    p.add_argument("--output", required=True, help="solution JSON file to write")

    p = sub.add_parser("simulate", help="run a closed-loop simulation")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["double-integrator"], default=None)
    src.add_argument("--config", metavar="PATH", help="model/config JSON file")
    p.add_argument("--rho-hard", type=_positive_float, help="penalty on hard rows")
    p.add_argument("--rho-soft", type=_positive_float, help="penalty on soft rows")
    p.add_argument("--steps", type=_positive_int, default=60)
    p.add_argument("--x0", type=_vector, default=None, help="initial state, e.g. 0,-2")
    p.add_argument("--horizon", type=_positive_int, help="prediction horizon")
    p.add_argument("--epsilon", type=_positive_float, default=1e-6)
    p.add_argument("--flops-per-sec", type=_positive_float, default=1e9)
    p.add_argument("--out", metavar="PATH", help="trajectory CSV to write")
    return parser


def cmd_certify(args, parser):
    if not args.epsilon < 2 * args.n:
        parser.error(f"--epsilon must be below 2n = {2 * args.n}")
    if args.m is None:
        N = certificate.iteration_count(args.n, args.epsilon)
        print(f"n = {args.n}")
        print(f"epsilon = {args.epsilon!r}")
        print(f"iterations = {N}")
        print(f"flops_per_iteration = {certificate.per_iteration_flops(args.n)}")
        if args.json:
            with open(args.json, "w") as fh:
                fh.write(f'{{"n": {args.n}, "epsilon": {args.epsilon!r}, "iterations": {N}}}\n')
        return EXIT_OK
    cert = certificate.flop_budget(args.m, args.n, args.epsilon, args.lti, args.flops_per_sec)
    print(cert.report())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(cert.to_json(indent=1) + "\n")
    return EXIT_OK


def cmd_solve(args):
    try:
        qp, penalty, epsilon = io.load_problem(args.input)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CertQPError as exc:
        print(f"error: invalid problem file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        result = solve_soft_qp(qp, penalty, epsilon)
    except NotPositiveDefinite as exc:
        print(f"error: NotPositiveDefinite: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    io.save_solution(args.output, result)
    print(f"iterations = {result.iterations}, duality_gap = {result.duality_gap:.3e}, "
          f"online_flops = {result.online_flops}")
    return EXIT_OK


def cmd_simulate(args, parser):
    if args.config:
        try:
            model, config = load_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot load config: {exc}")
    else:
        model, config = double_integrator()
    overrides = {}
    if args.rho_hard is not None:
        overrides["rho_hard"] = args.rho_hard
    if args.rho_soft is not None:
        overrides["rho_soft"] = args.rho_soft
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if overrides:
        config = dataclasses.replace(config, **overrides)
    x0 = np.array([0.0, -2.0]) if args.x0 is None else args.x0
    if x0.size != model.n_x:
        parser.error(f"--x0 needs {model.n_x} entries")
    traj = run(SimConfig(model, config, x0, args.steps, args.epsilon, args.flops_per_sec))
    if args.out:
        traj.write_csv(args.out)
    s = traj.summary()
    iters = ",".join(str(k) for k in s["iterations"])
    print(f"max|u| = {s['max_abs_u']:.9g}, max soft violation = "
          f"{s['max_soft_violation']:.9g}, iterations per solve = {iters}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "certify":
        return cmd_certify(args, parser)
    if args.command == "solve":
        return cmd_solve(args)
    return cmd_simulate(args, parser)


if __name__ == "__main__":
    sys.exit(main())

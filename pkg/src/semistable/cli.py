"""Command-line front end.

Subcommands: ``check`` reports weight, slope and semistability of the
reduction; ``run`` computes a semistable integral model and writes a trace;
``verify`` re-validates a trace independently; ``count-flags`` counts the
semistable locus of a type over F_q as CSV rows; ``fuzz`` runs random
certified instances end to end.

Exit codes: 0 success, 2 parse error, 3 unstable generic fiber, 4 cap
exceeded, 5 verification failure.
"""

from __future__ import annotations

import argparse
import sys

from .corpus import generate_semistable_instances
from .descent import Caps, run_descent, verify_no_splitting, verify_trace
from .errors import (
    EnumerationTooLarge,
    GenericUnstable,
    IterationCapExceeded,
    ParseError,
)
from .filtration import generic_semistable, is_semistable, subspace_slope, slope
from .lattice import Lattice
from .lifting import residue_space
from .serialize import (
    Problem,
    dumps_canonical,
    load_problem,
    load_trace,
    load_type,
    problem_dict,
    trace_dict,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GENERIC_UNSTABLE = 3
EXIT_CAP = 4
EXIT_VERIFY = 5


def _caps_from_args(problem: Problem, args) -> Caps:
    caps = problem.caps
    return Caps(
        enum=args.enum_cap if args.enum_cap is not None else caps.enum,
        lift=args.lift_cap if getattr(args, "lift_cap", None) is not None else caps.lift,
        max_iter=args.max_iter if getattr(args, "max_iter", None) is not None else caps.max_iter,
    )


def _load(args) -> Problem:
    problem = load_problem(args.input)
    if getattr(args, "prime", None) is not None and args.prime != problem.prime:
        problem = Problem(args.prime, problem.dim, problem.chains,
                          problem.lattice, problem.caps)
    if getattr(args, "lattice", None) is not None:
        from .serialize import _parse_matrix

        import json

        with open(args.lattice, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
        lat = Lattice.from_rows(_parse_matrix(rows, problem.dim, "lattice"))
        problem = Problem(problem.prime, problem.dim, problem.chains, lat,
                          problem.caps)
    return problem


def _start_lattice(problem: Problem) -> Lattice:
    return problem.lattice if problem.lattice is not None \
        else Lattice.standard(problem.dim)


def cmd_check(args) -> int:
    problem = _load(args)
    caps = _caps_from_args(problem, args)
    lattice = _start_lattice(problem)
    red = residue_space(lattice, problem.chains, problem.prime)
    print(f"prime: {problem.prime}")
    print(f"dimension: {problem.dim}")
    print(f"chains: {len(problem.chains)}")
    from .filtration import weight

    print(f"reduction weight: {weight(red)}")
    print(f"reduction slope: {slope(red)}")
    ok, witness = is_semistable(red, caps.enum)
    if ok:
        print("reduction: semistable")
    else:
        mu = subspace_slope(red, witness)
        print("reduction: unstable")
        print(f"witness: span{[list(r) for r in witness]} with slope "
              f"{mu} > {slope(red)}")
    check = generic_semistable(problem.dim, problem.chains,
                               skip_primes=(problem.prime,))
    verdict = {True: "semistable", False: "unstable", None: "undetermined"}
    print(f"generic fiber (best effort): {verdict[check.semistable]} "
          f"[{check.method}{'; ' + check.detail if check.detail else ''}]")
    return EXIT_OK


def cmd_run(args) -> int:
    problem = _load(args)
    caps = _caps_from_args(problem, args)
    final, trace = run_descent(problem.chains, problem.prime,
                               _start_lattice(problem), caps)
    payload = dumps_canonical(trace_dict(problem, trace))
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(payload)
        print(f"wrote trace with {len(trace.steps)} steps to {args.trace_out}",
              file=sys.stderr)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    problem = load_problem(args.input)
    echo, trace_problem, trace = load_trace(args.trace)
    if echo != problem_dict(problem):
        print("verification failed: problem echo mismatch", file=sys.stderr)
        return EXIT_VERIFY
    caps = trace_problem.caps
    start = trace_problem.lattice
    result = verify_trace(trace_problem.chains, trace_problem.prime, start,
                          trace, caps)
    if result.ok:
        print(f"trace verified: {len(trace.steps)} steps")
        return EXIT_OK
    where = "" if result.step is None else f" at step {result.step}"
    print(f"verification failed{where}: {result.reason}", file=sys.stderr)
    return EXIT_VERIFY


def cmd_count_flags(args) -> int:
    from .flags import count_row

    t = load_type(args.type_file)
    rows = []
    for q in args.q:
        rows.append(count_row(q, t, args.enum_cap or 10 ** 6))
    lines = "".join(f"{q},{ident},{total},{ss}\n" for q, ident, total, ss in rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def cmd_fuzz(args) -> int:
    caps = Caps(
        enum=args.enum_cap or Caps().enum,
        lift=args.lift_cap or Caps().lift,
        max_iter=args.max_iter or Caps().max_iter,
    )
    primes = (args.prime,) if args.prime else (2, 3)
    instances = generate_semistable_instances(args.seed, args.count,
                                              primes=primes)
    failures = 0
    for k, inst in enumerate(instances):
        final, trace = run_descent(inst.chains, inst.prime, None, caps)
        result = verify_trace(inst.chains, inst.prime, None, trace, caps)
        splitting_ok = all(
            verify_no_splitting(step.reversed_seq, caps.enum)
            for step in trace.steps
        )
        ok = result.ok and splitting_ok
        failures += 0 if ok else 1
        print(f"instance {k}: p={inst.prime} n={inst.dim} "
              f"s={len(inst.chains)} steps={len(trace.steps)} "
              f"{'ok' if ok else 'FAIL: ' + result.reason}")
    print(f"{len(instances) - failures}/{len(instances)} instances verified")
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semistable",
        description="Exact integral models with semistable reduction "
                    "for multi-filtered vector spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, lattice_flag=True):
        sp.add_argument("--input", required=True, help="problem JSON file")
        sp.add_argument("--prime", type=int, help="override the problem prime")
        if lattice_flag:
            sp.add_argument("--lattice", help="JSON file with an initial basis")
        sp.add_argument("--enum-cap", type=int, dest="enum_cap",
                        help="subspace/candidate enumeration cap")

    sp = sub.add_parser("check", help="report reduction weight/slope/stability")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("run", help="compute a semistable integral model")
    common(sp)
    sp.add_argument("--lift-cap", type=int, dest="lift_cap",
                    help="working modulus cap for lift orders")
    sp.add_argument("--max-iter", type=int, dest="max_iter",
                    help="modification iteration cap")
    sp.add_argument("--trace-out", dest="trace_out",
                    help="write the trace JSON here instead of stdout")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("verify", help="re-validate a trace independently")
    sp.add_argument("--input", required=True, help="problem JSON file")
    sp.add_argument("--trace", required=True, help="trace JSON file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("count-flags", help="count semistable flag points")
    sp.add_argument("--q", type=int, action="append", required=True,
                    help="field size (prime); repeatable")
    sp.add_argument("--type-file", required=True, help="type JSON file")
    sp.add_argument("--enum-cap", type=int, dest="enum_cap")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.set_defaults(func=cmd_count_flags)

    sp = sub.add_parser("fuzz", help="run random certified instances end to end")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--prime", type=int)
    sp.add_argument("--enum-cap", type=int, dest="enum_cap")
    sp.add_argument("--lift-cap", type=int, dest="lift_cap")
    sp.add_argument("--max-iter", type=int, dest="max_iter")
    sp.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GenericUnstable as exc:
        print(f"generic fiber unstable: {exc}", file=sys.stderr)
        return EXIT_GENERIC_UNSTABLE
    except (EnumerationTooLarge, IterationCapExceeded) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())

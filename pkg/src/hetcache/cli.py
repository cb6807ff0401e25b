"""Command line front end.

Five subcommands cover the workflow: ``solve`` one instance, ``sweep``
the whole memory-load curve, ``compare-baselines`` against the split
heuristics, ``bounds`` for the converse side, and ``verify`` to rehearse
a scheme bit by bit.  Output is CSV or JSON, always with '.' decimals
and '\\n' line endings so files diff cleanly across machines.

Exit codes are part of the contract: 0 success, 2 invalid input, 3
solver breakdown, 4 failed verification.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .baselines import baseline_load
from .bounds import cutset_budget, cutset_fixed, cutset_k3
from .closed_form import corner_points, theorem1_load, threshold_allocation
from .lp_core import SolverError, solve_lp
from .model import Budget, FixedMemories, InstanceError, load_instance
from .scheme_lp import (
    SchemeSolution,
    build_intra_restricted,
    build_o1,
    build_o2,
    extract_scheme,
    scheme_problems,
)
from .simulator import verify

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def _load(path: str):
    inst = load_instance(path)
    if inst.K > 6:
        print(
            f"warning: {inst.K} users; program size grows as 3^K, expect long solves",
            file=sys.stderr,
        )
    return inst


def _solve_scheme(inst, mode: str) -> SchemeSolution:
    if mode == "intra":
        lp, index = build_intra_restricted(inst)
    elif inst.is_budget:
        lp, index = build_o1(inst)
    else:
        lp, index = build_o2(inst)
    solution = solve_lp(lp)
    if not solution.is_optimal:
        raise SolverError(f"solve ended with status {solution.status.value}")
    return extract_scheme(solution, index)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(rows: list[dict], header: list[str], args) -> None:
    """Write rows as CSV (header always) or JSON, to --out or stdout."""
    fh, close = _open_out(getattr(args, "out", None))
    try:
        if args.format == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [
                        repr(row[c]) if isinstance(row[c], float) else row[c]
                        for c in header
                    ]
                )
    finally:
        if close:
            fh.close()


def _parallel(fn, inputs, jobs: int):
    """Map in order; worker threads only pay off past one job."""
    if jobs <= 1:
        return [fn(x) for x in inputs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, inputs))


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    scheme = _solve_scheme(inst, args.mode)
    print(f"load = {scheme.load():.6f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(scheme.to_json_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    inst = _load(args.instance)
    if not inst.is_budget:
        raise InstanceError(["sweep needs a budget instance (total memory free)"])
    rates = inst.rates
    total = rates.sum_rates
    points = max(2, args.points)
    grid = {total * i / (points - 1) for i in range(points)}
    # corners keep the curve exact where it has kinks
    grid.update(m for m, _ in corner_points(rates))
    grid = sorted(grid)

    def one(m_tot: float) -> dict:
        sub = dataclasses.replace(inst, constraint=Budget(m_tot=m_tot))
        scheme = _solve_scheme(sub, "joint")
        alloc = threshold_allocation(m_tot, rates)
        row = {
            "m_tot": m_tot,
            "lp_load": scheme.load(),
            "theorem1_load": theorem1_load(m_tot, rates),
            "cutset": cutset_budget(sub).value,
        }
        for k in range(1, inst.K + 1):
            row[f"m_{k}"] = alloc.per_user[k - 1]
        return row

    rows = _parallel(one, grid, args.jobs)
    header = ["m_tot", "lp_load", "theorem1_load", "cutset"]
    header += [f"m_{k}" for k in range(1, inst.K + 1)]
    _emit(rows, header, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = _load(args.instance)
    rates = inst.rates
    K = inst.K
    g = args.ratio
    if g <= 0:
        raise InstanceError([f"--ratio must be positive, got {g}"])
    shape = [g ** (K - k) for k in range(1, K + 1)]
    s_max = min(rates.r[k - 1] / shape[k - 1] for k in range(1, K + 1))
    points = max(2, args.points)

    def one(i: int) -> dict:
        s = s_max * i / (points - 1)
        m = tuple(s * shape[k - 1] for k in range(1, K + 1))
        sub = dataclasses.replace(inst, constraint=FixedMemories(m=m))
        joint = _solve_scheme(sub, "joint").load()
        return {
            "m_tot": sum(m),
            "joint_o2": joint,
            "pca": baseline_load("pca", sub),
            "oca": baseline_load("oca", sub),
            "cutset_fixed": cutset_fixed(sub).value,
        }

    rows = _parallel(one, range(points), args.jobs)
    _emit(rows, ["m_tot", "joint_o2", "pca", "oca", "cutset_fixed"], args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    inst = _load(args.instance)
    if inst.is_budget:
        report = cutset_budget(inst)
        row = {"cutset": report.value}
        if inst.K == 3:
            row["cutset_k3"] = cutset_k3(inst)
        for k, mk in enumerate(report.binding_set, 1):
            row[f"m_{k}"] = mk
    else:
        report = cutset_fixed(inst)
        row = {
            "cutset": report.value,
            "binding_users": "{" + ",".join(str(u) for u in report.binding_set.users()) + "}",
        }
    _emit([row], list(row), args)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    if args.scheme:
        with open(args.scheme, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InstanceError([f"scheme file is not valid JSON: {exc}"]) from exc
        scheme = SchemeSolution.from_json_dict(data)
        problems = scheme_problems(scheme, inst)
        if problems:
            print("FAIL: scheme is inconsistent with the instance")
            for p in problems[:10]:
                print(f"  {p}")
            return EXIT_VERIFY
    else:
        scheme = _solve_scheme(inst, args.mode)

    report = verify(inst, scheme, args.file_size, args.seed)
    verdict = "PASS" if report.ok else "FAIL"
    print(
        f"{verdict}: measured load {report.measured_load:.6f}, "
        f"predicted {report.predicted_load:.6f}, "
        f"discrepancy {report.max_discrepancy:.2e} "
        f"(bound {report.discrepancy_bound:.2e})"
    )
    if not report.ok:
        for k, status in enumerate(report.user_status, 1):
            if status != "ok":
                print(f"  user {k}: {status}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetcache",
        description="Cache allocation and coded delivery for users with "
        "unequal quality targets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("instance", help="instance JSON file")
    solve.add_argument("--mode", choices=("joint", "intra"), default="joint")
    solve.add_argument("--out", help="write the scheme as JSON here")
    solve.set_defaults(fn=cmd_solve)

    sweep = sub.add_parser("sweep", help="trace the memory-load trade-off")
    sweep.add_argument("instance")
    sweep.add_argument("--points", type=int, default=50)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--out")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.set_defaults(fn=cmd_sweep)

    compare = sub.add_parser(
        "compare-baselines", help="joint optimum vs split heuristics"
    )
    compare.add_argument("instance")
    compare.add_argument("--points", type=int, default=20)
    compare.add_argument("--ratio", type=float, default=0.8,
                         help="cache size ratio m_k / m_{k+1}")
    compare.add_argument("--jobs", type=int, default=1)
    compare.add_argument("--out")
    compare.add_argument("--format", choices=("csv", "json"), default="csv")
    compare.set_defaults(fn=cmd_compare)

    bounds = sub.add_parser("bounds", help="cut-set lower bounds")
    bounds.add_argument("instance")
    bounds.add_argument("--out")
    bounds.add_argument("--format", choices=("csv", "json"), default="csv")
    bounds.set_defaults(fn=cmd_bounds)

    ver = sub.add_parser("verify", help="bit-level rehearsal of a scheme")
    ver.add_argument("instance")
    ver.add_argument("--mode", choices=("joint", "intra"), default="joint")
    ver.add_argument("--scheme", help="verify this scheme JSON instead of re-solving")
    ver.add_argument("--file-size", type=int, default=10_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", help="write the report as JSON here")
    ver.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InstanceError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

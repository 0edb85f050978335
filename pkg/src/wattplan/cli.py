"""Command line front end: ``wattplan convert|simulate|compare|stats``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import oracle, report
from .engine import run
from .fleet import load_fleet
from .heuristics import HeuristicKind
from .workload import (
    ConversionParams,
    EmptyTraceError,
    convert_jobs,
    read_swf,
    read_workload,
    stats,
    write_workload,
)

ALL_HEURISTICS = [k.value for k in HeuristicKind]


def _fleet(args):
    cfg = load_fleet(args.fleet)
    if args.hosts is not None:
        cfg = cfg.with_total(args.hosts)
    if cfg.size == 0:
        raise ValueError("fleet has no hosts")
    return cfg.build()


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_convert(args) -> int:
    params = ConversionParams(cpu_rating=args.cpu_rating, min_runtime_s=args.min_runtime,
                              duration_mode=args.duration_mode, vm_type_policy=args.vm_type_policy,
                              max_jobs=args.max_jobs)
    errors: list = []
    jobs = read_swf(args.swf, errors)
    conv = convert_jobs(jobs, params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_workload(out, conv.vms)
    summary = {
        "source": Path(args.swf).name,
        "records": len(jobs),
        "malformed_lines": [{"line": e.line_no, "error": e.message} for e in errors],
        "jobs_considered": conv.job_count,
        "jobs_kept": conv.kept_jobs,
        "jobs_filtered_short": conv.short_jobs,
        "jobs_invalid": conv.invalid_jobs,
        "task_count": conv.task_count,
        "params": params.as_dict(),
        "notes": ["start_s = submit_s + wait_s", "one single-core VM per allocated processor"],
    }
    _write(out.with_suffix(".summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{conv.task_count} tasks from {conv.kept_jobs} jobs "
          f"({conv.short_jobs} short, {conv.invalid_jobs} invalid) -> {out}")
    return 0


def cmd_simulate(args) -> int:
    kind = HeuristicKind.parse(args.heuristic)
    workload = read_workload(args.workload)
    fleet = _fleet(args)
    plan, rep = run(workload, fleet, kind)
    out = Path(args.out)
    _write(out / "report.json", report.report_json(rep, plan))
    _write(out / "per_host.csv", report.per_host_csv(rep, fleet, plan))
    _write(out / "assignments.csv", report.assignments_csv(plan))
    print(f"{kind.value}: {rep.total_energy_kwh:.2f} kWh, {rep.hosts_used}/{rep.fleet_size} hosts used, "
          f"{rep.cloudlet_count}/{rep.vm_count} VMs placed, {rep.rejection_count} rejected")
    return 0


def cmd_compare(args) -> int:
    kinds = [HeuristicKind.parse(k) for k in args.heuristics.split(",") if k.strip()]
    workload = read_workload(args.workload)
    fleet = _fleet(args)
    rows, reports = report.compare(workload, fleet, kinds, baseline=args.baseline, workers=args.workers)
    out = Path(args.out)
    _write(out / "compare.csv", report.compare_csv(rows))
    _write(out / "savings.csv", report.savings_csv(rows, args.baseline))
    for name, rep in reports.items():
        _write(out / f"report_{name}.json", report.report_json(rep))
    sys.stdout.write(report.compare_csv(rows))
    return 0


def cmd_stats(args) -> int:
    workload = read_workload(args.workload)
    hists = stats(workload, args.start_bucket, args.length_bucket)
    out = Path(args.out)
    _write(out / "start_rate_hist.csv", hists["start_rate"].to_csv())
    _write(out / "length_mi_hist.csv", hists["length_mi"].to_csv())
    print(f"{len(workload)} tasks; {len(hists['start_rate'].counts)} start buckets, "
          f"{len(hists['length_mi'].counts)} length buckets")
    return 0


def cmd_oracle(args) -> int:
    workload = read_workload(args.workload)
    fleet = _fleet(args)
    kwh, plan = oracle.optimal_energy(oracle.TinyInstance(tuple(workload), tuple(fleet)))
    if plan is None:
        print("infeasible")
        return 0
    print(f"optimal: {kwh:.6f} kWh")
    sys.stdout.write(report.assignments_csv(plan))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wattplan", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{convert,simulate,compare,stats}")

    p = sub.add_parser("convert", help="convert an SWF trace into a workload CSV")
    p.add_argument("swf", help=".swf trace (plain or .gz)")
    p.add_argument("--out", required=True, help="workload CSV to write (summary goes next to it)")
    p.add_argument("--cpu-rating", type=float, default=375.0, help="MI per second of trace runtime")
    p.add_argument("--min-runtime", type=int, default=300, help="drop jobs shorter than this (s)")
    p.add_argument("--duration-mode", choices=["mips-scaled", "trace-runtime"], default="mips-scaled")
    p.add_argument("--vm-type-policy", default="cyclic", help="'cyclic' or 'fixed:<type>'")
    p.add_argument("--max-jobs", type=int, default=None, help="keep only the first N surviving jobs")
    p.set_defaults(func=cmd_convert)

    def fleet_args(p):
        p.add_argument("--workload", required=True)
        p.add_argument("--fleet", default=None, help="fleet JSON (default: bundled 5000-host fleet)")
        p.add_argument("--hosts", type=int, default=None, help="resize the fleet, split evenly over groups")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="run one heuristic")
    fleet_args(p)
    p.add_argument("--heuristic", required=True, help=", ".join(ALL_HEURISTICS))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run several heuristics and tabulate energy")
    fleet_args(p)
    p.add_argument("--heuristics", default=",".join(ALL_HEURISTICS))
    p.add_argument("--baseline", default="pabfd")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="start-time and length histograms")
    p.add_argument("--workload", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--start-bucket", type=float, default=3600.0, help="seconds per start bucket")
    p.add_argument("--length-bucket", type=float, default=1e6, help="MI per length bucket")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    fleet_args(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (EmptyTraceError, ValueError, OSError) as exc:
        print(f"wattplan {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Multi-heuristic comparison and report serialisation."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import PlacementPlan, SimulationReport, run
from .heuristics import HeuristicKind
from .model import HostSpec, VmRequest

COMPARE_COLUMNS = ["heuristic", "hosts", "hosts_used", "vms", "cloudlets", "rejected",
                   "energy_kwh", "savings_vs_baseline_pct", "migrations"]
SAVINGS_COLUMNS = ["heuristic", "savings_pct"]
PER_HOST_COLUMNS = ["host_id", "group_label", "vm_count", "energy_kwh"]
ASSIGNMENT_COLUMNS = ["vm_id", "host_id", "cores", "start_s", "end_s"]


@dataclass(frozen=True)
class CompareRow:
    heuristic: str
    hosts: int
    hosts_used: int
    vms: int
    cloudlets: int
    rejected: int
    energy_kwh: float
    savings_vs_baseline_pct: float
    migrations: int = 0


def savings_pct(baseline_kwh: float, kwh: float) -> float:
    if baseline_kwh == 0:
        return 0.0 if kwh == 0 else float("-inf")
    return (baseline_kwh - kwh) / baseline_kwh * 100.0


def _run_one(args):
    workload, fleet, kind = args
    return run(workload, fleet, kind)[1]


def compare(workload: Sequence[VmRequest], fleet: Sequence[HostSpec], kinds: Sequence,
            baseline="pabfd", workers: Optional[int] = None) -> tuple[list[CompareRow], dict]:
    """Run each heuristic on the same inputs; rows follow the order of ``kinds``.

    Returns the rows and the per-heuristic reports keyed by heuristic name.
    """
    kinds = [HeuristicKind.parse(k) for k in kinds]
    if not kinds:
        raise ValueError("no heuristics requested")
    baseline = HeuristicKind.parse(baseline)
    if baseline not in kinds:
        raise ValueError(f"baseline {baseline.value} must be among the compared heuristics")
    if workers is None:
        workers = min(len(kinds), os.cpu_count() or 1)
    jobs = [(list(workload), list(fleet), k) for k in kinds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    by_kind = {k.value: r for k, r in zip(kinds, reports)}
    base = by_kind[baseline.value].total_energy_kwh
    rows = [CompareRow(heuristic=r.heuristic, hosts=r.fleet_size, hosts_used=r.hosts_used,
                       vms=r.vm_count, cloudlets=r.cloudlet_count, rejected=r.rejection_count,
                       energy_kwh=r.total_energy_kwh,
                       savings_vs_baseline_pct=savings_pct(base, r.total_energy_kwh))
            for r in reports]
    return rows, by_kind


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def compare_csv(rows: Sequence[CompareRow]) -> str:
    return _csv(COMPARE_COLUMNS, [
        [r.heuristic, r.hosts, r.hosts_used, r.vms, r.cloudlets, r.rejected,
         f"{r.energy_kwh:.2f}", f"{r.savings_vs_baseline_pct:.0f}", r.migrations] for r in rows])


def savings_csv(rows: Sequence[CompareRow], baseline: str = "pabfd") -> str:
    baseline = HeuristicKind.parse(baseline).value
    return _csv(SAVINGS_COLUMNS, [[r.heuristic, f"{r.savings_vs_baseline_pct:.0f}"]
                                  for r in rows if r.heuristic != baseline])


def report_json(report: SimulationReport, plan: Optional[PlacementPlan] = None) -> str:
    data = report.to_dict()
    if plan is not None:
        data["rejections"] = [{"vm_id": r.vm_id, "reason": r.reason} for r in plan.rejections]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def per_host_csv(report: SimulationReport, fleet: Sequence[HostSpec],
                 plan: Optional[PlacementPlan] = None) -> str:
    counts: dict[int, int] = {}
    if plan is not None:
        for a in plan.assignments:
            counts[a.host_id] = counts.get(a.host_id, 0) + 1
    return _csv(PER_HOST_COLUMNS, [
        [h.id, h.group_label, counts.get(h.id, 0), repr(report.per_host_energy_kwh.get(h.id, 0.0))]
        for h in sorted(fleet, key=lambda h: h.id)])


def assignments_csv(plan: PlacementPlan) -> str:
    return _csv(ASSIGNMENT_COLUMNS, [
        [a.vm_id, a.host_id, ";".join(str(c) for c in a.core_indices), a.start_s, a.end_s]
        for a in sorted(plan.assignments, key=lambda a: a.vm_id)])

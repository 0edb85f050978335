"""Replay a workload against a fleet with one heuristic and account its energy.

VMs have fixed starts and uninterrupted durations, so the run is an offline
interval replay: admit VMs in start order, release finished ones before each
admission, and integrate the resulting piecewise-constant power exactly.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import heuristics as hz
from .heuristics import HeuristicKind
from .model import (
    CAPACITY_TOL,
    Assignment,
    HostSpec,
    VmRequest,
    energy_wh,
    fleet_by_id,
)

# Modelling conventions baked into every run; echoed into reports and the fingerprint.
DECISIONS = {
    "utilization": "allocated_mips / total_host_mips",
    "idle_power": "zero when no VM is running",
    "epobf_v2_denominator": "power_after - power_before",
    "tie_break": "lowest host id, then lowest core indices",
    "vbp_weights": "unit weights on capacity-normalised cpu, ram, bw",
    "queue_order": "start_s ascending, then vm id",
    "rejection_policy": "drop when no host fits at start",
}

REJECT_OVERSIZED = "exceeds capacity of every host"
REJECT_FULL = "no host has room at start"


@dataclass(frozen=True)
class Rejection:
    vm_id: int
    reason: str


@dataclass(frozen=True)
class PlacementPlan:
    assignments: tuple[Assignment, ...]
    rejections: tuple[Rejection, ...]
    heuristic: Optional[HeuristicKind] = None


@dataclass(frozen=True)
class Violation:
    host_id: Optional[int]
    time_s: Optional[float]
    resource: str
    load: float = 0.0
    capacity: float = 0.0
    core: Optional[int] = None
    vm_id: Optional[int] = None

    def __str__(self):
        where = f"host {self.host_id}" + (f" core {self.core}" if self.core is not None else "")
        return f"{where} at t={self.time_s}: {self.resource} load {self.load:g} > capacity {self.capacity:g}"


class InfeasiblePlanError(RuntimeError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"{len(self.violations)} capacity violation(s): {head}")


@dataclass
class SimulationReport:
    total_energy_kwh: float
    per_host_energy_kwh: dict[int, float]
    hosts_used: int
    fleet_size: int
    vm_count: int
    cloudlet_count: int
    rejection_count: int
    heuristic: Optional[str]
    config_fingerprint: str
    horizon_s: Optional[tuple[int, int]] = None
    migrations: int = 0
    decisions: dict = field(default_factory=lambda: dict(DECISIONS))

    def to_dict(self) -> dict:
        return {
            "heuristic": self.heuristic,
            "total_energy_kwh": self.total_energy_kwh,
            "hosts_used": self.hosts_used,
            "fleet_size": self.fleet_size,
            "vm_count": self.vm_count,
            "cloudlet_count": self.cloudlet_count,
            "rejection_count": self.rejection_count,
            "migrations": self.migrations,
            "horizon_s": list(self.horizon_s) if self.horizon_s else None,
            "config_fingerprint": self.config_fingerprint,
            "decisions": self.decisions,
        }


def config_fingerprint(fleet: Iterable[HostSpec], workload: Iterable[VmRequest],
                       kind: Optional[HeuristicKind]) -> str:
    payload = {
        "fleet": [[h.id, h.group_label, h.pe_count, list(h.mips_per_core), h.ram_mb, h.bw_kbps,
                   h.p_idle_w, h.p_max_w] for h in sorted(fleet, key=lambda h: h.id)],
        "workload": [[v.id, v.pe_count, v.mips_per_pe, v.ram_mb, v.bw_kbps, v.start_s, v.duration_s]
                     for v in sorted(workload, key=lambda v: v.id)],
        "heuristic": kind.value if kind else None,
        "decisions": DECISIONS,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FleetArrays:
    """Whole-fleet load held in numpy arrays, indexed by host position (ascending id)."""

    def __init__(self, fleet: Sequence[HostSpec]):
        self.specs = sorted(fleet, key=lambda h: h.id)
        n = len(self.specs)
        width = max(h.pe_count for h in self.specs)
        self.ids = np.array([h.id for h in self.specs])
        # padding cores get a negative capacity so nothing ever fits there
        self.core_cap = np.full((n, width), -1.0)
        for i, h in enumerate(self.specs):
            self.core_cap[i, : h.pe_count] = h.mips_per_core
        self.core_used = np.zeros((n, width))
        self.core_vms = np.zeros((n, width), dtype=np.int64)
        self.total_mips = np.array([h.total_mips for h in self.specs])
        self.ram_cap = np.array([h.ram_mb for h in self.specs], dtype=float)
        self.bw_cap = np.array([h.bw_kbps for h in self.specs], dtype=float)
        self.p_idle = np.array([h.p_idle_w for h in self.specs])
        self.p_max = np.array([h.p_max_w for h in self.specs])
        self.used_mips = np.zeros(n)
        self.ram_used = np.zeros(n)
        self.bw_used = np.zeros(n)
        self.active = np.zeros(n, dtype=np.int64)

    def feasible(self, vm: VmRequest):
        """Boolean mask of hosts that can take ``vm`` now, plus the per-core fit mask."""
        core_fit = self.core_used + vm.mips_per_pe <= self.core_cap + CAPACITY_TOL
        mask = core_fit.sum(axis=1) >= vm.pe_count
        mask &= self.ram_used + vm.ram_mb <= self.ram_cap + CAPACITY_TOL
        mask &= self.bw_used + vm.bw_kbps <= self.bw_cap + CAPACITY_TOL
        return mask, core_fit

    def fits_empty(self, vm: VmRequest) -> bool:
        core_fit = vm.mips_per_pe <= self.core_cap + CAPACITY_TOL
        mask = core_fit.sum(axis=1) >= vm.pe_count
        mask &= vm.ram_mb <= self.ram_cap + CAPACITY_TOL
        mask &= vm.bw_kbps <= self.bw_cap + CAPACITY_TOL
        return bool(mask.any())

    def scores(self, kind: HeuristicKind, vm: VmRequest, idx: np.ndarray) -> np.ndarray:
        total = self.total_mips[idx]
        if kind is HeuristicKind.EPOBF_V1:
            return hz.epobf_v1_score(total, self.p_max[idx])
        if kind in (HeuristicKind.EPOBF_V2, HeuristicKind.PABFD):
            delta = hz.power_increase(self.p_idle[idx], self.p_max[idx], total,
                                      self.active[idx], vm.total_mips)
            return hz.epobf_v2_score(total, delta) if kind is HeuristicKind.EPOBF_V2 else delta
        residual = np.stack([(total - self.used_mips[idx]) / total,
                             (self.ram_cap[idx] - self.ram_used[idx]) / self.ram_cap[idx],
                             (self.bw_cap[idx] - self.bw_used[idx]) / self.bw_cap[idx]], axis=-1)
        demand = np.stack([vm.total_mips / total,
                           vm.ram_mb / self.ram_cap[idx],
                           vm.bw_kbps / self.bw_cap[idx]], axis=-1)
        p = 1 if kind is HeuristicKind.VBP_GREEDY_L1 else 2
        return hz.vbp_score(residual, demand, p)

    def choose(self, kind: HeuristicKind, vm: VmRequest):
        """Position and cores of the selected host, or None when nothing fits."""
        mask, core_fit = self.feasible(vm)
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return None
        s = self.scores(kind, vm, idx)
        # argmax/argmin return the first extremum, i.e. the lowest host id
        k = int(np.argmax(s)) if kind.maximizes else int(np.argmin(s))
        pos = int(idx[k])
        cores = tuple(int(c) for c in np.flatnonzero(core_fit[pos])[: vm.pe_count])
        return pos, cores

    def allocate(self, pos: int, cores: tuple[int, ...], vm: VmRequest):
        cores_arr = list(cores)
        self.core_used[pos, cores_arr] += vm.mips_per_pe
        self.core_vms[pos, cores_arr] += 1
        self.used_mips[pos] += vm.total_mips
        self.ram_used[pos] += vm.ram_mb
        self.bw_used[pos] += vm.bw_kbps
        self.active[pos] += 1

    def release(self, pos: int, cores: tuple[int, ...], vm: VmRequest):
        cores_arr = list(cores)
        self.core_used[pos, cores_arr] -= vm.mips_per_pe
        self.core_vms[pos, cores_arr] -= 1
        idle_cores = self.core_vms[pos] == 0
        self.core_used[pos, idle_cores] = 0.0
        self.used_mips[pos] -= vm.total_mips
        self.ram_used[pos] -= vm.ram_mb
        self.bw_used[pos] -= vm.bw_kbps
        self.active[pos] -= 1
        if self.active[pos] == 0:
            self.used_mips[pos] = self.ram_used[pos] = self.bw_used[pos] = 0.0


def run(workload: Sequence[VmRequest], fleet: Sequence[HostSpec], kind):
    """Place every VM with heuristic ``kind``; return ``(plan, report)``."""
    kind = HeuristicKind.parse(kind)
    if not fleet:
        raise ValueError("fleet is empty")
    fleet_by_id(fleet)
    seen = set()
    for vm in workload:
        if vm.id in seen:
            raise ValueError(f"duplicate vm id {vm.id}")
        seen.add(vm.id)

    arrays = FleetArrays(fleet)
    running: list = []  # heap of (end_s, vm_id, pos, cores, vm)
    assignments = []
    rejections = []
    for vm in hz.sort_queue(workload):
        while running and running[0][0] <= vm.start_s:
            _, _, pos, cores, done = heapq.heappop(running)
            arrays.release(pos, cores, done)
        choice = arrays.choose(kind, vm)
        if choice is None:
            reason = REJECT_FULL if arrays.fits_empty(vm) else REJECT_OVERSIZED
            rejections.append(Rejection(vm.id, reason))
            continue
        pos, cores = choice
        arrays.allocate(pos, cores, vm)
        heapq.heappush(running, (vm.end_s, vm.id, pos, cores, vm))
        assignments.append(Assignment(vm, int(arrays.ids[pos]), cores))

    plan = PlacementPlan(tuple(assignments), tuple(rejections), kind)
    report = integrate_energy(plan, fleet, fingerprint=config_fingerprint(fleet, workload, kind))
    return plan, report


def _events(assignments: Sequence[Assignment]):
    """Host events sorted by time; ends (-1) sort before starts (+1) at equal times."""
    ev = []
    for a in assignments:
        ev.append((a.start_s, 1, a))
        ev.append((a.end_s, -1, a))
    ev.sort(key=lambda e: (e[0], e[1], e[2].vm_id))
    return ev


def audit(plan: PlacementPlan, fleet: Sequence[HostSpec]) -> list[Violation]:
    """Every capacity breach of ``plan``, checked at each VM start on each host."""
    hosts = fleet_by_id(fleet)
    out: list[Violation] = []
    seen: dict[int, int] = {}
    for vm_id in [a.vm_id for a in plan.assignments] + [r.vm_id for r in plan.rejections]:
        seen[vm_id] = seen.get(vm_id, 0) + 1
    for vm_id, n in sorted(seen.items()):
        if n > 1:
            out.append(Violation(None, None, "duplicate-vm", load=n, capacity=1, vm_id=vm_id))

    by_host: dict[int, list[Assignment]] = defaultdict(list)
    for a in plan.assignments:
        spec = hosts.get(a.host_id)
        if spec is None:
            out.append(Violation(a.host_id, a.start_s, "unknown-host", vm_id=a.vm_id))
            continue
        bad = [c for c in a.core_indices if not 0 <= c < spec.pe_count]
        if bad:
            out.append(Violation(a.host_id, a.start_s, "core-index", load=max(bad),
                                 capacity=spec.pe_count - 1, vm_id=a.vm_id))
            continue
        by_host[a.host_id].append(a)

    for host_id in sorted(by_host):
        spec = hosts[host_id]
        core_load = [0.0] * spec.pe_count
        core_vms = [0] * spec.pe_count
        ram = bw = 0.0
        events = _events(by_host[host_id])
        i = 0
        while i < len(events):
            t = events[i][0]
            started = False
            while i < len(events) and events[i][0] == t:
                _, sign, a = events[i]
                for c in a.core_indices:
                    core_load[c] += sign * a.vm.mips_per_pe
                    core_vms[c] += sign
                    if core_vms[c] == 0:
                        core_load[c] = 0.0
                ram += sign * a.vm.ram_mb
                bw += sign * a.vm.bw_kbps
                started |= sign > 0
                i += 1
            if not started:
                continue
            for c in range(spec.pe_count):
                if core_load[c] > spec.mips_per_core[c] + CAPACITY_TOL:
                    out.append(Violation(host_id, t, "mips", core_load[c], spec.mips_per_core[c], core=c))
            if ram > spec.ram_mb + CAPACITY_TOL:
                out.append(Violation(host_id, t, "ram", ram, spec.ram_mb))
            if bw > spec.bw_kbps + CAPACITY_TOL:
                out.append(Violation(host_id, t, "bw", bw, spec.bw_kbps))
    return out


def host_energy_wh(spec: HostSpec, assignments: Sequence[Assignment]) -> float:
    """Exact energy of one host: sum over constant-load segments between events."""
    events = _events(assignments)
    total = 0.0
    used = 0.0
    count = 0
    i = 0
    while i < len(events):
        t = events[i][0]
        while i < len(events) and events[i][0] == t:
            _, sign, a = events[i]
            used += sign * a.vm.total_mips
            count += sign
            i += 1
        if i == len(events):
            break
        if count == 0:
            used = 0.0
            continue
        u = min(max(used / spec.total_mips, 0.0), 1.0)
        total += energy_wh(spec, u, count, events[i][0] - t)
    return total


def integrate_energy(plan: PlacementPlan, fleet: Sequence[HostSpec],
                     fingerprint: Optional[str] = None) -> SimulationReport:
    violations = audit(plan, fleet)
    if violations:
        raise InfeasiblePlanError(violations)
    hosts = fleet_by_id(fleet)
    by_host: dict[int, list[Assignment]] = defaultdict(list)
    for a in plan.assignments:
        by_host[a.host_id].append(a)

    per_host = {}
    for host_id in sorted(hosts):
        per_host[host_id] = host_energy_wh(hosts[host_id], by_host.get(host_id, ())) / 1000.0
    total = math.fsum(per_host.values())

    horizon = None
    if plan.assignments:
        horizon = (min(a.start_s for a in plan.assignments), max(a.end_s for a in plan.assignments))
    if fingerprint is None:
        fingerprint = config_fingerprint(fleet, [a.vm for a in plan.assignments], plan.heuristic)
    return SimulationReport(
        total_energy_kwh=total,
        per_host_energy_kwh=per_host,
        hosts_used=len(by_host),
        fleet_size=len(hosts),
        vm_count=len(plan.assignments) + len(plan.rejections),
        cloudlet_count=len(plan.assignments),
        rejection_count=len(plan.rejections),
        heuristic=plan.heuristic.value if plan.heuristic else None,
        config_fingerprint=fingerprint,
        horizon_s=horizon,
    )

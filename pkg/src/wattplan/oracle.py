"""Independent checks: brute-force optimal placement and sampled energy."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .engine import PlacementPlan, host_energy_wh
from .heuristics import sort_queue
from .model import CAPACITY_TOL, Assignment, HostSpec, VmRequest, fleet_by_id, linear_power

MAX_VMS = 8
MAX_HOSTS = 4


@dataclass(frozen=True)
class TinyInstance:
    """A placement problem small enough to solve by enumeration.

    ``allow_large`` lifts the size caps for hand-built instances whose
    symmetry keeps the search small.
    """

    vms: tuple[VmRequest, ...]
    hosts: tuple[HostSpec, ...]
    allow_large: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vms", tuple(self.vms))
        object.__setattr__(self, "hosts", tuple(self.hosts))
        if not self.allow_large:
            if len(self.vms) > MAX_VMS:
                raise ValueError(f"tiny instance allows at most {MAX_VMS} VMs, got {len(self.vms)}")
            if len(self.hosts) > MAX_HOSTS:
                raise ValueError(f"tiny instance allows at most {MAX_HOSTS} hosts, got {len(self.hosts)}")
        if not self.hosts:
            raise ValueError("tiny instance needs at least one host")
        fleet_by_id(self.hosts)


def _core_options(vm: VmRequest, spec: HostSpec, placed: list[Assignment]):
    """Distinct core sets for ``vm`` on a host, up to interchangeable cores.

    Two cores are interchangeable when they have the same capacity and carry
    the same (end, mips) loads from here on, since every later VM starts no
    earlier than ``vm``.
    """
    t = vm.start_s
    running = [a for a in placed if a.end_s > t]
    load = [0.0] * spec.pe_count
    future: list[list] = [[] for _ in range(spec.pe_count)]
    for a in running:
        for c in a.core_indices:
            load[c] += a.vm.mips_per_pe
            future[c].append((a.end_s, a.vm.mips_per_pe))
    fits = [c for c in range(spec.pe_count)
            if load[c] + vm.mips_per_pe <= spec.mips_per_core[c] + CAPACITY_TOL]
    sig = {c: (spec.mips_per_core[c], tuple(sorted(future[c]))) for c in fits}
    seen = set()
    for combo in itertools.combinations(fits, vm.pe_count):
        key = tuple(sorted(sig[c] for c in combo))
        if key in seen:
            continue
        seen.add(key)
        yield combo


def _fits_host(vm: VmRequest, spec: HostSpec, placed: list[Assignment]) -> bool:
    t = vm.start_s
    running = [a for a in placed if a.end_s > t]
    ram = sum(a.vm.ram_mb for a in running) + vm.ram_mb
    bw = sum(a.vm.bw_kbps for a in running) + vm.bw_kbps
    return ram <= spec.ram_mb + CAPACITY_TOL and bw <= spec.bw_kbps + CAPACITY_TOL


def _host_signature(spec: HostSpec, placed: list[Assignment], t: float):
    future = sorted((a.end_s, a.vm.mips_per_pe, a.vm.ram_mb, a.vm.bw_kbps, a.core_indices)
                    for a in placed if a.end_s > t)
    past = sorted((a.start_s, a.end_s, a.vm.total_mips) for a in placed if a.end_s <= t)
    return (spec.mips_per_core, spec.ram_mb, spec.bw_kbps, spec.p_idle_w, spec.p_max_w,
            tuple(future), tuple(past))


def optimal_energy(inst: TinyInstance) -> tuple[float, Optional[PlacementPlan]]:
    """Minimum total kWh over every feasible complete placement.

    Returns ``(math.inf, None)`` when no placement holds all VMs.  Hosts in
    identical situations are tried once, and branches whose partial energy
    already reaches the best complete plan are cut (adding a VM never lowers
    a host's energy).
    """
    vms = sort_queue(inst.vms)
    hosts = sorted(inst.hosts, key=lambda h: h.id)
    placed: dict[int, list[Assignment]] = {h.id: [] for h in hosts}
    energy = {h.id: 0.0 for h in hosts}
    best = [math.inf, None]

    def search(i: int, partial: float):
        if partial >= best[0]:
            return
        if i == len(vms):
            assignments = sorted((a for h in hosts for a in placed[h.id]), key=lambda a: a.vm_id)
            best[0] = partial
            best[1] = PlacementPlan(tuple(assignments), ())
            return
        vm = vms[i]
        tried = set()
        for h in hosts:
            on_host = placed[h.id]
            if not _fits_host(vm, h, on_host):
                continue
            sig = _host_signature(h, on_host, vm.start_s)
            if sig in tried:
                continue
            tried.add(sig)
            before = energy[h.id]
            for cores in _core_options(vm, h, on_host):
                on_host.append(Assignment(vm, h.id, cores))
                energy[h.id] = host_energy_wh(h, on_host) / 1000.0
                search(i + 1, partial - before + energy[h.id])
                on_host.pop()
            energy[h.id] = before

    search(0, 0.0)
    kwh, plan = best
    if plan is not None:
        # re-add per host the way integrate_energy does, so equal plans compare equal
        kwh = math.fsum(host_energy_wh(h, [a for a in plan.assignments if a.host_id == h.id]) / 1000.0
                        for h in hosts)
    return kwh, plan


def numeric_energy(plan: PlacementPlan, fleet: Sequence[HostSpec], dt: float = 1.0) -> float:
    """Left-rectangle estimate of total kWh, sampling power every ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not plan.assignments:
        return 0.0
    hosts = fleet_by_id(fleet)
    t0 = min(a.start_s for a in plan.assignments)
    t1 = max(a.end_s for a in plan.assignments)
    n = math.ceil((t1 - t0) / dt)
    # diff arrays over sample indices: sample k (time t0 + k*dt) sees VM a iff start <= t < end
    mips = {h: np.zeros(n + 1) for h in hosts}
    count = {h: np.zeros(n + 1, dtype=np.int64) for h in hosts}
    for a in plan.assignments:
        lo = math.ceil((a.start_s - t0) / dt)
        hi = math.ceil((a.end_s - t0) / dt)
        mips[a.host_id][lo] += a.vm.total_mips
        mips[a.host_id][hi] -= a.vm.total_mips
        count[a.host_id][lo] += 1
        count[a.host_id][hi] -= 1
    total_w = 0.0
    for host_id, spec in hosts.items():
        c = np.cumsum(count[host_id])[:n]
        if not c.any():
            continue
        u = np.clip(np.cumsum(mips[host_id])[:n] / spec.total_mips, 0.0, 1.0)
        p = linear_power(spec.p_idle_w, spec.p_max_w, np.where(c > 0, u, 0.0), c)
        total_w += math.fsum(p)
    return total_w * dt / 3600.0 / 1000.0

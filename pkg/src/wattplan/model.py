"""Domain types and the linear host power model.

Hosts draw power linearly in CPU utilization while they run at least one VM
and nothing otherwise.  Utilization is allocated MIPS over total host MIPS,
so it stays in [0, 1] on multicore hosts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

# Slack for float comparisons of MIPS / MB / kbps sums against capacity.
CAPACITY_TOL = 1e-6

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class HostSpec:
    id: int
    group_label: str
    pe_count: int
    mips_per_core: tuple[float, ...]
    ram_mb: float
    bw_kbps: float
    p_idle_w: float
    p_max_w: float
    total_mips: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mips_per_core", tuple(float(m) for m in self.mips_per_core))
        if self.pe_count < 1:
            raise ValueError(f"host {self.id}: pe_count must be >= 1")
        if len(self.mips_per_core) != self.pe_count:
            raise ValueError(
                f"host {self.id}: {len(self.mips_per_core)} core capacities for {self.pe_count} cores"
            )
        if any(m <= 0 for m in self.mips_per_core):
            raise ValueError(f"host {self.id}: core MIPS must be positive")
        if self.ram_mb <= 0 or self.bw_kbps <= 0:
            raise ValueError(f"host {self.id}: ram_mb and bw_kbps must be positive")
        if not 0 <= self.p_idle_w <= self.p_max_w:
            raise ValueError(f"host {self.id}: need 0 <= p_idle_w <= p_max_w")
        object.__setattr__(self, "total_mips", sum(self.mips_per_core))

    @classmethod
    def uniform(cls, id: int, group_label: str, pe_count: int, mips: float, ram_mb: float,
                bw_kbps: float, p_idle_w: float, p_max_w: float) -> "HostSpec":
        """Host whose cores all have the same capacity."""
        return cls(id, group_label, pe_count, (mips,) * pe_count, ram_mb, bw_kbps, p_idle_w, p_max_w)

    def scaled_power(self, c: float) -> "HostSpec":
        return HostSpec(self.id, self.group_label, self.pe_count, self.mips_per_core,
                        self.ram_mb, self.bw_kbps, self.p_idle_w * c, self.p_max_w * c)

    def with_id(self, id: int) -> "HostSpec":
        return HostSpec(id, self.group_label, self.pe_count, self.mips_per_core,
                        self.ram_mb, self.bw_kbps, self.p_idle_w, self.p_max_w)


@dataclass(frozen=True)
class VmRequest:
    """A VM that must run on ``pe_count`` cores during [start_s, start_s + duration_s)."""

    id: int
    pe_count: int
    mips_per_pe: float
    ram_mb: float
    bw_kbps: float
    start_s: int
    duration_s: int
    source_job: Optional[int] = None
    length_mi: Optional[float] = None

    def __post_init__(self):
        if self.pe_count < 1:
            raise ValueError(f"vm {self.id}: pe_count must be >= 1")
        if self.mips_per_pe <= 0:
            raise ValueError(f"vm {self.id}: mips_per_pe must be positive")
        if self.ram_mb < 0 or self.bw_kbps < 0:
            raise ValueError(f"vm {self.id}: negative ram/bw demand")
        if self.duration_s <= 0:
            raise ValueError(f"vm {self.id}: duration_s must be positive")
        if self.start_s < 0:
            raise ValueError(f"vm {self.id}: start_s must be >= 0")

    @property
    def end_s(self) -> int:
        return self.start_s + self.duration_s

    @property
    def total_mips(self) -> float:
        return self.pe_count * self.mips_per_pe

    def active_at(self, t: float) -> bool:
        return self.start_s <= t < self.end_s


@dataclass(frozen=True)
class Assignment:
    vm: VmRequest
    host_id: int
    core_indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "core_indices", tuple(int(c) for c in self.core_indices))
        if len(self.core_indices) != self.vm.pe_count:
            raise ValueError(f"vm {self.vm.id}: needs {self.vm.pe_count} cores, got {self.core_indices}")
        if len(set(self.core_indices)) != len(self.core_indices):
            raise ValueError(f"vm {self.vm.id}: repeated core index in {self.core_indices}")

    @property
    def vm_id(self) -> int:
        return self.vm.id

    @property
    def start_s(self) -> int:
        return self.vm.start_s

    @property
    def end_s(self) -> int:
        return self.vm.end_s


@dataclass(frozen=True)
class PowerSample:
    utilization: float
    watts: float


@dataclass(frozen=True)
class HostState:
    """A host together with the assignments placed on it.

    ``active`` may hold assignments that are not running at a given instant;
    every query filters by time.
    """

    spec: HostSpec
    active: tuple[Assignment, ...] = ()

    def running(self, t: float) -> list[Assignment]:
        return [a for a in self.active if a.vm.active_at(t)]

    def core_load(self, t: float) -> list[float]:
        load = [0.0] * self.spec.pe_count
        for a in self.running(t):
            for c in a.core_indices:
                load[c] += a.vm.mips_per_pe
        return load

    def allocated_mips(self, t: float) -> float:
        return sum(a.vm.total_mips for a in self.running(t))

    def ram_used(self, t: float) -> float:
        return sum(a.vm.ram_mb for a in self.running(t))

    def bw_used(self, t: float) -> float:
        return sum(a.vm.bw_kbps for a in self.running(t))

    def active_count(self, t: float) -> int:
        return len(self.running(t))

    def with_assignment(self, assignment: Assignment) -> "HostState":
        if assignment.host_id != self.spec.id:
            raise ValueError(f"assignment for host {assignment.host_id} added to host {self.spec.id}")
        return HostState(self.spec, self.active + (assignment,))

    def sample(self, t: float) -> PowerSample:
        u = utilization(self, t)
        return PowerSample(u, power(self.spec, u, self.active_count(t)))


def utilization(host_state: HostState, t: float) -> float:
    """Fraction of the host's total MIPS allocated at instant ``t``."""
    u = host_state.allocated_mips(t) / host_state.spec.total_mips
    return min(u, 1.0)


def linear_power(p_idle, p_max, u, active_count):
    """Vectorised power curve; zero wherever ``active_count`` is zero."""
    p = p_idle + (p_max - p_idle) * u
    return np.where(np.asarray(active_count) > 0, p, 0.0)


def power(spec: HostSpec, utilization: float, active_count: int) -> float:
    if not 0.0 <= utilization <= 1.0:
        raise ValueError(f"utilization {utilization} outside [0, 1]")
    if active_count <= 0:
        return 0.0
    return spec.p_idle_w + (spec.p_max_w - spec.p_idle_w) * utilization


def energy_wh(spec: HostSpec, utilization: float, active_count: int, dt: float) -> float:
    """Energy over an interval of ``dt`` seconds at constant utilization."""
    if dt < 0:
        raise ValueError(f"negative interval {dt}")
    return power(spec, utilization, active_count) * dt / SECONDS_PER_HOUR


def green_metric(spec: HostSpec) -> float:
    """Total MIPS per watt at full load."""
    if spec.p_max_w <= 0:
        raise ValueError(f"host {spec.id}: p_max_w must be positive")
    return spec.total_mips / spec.p_max_w


def fleet_by_id(fleet: Iterable[HostSpec]) -> dict[int, HostSpec]:
    out: dict[int, HostSpec] = {}
    for h in fleet:
        if h.id in out:
            raise ValueError(f"duplicate host id {h.id}")
        out[h.id] = h
    return out


def scale_fleet_power(fleet: Sequence[HostSpec], c: float) -> list[HostSpec]:
    if c <= 0:
        raise ValueError("scale must be positive")
    return [h.scaled_power(c) for h in fleet]

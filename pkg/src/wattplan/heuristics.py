"""Host selection for a single VM at its start instant.

Each selector takes the feasible candidates for one VM and returns the one it
prefers.  Ties always go to the lowest host id.  The scoring functions accept
either scalars or numpy arrays so the engine can score a whole fleet at once
with the same formulas used here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Mapping, Sequence, Union

import numpy as np

from .model import CAPACITY_TOL, HostState, VmRequest, green_metric


class NoFeasibleHost(LookupError):
    """Raised by a selector handed an empty candidate list."""


class HeuristicKind(enum.Enum):
    EPOBF_V1 = "epobf-v1"
    EPOBF_V2 = "epobf-v2"
    PABFD = "pabfd"
    VBP_GREEDY_L1 = "vbp-l1"
    VBP_GREEDY_L2 = "vbp-l2"

    @classmethod
    def parse(cls, name: Union[str, "HeuristicKind"]) -> "HeuristicKind":
        if isinstance(name, cls):
            return name
        key = "".join(ch for ch in name.lower() if ch.isalnum())
        aliases = {
            "epobfv1": cls.EPOBF_V1,
            "epobfv2": cls.EPOBF_V2,
            "pabfd": cls.PABFD,
            "vbpl1": cls.VBP_GREEDY_L1,
            "vbpl2": cls.VBP_GREEDY_L2,
            "vbpgreedyl1": cls.VBP_GREEDY_L1,
            "vbpgreedyl2": cls.VBP_GREEDY_L2,
        }
        try:
            return aliases[key]
        except KeyError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown heuristic {name!r} (choose from {choices})") from None

    @property
    def maximizes(self) -> bool:
        return self in (HeuristicKind.EPOBF_V1, HeuristicKind.EPOBF_V2)


@dataclass(frozen=True)
class Candidate:
    host_id: int
    score: float
    chosen_cores: tuple[int, ...]


HostView = Union[Mapping[int, HostState], Sequence[HostState]]


def sort_queue(vms: Sequence[VmRequest]) -> list[VmRequest]:
    """Earliest start first; equal starts by ascending VM id."""
    return sorted(vms, key=lambda vm: (vm.start_s, vm.id))


def pick_cores(core_load: Sequence[float], capacities: Sequence[float], vm: VmRequest):
    """Lowest-index cores that can each take ``vm.mips_per_pe`` more MIPS, or None."""
    cores = [c for c, (load, cap) in enumerate(zip(core_load, capacities))
             if load + vm.mips_per_pe <= cap + CAPACITY_TOL]
    if len(cores) < vm.pe_count:
        return None
    return tuple(cores[: vm.pe_count])


def find_candidate_hosts(vm: VmRequest, fleet: Sequence[HostState], t: float) -> list[Candidate]:
    """Every host that can take ``vm`` at instant ``t`` without breaking a capacity limit."""
    out = []
    for state in sorted(fleet, key=lambda s: s.spec.id):
        spec = state.spec
        if state.ram_used(t) + vm.ram_mb > spec.ram_mb + CAPACITY_TOL:
            continue
        if state.bw_used(t) + vm.bw_kbps > spec.bw_kbps + CAPACITY_TOL:
            continue
        cores = pick_cores(state.core_load(t), spec.mips_per_core, vm)
        if cores is None:
            continue
        out.append(Candidate(spec.id, 0.0, cores))
    return out


# -- scores -----------------------------------------------------------------

def power_increase(p_idle, p_max, total_mips, active_count, vm_mips):
    """Watts added by placing ``vm_mips`` on a host; an empty host also pays its idle draw."""
    dynamic = (p_max - p_idle) * (vm_mips / total_mips)
    return np.where(np.asarray(active_count) > 0, dynamic, p_idle + dynamic)


def epobf_v1_score(total_mips, p_max):
    return total_mips / p_max


def epobf_v2_score(total_mips, delta_p):
    with np.errstate(divide="ignore"):
        return np.divide(total_mips, delta_p)


def vbp_score(residual, demand, p: int):
    """Sum over resource dimensions of |residual - demand|**p, both capacity-normalised.

    ``residual`` and ``demand`` have the resource dimension last.
    """
    return np.sum(np.abs(np.asarray(residual) - np.asarray(demand)) ** p, axis=-1)


def _state(states: HostView, host_id: int) -> HostState:
    if isinstance(states, Mapping):
        return states[host_id]
    for s in states:
        if s.spec.id == host_id:
            return s
    raise KeyError(host_id)


def _best(candidates: Sequence[Candidate], scores, maximize: bool) -> Candidate:
    if not candidates:
        raise NoFeasibleHost("no feasible host")
    best = None
    for cand, score in zip(candidates, scores):
        score = float(score)
        if best is None:
            best = (cand, score)
            continue
        b_cand, b_score = best
        better = score > b_score if maximize else score < b_score
        if better or (score == b_score and cand.host_id < b_cand.host_id):
            best = (cand, score)
    cand, score = best
    return replace(cand, score=score)


def _delta_p(vm: VmRequest, state: HostState) -> float:
    spec = state.spec
    t = vm.start_s
    return float(power_increase(spec.p_idle_w, spec.p_max_w, spec.total_mips,
                                state.active_count(t), vm.total_mips))


def epobf_v1_select(vm: VmRequest, candidates: Sequence[Candidate], states: HostView) -> Candidate:
    scores = [green_metric(_state(states, c.host_id).spec) for c in candidates]
    return _best(candidates, scores, maximize=True)


def epobf_v2_select(vm: VmRequest, candidates: Sequence[Candidate], states: HostView) -> Candidate:
    scores = []
    for c in candidates:
        state = _state(states, c.host_id)
        scores.append(epobf_v2_score(state.spec.total_mips, _delta_p(vm, state)))
    return _best(candidates, scores, maximize=True)


def pabfd_select(vm: VmRequest, candidates: Sequence[Candidate], states: HostView) -> Candidate:
    scores = [_delta_p(vm, _state(states, c.host_id)) for c in candidates]
    return _best(candidates, scores, maximize=False)


def normalized_vectors(vm: VmRequest, state: HostState, t: float):
    spec = state.spec
    residual = (
        (spec.total_mips - state.allocated_mips(t)) / spec.total_mips,
        (spec.ram_mb - state.ram_used(t)) / spec.ram_mb,
        (spec.bw_kbps - state.bw_used(t)) / spec.bw_kbps,
    )
    demand = (vm.total_mips / spec.total_mips, vm.ram_mb / spec.ram_mb, vm.bw_kbps / spec.bw_kbps)
    return residual, demand


def vbp_select(vm: VmRequest, candidates: Sequence[Candidate], states: HostView, p: int) -> Candidate:
    if p not in (1, 2):
        raise ValueError(f"norm order must be 1 or 2, got {p}")
    scores = []
    for c in candidates:
        residual, demand = normalized_vectors(vm, _state(states, c.host_id), vm.start_s)
        scores.append(vbp_score(residual, demand, p))
    return _best(candidates, scores, maximize=False)


def select(kind: HeuristicKind, vm: VmRequest, candidates: Sequence[Candidate],
           states: HostView) -> Candidate:
    kind = HeuristicKind.parse(kind)
    if kind is HeuristicKind.EPOBF_V1:
        return epobf_v1_select(vm, candidates, states)
    if kind is HeuristicKind.EPOBF_V2:
        return epobf_v2_select(vm, candidates, states)
    if kind is HeuristicKind.PABFD:
        return pabfd_select(vm, candidates, states)
    if kind is HeuristicKind.VBP_GREEDY_L1:
        return vbp_select(vm, candidates, states, 1)
    return vbp_select(vm, candidates, states, 2)

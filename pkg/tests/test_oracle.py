import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wattplan.engine import PlacementPlan, audit, integrate_energy, run
from wattplan.heuristics import HeuristicKind
from wattplan.model import Assignment
from wattplan.oracle import TinyInstance, numeric_energy, optimal_energy

from conftest import DELL, HP, IBM, fleets, make_fleet, vm, workloads


def naive_optimum(vms, fleet):
    """Every host and every core subset per VM, no pruning at all."""
    best = math.inf
    options = []
    for v in vms:
        opts = []
        for h in fleet:
            for cores in itertools.combinations(range(h.pe_count), v.pe_count):
                opts.append(Assignment(v, h.id, cores))
        options.append(opts)
    for combo in itertools.product(*options):
        plan = PlacementPlan(tuple(combo), ())
        if audit(plan, fleet):
            continue
        best = min(best, integrate_energy(plan, fleet).total_energy_kwh)
    return best


def test_single_vm_single_host():
    fleet = make_fleet(IBM)
    kwh, plan = optimal_energy(TinyInstance((vm(0),), tuple(fleet)))
    _, report = run([vm(0)], fleet, "pabfd")
    assert kwh == report.total_energy_kwh
    assert [(a.vm_id, a.host_id) for a in plan.assignments] == [(0, 0)]


def test_oversized_vm_is_infeasible():
    kwh, plan = optimal_energy(TinyInstance((vm(0, mips=5000),), tuple(make_fleet(HP, IBM))))
    assert kwh == math.inf and plan is None


def test_caps_enforced():
    with pytest.raises(ValueError):
        TinyInstance(tuple(vm(i) for i in range(9)), (HP,))
    with pytest.raises(ValueError):
        TinyInstance((vm(0),), tuple(make_fleet(HP, HP, HP, HP, HP)))


def test_eleven_vms_optimum_not_above_epobf_v1():
    fleet = make_fleet(IBM, IBM, IBM, DELL)
    vms = [vm(i, duration=3600) for i in range(11)]
    kwh, plan = optimal_energy(TinyInstance(tuple(vms), tuple(fleet), allow_large=True))
    epobf = run(vms, fleet, "epobf-v1")[1].total_energy_kwh
    assert kwh <= epobf
    assert audit(plan, fleet) == []


def test_single_vm_optimum_can_beat_epobf_v1(three_servers):
    # one VM: the IBM host costs less than the highest-G Dell host
    kwh, plan = optimal_energy(TinyInstance((vm(0, duration=3600),), tuple(three_servers)))
    epobf = run([vm(0, duration=3600)], three_servers, "epobf-v1")[1].total_energy_kwh
    assert plan.assignments[0].host_id == 1
    assert kwh == pytest.approx(56.815 / 1000, abs=1e-6)
    assert epobf == pytest.approx(68.253 / 1000, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(workloads(min_size=1, max_size=3, horizon=20), fleets(max_size=2, templates=False))
def test_pruned_search_matches_naive_enumeration(vms, fleet):
    kwh, plan = optimal_energy(TinyInstance(tuple(vms), tuple(fleet)))
    naive = naive_optimum(vms, fleet)
    if naive == math.inf:
        assert plan is None
    else:
        assert kwh == pytest.approx(naive, rel=1e-12)
        assert audit(plan, fleet) == []


@settings(max_examples=60, deadline=None)
@given(workloads(min_size=1, max_size=6, horizon=50), fleets(max_size=3), st.sampled_from(list(HeuristicKind)))
def test_no_heuristic_beats_optimum(vms, fleet, kind):
    plan, report = run(vms, fleet, kind)
    placed = tuple(a.vm for a in plan.assignments)
    kwh, best = optimal_energy(TinyInstance(placed, tuple(fleet)))
    assert best is not None
    assert report.total_energy_kwh >= kwh - 1e-12


def test_numeric_energy_constant_plan_exact():
    fleet = make_fleet(DELL)
    plan = PlacementPlan((Assignment(vm(0, start=0, duration=7200), 0, (0,)),), ())
    exact = integrate_energy(plan, fleet).total_energy_kwh
    for dt in (1, 60, 3600, 7200):
        assert numeric_energy(plan, fleet, dt) == pytest.approx(exact, rel=1e-12)


def test_numeric_energy_empty_plan():
    assert numeric_energy(PlacementPlan((), ()), make_fleet(HP)) == 0.0


def test_numeric_energy_rejects_bad_step():
    with pytest.raises(ValueError):
        numeric_energy(PlacementPlan((), ()), make_fleet(HP), 0)

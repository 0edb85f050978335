import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wattplan.model import (
    Assignment,
    HostSpec,
    HostState,
    VmRequest,
    energy_wh,
    green_metric,
    power,
    utilization,
)

from conftest import DELL, HP, IBM, vm


def loaded(spec, *vms):
    state = HostState(spec)
    for i, v in enumerate(vms):
        state = state.with_assignment(Assignment(v, spec.id, (i,)))
    return state


def test_utilization_empty_host():
    assert utilization(HostState(DELL), 5) == 0.0


def test_utilization_one_vm_on_dell():
    state = loaded(DELL, vm(0))
    assert utilization(state, 0) == pytest.approx(0.058741, abs=1e-6)


def test_utilization_saturated_dell():
    state = loaded(DELL, *[vm(i, mips=2660) for i in range(16)])
    assert utilization(state, 50) == 1.0


def test_utilization_respects_half_open_interval():
    state = loaded(DELL, vm(0, start=10, duration=5))
    assert utilization(state, 9) == 0.0
    assert utilization(state, 10) > 0
    assert utilization(state, 15) == 0.0


@pytest.mark.parametrize("spec,u,n,expected", [
    (HP, 1.0, 1, 135.0),
    (IBM, 0.5, 1, 77.3),
    (DELL, 0.7, 0, 0.0),
    (HP, 0.0, 2, 93.7),
])
def test_power(spec, u, n, expected):
    assert power(spec, u, n) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("u", [-0.01, 1.01, math.nan])
def test_power_rejects_bad_utilization(u):
    with pytest.raises(ValueError):
        power(HP, u, 1)


def test_energy_empty_interval():
    assert energy_wh(DELL, 0.5, 1, 0) == 0.0


def test_energy_negative_interval_rejected():
    with pytest.raises(ValueError):
        energy_wh(DELL, 0.5, 1, -1)


def test_energy_hp_full_hour():
    assert energy_wh(HP, 1.0, 1, 3600) == pytest.approx(135.0)


def test_energy_dell_two_hours_matches_fine_quadrature():
    u = 2500 / 42560
    analytic = energy_wh(DELL, u, 1, 7200)
    # trapezoid quadrature of the constant power curve sampled every 0.1 s
    t = np.linspace(0.0, 7200.0, 72001)
    watts = np.full_like(t, 56.1 + (263.0 - 56.1) * u)
    quad = np.trapezoid(watts, t) / 3600.0
    assert analytic == pytest.approx(136.507, abs=1e-3)
    assert analytic == pytest.approx(quad, rel=1e-9)


@pytest.mark.parametrize("spec,expected", [(HP, 39.407), (IBM, 103.823), (DELL, 161.825)])
def test_green_metric_table_values(spec, expected):
    assert green_metric(spec) == pytest.approx(expected, abs=1e-3)


def test_green_metric_requires_positive_pmax():
    spec = HostSpec.uniform(0, "x", 1, 1000, 1024, 1000, 0.0, 0.0)
    with pytest.raises(ValueError):
        green_metric(spec)


@pytest.mark.parametrize("kwargs", [
    dict(pe_count=0, mips_per_core=()),
    dict(pe_count=2, mips_per_core=(1000,)),
    dict(pe_count=1, mips_per_core=(0,)),
    dict(ram_mb=0),
    dict(bw_kbps=-1),
    dict(p_idle_w=200.0, p_max_w=100.0),
    dict(p_idle_w=-1.0),
])
def test_hostspec_invariants(kwargs):
    base = dict(id=0, group_label="x", pe_count=1, mips_per_core=(1000,), ram_mb=1024,
                bw_kbps=1000, p_idle_w=10.0, p_max_w=20.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        HostSpec(**base)


def test_hostspec_total_mips_is_exact_sum():
    spec = HostSpec(0, "mixed", 3, (1000.5, 2000.25, 3), 1024, 1000, 1, 2)
    assert spec.total_mips == 1000.5 + 2000.25 + 3


@pytest.mark.parametrize("kwargs", [
    dict(pe_count=0), dict(mips_per_pe=0), dict(duration_s=0), dict(start_s=-1), dict(ram_mb=-5),
])
def test_vmrequest_invariants(kwargs):
    base = dict(id=0, pe_count=1, mips_per_pe=100, ram_mb=1, bw_kbps=1, start_s=0, duration_s=1)
    base.update(kwargs)
    with pytest.raises(ValueError):
        VmRequest(**base)


def test_assignment_needs_distinct_cores_matching_pe():
    v = vm(0, pe=2)
    with pytest.raises(ValueError):
        Assignment(v, 0, (1,))
    with pytest.raises(ValueError):
        Assignment(v, 0, (1, 1))
    a = Assignment(v, 0, (3, 1))
    assert a.end_s - a.start_s == v.duration_s


def test_power_sample_zero_when_idle():
    s = HostState(IBM).sample(0)
    assert (s.utilization, s.watts) == (0.0, 0.0)
    s = loaded(IBM, vm(0)).sample(0)
    assert IBM.p_idle_w <= s.watts <= IBM.p_max_w


specs = st.sampled_from([HP, IBM, DELL])
units = st.floats(0.0, 1.0)


@given(specs, units, units)
def test_power_monotone_in_utilization(spec, a, b):
    lo, hi = sorted((a, b))
    assert power(spec, lo, 1) <= power(spec, hi, 1)


@given(specs, units, st.integers(1, 10**6), st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
def test_energy_additive_over_splits(spec, u, dt, weights):
    whole = energy_wh(spec, u, 1, dt)
    cuts = np.cumsum(weights) / sum(weights) * dt
    edges = np.concatenate([[0.0], cuts])
    edges[-1] = dt
    parts = math.fsum(energy_wh(spec, u, 1, float(b - a)) for a, b in zip(edges[:-1], edges[1:]))
    assert parts == pytest.approx(whole, rel=1e-9, abs=1e-12)


@given(specs, units, st.integers(0, 3), st.integers(-4, 4))
def test_uniform_power_scaling(spec, u, n, k):
    c = 2.0 ** k
    assert power(spec.scaled_power(c), u, n) == c * power(spec, u, n)
    assert energy_wh(spec.scaled_power(c), u, n, 3600) == pytest.approx(c * energy_wh(spec, u, n, 3600))


@settings(max_examples=50)
@given(st.floats(0.1, 10.0), specs, units)
def test_power_scaling_arbitrary_factor(c, spec, u):
    assert power(spec.scaled_power(c), u, 1) == pytest.approx(c * power(spec, u, 1), rel=1e-12)

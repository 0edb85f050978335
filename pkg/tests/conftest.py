import re
from pathlib import Path

import pytest
from hypothesis import strategies as st

from wattplan.fleet import server_templates
from wattplan.model import HostSpec, VmRequest

DATA = Path(__file__).parent / "data"

TEMPLATES = server_templates()
HP = TEMPLATES["hp-ml110g5"]
IBM = TEMPLATES["ibm-x3250"]
DELL = TEMPLATES["dell-r620"]


def make_fleet(*templates):
    return [t.with_id(i) for i, t in enumerate(templates)]


def vm(id, start=0, duration=100, mips=2500, pe=1, ram=870, bw=10000):
    return VmRequest(id=id, pe_count=pe, mips_per_pe=mips, ram_mb=ram, bw_kbps=bw,
                     start_s=start, duration_s=duration)


@pytest.fixture
def three_servers():
    return make_fleet(HP, IBM, DELL)


# -- hypothesis strategies ----------------------------------------------------

@st.composite
def random_host(draw, id, templates=True):
    if templates and draw(st.booleans()):
        return draw(st.sampled_from([HP, IBM, DELL])).with_id(id)
    pe = draw(st.integers(1, 4))
    mips = draw(st.sampled_from([1000, 2000, 2660, 3000]))
    p_idle = draw(st.integers(0, 150))
    p_max = p_idle + draw(st.integers(0, 150))
    if p_max == 0:
        p_max = 1
    return HostSpec.uniform(id, "random", pe, mips, draw(st.sampled_from([2048, 4096, 8192])),
                            draw(st.sampled_from([20000, 10_000_000])), p_idle, p_max)


@st.composite
def fleets(draw, min_size=1, max_size=4, templates=True):
    n = draw(st.integers(min_size, max_size))
    return [draw(random_host(i, templates)) for i in range(n)]


@st.composite
def workloads(draw, min_size=0, max_size=12, horizon=200):
    n = draw(st.integers(min_size, max_size))
    out = []
    for i in range(n):
        out.append(VmRequest(
            id=i,
            pe_count=draw(st.integers(1, 2)),
            mips_per_pe=draw(st.sampled_from([500, 1000, 2000, 2500])),
            ram_mb=draw(st.sampled_from([613, 870, 1740, 3840])),
            bw_kbps=10000,
            start_s=draw(st.integers(0, horizon)),
            duration_s=draw(st.integers(1, horizon)),
        ))
    return out


# -- acceptance summary ---------------------------------------------------------

_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m:
        _ACCEPTANCE.setdefault(int(m.group(1)), []).append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        results = _ACCEPTANCE[n]
        ok = all(outcome == "passed" for _, outcome in results)
        names = ", ".join(f"{name}={outcome}" for name, outcome in results)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  ({names})")

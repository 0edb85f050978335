"""Standard Workload Format traces to VM requests.

Each surviving job becomes one single-core VM per allocated processor.  A
task's length in MI is its runtime times a fixed CPU rating; the VM type is
picked from a four-entry catalog.
"""

from __future__ import annotations

import csv
import gzip
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .model import VmRequest

log = logging.getLogger(__name__)

SWF_FIELDS = 18

WORKLOAD_COLUMNS = ["vm_id", "start_s", "duration_s", "pe", "mips", "ram_mb", "bw_kbps",
                    "length_mi", "source_job"]


class EmptyTraceError(ValueError):
    pass


@dataclass(frozen=True)
class SwfJob:
    job_id: int
    submit_s: int
    wait_s: int
    run_s: int
    procs_allocated: int
    procs_requested: int = -1
    fields: tuple = field(default=(), repr=False, compare=False)

    @property
    def procs(self) -> int:
        """Allocated processors, falling back to the requested count."""
        return self.procs_allocated if self.procs_allocated >= 1 else self.procs_requested

    @property
    def start_s(self) -> int:
        return self.submit_s + self.wait_s


@dataclass(frozen=True)
class VmType:
    name: str
    mips: float
    ram_mb: float
    bw_kbps: float = 10000.0
    pe_count: int = 1


VM_TYPES = (
    VmType("high-cpu", 2500, 870),
    VmType("extra", 2000, 3840),
    VmType("small", 1000, 1740),
    VmType("micro", 500, 613),
)


def vm_type(name: str) -> VmType:
    for t in VM_TYPES:
        if t.name == name:
            return t
    raise ValueError(f"unknown VM type {name!r} (choose from {', '.join(t.name for t in VM_TYPES)})")


@dataclass(frozen=True)
class ConversionParams:
    cpu_rating: float = 375.0
    min_runtime_s: int = 300
    duration_mode: str = "mips-scaled"
    vm_type_policy: str = "cyclic"
    max_jobs: Optional[int] = None

    def __post_init__(self):
        if self.cpu_rating <= 0:
            raise ValueError("cpu_rating must be positive")
        if self.min_runtime_s < 0:
            raise ValueError("min_runtime_s must be >= 0")
        if self.duration_mode not in ("mips-scaled", "trace-runtime"):
            raise ValueError(f"unknown duration mode {self.duration_mode!r}")
        if self.vm_type_policy != "cyclic":
            if not self.vm_type_policy.startswith("fixed:"):
                raise ValueError(f"unknown vm type policy {self.vm_type_policy!r}")
            vm_type(self.vm_type_policy.split(":", 1)[1])
        if self.max_jobs is not None and self.max_jobs < 0:
            raise ValueError("max_jobs must be >= 0")

    def as_dict(self) -> dict:
        return {
            "cpu_rating": self.cpu_rating,
            "min_runtime_s": self.min_runtime_s,
            "duration_mode": self.duration_mode,
            "vm_type_policy": self.vm_type_policy,
            "max_jobs": self.max_jobs,
        }


@dataclass(frozen=True)
class SwfParseError:
    line_no: int
    message: str


def _num(token: str) -> int:
    x = float(token)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {token!r}")
    return int(x)


def parse_swf(stream: TextIO, errors: Optional[list] = None) -> list[SwfJob]:
    """Read SWF records in file order.

    Lines that are not 18 numeric fields are skipped; each is logged and, if
    ``errors`` is given, appended to it as a :class:`SwfParseError`.
    """
    jobs = []
    for line_no, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith(";"):
            continue
        tokens = text.split()
        try:
            if len(tokens) != SWF_FIELDS:
                raise ValueError(f"expected {SWF_FIELDS} fields, got {len(tokens)}")
            values = tuple(_num(tok) for tok in tokens)
        except ValueError as exc:
            log.warning("line %d: %s", line_no, exc)
            if errors is not None:
                errors.append(SwfParseError(line_no, str(exc)))
            continue
        jobs.append(SwfJob(job_id=values[0], submit_s=values[1], wait_s=values[2], run_s=values[3],
                           procs_allocated=values[4], procs_requested=values[7], fields=values))
    return jobs


def read_swf(path, errors: Optional[list] = None) -> list[SwfJob]:
    """Parse an SWF file (plain or ``.gz``); raise :class:`EmptyTraceError` if it holds no records."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8", errors="replace") as fh:
        jobs = parse_swf(fh, errors)
    if not jobs:
        raise EmptyTraceError(f"{path}: empty trace (no job records)")
    return jobs


@dataclass
class Conversion:
    vms: list[VmRequest]
    job_count: int
    kept_jobs: int
    short_jobs: int
    invalid_jobs: int

    @property
    def task_count(self) -> int:
        return len(self.vms)


def _valid(job: SwfJob) -> bool:
    return job.submit_s >= 0 and job.wait_s >= 0 and job.run_s >= 1 and job.procs >= 1


def convert_jobs(jobs: Iterable[SwfJob], params: ConversionParams = ConversionParams()) -> Conversion:
    vms: list[VmRequest] = []
    job_count = kept = short = invalid = 0
    for job in jobs:
        if params.max_jobs is not None and kept >= params.max_jobs:
            break
        job_count += 1
        if not _valid(job):
            invalid += 1
            continue
        if job.run_s < params.min_runtime_s:
            short += 1
            continue
        kept += 1
        length_mi = job.run_s * params.cpu_rating
        for _ in range(job.procs):
            idx = len(vms)
            if params.vm_type_policy == "cyclic":
                vt = VM_TYPES[idx % len(VM_TYPES)]
            else:
                vt = vm_type(params.vm_type_policy.split(":", 1)[1])
            if params.duration_mode == "mips-scaled":
                duration = math.ceil(length_mi / vt.mips)
            else:
                duration = job.run_s
            vms.append(VmRequest(id=idx, pe_count=vt.pe_count, mips_per_pe=vt.mips, ram_mb=vt.ram_mb,
                                 bw_kbps=vt.bw_kbps, start_s=job.start_s, duration_s=duration,
                                 source_job=job.job_id, length_mi=length_mi))
    return Conversion(vms, job_count, kept, short, invalid)


def convert(jobs: Iterable[SwfJob], params: ConversionParams = ConversionParams()) -> list[VmRequest]:
    return convert_jobs(jobs, params).vms


# -- internal workload file ---------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def dumps_workload(vms: Sequence[VmRequest]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(WORKLOAD_COLUMNS)
    for v in vms:
        w.writerow([v.id, v.start_s, v.duration_s, v.pe_count, _fmt(float(v.mips_per_pe)),
                    _fmt(float(v.ram_mb)), _fmt(float(v.bw_kbps)),
                    _fmt(None if v.length_mi is None else float(v.length_mi)), _fmt(v.source_job)])
    return buf.getvalue()


def loads_workload(text: str) -> list[VmRequest]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames != WORKLOAD_COLUMNS:
        raise ValueError(f"workload header must be {','.join(WORKLOAD_COLUMNS)}")
    out = []
    for line_no, r in enumerate(rows, start=2):
        try:
            out.append(VmRequest(
                id=int(r["vm_id"]), pe_count=int(r["pe"]), mips_per_pe=float(r["mips"]),
                ram_mb=float(r["ram_mb"]), bw_kbps=float(r["bw_kbps"]), start_s=int(r["start_s"]),
                duration_s=int(r["duration_s"]),
                source_job=int(r["source_job"]) if r["source_job"] else None,
                length_mi=float(r["length_mi"]) if r["length_mi"] else None,
            ))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"workload line {line_no}: {exc}") from None
    return out


def write_workload(path, vms: Sequence[VmRequest]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_workload(vms))


def read_workload(path) -> list[VmRequest]:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_workload(fh.read())


# -- histograms -----------------------------------------------------------------

@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def rows(self) -> list[tuple[float, float, int]]:
        return [(float(self.edges[i]), float(self.edges[i + 1]), int(self.counts[i]))
                for i in range(len(self.counts))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bucket_start", "bucket_end", "count"])
        for lo, hi, n in self.rows():
            w.writerow([_fmt(lo), _fmt(hi), n])
        return buf.getvalue()


def histogram(values, width: float) -> Histogram:
    """Fixed-width buckets aligned to multiples of ``width``."""
    if width <= 0:
        raise ValueError("bucket width must be positive")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return Histogram(np.zeros(0), np.zeros(0, dtype=np.int64))
    first = math.floor(values.min() / width)
    bins = np.floor(values / width).astype(np.int64) - first
    counts = np.bincount(bins)
    edges = (first + np.arange(counts.size + 1)) * width
    return Histogram(edges, counts)


def task_length_mi(vm: VmRequest) -> float:
    if vm.length_mi is not None:
        return vm.length_mi
    return vm.duration_s * vm.total_mips


def stats(workload: Sequence[VmRequest], start_bucket_s: float = 3600.0,
          length_bucket_mi: float = 1e6) -> dict[str, Histogram]:
    """Start-time rate and task-length histograms."""
    return {
        "start_rate": histogram([v.start_s for v in workload], start_bucket_s),
        "length_mi": histogram([task_length_mi(v) for v in workload], length_bucket_mi),
    }

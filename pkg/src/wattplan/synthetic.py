"""Synthetic SWF traces for demos and tests when no archive trace is at hand.

The shape loosely follows a batch HPC log: Poisson arrivals, log-normal
runtimes, and processor counts that are mostly powers of two.
"""

from __future__ import annotations

import io

import numpy as np

HEADER = """; Version: 2.2
; Computer: synthetic
; Note: generated by wattplan.synthetic, not an archive trace
"""


def synthetic_swf(n_jobs: int, seed: int = 0, mean_interarrival_s: float = 600.0,
                  median_runtime_s: float = 1800.0, max_procs: int = 128) -> str:
    """Return SWF text with ``n_jobs`` records."""
    rng = np.random.default_rng(seed)
    submit = np.cumsum(rng.exponential(mean_interarrival_s, n_jobs)).astype(np.int64)
    wait = rng.exponential(300.0, n_jobs).astype(np.int64)
    run = np.clip(rng.lognormal(np.log(median_runtime_s), 1.2, n_jobs), 1, 64800).astype(np.int64)
    exps = np.arange(int(np.log2(max_procs)) + 1)
    weights = 1.0 / (1.0 + exps)
    procs = 2 ** rng.choice(exps, size=n_jobs, p=weights / weights.sum())
    buf = io.StringIO()
    buf.write(HEADER)
    for i in range(n_jobs):
        fields = [i + 1, submit[i], wait[i], run[i], procs[i], -1, -1, procs[i], run[i] * 2,
                  -1, 1, 1 + i % 50, 1, -1, 1, -1, -1, -1]
        buf.write(" ".join(str(int(f)) for f in fields) + "\n")
    return buf.getvalue()

"""Compare all heuristics on a generated SWF trace and a 150-host fleet.

Swap in an archive trace by passing its path as the first argument.

Run: python3 demos/03_compare_on_synthetic_trace.py [trace.swf]
"""

import io
import sys

from wattplan import fleet, report, workload
from wattplan.synthetic import synthetic_swf

params = workload.ConversionParams(max_jobs=500)
if len(sys.argv) > 1:
    jobs = workload.read_swf(sys.argv[1])
else:
    jobs = workload.parse_swf(io.StringIO(synthetic_swf(2000, seed=1)))
conv = workload.convert_jobs(jobs, params)
print(f"{conv.kept_jobs} jobs kept, {conv.short_jobs} short, {conv.task_count} VMs")

hosts = fleet.default_fleet(150)
kinds = ["epobf-v1", "epobf-v2", "pabfd", "vbp-l1", "vbp-l2"]
rows, _ = report.compare(conv.vms, hosts, kinds, baseline="pabfd", workers=1)
print(report.compare_csv(rows), end="")

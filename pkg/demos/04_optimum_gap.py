"""How far the heuristics sit from the exhaustive optimum on tiny instances.

The last part shows a case where picking the highest MIPS-per-watt host is
not optimal: one small VM is cheaper on the IBM box because the Dell's idle
draw dominates at low load.

Run: python3 demos/04_optimum_gap.py
"""

import numpy as np

from wattplan import engine, fleet, oracle
from wattplan.model import VmRequest, green_metric
from wattplan.workload import VM_TYPES

rng = np.random.default_rng(5)
t = fleet.server_templates()
templates = list(t.values())
gaps = {k: [] for k in ("epobf-v1", "epobf-v2", "pabfd", "vbp-l1", "vbp-l2")}
for _ in range(100):
    hosts = [templates[rng.integers(3)].with_id(i) for i in range(int(rng.integers(1, 4)))]
    vms = []
    for i in range(int(rng.integers(1, 7))):
        vt = VM_TYPES[rng.integers(4)]
        vms.append(VmRequest(i, 1, vt.mips, vt.ram_mb, vt.bw_kbps,
                             int(rng.integers(0, 3600)), int(rng.integers(60, 3600))))
    best, _ = oracle.optimal_energy(oracle.TinyInstance(vms, hosts))
    for kind in gaps:
        plan, rep = engine.run(vms, hosts, kind)
        if not plan.rejections and best > 0:
            gaps[kind].append(rep.total_energy_kwh / best - 1)

for kind, g in gaps.items():
    g = np.array(g)
    print(f"{kind:<9} optimal on {np.mean(g < 1e-9):5.1%} of instances, mean gap {g.mean():6.2%}, "
          f"worst {g.max():6.2%}")

hosts = [t["ibm-x3250"].with_id(0), t["dell-r620"].with_id(1)]
one = [VmRequest(0, 1, 2500, 870, 10000, 0, 3600)]
print(f"\nMIPS/W: IBM {green_metric(hosts[0]):.1f}, Dell {green_metric(hosts[1]):.1f}")
print(f"epobf-v1 {engine.run(one, hosts, 'epobf-v1')[1].total_energy_kwh:.6f} kWh on the Dell")
print(f"optimum  {oracle.optimal_energy(oracle.TinyInstance(one, hosts))[0]:.6f} kWh on the IBM")

"""Eleven identical VMs, three IBM hosts and one Dell host.

The MIPS-per-watt heuristics pack everything onto the 16-core Dell, while the
power-increase heuristic fills the cheap 4-core IBM boxes one at a time.

Run: python3 demos/02_eleven_vms.py
"""

from wattplan import engine, fleet
from wattplan.model import VmRequest

t = fleet.server_templates()
hosts = [t["ibm-x3250"].with_id(i) for i in range(3)] + [t["dell-r620"].with_id(3)]
vms = [VmRequest(i, 1, 2500, 870, 10000, start_s=0, duration_s=3600) for i in range(11)]

for kind in ("epobf-v1", "epobf-v2", "pabfd", "vbp-l1", "vbp-l2"):
    plan, report = engine.run(vms, hosts, kind)
    per_host = {}
    for a in plan.assignments:
        per_host[a.host_id] = per_host.get(a.host_id, 0) + 1
    layout = ", ".join(f"{hosts[h].group_label}#{h}x{n}" for h, n in sorted(per_host.items()))
    print(f"{kind:<9} {report.total_energy_kwh:.4f} kWh  {layout}")

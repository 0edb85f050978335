"""Power curves and MIPS-per-watt of the three reference servers.

Run: python3 demos/01_power_and_green_metric.py
"""

import numpy as np

from wattplan import fleet, model

templates = fleet.server_templates()

print(f"{'server':<12} {'cores':>5} {'MIPS':>7} {'idle W':>7} {'max W':>6} {'MIPS/W':>8}")
for label, spec in templates.items():
    print(f"{label:<12} {spec.pe_count:>5} {spec.total_mips:>7.0f} {spec.p_idle_w:>7.1f} "
          f"{spec.p_max_w:>6.1f} {model.green_metric(spec):>8.3f}")

# Power along the utilisation axis. An empty host draws nothing, a host with
# one tiny VM already pays the full idle power.
u = np.linspace(0, 1, 6)
print("\nutilisation " + " ".join(f"{x:>6.1f}" for x in u))
for label, spec in templates.items():
    watts = model.linear_power(spec.p_idle_w, spec.p_max_w, u, 1)
    print(f"{label:<11} " + " ".join(f"{w:>6.1f}" for w in watts))

# One 2500-MIPS VM for an hour on each server type.
for label, spec in templates.items():
    u1 = 2500 / spec.total_mips
    print(f"one VM on {label:<11}: {model.energy_wh(spec, u1, 1, 3600):6.2f} Wh")

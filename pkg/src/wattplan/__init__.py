"""Energy-aware placement of fixed-interval VMs on heterogeneous multicore hosts."""

from .engine import (
    InfeasiblePlanError,
    PlacementPlan,
    Rejection,
    SimulationReport,
    Violation,
    audit,
    integrate_energy,
    run,
)
from .fleet import FleetConfig, default_fleet, load_fleet, server_templates
from .heuristics import Candidate, HeuristicKind, NoFeasibleHost, find_candidate_hosts, sort_queue
from .model import (
    Assignment,
    HostSpec,
    HostState,
    PowerSample,
    VmRequest,
    energy_wh,
    green_metric,
    power,
    utilization,
)
from .oracle import TinyInstance, numeric_energy, optimal_energy
from .report import CompareRow, compare
from .workload import ConversionParams, SwfJob, VM_TYPES, VmType, convert, parse_swf, stats

__version__ = "0.1.0"

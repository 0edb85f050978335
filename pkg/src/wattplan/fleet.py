"""Fleet configuration: groups of identical hosts loaded from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .model import HostSpec

DEFAULT_FLEET = "reference_fleet.json"


@dataclass(frozen=True)
class FleetConfig:
    groups: tuple[tuple[HostSpec, int], ...]

    def __post_init__(self):
        for template, count in self.groups:
            if count < 0:
                raise ValueError(f"group {template.group_label}: negative count")
            if template.p_max_w <= 0:
                raise ValueError(f"group {template.group_label}: p_max_w must be positive")

    @property
    def size(self) -> int:
        return sum(count for _, count in self.groups)

    def build(self) -> list[HostSpec]:
        """Concrete hosts, numbered from 0 in group order."""
        hosts = []
        for template, count in self.groups:
            for _ in range(count):
                hosts.append(template.with_id(len(hosts)))
        return hosts

    def with_counts(self, counts: Sequence[int]) -> "FleetConfig":
        if len(counts) != len(self.groups):
            raise ValueError(f"expected {len(self.groups)} counts, got {len(counts)}")
        return FleetConfig(tuple((t, int(n)) for (t, _), n in zip(self.groups, counts)))

    def with_total(self, total: int) -> "FleetConfig":
        return self.with_counts(split_evenly(total, len(self.groups)))

    def to_dict(self) -> dict:
        groups = []
        for t, count in self.groups:
            mips = t.mips_per_core[0] if len(set(t.mips_per_core)) == 1 else list(t.mips_per_core)
            groups.append({"label": t.group_label, "count": count, "pe_count": t.pe_count,
                           "mips_per_core": mips, "ram_mb": t.ram_mb, "bw_kbps": t.bw_kbps,
                           "p_idle_w": t.p_idle_w, "p_max_w": t.p_max_w})
        return {"groups": groups}

    @classmethod
    def from_dict(cls, data: dict) -> "FleetConfig":
        try:
            raw_groups = data["groups"]
        except (KeyError, TypeError):
            raise ValueError("fleet config needs a 'groups' array") from None
        groups = []
        for i, g in enumerate(raw_groups):
            try:
                pe = int(g["pe_count"])
                mips = g["mips_per_core"]
                mips = tuple(mips) if isinstance(mips, list) else (float(mips),) * pe
                template = HostSpec(-1, str(g["label"]), pe, mips, float(g["ram_mb"]),
                                    float(g["bw_kbps"]), float(g["p_idle_w"]), float(g["p_max_w"]))
                groups.append((template, int(g["count"])))
            except KeyError as exc:
                raise ValueError(f"fleet group {i}: missing field {exc}") from None
        return cls(tuple(groups))


def split_evenly(total: int, parts: int) -> list[int]:
    """Largest-remainder split of ``total`` into ``parts`` near-equal counts, larger first."""
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def load_fleet(path=None) -> FleetConfig:
    """Read a fleet JSON file, or the bundled three-model default when ``path`` is None."""
    if path is None:
        text = resources.files("wattplan.data").joinpath(DEFAULT_FLEET).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return FleetConfig.from_dict(json.loads(text))


def default_fleet(total: int | None = None) -> list[HostSpec]:
    cfg = load_fleet()
    if total is not None:
        cfg = cfg.with_total(total)
    return cfg.build()


def server_templates() -> dict[str, HostSpec]:
    """The three bundled server models keyed by label."""
    return {t.group_label: t for t, _ in load_fleet().groups}

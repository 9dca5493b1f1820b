"""Two-tier resource pools, the edge/backend link, and the pool sweep."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_MBPS = 12.0


class PlatformError(ValueError):
    pass


class Tier(str, enum.Enum):
    FRONTEND = "frontend"
    BACKEND = "backend"

    @classmethod
    def parse(cls, name: str) -> "Tier":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise PlatformError(f"unknown tier {name!r}") from None


class Contention(str, enum.Enum):
    NONE = "none"
    SERIALIZED = "serialized"

    @classmethod
    def parse(cls, name: str) -> "Contention":
        if isinstance(name, cls):
            return name
        key = str(name).lower()
        if key in ("serial", "serialized"):
            return cls.SERIALIZED
        if key == "none":
            return cls.NONE
        raise PlatformError(f"unknown contention mode {name!r}")


@dataclass(frozen=True)
class PeKind:
    name: str
    tier: Tier


ARM = PeKind("arm-cpu", Tier.FRONTEND)
VOLTA = PeKind("volta-gpu", Tier.FRONTEND)
XEON = PeKind("xeon-cpu", Tier.BACKEND)
TESLA = PeKind("tesla-gpu", Tier.BACKEND)
ALVEO = PeKind("alveo-fpga", Tier.BACKEND)

DEFAULT_KINDS = (ARM, VOLTA, XEON, TESLA, ALVEO)


@dataclass(frozen=True)
class PeInstance:
    id: int
    kind: PeKind

    @property
    def tier(self) -> Tier:
        return self.kind.tier


@dataclass(frozen=True)
class ResourcePool:
    instances: tuple[PeInstance, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        if not self.instances:
            raise PlatformError("resource pool is empty")
        ids = [pe.id for pe in self.instances]
        if len(set(ids)) != len(ids):
            raise PlatformError("duplicate PE ids in pool")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def kinds(self) -> list[PeKind]:
        out: list[PeKind] = []
        for pe in self.instances:
            if pe.kind not in out:
                out.append(pe.kind)
        return out

    def counts(self) -> dict[str, int]:
        acc: dict[str, int] = {}
        for pe in self.instances:
            acc[pe.kind.name] = acc.get(pe.kind.name, 0) + 1
        return acc


@dataclass(frozen=True)
class LinkModel:
    rate: float = DEFAULT_MBPS  # megabits per second
    contention: Contention = Contention.NONE

    def __post_init__(self):
        if not self.rate > 0:
            raise PlatformError(f"link rate must be > 0, got {self.rate}")
        object.__setattr__(self, "contention", Contention.parse(self.contention))


@dataclass(frozen=True)
class PoolSweepSpec:
    """Grid over ARM and Xeon counts; the other kinds stay fixed."""

    arm_range: tuple[int, ...] = (1, 2, 3)
    xeon_range: tuple[int, ...] = (1, 2, 3)
    fixed: Mapping[str, int] = field(
        default_factory=lambda: {"volta-gpu": 1, "tesla-gpu": 1, "alveo-fpga": 1}
    )

    def __post_init__(self):
        object.__setattr__(self, "arm_range", tuple(self.arm_range))
        object.__setattr__(self, "xeon_range", tuple(self.xeon_range))
        for name, rng in (("arm", self.arm_range), ("xeon", self.xeon_range)):
            if not rng:
                raise PlatformError(f"{name} range is empty")
            if min(rng) < 1:
                raise PlatformError(f"{name} range must start at >= 1")
        if any(v < 0 for v in self.fixed.values()):
            raise PlatformError("fixed counts must be >= 0")


def build_pool(
    counts: Mapping[str, int],
    kinds: Iterable[PeKind] = DEFAULT_KINDS,
    label: str | None = None,
) -> ResourcePool:
    """Instantiate PEs with sequential ids, frontend kinds first.

    Within a tier, kinds keep the order they are declared in ``kinds``.
    """
    kinds = list(kinds)
    known = {k.name for k in kinds}
    unknown = set(counts) - known
    if unknown:
        raise PlatformError(f"counts reference undeclared kinds: {sorted(unknown)}")
    ordered = [k for k in kinds if k.tier is Tier.FRONTEND] + [
        k for k in kinds if k.tier is Tier.BACKEND
    ]
    instances = []
    for kind in ordered:
        n = int(counts.get(kind.name, 0))
        if n < 0:
            raise PlatformError(f"negative count for {kind.name}")
        for _ in range(n):
            instances.append(PeInstance(len(instances), kind))
    if not instances:
        raise PlatformError("pool has zero instances")
    if label is None:
        label = "+".join(f"{counts[k.name]}x{k.name}" for k in ordered if counts.get(k.name))
    return ResourcePool(tuple(instances), label)


def pool_from_dict(doc: Mapping) -> tuple[ResourcePool, LinkModel]:
    """Build a pool and link from a pool document (see README for the schema)."""
    try:
        kinds = [PeKind(str(k["name"]), Tier.parse(k["tier"])) for k in doc["kinds"]]
        counts = {str(k): int(v) for k, v in doc["counts"].items()}
    except (KeyError, TypeError) as exc:
        raise PlatformError(f"malformed pool document: {exc}") from None
    if len({k.name for k in kinds}) != len(kinds):
        raise PlatformError("duplicate kind names in pool document")
    link_doc = doc.get("link", {})
    link = LinkModel(
        float(link_doc.get("mbps", DEFAULT_MBPS)), link_doc.get("contention", "none")
    )
    return build_pool(counts, kinds, doc.get("label")), link


def load_pool(path) -> tuple[ResourcePool, LinkModel]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PlatformError(f"malformed pool document: {exc}") from None
    return pool_from_dict(doc)


def grid_label(arm: int, xeon: int) -> str:
    return f"{arm}ARM-{xeon}Xeon"


EDGE_ONLY_LABEL = "Edge only"
SERVER_ONLY_LABEL = "Server only"


def enumerate_sweep(spec: PoolSweepSpec | None = None) -> list[ResourcePool]:
    """Grid pools (ARM-major), then the edge-only and server-only pools."""
    spec = spec or PoolSweepSpec()
    fixed = dict(spec.fixed)
    pools = []
    for arm in spec.arm_range:
        for xeon in spec.xeon_range:
            counts = {**fixed, ARM.name: arm, XEON.name: xeon}
            pools.append(build_pool(counts, label=grid_label(arm, xeon)))
    edge = {ARM.name: max(spec.arm_range), VOLTA.name: fixed.get(VOLTA.name, 1)}
    pools.append(build_pool(edge, label=EDGE_ONLY_LABEL))
    server = {
        XEON.name: max(spec.xeon_range),
        TESLA.name: fixed.get(TESLA.name, 1),
        ALVEO.name: fixed.get(ALVEO.name, 1),
    }
    # no frontend PE here: the edge still sources all raw input
    pools.append(build_pool(server, label=SERVER_ONLY_LABEL))
    return pools


def best_pool() -> ResourcePool:
    """The largest mixed pool of the default sweep."""
    return build_pool(
        {"arm-cpu": 3, "volta-gpu": 1, "xeon-cpu": 3, "tesla-gpu": 1, "alveo-fpga": 1},
        label=grid_label(3, 3),
    )


def transfer_time(volume: float, link: LinkModel) -> float:
    if volume < 0:
        raise PlatformError(f"volume must be >= 0, got {volume}")
    return volume / link.rate


def crossing_volume(producer_tier: Tier, consumer_tier: Tier, volume: float) -> float:
    """Megabits that cross the link when data moves between tiers."""
    return 0.0 if Tier(producer_tier) is Tier(consumer_tier) else volume

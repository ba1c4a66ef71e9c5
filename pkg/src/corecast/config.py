"""Machine and kernel description files (JSON) and bundled machine presets.

A machine file pins the cache hierarchy geometry, per-level latencies and
reciprocal throughputs (cycles), instruction costs, and clock frequency.
A kernel file pins the operation counts of one parallel section plus the
optional data-layout fields (gap and block sizes).
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .cache import PRIVATE, SHARED, CacheLevelConfig
from .runtime import GapModel, KernelStats

LEVEL_NAMES = ("L1", "L2", "L3")
MEM_NAME = "RAM"


class ConfigError(ValueError):
    """Invalid or inconsistent machine/kernel description."""


@dataclass(frozen=True)
class MachineConfig:
    name: str
    core_count: int
    frequency_hz: float
    levels: dict = field(default_factory=dict)      # "L1"/"L2"/"L3" -> CacheLevelConfig
    latency_cycles: dict = field(default_factory=dict)    # "L1"/"L2"/"L3"/"RAM" -> cycles
    throughput_cycles: dict = field(default_factory=dict)
    alu_latency: float = 1.0
    alu_throughput: float = 1.0
    div_latency: float = 1.0
    div_throughput: float = 1.0
    data_bus_width: int = 8   # carried for completeness; the default model does not read it
    transfer_unit: int = 64
    word_size: int = 8

    def __post_init__(self):
        if self.core_count < 1:
            raise ConfigError("core_count must be >= 1")
        if self.frequency_hz <= 0:
            raise ConfigError("frequency_hz must be > 0")
        if set(self.levels) != set(LEVEL_NAMES):
            raise ConfigError(f"levels must be exactly {LEVEL_NAMES}, got {sorted(self.levels)}")
        for name in ("L1", "L2"):
            if self.levels[name].sharing != PRIVATE:
                raise ConfigError(f"{name} must be private")
        if self.levels["L3"].sharing != SHARED:
            raise ConfigError("L3 must be shared")
        keys = (*LEVEL_NAMES, MEM_NAME)
        for table_name, table in (("latency_cycles", self.latency_cycles),
                                  ("throughput_cycles", self.throughput_cycles)):
            missing = set(keys) - set(table)
            if missing:
                raise ConfigError(f"{table_name} missing entries {sorted(missing)}")
            if any(table[k] <= 0 for k in keys):
                raise ConfigError(f"{table_name} entries must be > 0")
        lat = self.latency_cycles
        if not lat["L1"] <= lat["L2"] <= lat["L3"] <= lat[MEM_NAME]:
            raise ConfigError(
                "latencies must satisfy L1 <= L2 <= L3 <= RAM, got "
                f"{lat['L1']}, {lat['L2']}, {lat['L3']}, {lat[MEM_NAME]}"
            )
        for name in ("alu_latency", "alu_throughput", "div_latency", "div_throughput"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        for name in ("data_bus_width", "transfer_unit", "word_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @property
    def max_line_size(self) -> int:
        return max(cfg.line_size for cfg in self.levels.values())


def _level_from_dict(data: dict, where: str) -> CacheLevelConfig:
    known = {"capacity", "line_size", "associativity", "sharing", "notes"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return CacheLevelConfig(
            capacity=int(data["capacity"]),
            line_size=int(data["line_size"]),
            associativity=data["associativity"],
            sharing=data.get("sharing", PRIVATE),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing required key {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def machine_from_dict(data: dict) -> MachineConfig:
    known = {
        "name", "core_count", "frequency_hz", "levels", "latency_cycles",
        "throughput_cycles", "alu_latency", "alu_throughput", "div_latency",
        "div_throughput", "data_bus_width", "transfer_unit", "word_size", "notes",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"machine: unknown keys {sorted(unknown)}")
    levels_raw = data.get("levels")
    if not isinstance(levels_raw, dict):
        raise ConfigError("machine: 'levels' must be an object with L1, L2, L3")
    levels = {
        name: _level_from_dict(cfg, f"levels.{name}") for name, cfg in levels_raw.items()
    }
    try:
        return MachineConfig(
            name=str(data.get("name", "unnamed")),
            core_count=int(data["core_count"]),
            frequency_hz=float(data["frequency_hz"]),
            levels=levels,
            latency_cycles={k: float(v) for k, v in data.get("latency_cycles", {}).items()},
            throughput_cycles={k: float(v) for k, v in data.get("throughput_cycles", {}).items()},
            alu_latency=float(data.get("alu_latency", 1.0)),
            alu_throughput=float(data.get("alu_throughput", 1.0)),
            div_latency=float(data.get("div_latency", 1.0)),
            div_throughput=float(data.get("div_throughput", 1.0)),
            data_bus_width=int(data.get("data_bus_width", 8)),
            transfer_unit=int(data.get("transfer_unit", 64)),
            word_size=int(data.get("word_size", 8)),
        )
    except KeyError as exc:
        raise ConfigError(f"machine: missing required key {exc}") from None


def load_machine(path) -> MachineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: machine file must hold a JSON object")
    return machine_from_dict(data)


def preset_names() -> list[str]:
    root = resources.files(__package__) / "presets"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> MachineConfig:
    root = resources.files(__package__) / "presets"
    candidate = root / f"{name}.json"
    try:
        text = candidate.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(
            f"unknown machine preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return machine_from_dict(json.loads(text))


def resolve_machine(spec) -> MachineConfig:
    """Accept a machine file path or a bundled preset name."""
    import os

    if os.path.exists(spec):
        return load_machine(spec)
    return load_preset(str(spec))


def kernel_from_dict(data: dict) -> tuple[KernelStats, GapModel]:
    known = {
        "int_alu_ops", "float_alu_ops", "div_ops", "total_mem_bytes", "mode",
        "gap_bytes", "block_sizes", "notes",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"kernel: unknown keys {sorted(unknown)}")
    try:
        stats = KernelStats(
            int_alu_ops=int(data.get("int_alu_ops", 0)),
            float_alu_ops=int(data.get("float_alu_ops", 0)),
            div_ops=int(data.get("div_ops", 0)),
            total_mem_bytes=int(data.get("total_mem_bytes", 0)),
            mode=str(data.get("mode", "throughput")),
        )
        sizes = data.get("block_sizes")
        gaps = GapModel(
            gap=int(data.get("gap_bytes", 0)),
            block_sizes=None if sizes is None else tuple(int(b) for b in sizes),
        )
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}") from None
    return stats, gaps


def load_kernel(path) -> tuple[KernelStats, GapModel]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: kernel file must hold a JSON object")
    return kernel_from_dict(data)

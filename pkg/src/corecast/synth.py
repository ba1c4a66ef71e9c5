"""Synthetic workload descriptions and deterministic trace generation.

A workload is a list of block plans. Each plan expands to `count` back-to-back
instances of one basic block, each instance performing `accesses` memory
accesses drawn from an address pattern:

    sequential  start, start+8, start+16, ...   (8-byte words)
    strided     start, start+stride, ...
    random      uniform in [start, start+span), from the workload PRNG

Sequential and strided plans advance a per-plan cursor across instances, so
instance boundaries do not reset the address stream. Plans under
`shared_blocks` are emitted before the main plans; sharing semantics come
from the block label prefix (see trace.shared_refs), the separate list only
controls placement and makes the intent explicit in workload files.
"""

import json
from dataclasses import dataclass
from .rng import Xorshift64Star
from .trace import MAX_ADDRESS, BasicBlockId, BlockEnd, BlockStart, MemoryTrace

PATTERN_KINDS = ("sequential", "strided", "random")
WORD_SIZE = 8


@dataclass(frozen=True)
class AddressPattern:
    kind: str = "sequential"
    start: int = 0
    stride: int = WORD_SIZE
    span: int = 1 << 16

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"pattern kind must be one of {PATTERN_KINDS}, got {self.kind!r}")
        if self.start < 0:
            raise ValueError("pattern start must be >= 0")
        if self.stride < 1:
            raise ValueError("pattern stride must be >= 1")
        if self.span < 1:
            raise ValueError("pattern span must be >= 1")


@dataclass(frozen=True)
class BlockPlan:
    block: BasicBlockId
    count: int
    accesses: int
    pattern: AddressPattern | None = None  # None: use the workload default

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"block {self.block}: count must be >= 1")
        if self.accesses < 0:
            raise ValueError(f"block {self.block}: accesses must be >= 0")


@dataclass(frozen=True)
class WorkloadSpec:
    blocks: tuple[BlockPlan, ...]
    pattern: AddressPattern = AddressPattern()
    shared_blocks: tuple[BlockPlan, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "shared_blocks", tuple(self.shared_blocks))
        if not self.blocks and not self.shared_blocks:
            raise ValueError("workload needs at least one block plan")


def generate_synthetic_trace(spec: WorkloadSpec, seed: int) -> MemoryTrace:
    """Expand the plans into a well-formed trace; pure in (spec, seed).

    Only random-pattern accesses consume PRNG draws, in emission order, so
    two seeds differ in random addresses but never in block structure.
    """
    rng = Xorshift64Star(seed)
    randrange = rng.randrange
    events: list = []
    append = events.append
    for plan in (*spec.shared_blocks, *spec.blocks):
        pat = plan.pattern or spec.pattern
        start_ev = BlockStart(plan.block)
        end_ev = BlockEnd(plan.block)
        if pat.kind == "random":
            base = pat.start
            span = pat.span
            if base + span - 1 > MAX_ADDRESS:
                raise ValueError(f"block {plan.block}: random range exceeds 64-bit addresses")
            for _ in range(plan.count):
                append(start_ev)
                for _ in range(plan.accesses):
                    append(base + randrange(span))
                append(end_ev)
        else:
            stride = pat.stride if pat.kind == "strided" else WORD_SIZE
            total = plan.count * plan.accesses
            if total and pat.start + (total - 1) * stride > MAX_ADDRESS:
                raise ValueError(f"block {plan.block}: pattern overruns 64-bit addresses")
            addr = pat.start
            for _ in range(plan.count):
                append(start_ev)
                for _ in range(plan.accesses):
                    append(addr)
                    addr += stride
                append(end_ev)
    return MemoryTrace(events)


def _parse_addr(value, where: str) -> int:
    # ints verbatim; strings via int(s, 0) so "0x..." is hex, plain digits decimal
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ValueError(f"{where}: expected an integer or address string, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        return int(value, 0)
    except ValueError:
        raise ValueError(f"{where}: cannot parse address {value!r}") from None


def _pattern_from_dict(data: dict, where: str) -> AddressPattern:
    known = {"kind", "start", "stride", "span", "notes"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{where}: unknown pattern keys {sorted(unknown)}")
    kwargs = {}
    if "kind" in data:
        kwargs["kind"] = data["kind"]
    for key in ("start", "stride", "span"):
        if key in data:
            kwargs[key] = _parse_addr(data[key], f"{where}.{key}")
    return AddressPattern(**kwargs)


def _plan_from_dict(data: dict, where: str) -> BlockPlan:
    known = {"function", "label", "count", "accesses", "pattern", "notes"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{where}: unknown block keys {sorted(unknown)}")
    try:
        block = BasicBlockId(str(data["function"]), str(data["label"]))
    except KeyError as exc:
        raise ValueError(f"{where}: missing required key {exc}") from None
    pattern = None
    if "pattern" in data:
        pattern = _pattern_from_dict(data["pattern"], f"{where}.pattern")
    return BlockPlan(
        block=block,
        count=int(data.get("count", 1)),
        accesses=int(data.get("accesses", 0)),
        pattern=pattern,
    )


def workload_from_dict(data: dict) -> WorkloadSpec:
    known = {"blocks", "shared_blocks", "pattern", "notes"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"workload: unknown keys {sorted(unknown)}")
    pattern = AddressPattern()
    if "pattern" in data:
        pattern = _pattern_from_dict(data["pattern"], "workload.pattern")
    blocks = tuple(
        _plan_from_dict(b, f"workload.blocks[{i}]")
        for i, b in enumerate(data.get("blocks", []))
    )
    shared = tuple(
        _plan_from_dict(b, f"workload.shared_blocks[{i}]")
        for i, b in enumerate(data.get("shared_blocks", []))
    )
    return WorkloadSpec(blocks=blocks, pattern=pattern, shared_blocks=shared)


def load_workload(path) -> WorkloadSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: workload file must hold a JSON object")
    return workload_from_dict(data)

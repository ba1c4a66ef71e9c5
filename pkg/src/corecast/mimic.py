"""Mimic a parallel execution from one sequential labeled trace.

gen_private_traces splits the trace the way an OpenMP static schedule would:
blocks executed fewer times than there are cores (setup and teardown code)
are replicated into every core's trace; blocks executed at least num_cores
times (parallel loop bodies) are dealt out in contiguous runs of
ceil(count/num_cores) instances per core. Core k's private data is shifted
by k * offset so cores never alias, while addresses named in the shared set
pass through untouched on every core.

interleave_traces then merges the private traces into the single stream a
shared last-level cache would observe.
"""

from collections import defaultdict
from dataclasses import dataclass
from itertools import zip_longest

from .rng import Xorshift64Star
from .trace import BlockEnd, BlockStart, MemoryTrace


@dataclass(frozen=True)
class OffsetScheme:
    """Per-core displacement: core k adds offset * k to private addresses."""

    offset: int

    def __post_init__(self):
        if self.offset < 1:
            raise ValueError("offset must be >= 1")


@dataclass(frozen=True)
class RoundRobin:
    """Draw one event from each core in turn (0, 1, ..., n-1, 0, ...);
    exhausted traces are skipped."""


@dataclass(frozen=True)
class UniformRandom:
    """Each draw takes the next event from a uniformly random core; draws
    landing on an exhausted core are skipped. Seeded, so reproducible."""

    seed: int


InterleaveStrategy = RoundRobin | UniformRandom

_REPLICATE = -1
_EXHAUSTED = object()


def compute_offset(trace: MemoryTrace, max_line_size: int) -> OffsetScheme:
    """Smallest power of two >= address span + max_line_size.

    Shifting by multiples of this keeps each core's copy of the private
    data on disjoint cache lines for every configured line size, and the
    power of two preserves line and set alignment.
    """
    if max_line_size < 1:
        raise ValueError("max_line_size must be >= 1")
    lo, hi = trace.address_bounds()
    need = hi - lo + max_line_size
    return OffsetScheme(1 << (need - 1).bit_length())


def gen_private_traces(
    trace: MemoryTrace,
    num_cores: int,
    shared: set[int],
    stats,
    scheme: OffsetScheme,
    chunk: int | None = None,
) -> list[MemoryTrace]:
    """Split one well-formed trace into num_cores private traces.

    stats is the block execution count mapping (see trace.block_stats);
    every block in the trace must appear in it. chunk overrides the
    contiguous run length for dealt-out blocks (OpenMP schedule(static,
    chunk)); runs then wrap around the cores round-robin.
    """
    if num_cores < 1:
        raise ValueError("num_cores must be >= 1")
    if chunk is not None and chunk < 1:
        raise ValueError("chunk must be >= 1")
    offset = scheme.offset
    # per-block contiguous run length; _REPLICATE marks low-count blocks
    run_len = {}
    for bb, count in stats.items():
        if count < num_cores:
            run_len[bb] = _REPLICATE
        else:
            run_len[bb] = chunk if chunk is not None else -(-count // num_cores)
    outs: list[list] = [[] for _ in range(num_cores)]
    seen: defaultdict = defaultdict(int)
    target = 0  # current owner core, or _REPLICATE
    for ev in trace.events:
        t = type(ev)
        if t is int:
            if target == _REPLICATE:
                for k, out in enumerate(outs):
                    out.append(ev if ev in shared else ev + offset * k)
            else:
                outs[target].append(ev if ev in shared else ev + offset * target)
        elif t is BlockStart:
            bb = ev.bb
            try:
                run = run_len[bb]
            except KeyError:
                raise ValueError(f"block {bb} missing from stats") from None
            if run == _REPLICATE:
                target = _REPLICATE
                for out in outs:
                    out.append(ev)
            else:
                idx = seen[bb]
                seen[bb] = idx + 1
                target = (idx // run) % num_cores
                outs[target].append(ev)
        else:
            if target == _REPLICATE:
                for out in outs:
                    out.append(ev)
            else:
                outs[target].append(ev)
    return [MemoryTrace(events) for events in outs]


def interleave_traces(privates: list[MemoryTrace], strategy: InterleaveStrategy) -> MemoryTrace:
    """Merge private traces into one stream, preserving each core's order.

    The result usually overlaps blocks from different cores, so it is not
    well-formed in the single-trace sense; parse it back with
    allow_interleaved=True.
    """
    if not privates:
        raise ValueError("need at least one private trace")
    lists = [t.events for t in privates]
    if isinstance(strategy, RoundRobin):
        merged = [
            ev
            for row in zip_longest(*lists, fillvalue=_EXHAUSTED)
            for ev in row
            if ev is not _EXHAUSTED
        ]
        return MemoryTrace(merged)
    if isinstance(strategy, UniformRandom):
        rng = Xorshift64Star(strategy.seed)
        randrange = rng.randrange
        n = len(lists)
        pos = [0] * n
        lens = [len(events) for events in lists]
        remaining = sum(1 for length in lens if length)
        merged = []
        append = merged.append
        while remaining:
            core = randrange(n)
            i = pos[core]
            if i < lens[core]:
                append(lists[core][i])
                i += 1
                pos[core] = i
                if i == lens[core]:
                    remaining -= 1
        return MemoryTrace(merged)
    raise TypeError(f"unknown interleave strategy: {strategy!r}")

"""Parallel-section runtime prediction from hit rates and operation counts.

Predicted time is memory time plus CPU time, both in cycles until the final
division by clock frequency. Memory time folds the per-level hit rates into
an average access latency and reciprocal throughput, then charges them per
block of contiguous program data. CPU time charges ALU and divide operation
counts (divided evenly across cores) at either steady-state issue rate
("throughput" kernels) or dependency-chain latency ("latency" kernels).
"""

from dataclasses import dataclass

THROUGHPUT = "throughput"
LATENCY = "latency"

_LEVELS = ("L1", "L2", "L3")


@dataclass(frozen=True)
class KernelStats:
    """Operation counts of one parallel section, from profiling or by hand."""

    int_alu_ops: int = 0
    float_alu_ops: int = 0
    div_ops: int = 0
    total_mem_bytes: int = 0
    mode: str = THROUGHPUT

    def __post_init__(self):
        for name in ("int_alu_ops", "float_alu_ops", "div_ops", "total_mem_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.mode not in (THROUGHPUT, LATENCY):
            raise ValueError(f"mode must be {THROUGHPUT!r} or {LATENCY!r}, got {self.mode!r}")


@dataclass(frozen=True)
class GapModel:
    """Layout of the data a kernel touches.

    gap is the unused bytes between consecutive useful blocks; block_sizes
    lists the useful block sizes (None means one word-sized block, the
    contiguous default).
    """

    gap: int = 0
    block_sizes: tuple | None = None

    def __post_init__(self):
        if self.gap < 0:
            raise ValueError("gap must be >= 0")
        if self.block_sizes is not None:
            sizes = tuple(self.block_sizes)
            if not sizes:
                raise ValueError("block_sizes must be None or non-empty")
            if any(b < 1 for b in sizes):
                raise ValueError("block sizes must be >= 1")
            object.__setattr__(self, "block_sizes", sizes)


def _level_probs(rates) -> tuple:
    per_level = getattr(rates, "per_level", rates)
    try:
        probs = tuple(per_level[name] for name in _LEVELS)
    except (KeyError, TypeError):
        raise ValueError("rates must provide L1, L2 and L3 hit rates") from None
    for name, p in zip(_LEVELS, probs):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} hit rate {p} outside [0, 1]")
    return probs


def avg_latency(rates, machine) -> float:
    """Average access latency in cycles under the per-level hit rates.

    Each miss falls through to the next level: the L2 term is weighted by
    the L1 miss probability, and so on down to RAM.
    """
    p1, p2, p3 = _level_probs(rates)
    lat = machine.latency_cycles
    return p1 * lat["L1"] + (1.0 - p1) * (
        p2 * lat["L2"] + (1.0 - p2) * (p3 * lat["L3"] + (1.0 - p3) * lat["RAM"])
    )


def avg_throughput(rates, machine) -> float:
    """Average reciprocal throughput in cycles per access; see avg_latency."""
    p1, p2, p3 = _level_probs(rates)
    thr = machine.throughput_cycles
    return p1 * thr["L1"] + (1.0 - p1) * (
        p2 * thr["L2"] + (1.0 - p2) * (p3 * thr["L3"] + (1.0 - p3) * thr["RAM"])
    )


def effective_block_size(block_size: int, gap: int, transfer_unit: int, max_block: int) -> int:
    """Bytes actually moved per useful block of block_size bytes.

    The padded block (block plus trailing gap) rounds up to whole transfer
    units, floors at one unit, and saturates at max_block (the shared cache
    capacity): beyond that the cache cannot hold the padding anyway.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if gap < 0:
        raise ValueError("gap must be >= 0")
    if transfer_unit < 1:
        raise ValueError("transfer_unit must be >= 1")
    if max_block < transfer_unit:
        raise ValueError("max_block must be >= transfer_unit")
    padded = block_size + gap
    if padded <= transfer_unit:
        return transfer_unit
    if padded >= max_block:
        return max_block
    rounded = -(-padded // transfer_unit) * transfer_unit
    return rounded if rounded < max_block else max_block


def mem_time(avg_lat: float, avg_thr: float, block_size, total_mem: int, cores: int) -> float:
    """Memory cycles for this core's share of total_mem bytes.

    Per-byte cost of a block: one latency for the first byte, throughput
    for the rest, averaged over the block. The total workload is assumed
    evenly distributed, hence the division by cores.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if total_mem < 0:
        raise ValueError("total_mem must be >= 0")
    if cores < 1:
        raise ValueError("cores must be >= 1")
    return (avg_lat + (block_size - 1) * avg_thr) / block_size * (total_mem / cores)


def cpu_time(stats: KernelStats, machine, cores: int) -> float:
    """CPU cycles for this core's share of the operation counts.

    Throughput mode charges each non-empty operation group one latency plus
    steady-state issue for the rest; a group with no operations contributes
    nothing at all (an empty kernel costs 0, not the sum of latencies).
    Latency mode charges the dependency chain instead. Fractional per-core
    counts are kept as-is; the (n-1) factors clamp at zero.
    """
    if cores < 1:
        raise ValueError("cores must be >= 1")
    n_all = (stats.int_alu_ops + stats.float_alu_ops + stats.div_ops) / cores
    n_div = stats.div_ops / cores
    n_alu = n_all - n_div
    if stats.mode == LATENCY:
        alu_chain = n_alu - 1.0
        div_chain = n_div - 1.0
        total = 0.0
        if alu_chain > 0.0:
            total += alu_chain * machine.alu_latency
        if div_chain > 0.0:
            total += div_chain * machine.div_latency
        return total
    total = 0.0
    if n_alu > 0.0:
        extra = n_alu - 1.0
        total += machine.alu_latency + (extra if extra > 0.0 else 0.0) * machine.alu_throughput
    if n_div > 0.0:
        extra = n_div - 1.0
        total += machine.div_latency + (extra if extra > 0.0 else 0.0) * machine.div_throughput
    return total


def predict_runtime(rates, stats: KernelStats, machine, cores: int, gaps: GapModel | None = None) -> float:
    """Predicted parallel-section runtime in seconds on `cores` cores."""
    if cores < 1:
        raise ValueError("cores must be >= 1")
    if gaps is None:
        gaps = GapModel()
    sizes = gaps.block_sizes if gaps.block_sizes is not None else (machine.word_size,)
    max_block = machine.levels["L3"].capacity
    unit = machine.transfer_unit
    eff = [effective_block_size(b, gaps.gap, unit, max_block) for b in sizes]
    b_eff = sum(eff) / len(eff)
    cycles = mem_time(
        avg_latency(rates, machine),
        avg_throughput(rates, machine),
        b_eff,
        stats.total_mem_bytes,
        cores,
    ) + cpu_time(stats, machine, cores)
    return cycles / machine.frequency_hz

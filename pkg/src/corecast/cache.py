"""Analytical cache hit rates from reuse profiles, plus an exact LRU oracle.

For a cache of B blocks and associativity A with random line placement, an
access at reuse distance D hits with the probability that fewer than A of
the D intervening distinct lines landed in its set:

    P(hit | D) = sum_{a=0}^{A-1} C(D, a) (A/B)^a ((B-A)/B)^(D-a)

which for A = 1 collapses to ((B-1)/B)^D. Folding the trace's reuse profile
P(D) through this kernel gives the expected hit rate without simulating.
"""

import math
from dataclasses import dataclass

from .reuse import INFINITE, ReuseProfile, line_profile
from .trace import MemoryTrace

FULLY_ASSOCIATIVE = "full"

PRIVATE = "private"
SHARED = "shared"

_LOG_EPS = math.log(1e-12)  # below this survival probability, call it a miss


@dataclass(frozen=True)
class CacheLevelConfig:
    capacity: int
    line_size: int
    associativity: int | str
    sharing: str = PRIVATE

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.line_size < 1 or self.line_size & (self.line_size - 1):
            raise ValueError(f"line_size must be a power of two, got {self.line_size}")
        if self.capacity % self.line_size:
            raise ValueError("capacity must be a multiple of line_size")
        if self.sharing not in (PRIVATE, SHARED):
            raise ValueError(f"sharing must be {PRIVATE!r} or {SHARED!r}, got {self.sharing!r}")
        blocks = self.capacity // self.line_size
        a = self.associativity
        if a == FULLY_ASSOCIATIVE:
            return
        if isinstance(a, bool) or not isinstance(a, int):
            raise ValueError(f"associativity must be an int or {FULLY_ASSOCIATIVE!r}, got {a!r}")
        if not 1 <= a <= blocks:
            raise ValueError(f"associativity {a} outside [1, {blocks}]")
        if blocks % a:
            raise ValueError(f"associativity {a} must divide the block count {blocks}")

    @property
    def blocks(self) -> int:
        return self.capacity // self.line_size

    @property
    def ways(self) -> int:
        return self.blocks if self.associativity == FULLY_ASSOCIATIVE else self.associativity

    @property
    def num_sets(self) -> int:
        return self.blocks // self.ways


@dataclass
class HitRateReport:
    """Predicted hit rates: per level (cores averaged) and per private core."""

    per_level: dict
    per_core_private: dict  # (level name, core index) -> rate

    def to_csv(self) -> str:
        """Rows of level,core,hit_rate; core is an index, 'mean' or 'shared'."""
        lines = ["level,core,hit_rate"]
        by_level: dict = {}
        for (name, k), rate in self.per_core_private.items():
            by_level.setdefault(name, []).append((k, rate))
        for name in sorted(set(self.per_level) | set(by_level)):
            for k, rate in sorted(by_level.get(name, [])):
                lines.append(f"{name},{k},{rate!r}")
            if name in self.per_level:
                scope = "shared" if name == "L3" else "mean"
                lines.append(f"{name},{scope},{self.per_level[name]!r}")
        lines.append("")
        return "\n".join(lines)


def cond_hit_assoc(distance, associativity: int, blocks: int) -> float:
    """P(hit | reuse distance) for an A-way cache of B blocks.

    Binomial lower tail at A-1 with p = A/B, evaluated by a log-space term
    recurrence so large distances cannot overflow; INFINITE gives 0.
    """
    if not 1 <= associativity <= blocks:
        raise ValueError(f"associativity {associativity} outside [1, {blocks}]")
    if distance == INFINITE:
        return 0.0
    if distance < 0:
        raise ValueError("reuse distance must be >= 0")
    if distance < associativity:
        return 1.0
    if associativity == blocks:
        return 0.0
    log_q = math.log((blocks - associativity) / blocks)
    if distance * math.log((blocks - 1) / blocks) < _LOG_EPS:
        return 0.0
    log_ratio = math.log(associativity / (blocks - associativity))
    log = math.log
    exp = math.exp
    log_term = distance * log_q
    total = exp(log_term)
    for a in range(associativity - 1):
        log_term += log(distance - a) + log_ratio - log(a + 1)
        total += exp(log_term)
    return total if total < 1.0 else 1.0


def cond_hit_direct(distance, blocks: int) -> float:
    """P(hit | reuse distance) for a direct-mapped cache of B blocks."""
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if distance == INFINITE:
        return 0.0
    if distance < 0:
        raise ValueError("reuse distance must be >= 0")
    if distance == 0:
        return 1.0
    if blocks == 1:
        return 0.0
    return math.exp(distance * math.log((blocks - 1) / blocks))


def hit_rate(profile: ReuseProfile, level: CacheLevelConfig) -> float:
    """Expected hit rate: the profile folded through the conditional model."""
    if profile.line_size is not None and profile.line_size != level.line_size:
        raise ValueError(
            f"profile granularity {profile.line_size} does not match "
            f"level line size {level.line_size}"
        )
    blocks = level.blocks
    ways = level.ways
    if ways == 1:
        cond = cond_hit_direct
        acc = sum(c * cond(d, blocks) for d, c in profile.histogram.items())
    else:
        cond = cond_hit_assoc
        acc = sum(c * cond(d, ways, blocks) for d, c in profile.histogram.items())
    rate = acc / profile.total
    if rate < 0.0:
        return 0.0
    return rate if rate < 1.0 else 1.0


def simulate_lru(trace, level: CacheLevelConfig) -> float:
    """Exact cold-start set-associative LRU simulation; hit fraction.

    set index = line mod num_sets. The oracle the analytical model is
    checked against; accepts a MemoryTrace or an iterable of addresses.
    """
    events = trace.events if isinstance(trace, MemoryTrace) else trace
    shift = level.line_size.bit_length() - 1
    num_sets = level.num_sets
    ways = level.ways
    sets: dict = {}
    get_set = sets.get
    hits = 0
    total = 0
    for ev in events:
        if type(ev) is not int:
            continue
        total += 1
        line = ev >> shift
        idx = line % num_sets
        s = get_set(idx)
        if s is None:
            sets[idx] = {line: None}
            continue
        if line in s:
            hits += 1
            del s[line]  # dicts preserve insertion order: re-insert = MRU
            s[line] = None
        else:
            if len(s) >= ways:
                del s[next(iter(s))]
            s[line] = None
    return hits / total if total else 0.0


def predict_hierarchy(privates: list[MemoryTrace], shared_trace: MemoryTrace, machine) -> HitRateReport:
    """Hit rates for a 3-level hierarchy: private L1/L2, shared L3.

    L1 and L2 rates come from each core's private trace profile, the L3
    rate from the interleaved trace profile at the L3 line size. Per-level
    figures average the private rates over cores.
    """
    levels = machine.levels
    if set(levels) != {"L1", "L2", "L3"}:
        raise ValueError(f"expected exactly levels L1, L2, L3, got {sorted(levels)}")
    if levels["L1"].sharing != PRIVATE or levels["L2"].sharing != PRIVATE:
        raise ValueError("L1 and L2 must be private")
    if levels["L3"].sharing != SHARED:
        raise ValueError("L3 must be shared")
    if not privates:
        raise ValueError("need at least one private trace")
    per_core: dict = {}
    sums = {"L1": 0.0, "L2": 0.0}
    for k, tr in enumerate(privates):
        profiles: dict = {}
        for name in ("L1", "L2"):
            cfg = levels[name]
            prof = profiles.get(cfg.line_size)
            if prof is None:
                try:
                    prof = line_profile(tr, cfg.line_size)
                except ValueError:
                    raise ValueError(
                        f"core {k} received no accesses; too few block instances "
                        f"for {len(privates)} cores"
                    ) from None
                profiles[cfg.line_size] = prof
            rate = hit_rate(prof, cfg)
            per_core[(name, k)] = rate
            sums[name] += rate
    n = len(privates)
    crd_profile = line_profile(shared_trace, levels["L3"].line_size)
    per_level = {
        "L1": sums["L1"] / n,
        "L2": sums["L2"] / n,
        "L3": hit_rate(crd_profile, levels["L3"]),
    }
    return HitRateReport(per_level, per_core)

"""Reuse distances and reuse profiles at configurable granularity.

The reuse distance of an access is the number of distinct addresses touched
since the previous access to the same address, INFINITE on first touch.
Computed over a single core's trace it characterizes that core's private
cache behavior; computed over the interleaved trace it characterizes the
shared cache, because intervening accesses from other cores dilate or
shorten the distance exactly as they would displace lines.
"""

import math
from collections import Counter
from dataclasses import dataclass

from .trace import MemoryTrace

INFINITE = math.inf


def _addresses(trace) -> list:
    if isinstance(trace, MemoryTrace):
        return [e for e in trace.events if type(e) is int]
    return list(trace)


def reuse_distances_naive(trace) -> list:
    """Reference implementation: explicit LRU stack, O(N * M).

    Kept as the oracle for the tree version; fine for desk-scale traces.
    Accepts a MemoryTrace (markers skipped) or any iterable of addresses.
    """
    stack: list = []  # most recently used first
    out: list = []
    index = stack.index
    insert = stack.insert
    append = out.append
    for a in _addresses(trace):
        try:
            d = index(a)
        except ValueError:
            append(INFINITE)
        else:
            append(d)
            del stack[d]
        insert(0, a)
    return out


def reuse_distances_tree(trace) -> list:
    """Same contract as reuse_distances_naive in O(N log N).

    Fenwick tree over access times: slot t holds 1 while the address
    accessed at time t has not been accessed again, so the count of ones in
    (prev_access, now) is exactly the number of distinct intervening
    addresses.
    """
    addrs = _addresses(trace)
    n = len(addrs)
    tree = [0] * (n + 1)
    last: dict = {}
    out: list = []
    append = out.append
    get = last.get
    for t, a in enumerate(addrs, start=1):
        p = get(a)
        if p is None:
            append(INFINITE)
        else:
            s = 0
            i = t - 1
            while i:
                s += tree[i]
                i -= i & -i
            i = p
            while i:
                s -= tree[i]
                i -= i & -i
            append(s)
            i = p  # address moves to slot t; clear its old slot
            while i <= n:
                tree[i] -= 1
                i += i & -i
        last[a] = t
        i = t
        while i <= n:
            tree[i] += 1
            i += i & -i
    return out


@dataclass
class ReuseProfile:
    """Histogram of reuse distances.

    line_size tags the granularity the distances were computed at (None for
    raw byte addresses); hit-rate evaluation refuses profiles whose tag does
    not match the cache level's line size.
    """

    histogram: dict
    total: int
    line_size: int | None = None

    def probability(self, distance) -> float:
        return self.histogram.get(distance, 0) / self.total

    def probabilities(self) -> dict:
        total = self.total
        return {d: c / total for d, c in self.histogram.items()}

    def sorted_items(self) -> list:
        # finite distances ascending; INFINITE sorts last on its own
        return sorted(self.histogram.items())


def build_profile(distances, line_size: int | None = None, pow2_bins: bool = False) -> ReuseProfile:
    """Exact histogram by default; pow2_bins floors each finite distance to
    a power of two (coarse mode for very large traces, trades accuracy for
    histogram size)."""
    if pow2_bins:
        distances = (
            d if d == INFINITE or d == 0 else 1 << (int(d).bit_length() - 1)
            for d in distances
        )
    hist = Counter(distances)
    total = sum(hist.values())
    if total == 0:
        raise ValueError("cannot build a profile from zero distances")
    return ReuseProfile(dict(hist), total, line_size)


def _check_line_size(line_size: int) -> int:
    if line_size < 1 or line_size & (line_size - 1):
        raise ValueError(f"line size must be a power of two, got {line_size}")
    return line_size.bit_length() - 1


def to_line_granularity(trace: MemoryTrace, line_size: int) -> MemoryTrace:
    """Map byte addresses to cache-line ids (addr // line_size); markers kept."""
    shift = _check_line_size(line_size)
    return MemoryTrace([e >> shift if type(e) is int else e for e in trace.events])


def line_profile(trace, line_size: int, method: str = "tree", pow2_bins: bool = False) -> ReuseProfile:
    """Reuse profile of a trace at one cache level's line size.

    One-pass convenience for to_line_granularity + distances + build_profile
    that skips the intermediate trace copy.
    """
    shift = _check_line_size(line_size)
    if method == "tree":
        distances_of = reuse_distances_tree
    elif method == "naive":
        distances_of = reuse_distances_naive
    else:
        raise ValueError(f"method must be 'tree' or 'naive', got {method!r}")
    addrs = _addresses(trace)
    return build_profile(
        distances_of([a >> shift for a in addrs]),
        line_size=line_size,
        pow2_bins=pow2_bins,
    )


def format_profile(profile: ReuseProfile) -> str:
    """distance,count rows; ascending, 'inf' last; granularity in a header."""
    lines = []
    if profile.line_size is not None:
        lines.append(f"# line_size: {profile.line_size}")
    for d, c in profile.sorted_items():
        key = "inf" if d == INFINITE else str(int(d))
        lines.append(f"{key},{c}")
    lines.append("")
    return "\n".join(lines)


def parse_profile(lines) -> ReuseProfile:
    if isinstance(lines, str):
        lines = lines.splitlines()
    histogram: dict = {}
    line_size = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("line_size:"):
                line_size = int(body.split(":", 1)[1])
            continue
        try:
            key, count = line.split(",")
            d = INFINITE if key.strip() == "inf" else int(key)
            c = int(count)
        except ValueError:
            raise ValueError(f"profile line {line_no}: expected 'distance,count', got {line!r}") from None
        if d != INFINITE and d < 0:
            raise ValueError(f"profile line {line_no}: negative distance")
        if c < 1:
            raise ValueError(f"profile line {line_no}: count must be >= 1")
        if d in histogram:
            raise ValueError(f"profile line {line_no}: duplicate distance {key}")
        histogram[d] = c
    if not histogram:
        raise ValueError("profile has no rows")
    return ReuseProfile(histogram, sum(histogram.values()), line_size)


def read_profile(path) -> ReuseProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh)


def write_profile(profile: ReuseProfile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_profile(profile))

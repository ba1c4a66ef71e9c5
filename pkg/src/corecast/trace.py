"""Basic-block labeled memory traces and their line-oriented file format.

A trace is a flat event sequence. Access events are plain ints (byte
addresses); block boundaries are BlockStart/BlockEnd markers carrying the
(function, label) identity of the basic block. The file format is one event
per line:

    BB_START:<function>:<label>
    <hex address, optional 0x prefix>
    BB_END:<function>:<label>

Blank lines and lines starting with '#' are ignored.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

SEPARATOR = ":"
START_TAG = "BB_START"
END_TAG = "BB_END"
MAX_ADDRESS = (1 << 64) - 1

DEFAULT_SHARED_PREFIX = "shared_var_trace"


class TraceError(ValueError):
    """Structurally invalid trace."""


class TraceParseError(TraceError):
    """Parse failure; carries the offending line number and content."""

    def __init__(self, message: str, line_no: int | None = None, line: str | None = None):
        if line_no is not None:
            where = f"line {line_no}"
            if line is not None:
                where += f" ({line!r})"
            message = f"{where}: {message}"
        super().__init__(message)
        self.line_no = line_no
        self.line = line


@dataclass(frozen=True, slots=True)
class BasicBlockId:
    """A basic block named by its enclosing function and block label."""

    function: str
    label: str

    def __post_init__(self):
        for field_name, value in (("function", self.function), ("label", self.label)):
            if not value or SEPARATOR in value or "\n" in value:
                raise TraceError(
                    f"block {field_name} must be non-empty with no {SEPARATOR!r} "
                    f"or newline: {value!r}"
                )

    def __str__(self) -> str:
        return f"{self.function}{SEPARATOR}{self.label}"


@dataclass(frozen=True, slots=True)
class BlockStart:
    bb: BasicBlockId


@dataclass(frozen=True, slots=True)
class BlockEnd:
    bb: BasicBlockId


TraceEvent = Union[BlockStart, BlockEnd, int]


class MemoryTrace:
    """Ordered sequence of trace events.

    A well-formed trace is a concatenation of blocks: BlockStart, zero or
    more accesses, matching BlockEnd, with no nesting and at least one block.
    Interleavings of several well-formed traces (as produced by
    interleave_traces) keep per-source order but may overlap blocks; parsing
    and validation accept those only with allow_interleaved=True.
    """

    __slots__ = ("events",)

    def __init__(self, events: Iterable[TraceEvent]):
        self.events = list(events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __eq__(self, other) -> bool:
        return isinstance(other, MemoryTrace) and self.events == other.events

    def __repr__(self) -> str:
        return f"MemoryTrace({len(self.events)} events)"

    def accesses(self) -> list[int]:
        """Addresses of all access events, in trace order."""
        return [e for e in self.events if type(e) is int]

    def address_bounds(self) -> tuple[int, int]:
        """(lowest, highest) accessed address; error if there are no accesses."""
        lo = hi = None
        for e in self.events:
            if type(e) is int:
                if lo is None:
                    lo = hi = e
                elif e < lo:
                    lo = e
                elif e > hi:
                    hi = e
        if lo is None:
            raise TraceError("trace has no access events")
        return lo, hi

    def validate(self, allow_interleaved: bool = False) -> "MemoryTrace":
        """Check block structure; returns self so calls can be chained."""
        _scan(self.events, allow_interleaved)
        return self


def _scan(events, allow_interleaved: bool):
    blocks_seen = 0
    if allow_interleaved:
        open_counts: Counter = Counter()
        depth = 0
        for ev in events:
            t = type(ev)
            if t is int:
                if depth == 0:
                    raise TraceError("access outside of any block")
            elif t is BlockStart:
                open_counts[ev.bb] += 1
                depth += 1
                blocks_seen += 1
            else:
                if open_counts[ev.bb] == 0:
                    raise TraceError(f"BlockEnd without matching BlockStart: {ev.bb}")
                open_counts[ev.bb] -= 1
                depth -= 1
        if depth != 0:
            raise TraceError(f"{depth} unclosed block(s) at end of trace")
    else:
        current: BasicBlockId | None = None
        for ev in events:
            t = type(ev)
            if t is int:
                if current is None:
                    raise TraceError("access outside of any block")
            elif t is BlockStart:
                if current is not None:
                    raise TraceError(f"nested block {ev.bb} inside {current}")
                current = ev.bb
                blocks_seen += 1
            else:
                if current != ev.bb:
                    raise TraceError(
                        f"BlockEnd {ev.bb} does not match open block {current}"
                    )
                current = None
        if current is not None:
            raise TraceError(f"unclosed block at end of trace: {current}")
    if blocks_seen == 0:
        raise TraceError("trace must contain at least one block")


def parse_trace(lines: str | Iterable[str], allow_interleaved: bool = False) -> MemoryTrace:
    """Parse the line-oriented trace grammar; validates block structure.

    lines may be one string or any iterable of lines (e.g. an open file).
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    events: list[TraceEvent] = []
    append = events.append
    # validation state, kept inline so parsing stays single-pass
    current: BasicBlockId | None = None
    open_counts: Counter = Counter()
    depth = 0
    blocks_seen = 0
    start_tag = START_TAG
    end_tag = END_TAG
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line[0] == "#":
            continue
        if line[0] == "B":
            fields = line.split(SEPARATOR)
            tag = fields[0]
            if tag == start_tag or tag == end_tag:
                if len(fields) != 3:
                    raise TraceParseError(
                        f"expected {tag}{SEPARATOR}<function>{SEPARATOR}<label>",
                        line_no, line,
                    )
                try:
                    bb = BasicBlockId(fields[1], fields[2])
                except TraceError as exc:
                    raise TraceParseError(str(exc), line_no, line) from None
                if tag == start_tag:
                    if allow_interleaved:
                        open_counts[bb] += 1
                        depth += 1
                    else:
                        if current is not None:
                            raise TraceParseError(
                                f"nested block inside {current}", line_no, line
                            )
                        current = bb
                    blocks_seen += 1
                    append(BlockStart(bb))
                else:
                    if allow_interleaved:
                        if open_counts[bb] == 0:
                            raise TraceParseError(
                                "BB_END without matching BB_START", line_no, line
                            )
                        open_counts[bb] -= 1
                        depth -= 1
                    else:
                        if current != bb:
                            raise TraceParseError(
                                f"BB_END does not match open block {current}",
                                line_no, line,
                            )
                        current = None
                    append(BlockEnd(bb))
                continue
        try:
            addr = int(line, 16)
        except ValueError:
            raise TraceParseError("not a hexadecimal address", line_no, line) from None
        if not 0 <= addr <= MAX_ADDRESS:
            raise TraceParseError("address out of 64-bit range", line_no, line)
        if (current is None) if not allow_interleaved else (depth == 0):
            raise TraceParseError("access outside of any block", line_no, line)
        append(addr)
    if allow_interleaved:
        if depth != 0:
            raise TraceParseError(f"{depth} unclosed block(s) at end of trace")
    elif current is not None:
        raise TraceParseError(f"unclosed block at end of trace: {current}")
    if blocks_seen == 0:
        raise TraceParseError("trace must contain at least one block")
    return MemoryTrace(events)


def format_trace(trace: MemoryTrace) -> str:
    """Render a trace back to the file format (lowercase hex, 0x prefix)."""
    parts = []
    append = parts.append
    for ev in trace.events:
        t = type(ev)
        if t is int:
            append(f"0x{ev:x}")
        elif t is BlockStart:
            append(f"{START_TAG}{SEPARATOR}{ev.bb.function}{SEPARATOR}{ev.bb.label}")
        else:
            append(f"{END_TAG}{SEPARATOR}{ev.bb.function}{SEPARATOR}{ev.bb.label}")
    if not parts:
        return ""
    append("")
    return "\n".join(parts)


def read_trace(path, allow_interleaved: bool = False) -> MemoryTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace(fh, allow_interleaved=allow_interleaved)


def write_trace(trace: MemoryTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_trace(trace))


def block_stats(trace: MemoryTrace) -> Counter:
    """Execution count of each basic block (BlockStart occurrences)."""
    counts: Counter = Counter()
    for ev in trace.events:
        if type(ev) is BlockStart:
            counts[ev.bb] += 1
    return counts


def shared_refs(trace: MemoryTrace, shared_label_prefix: str = DEFAULT_SHARED_PREFIX) -> set[int]:
    """Distinct addresses accessed inside blocks whose label has the prefix.

    Those blocks record accesses to data shared between cores (in OpenMP
    outlined functions, loads through the shared-variable pointer block);
    every other address is treated as core-private by the mimic step.
    """
    refs: set[int] = set()
    in_shared = 0
    for ev in trace.events:
        t = type(ev)
        if t is int:
            if in_shared:
                refs.add(ev)
        elif t is BlockStart:
            if ev.bb.label.startswith(shared_label_prefix):
                in_shared += 1
        else:
            if ev.bb.label.startswith(shared_label_prefix):
                in_shared -= 1
    return refs

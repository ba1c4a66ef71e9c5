import random

import pytest

from corecast.trace import (
    BasicBlockId,
    BlockEnd,
    BlockStart,
    MemoryTrace,
    TraceError,
    TraceParseError,
    block_stats,
    format_trace,
    parse_trace,
    read_trace,
    shared_refs,
    write_trace,
)


def bb(label, function="f"):
    return BasicBlockId(function, label)


def block(label, *addrs, function="f"):
    b = bb(label, function)
    return [BlockStart(b), *addrs, BlockEnd(b)]


def test_parse_minimal():
    t = parse_trace("BB_START:f:entry\n0x10\nBB_END:f:entry")
    assert t.events == [BlockStart(bb("entry")), 0x10, BlockEnd(bb("entry"))]


def test_parse_accepts_bare_hex_and_comments():
    text = """
# header comment
BB_START:main:for.body
10
0x1F
  0XFF
BB_END:main:for.body
"""
    t = parse_trace(text)
    assert t.accesses() == [0x10, 0x1F, 0xFF]


def test_parse_empty_input_rejected():
    with pytest.raises(TraceParseError, match="at least one block"):
        parse_trace("")
    with pytest.raises(TraceParseError, match="at least one block"):
        parse_trace("# only a comment\n\n")


def test_parse_end_before_start_rejected():
    with pytest.raises(TraceParseError, match="line 1"):
        parse_trace("BB_END:f:entry")


def test_parse_reports_line_number_and_content():
    text = "BB_START:f:entry\nnot_hex\nBB_END:f:entry"
    with pytest.raises(TraceParseError) as err:
        parse_trace(text)
    assert "line 2" in str(err.value)
    assert "not_hex" in str(err.value)


def test_parse_rejects_nesting_and_unclosed():
    with pytest.raises(TraceParseError, match="nested"):
        parse_trace("BB_START:f:a\nBB_START:f:b\nBB_END:f:b\nBB_END:f:a")
    with pytest.raises(TraceParseError, match="unclosed"):
        parse_trace("BB_START:f:a\n0x1")
    with pytest.raises(TraceParseError, match="outside"):
        parse_trace("BB_START:f:a\nBB_END:f:a\n0x1")


def test_parse_rejects_malformed_markers():
    with pytest.raises(TraceParseError, match="expected"):
        parse_trace("BB_START:f\n")
    with pytest.raises(TraceParseError, match="expected"):
        parse_trace("BB_START:f:a:extra\n")
    with pytest.raises(TraceParseError):
        parse_trace("BB_START::a\nBB_END::a")


def test_parse_rejects_negative_and_oversized_addresses():
    with pytest.raises(TraceParseError, match="64-bit"):
        parse_trace("BB_START:f:a\n-5\nBB_END:f:a")
    with pytest.raises(TraceParseError, match="64-bit"):
        parse_trace("BB_START:f:a\n0x10000000000000000\nBB_END:f:a")


def test_block_id_validation():
    with pytest.raises(TraceError):
        BasicBlockId("", "entry")
    with pytest.raises(TraceError):
        BasicBlockId("f", "a:b")
    assert str(BasicBlockId("f", "entry")) == "f:entry"


def test_roundtrip_identity():
    events = [
        *block("entry", 0x0, 0x8),
        *block("for.body", 0xDEADBEEF, 0x10, 0x10),
        *block("exit"),
    ]
    t = MemoryTrace(events)
    assert parse_trace(format_trace(t)) == t


def test_roundtrip_random_traces():
    rng = random.Random(7)
    for _ in range(25):
        events = []
        for i in range(rng.randint(1, 8)):
            addrs = [rng.randrange(1 << 40) for _ in range(rng.randint(0, 6))]
            events += block(f"b{rng.randint(0, 3)}", *addrs)
        t = MemoryTrace(events)
        assert parse_trace(format_trace(t)) == t


def test_file_roundtrip(tmp_path):
    t = MemoryTrace(block("entry", 0x100, 0x140))
    path = tmp_path / "t.trace"
    write_trace(t, path)
    assert read_trace(path) == t


def test_interleaved_mode_accepts_overlap():
    a, b = bb("a"), bb("b")
    events = [BlockStart(a), BlockStart(b), 0x1, BlockEnd(a), 0x2, BlockEnd(b)]
    text = format_trace(MemoryTrace(events))
    with pytest.raises(TraceParseError):
        parse_trace(text)
    t = parse_trace(text, allow_interleaved=True)
    assert t.events == events
    t.validate(allow_interleaved=True)
    with pytest.raises(TraceError):
        t.validate()


def test_interleaved_mode_still_rejects_unmatched_end():
    text = "BB_START:f:a\nBB_END:f:b\nBB_END:f:a"
    with pytest.raises(TraceParseError):
        parse_trace(text, allow_interleaved=True)


def test_block_stats_counts():
    t = MemoryTrace([
        *block("entry", 0x0),
        *block("for.body", 0x8),
        *block("for.body", 0x10),
        *block("for.body", 0x18),
        *block("exit"),
    ])
    stats = block_stats(t)
    assert stats == {bb("entry"): 1, bb("for.body"): 3, bb("exit"): 1}
    assert sum(stats.values()) == 5


def test_block_stats_sum_property():
    rng = random.Random(11)
    for _ in range(20):
        events = []
        starts = 0
        for _ in range(rng.randint(1, 10)):
            events += block(f"b{rng.randint(0, 4)}", *range(rng.randint(0, 3)))
            starts += 1
        stats = block_stats(MemoryTrace(events))
        assert sum(stats.values()) == starts


def test_shared_refs_basic():
    t = MemoryTrace([
        *block("shared_var_trace0", 0xA0, 0xA8),
        *block("for.body", 0xB0),
    ])
    assert shared_refs(t) == {0xA0, 0xA8}


def test_shared_refs_empty_when_no_match():
    t = MemoryTrace(block("for.body", 0x1, 0x2))
    assert shared_refs(t) == set()


def test_shared_refs_union_over_matching_blocks():
    # 10-event trace, two shared blocks, union of their addresses
    t = MemoryTrace([
        *block("shared_var_trace0", 0xA0, 0xA8),
        *block("compute"),
        *block("shared_var_trace1", 0xA8, 0xB0),
    ])
    assert len(t) == 10
    assert shared_refs(t, "shared_var_trace") == {0xA0, 0xA8, 0xB0}


def test_shared_refs_subset_of_trace_addresses():
    rng = random.Random(3)
    for _ in range(20):
        events = []
        for i in range(rng.randint(1, 6)):
            label = "shared_var_trace0" if rng.random() < 0.3 else f"b{i}"
            events += block(label, *[rng.randrange(64) for _ in range(rng.randint(0, 5))])
        t = MemoryTrace(events)
        assert shared_refs(t) <= set(t.accesses())


def test_address_bounds():
    t = MemoryTrace(block("a", 0x140, 0x100, 0x120))
    assert t.address_bounds() == (0x100, 0x140)
    with pytest.raises(TraceError):
        MemoryTrace(block("a")).address_bounds()

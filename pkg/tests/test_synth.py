import json

import pytest

from corecast.synth import (
    AddressPattern,
    BlockPlan,
    WorkloadSpec,
    generate_synthetic_trace,
    load_workload,
    workload_from_dict,
)
from corecast.trace import BasicBlockId, BlockEnd, BlockStart, block_stats

BB = BasicBlockId("main", "for.body")


def test_sequential_worked_example():
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=1, accesses=3),))
    t = generate_synthetic_trace(spec, seed=0)
    assert t.events == [BlockStart(BB), 0x0, 0x8, 0x10, BlockEnd(BB)]


def test_sequential_cursor_continues_across_instances():
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=2, accesses=2),))
    t = generate_synthetic_trace(spec, seed=0)
    assert t.accesses() == [0x0, 0x8, 0x10, 0x18]


def test_strided_pattern():
    pat = AddressPattern(kind="strided", start=0x100, stride=64)
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=1, accesses=4, pattern=pat),))
    assert generate_synthetic_trace(spec, 0).accesses() == [0x100, 0x140, 0x180, 0x1C0]


def test_determinism():
    pat = AddressPattern(kind="random", start=0, span=1 << 20)
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=5, accesses=20, pattern=pat),))
    assert generate_synthetic_trace(spec, 7) == generate_synthetic_trace(spec, 7)


def test_seed_changes_random_addresses_not_structure():
    pat = AddressPattern(kind="random", start=0, span=1 << 20)
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=3, accesses=10, pattern=pat),))
    t1 = generate_synthetic_trace(spec, 1)
    t2 = generate_synthetic_trace(spec, 2)
    assert t1.accesses() != t2.accesses()
    markers1 = [e for e in t1.events if type(e) is not int]
    markers2 = [e for e in t2.events if type(e) is not int]
    assert markers1 == markers2
    assert block_stats(t1) == block_stats(t2) == {BB: 3}


def test_seed_does_not_change_non_random_patterns():
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=2, accesses=4),))
    assert generate_synthetic_trace(spec, 1) == generate_synthetic_trace(spec, 99)


def test_random_addresses_stay_in_range():
    pat = AddressPattern(kind="random", start=0x1000, span=256)
    spec = WorkloadSpec(blocks=(BlockPlan(BB, count=2, accesses=50, pattern=pat),))
    for a in generate_synthetic_trace(spec, 3).accesses():
        assert 0x1000 <= a < 0x1100


def test_shared_blocks_emitted_first():
    shared_bb = BasicBlockId("main", "shared_var_trace0")
    spec = WorkloadSpec(
        blocks=(BlockPlan(BB, 1, 1),),
        shared_blocks=(BlockPlan(shared_bb, 1, 2, AddressPattern(start=0xA000)),),
    )
    t = generate_synthetic_trace(spec, 0)
    assert t.events[0] == BlockStart(shared_bb)
    assert t.accesses()[:2] == [0xA000, 0xA008]


def test_instance_counts_match_plan():
    spec = WorkloadSpec(blocks=(
        BlockPlan(BasicBlockId("m", "a"), 4, 2),
        BlockPlan(BasicBlockId("m", "b"), 7, 0),
    ))
    stats = block_stats(generate_synthetic_trace(spec, 0))
    assert stats[BasicBlockId("m", "a")] == 4
    assert stats[BasicBlockId("m", "b")] == 7


def test_generated_trace_is_well_formed():
    pat = AddressPattern(kind="random", span=512)
    spec = WorkloadSpec(blocks=(BlockPlan(BB, 10, 10, pat),))
    generate_synthetic_trace(spec, 1).validate()


def test_plan_validation():
    with pytest.raises(ValueError):
        BlockPlan(BB, count=0, accesses=1)
    with pytest.raises(ValueError):
        BlockPlan(BB, count=1, accesses=-1)
    with pytest.raises(ValueError):
        WorkloadSpec(blocks=())
    with pytest.raises(ValueError):
        AddressPattern(kind="zigzag")


def test_workload_from_dict_full():
    spec = workload_from_dict({
        "pattern": {"kind": "strided", "start": "0x100", "stride": 64},
        "blocks": [
            {"function": "m", "label": "entry", "count": 1, "accesses": 2},
            {"function": "m", "label": "body", "count": 4, "accesses": 3,
             "pattern": {"kind": "random", "start": 4096, "span": 256}},
        ],
        "shared_blocks": [
            {"function": "m", "label": "shared_var_trace0", "count": 1, "accesses": 1},
        ],
    })
    assert spec.pattern.stride == 64 and spec.pattern.start == 0x100
    assert spec.blocks[1].pattern.kind == "random"
    assert spec.shared_blocks[0].block.label == "shared_var_trace0"


def test_workload_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown"):
        workload_from_dict({"blocks": [], "typo": 1})
    with pytest.raises(ValueError, match="unknown"):
        workload_from_dict({"blocks": [{"function": "f", "label": "l", "cuont": 1}]})


def test_load_workload_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({
        "blocks": [{"function": "m", "label": "entry", "count": 2, "accesses": 1}],
    }))
    spec = load_workload(path)
    t = generate_synthetic_trace(spec, 0)
    assert len(t) == 6

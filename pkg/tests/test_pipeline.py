import json

import pytest

from corecast.cache import hit_rate
from corecast.config import machine_from_dict
from corecast.pipeline import (
    DivergenceTable,
    PipelineConfig,
    StageError,
    compare_oracle,
    run_pipeline,
)
from corecast.reuse import line_profile, read_profile
from corecast.trace import read_trace

W, X, Y, Z = 0x0, 0x40, 0x80, 0xC0

TRACE_TEXT = (
    "BB_START:shared_var_trace0:init\n"
    "0x1000\n"
    "0x1040\n"
    "BB_END:shared_var_trace0:init\n"
    + "".join(
        f"BB_START:main:body\n0x{addr:x}\nBB_END:main:body\n"
        for addr in (W, X, W, Y, X, Z, Z, W)
    )
)


def machine_dict(associativity="full", line=64):
    def level(cap, sharing="private"):
        return {
            "capacity": cap,
            "line_size": line,
            "associativity": associativity,
            "sharing": sharing,
        }

    return {
        "name": "toybox",
        "core_count": 8,
        "frequency_hz": 2.0e9,
        "levels": {
            "L1": level(4 * line),
            "L2": level(8 * line),
            "L3": level(16 * line, "shared"),
        },
        "latency_cycles": {"L1": 4, "L2": 12, "L3": 40, "RAM": 200},
        "throughput_cycles": {"L1": 1, "L2": 3, "L3": 10, "RAM": 50},
        "alu_latency": 3,
        "alu_throughput": 1,
        "div_latency": 20,
        "div_throughput": 10,
        "transfer_unit": 8,
        "word_size": 8,
    }


KERNEL = {"int_alu_ops": 60, "float_alu_ops": 40, "div_ops": 1, "total_mem_bytes": 8000}

WORKLOAD = {
    "blocks": [
        {"function": "main", "label": "body", "count": 8, "accesses": 4,
         "pattern": {"kind": "random", "start": 0, "span": 4096}},
    ],
    "shared_blocks": [
        {"function": "shared_var_trace0", "label": "init", "count": 1, "accesses": 2,
         "pattern": {"kind": "sequential", "start": 65536, "stride": 64}},
    ],
}


@pytest.fixture
def inputs(tmp_path):
    trace = tmp_path / "app.trace"
    trace.write_text(TRACE_TEXT, encoding="utf-8")
    machine = tmp_path / "toybox.json"
    machine.write_text(json.dumps(machine_dict()), encoding="utf-8")
    kernel = tmp_path / "kernel.json"
    kernel.write_text(json.dumps(KERNEL), encoding="utf-8")
    workload = tmp_path / "work.json"
    workload.write_text(json.dumps(WORKLOAD), encoding="utf-8")
    return tmp_path


def base_config(inputs, **overrides):
    kwargs = dict(
        machine=str(inputs / "toybox.json"),
        kernel=str(inputs / "kernel.json"),
        trace=str(inputs / "app.trace"),
        core_counts=(1, 2),
        out_dir=str(inputs / "out"),
    )
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)


# ---- configuration validation ----

def test_exactly_one_input_required(inputs):
    with pytest.raises(ValueError, match="exactly one"):
        base_config(inputs, workload=str(inputs / "work.json"))
    with pytest.raises(ValueError, match="exactly one"):
        base_config(inputs, trace=None)


def test_core_counts_validated(inputs):
    with pytest.raises(ValueError):
        base_config(inputs, core_counts=())
    with pytest.raises(ValueError):
        base_config(inputs, core_counts=(0,))
    with pytest.raises(ValueError):
        base_config(inputs, strategy="shuffled")


# ---- full runs ----

def test_report_structure(inputs):
    report = run_pipeline(base_config(inputs, out_dir=None))
    assert [r.cores for r in report.results] == [1, 2]
    for r in report.results:
        assert set(r.rates.per_level) == {"L1", "L2", "L3"}
        assert len(r.rates.per_core_private) == 2 * r.cores
        assert r.runtime_seconds > 0
        assert r.runtime_seconds == pytest.approx(
            (r.mem_cycles + r.cpu_cycles) / 2.0e9, rel=1e-12
        )
    csv_text = report.to_csv()
    lines = csv_text.splitlines()
    assert lines[0] == "cores,metric,level,scope,value"
    # cores=1: 2+2 hit rate rows + L3 + three cycle/runtime rows; cores=2: two more
    assert len(lines) == 1 + 8 + 10
    assert report.provenance["machine"] == "toybox"
    assert report.provenance["trace_file"] == "app.trace"
    assert "out" not in report.provenance


def test_no_out_dir_writes_nothing(inputs):
    run_pipeline(base_config(inputs, out_dir=None))
    assert not (inputs / "out").exists()


def test_persisted_file_names(inputs):
    run_pipeline(base_config(inputs))
    out = inputs / "out"
    expected = {
        "app.cores1.core0.trace",
        "app.cores1.shared.round-robin.trace",
        "app.cores1.core0.line64.profile",
        "app.cores1.shared.round-robin.line64.profile",
        "app.cores2.core0.trace",
        "app.cores2.core1.trace",
        "app.cores2.shared.round-robin.trace",
        "app.cores2.core0.line64.profile",
        "app.cores2.core1.line64.profile",
        "app.cores2.shared.round-robin.line64.profile",
        "report.csv",
        "report.txt",
    }
    assert {p.name for p in out.iterdir()} == expected


def test_no_persist_keeps_only_reports(inputs):
    run_pipeline(base_config(inputs, persist=False))
    assert {p.name for p in (inputs / "out").iterdir()} == {"report.csv", "report.txt"}


def test_runs_are_byte_identical(inputs):
    cfg_a = base_config(
        inputs, workload=str(inputs / "work.json"), trace=None,
        strategy="uniform", out_dir=str(inputs / "a"),
    )
    cfg_b = base_config(
        inputs, workload=str(inputs / "work.json"), trace=None,
        strategy="uniform", out_dir=str(inputs / "b"),
    )
    run_pipeline(cfg_a)
    run_pipeline(cfg_b)
    names_a = sorted(p.name for p in (inputs / "a").iterdir())
    names_b = sorted(p.name for p in (inputs / "b").iterdir())
    assert names_a == names_b
    for name in names_a:
        assert (inputs / "a" / name).read_bytes() == (inputs / "b" / name).read_bytes()


def test_uniform_seed_only_touches_interleaving(inputs):
    reports = [
        run_pipeline(
            base_config(inputs, strategy="uniform", seed=seed, out_dir=None)
        )
        for seed in (1, 2)
    ]
    # private rates cannot depend on the interleaving seed
    assert (
        reports[0].results[1].rates.per_level["L1"]
        == reports[1].results[1].rates.per_level["L1"]
    )
    again = run_pipeline(base_config(inputs, strategy="uniform", seed=1, out_dir=None))
    assert (
        again.results[1].rates.per_level["L3"]
        == reports[0].results[1].rates.per_level["L3"]
    )


def test_intermediates_reproduce_report(inputs):
    report = run_pipeline(base_config(inputs))
    out = inputs / "out"
    levels = machine_from_dict(json.loads((inputs / "toybox.json").read_text())).levels
    result = report.results[1]  # cores=2
    for k in range(2):
        tr = read_trace(out / f"app.cores2.core{k}.trace")
        prof = line_profile(tr, 64)
        assert hit_rate(prof, levels["L1"]) == pytest.approx(
            result.rates.per_core_private[("L1", k)], abs=1e-12
        )
        stored = read_profile(out / f"app.cores2.core{k}.line64.profile")
        assert stored.histogram == prof.histogram
    merged = read_trace(out / "app.cores2.shared.round-robin.trace", allow_interleaved=True)
    assert hit_rate(line_profile(merged, 64), levels["L3"]) == pytest.approx(
        result.rates.per_level["L3"], abs=1e-12
    )


def test_workload_input_and_provenance(inputs):
    cfg = base_config(inputs, workload=str(inputs / "work.json"), trace=None)
    report = run_pipeline(cfg)
    assert report.provenance["workload_file"] == "work.json"
    assert "trace_file" not in report.provenance
    assert len(report.provenance["workload_sha256"]) == 64
    out = inputs / "out"
    assert (out / "work.cores2.core0.trace").exists()


def test_line_size_override(inputs):
    cfg = base_config(inputs, line_size=32, core_counts=(1,))
    report = run_pipeline(cfg)
    assert (inputs / "out" / "app.cores1.core0.line32.profile").exists()
    assert report.provenance["line_size_override"] == 32


# ---- failure tagging and cleanup ----

def test_unknown_machine_tagged_config(inputs):
    cfg = base_config(inputs, machine="no-such-box")
    with pytest.raises(StageError, match=r"^\[config\]") as info:
        run_pipeline(cfg)
    assert info.value.stage == "config"


def test_missing_kernel_tagged_config(inputs):
    cfg = base_config(inputs, kernel=None)
    with pytest.raises(StageError, match="kernel"):
        run_pipeline(cfg)


def test_missing_trace_tagged_trace(inputs):
    cfg = base_config(inputs, trace=str(inputs / "absent.trace"))
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "trace"


def test_core_counts_beyond_machine_rejected(inputs):
    cfg = base_config(inputs, core_counts=(1, 16))
    with pytest.raises(StageError, match="exceed machine core_count"):
        run_pipeline(cfg)


def test_failed_run_removes_partial_outputs(inputs):
    # no replicated blocks here: 8 instances at per_core=ceil(8/7)=2 occupy
    # cores 0..3 only, so cores 4..6 end up without a single access
    bare = inputs / "bare.trace"
    bare.write_text(
        "".join(
            f"BB_START:main:body\n0x{64 * i:x}\nBB_END:main:body\n" for i in range(8)
        ),
        encoding="utf-8",
    )
    cfg = base_config(inputs, trace=str(bare), core_counts=(2, 7))
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "profile"
    assert "no accesses" in str(info.value)
    leftovers = [p.name for p in (inputs / "out").iterdir()]
    assert leftovers == []


# ---- model vs simulation ----

def test_oracle_exact_for_fully_associative(inputs):
    cfg = base_config(inputs, out_dir=None, kernel=None, core_counts=(1, 2))
    table = compare_oracle(cfg)
    assert isinstance(table, DivergenceTable)
    # cores=1: L1+L2+L3 rows; cores=2: 2*2 private rows + L3
    assert len(table.rows) == 3 + 5
    assert table.max_divergence() == 0.0
    one_core_l1 = next(
        r for r in table.rows if (r.cores, r.level, r.scope) == (1, "L1", "core0")
    )
    # whole trace: 6 first-touch lines, then distances 1,2,0,3 all within
    # the 4-line L1, so 4 of 10 accesses hit
    assert one_core_l1.model_rate == pytest.approx(0.4, abs=1e-12)
    assert one_core_l1.simulated_rate == pytest.approx(0.4, abs=1e-12)


def test_oracle_set_associative_bounded(inputs, tmp_path):
    machine = tmp_path / "setassoc.json"
    machine.write_text(json.dumps(machine_dict(associativity=2)), encoding="utf-8")
    cfg = base_config(
        inputs, machine=str(machine), out_dir=None, kernel=None, core_counts=(2,)
    )
    table = compare_oracle(cfg)
    assert 0.0 <= table.mean_divergence() <= table.max_divergence() <= 1.0
    csv_lines = table.to_csv().splitlines()
    assert csv_lines[0] == "cores,level,scope,model_rate,simulated_rate,abs_diff"
    assert len(csv_lines) == 1 + len(table.rows)


def test_oracle_event_cap(inputs):
    cfg = base_config(inputs, out_dir=None, kernel=None)
    with pytest.raises(StageError, match="oracle cap"):
        compare_oracle(cfg, max_events=3)

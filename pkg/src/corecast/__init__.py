"""corecast: predict multicore cache hit rates and parallel-section runtimes
from a single basic-block labeled memory trace of a sequential run.

The pipeline: parse or synthesize a labeled trace, mimic per-core private
traces the way a static OpenMP schedule would split the work, interleave
them into the stream a shared cache sees, turn each stream into a reuse
profile, fold the profiles through an analytical set-associative cache
model, and combine the resulting hit rates with machine parameters into a
runtime prediction. An exact LRU simulator is included as the oracle the
analytical model is validated against.
"""

from ._version import __version__
from .cache import (
    FULLY_ASSOCIATIVE,
    CacheLevelConfig,
    HitRateReport,
    cond_hit_assoc,
    cond_hit_direct,
    hit_rate,
    predict_hierarchy,
    simulate_lru,
)
from .config import (
    ConfigError,
    MachineConfig,
    load_kernel,
    load_machine,
    load_preset,
    machine_from_dict,
    preset_names,
    resolve_machine,
)
from .mimic import (
    InterleaveStrategy,
    OffsetScheme,
    RoundRobin,
    UniformRandom,
    compute_offset,
    gen_private_traces,
    interleave_traces,
)
from .pipeline import (
    DivergenceTable,
    PipelineConfig,
    PredictionReport,
    StageError,
    compare_oracle,
    run_pipeline,
)
from .reuse import (
    INFINITE,
    ReuseProfile,
    build_profile,
    line_profile,
    read_profile,
    reuse_distances_naive,
    reuse_distances_tree,
    to_line_granularity,
    write_profile,
)
from .rng import Xorshift64Star
from .runtime import (
    GapModel,
    KernelStats,
    avg_latency,
    avg_throughput,
    cpu_time,
    effective_block_size,
    mem_time,
    predict_runtime,
)
from .synth import (
    AddressPattern,
    BlockPlan,
    WorkloadSpec,
    generate_synthetic_trace,
    load_workload,
    workload_from_dict,
)
from .trace import (
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

__all__ = [
    "__version__",
    "AddressPattern",
    "BasicBlockId",
    "BlockEnd",
    "BlockPlan",
    "BlockStart",
    "CacheLevelConfig",
    "ConfigError",
    "DivergenceTable",
    "FULLY_ASSOCIATIVE",
    "GapModel",
    "HitRateReport",
    "INFINITE",
    "InterleaveStrategy",
    "KernelStats",
    "MachineConfig",
    "MemoryTrace",
    "OffsetScheme",
    "PipelineConfig",
    "PredictionReport",
    "ReuseProfile",
    "RoundRobin",
    "StageError",
    "TraceError",
    "TraceParseError",
    "UniformRandom",
    "WorkloadSpec",
    "Xorshift64Star",
    "avg_latency",
    "avg_throughput",
    "block_stats",
    "build_profile",
    "compare_oracle",
    "compute_offset",
    "cond_hit_assoc",
    "cond_hit_direct",
    "cpu_time",
    "effective_block_size",
    "format_trace",
    "gen_private_traces",
    "generate_synthetic_trace",
    "hit_rate",
    "interleave_traces",
    "line_profile",
    "load_kernel",
    "load_machine",
    "load_preset",
    "load_workload",
    "machine_from_dict",
    "mem_time",
    "parse_trace",
    "predict_hierarchy",
    "predict_runtime",
    "preset_names",
    "read_profile",
    "read_trace",
    "resolve_machine",
    "reuse_distances_naive",
    "reuse_distances_tree",
    "run_pipeline",
    "shared_refs",
    "simulate_lru",
    "to_line_granularity",
    "workload_from_dict",
    "write_profile",
    "write_trace",
]

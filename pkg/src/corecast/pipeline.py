"""End-to-end prediction runs: load, mimic, profile, predict, report.

run_pipeline executes the whole chain for every requested core count from a
single input trace (the input is never re-read or re-generated per core
count). Intermediate per-core traces, the interleaved trace, and reuse
profiles are persisted next to the report so every stage can be re-run and
inspected on its own. All outputs are a pure function of the input files
and the seed.
"""

import csv
import dataclasses
import hashlib
import io
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from ._version import __version__
from .cache import HitRateReport, hit_rate, simulate_lru
from .config import load_kernel, resolve_machine
from .mimic import RoundRobin, UniformRandom, compute_offset, gen_private_traces, interleave_traces
from .reuse import line_profile, write_profile
from .runtime import avg_latency, avg_throughput, cpu_time, effective_block_size, mem_time, predict_runtime
from .synth import generate_synthetic_trace, load_workload
from .trace import DEFAULT_SHARED_PREFIX, block_stats, read_trace, shared_refs, write_trace

STRATEGY_NAMES = ("round-robin", "uniform")

_PRIVATE_LEVELS = ("L1", "L2")


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; exactly one of trace/workload must be set."""

    machine: str
    kernel: str | None = None
    trace: str | None = None
    workload: str | None = None
    core_counts: tuple = (1,)
    strategy: str = "round-robin"
    seed: int = 42
    shared_label_prefix: str = DEFAULT_SHARED_PREFIX
    out_dir: str | None = None
    persist: bool = True
    line_size: int | None = None  # overrides every level's line size

    def __post_init__(self):
        if (self.trace is None) == (self.workload is None):
            raise ValueError("exactly one of trace/workload must be given")
        counts = tuple(int(n) for n in self.core_counts)
        if not counts:
            raise ValueError("core_counts must be non-empty")
        if any(n < 1 for n in counts):
            raise ValueError("core counts must be >= 1")
        object.__setattr__(self, "core_counts", counts)
        if self.strategy not in STRATEGY_NAMES:
            raise ValueError(f"strategy must be one of {STRATEGY_NAMES}, got {self.strategy!r}")


@dataclass
class CoreCountResult:
    cores: int
    rates: HitRateReport
    mem_cycles: float
    cpu_cycles: float
    runtime_seconds: float


@dataclass
class PredictionReport:
    results: list  # CoreCountResult, in requested order
    provenance: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cores", "metric", "level", "scope", "value"])
        for r in self.results:
            n = r.cores
            for name in _PRIVATE_LEVELS:
                for k in range(n):
                    w.writerow([n, "hit_rate", name, f"core{k}", r.rates.per_core_private[(name, k)]])
                w.writerow([n, "hit_rate", name, "mean", r.rates.per_level[name]])
            w.writerow([n, "hit_rate", "L3", "shared", r.rates.per_level["L3"]])
            w.writerow([n, "mem_cycles", "", "total", r.mem_cycles])
            w.writerow([n, "cpu_cycles", "", "total", r.cpu_cycles])
            w.writerow([n, "runtime_seconds", "", "total", r.runtime_seconds])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = ["prediction report", ""]
        for key in sorted(self.provenance):
            lines.append(f"  {key}: {self.provenance[key]}")
        lines.append("")
        for r in self.results:
            lines.append(
                f"cores={r.cores}:  L1 {r.rates.per_level['L1']:.6f}  "
                f"L2 {r.rates.per_level['L2']:.6f}  L3 {r.rates.per_level['L3']:.6f}  "
                f"runtime {r.runtime_seconds:.6e} s"
            )
            for name in _PRIVATE_LEVELS:
                per_core = "  ".join(
                    f"core{k}={r.rates.per_core_private[(name, k)]:.6f}" for k in range(r.cores)
                )
                lines.append(f"  {name}: {per_core}")
            lines.append(
                f"  cycles: mem={r.mem_cycles!r} cpu={r.cpu_cycles!r}"
            )
        lines.append("")
        return "\n".join(lines)


@dataclass
class OracleRow:
    cores: int
    level: str
    scope: str  # "core<k>" or "shared"
    model_rate: float
    simulated_rate: float

    @property
    def divergence(self) -> float:
        return abs(self.model_rate - self.simulated_rate)


@dataclass
class DivergenceTable:
    rows: list

    def mean_divergence(self) -> float:
        return sum(r.divergence for r in self.rows) / len(self.rows)

    def max_divergence(self) -> float:
        return max(r.divergence for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cores", "level", "scope", "model_rate", "simulated_rate", "abs_diff"])
        for r in self.rows:
            w.writerow([r.cores, r.level, r.scope, r.model_rate, r.simulated_rate, r.divergence])
        return buf.getvalue()


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _make_strategy(name: str, seed: int):
    return RoundRobin() if name == "round-robin" else UniformRandom(seed)


@dataclass
class _Inputs:
    machine: object
    kernel_stats: object
    gaps: object
    trace: object
    stats: object
    shared: set
    scheme: object
    stem: str
    provenance: dict


def _load_inputs(cfg: PipelineConfig, need_kernel: bool) -> _Inputs:
    provenance = {
        "tool": f"corecast {__version__}",
        "seed": cfg.seed,
        "strategy": cfg.strategy,
        "core_counts": ",".join(str(n) for n in cfg.core_counts),
        "shared_label_prefix": cfg.shared_label_prefix,
    }
    with _stage("config"):
        machine = resolve_machine(cfg.machine)
        if cfg.line_size is not None:
            provenance["line_size_override"] = cfg.line_size
            machine = dataclasses.replace(
                machine,
                levels={
                    name: dataclasses.replace(level, line_size=cfg.line_size)
                    for name, level in machine.levels.items()
                },
            )
        bad = [n for n in cfg.core_counts if n > machine.core_count]
        if bad:
            raise ValueError(
                f"core counts {bad} exceed machine core_count {machine.core_count}"
            )
        provenance["machine"] = machine.name
        if Path(cfg.machine).exists():
            provenance["machine_file"] = Path(cfg.machine).name
            provenance["machine_sha256"] = _sha256(cfg.machine)
        else:
            provenance["machine_preset"] = cfg.machine
        kernel_stats = gaps = None
        if cfg.kernel is not None:
            kernel_stats, gaps = load_kernel(cfg.kernel)
            provenance["kernel_file"] = Path(cfg.kernel).name
            provenance["kernel_sha256"] = _sha256(cfg.kernel)
        elif need_kernel:
            raise ValueError("this run needs a kernel stats file (--kernel)")
    with _stage("trace"):
        if cfg.trace is not None:
            trace = read_trace(cfg.trace)
            stem = Path(cfg.trace).stem
            provenance["trace_file"] = Path(cfg.trace).name
            provenance["trace_sha256"] = _sha256(cfg.trace)
        else:
            spec = load_workload(cfg.workload)
            trace = generate_synthetic_trace(spec, cfg.seed)
            stem = Path(cfg.workload).stem
            provenance["workload_file"] = Path(cfg.workload).name
            provenance["workload_sha256"] = _sha256(cfg.workload)
    with _stage("analyze"):
        stats = block_stats(trace)
        shared = shared_refs(trace, cfg.shared_label_prefix)
        scheme = compute_offset(trace, machine.max_line_size)
    return _Inputs(machine, kernel_stats, gaps, trace, stats, shared, scheme, stem, provenance)


def _mimic_one(inputs: _Inputs, cfg: PipelineConfig, n: int):
    with _stage("mimic"):
        privates = gen_private_traces(
            inputs.trace, n, inputs.shared, inputs.stats, inputs.scheme
        )
    with _stage("interleave"):
        merged = interleave_traces(privates, _make_strategy(cfg.strategy, cfg.seed))
    return privates, merged


def _private_rates(privates, levels, persist_to=None, written=None, stem=""):
    """Per-core L1/L2 rates; profiles deduped when levels share a line size."""
    per_core = {}
    sums = {name: 0.0 for name in _PRIVATE_LEVELS}
    for k, tr in enumerate(privates):
        by_line_size = {}
        for name in _PRIVATE_LEVELS:
            level = levels[name]
            prof = by_line_size.get(level.line_size)
            if prof is None:
                try:
                    prof = line_profile(tr, level.line_size)
                except ValueError:
                    raise ValueError(
                        f"core {k} received no accesses; trace has too few "
                        f"block instances for {len(privates)} cores"
                    ) from None
                by_line_size[level.line_size] = prof
                if persist_to is not None:
                    path = persist_to / f"{stem}.core{k}.line{level.line_size}.profile"
                    write_profile(prof, path)
                    written.append(path)
            rate = hit_rate(prof, level)
            per_core[(name, k)] = rate
            sums[name] += rate
    n = len(privates)
    means = {name: sums[name] / n for name in _PRIVATE_LEVELS}
    return per_core, means


def run_pipeline(cfg: PipelineConfig) -> PredictionReport:
    """Full prediction run; writes intermediates and reports under out_dir.

    With persist=False (or no out_dir) everything stays in memory and only
    the report files are written (none at all when out_dir is None).
    """
    written: list[Path] = []
    try:
        return _run_pipeline(cfg, written)
    except BaseException:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise


def _run_pipeline(cfg: PipelineConfig, written: list) -> PredictionReport:
    inputs = _load_inputs(cfg, need_kernel=True)
    machine = inputs.machine
    levels = machine.levels
    out_dir = None
    if cfg.out_dir is not None:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    persist_to = out_dir if (out_dir is not None and cfg.persist) else None
    results = []
    for n in cfg.core_counts:
        privates, merged = _mimic_one(inputs, cfg, n)
        stem_n = f"{inputs.stem}.cores{n}"
        if persist_to is not None:
            with _stage("persist"):
                for k, tr in enumerate(privates):
                    path = persist_to / f"{stem_n}.core{k}.trace"
                    write_trace(tr, path)
                    written.append(path)
                path = persist_to / f"{stem_n}.shared.{cfg.strategy}.trace"
                write_trace(merged, path)
                written.append(path)
        with _stage("profile"):
            per_core, means = _private_rates(
                privates, levels, persist_to, written, stem_n
            )
            shared_profile = line_profile(merged, levels["L3"].line_size)
            if persist_to is not None:
                path = persist_to / (
                    f"{stem_n}.shared.{cfg.strategy}.line{levels['L3'].line_size}.profile"
                )
                write_profile(shared_profile, path)
                written.append(path)
        with _stage("hitrate"):
            means["L3"] = hit_rate(shared_profile, levels["L3"])
            rates = HitRateReport(per_level=means, per_core_private=per_core)
        with _stage("runtime"):
            seconds = predict_runtime(rates, inputs.kernel_stats, machine, n, inputs.gaps)
            gaps = inputs.gaps
            sizes = gaps.block_sizes if gaps.block_sizes is not None else (machine.word_size,)
            eff = [
                effective_block_size(b, gaps.gap, machine.transfer_unit, levels["L3"].capacity)
                for b in sizes
            ]
            b_eff = sum(eff) / len(eff)
            mem = mem_time(
                avg_latency(rates, machine),
                avg_throughput(rates, machine),
                b_eff,
                inputs.kernel_stats.total_mem_bytes,
                n,
            )
            cpu = cpu_time(inputs.kernel_stats, machine, n)
        results.append(CoreCountResult(n, rates, mem, cpu, seconds))
    report = PredictionReport(results, inputs.provenance)
    if out_dir is not None:
        with _stage("report"):
            csv_path = out_dir / "report.csv"
            txt_path = out_dir / "report.txt"
            csv_path.write_text(report.to_csv(), encoding="utf-8", newline="\n")
            written.append(csv_path)
            txt_path.write_text(report.to_text(), encoding="utf-8", newline="\n")
            written.append(txt_path)
    return report


def compare_oracle(cfg: PipelineConfig, max_events: int = 2_000_000) -> DivergenceTable:
    """Model vs exact LRU simulation on the same mimicked traces.

    Refuses traces above max_events accesses: the simulator walks every
    access for every level and core count.
    """
    inputs = _load_inputs(cfg, need_kernel=False)
    with _stage("oracle"):
        n_accesses = sum(1 for e in inputs.trace.events if type(e) is int)
        if n_accesses > max_events:
            raise ValueError(
                f"trace has {n_accesses} accesses, above the oracle cap of "
                f"{max_events}; raise --max-events if you really want this"
            )
    levels = inputs.machine.levels
    rows = []
    for n in cfg.core_counts:
        privates, merged = _mimic_one(inputs, cfg, n)
        with _stage("oracle"):
            for k, tr in enumerate(privates):
                by_line_size = {}
                for name in _PRIVATE_LEVELS:
                    level = levels[name]
                    prof = by_line_size.get(level.line_size)
                    if prof is None:
                        prof = line_profile(tr, level.line_size)
                        by_line_size[level.line_size] = prof
                    rows.append(OracleRow(
                        n, name, f"core{k}",
                        hit_rate(prof, level),
                        simulate_lru(tr, level),
                    ))
            level = levels["L3"]
            rows.append(OracleRow(
                n, "L3", "shared",
                hit_rate(line_profile(merged, level.line_size), level),
                simulate_lru(merged, level),
            ))
    return DivergenceTable(rows)

"""Command-line interface: gen, mimic, profile, hitrate, predict, oracle."""

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .cache import HitRateReport, hit_rate
from .config import ConfigError, resolve_machine
from .mimic import compute_offset, gen_private_traces, interleave_traces
from .pipeline import PipelineConfig, StageError, _make_strategy, compare_oracle, run_pipeline
from .reuse import format_profile, line_profile, read_profile, write_profile
from .synth import generate_synthetic_trace, load_workload
from .trace import (
    DEFAULT_SHARED_PREFIX,
    TraceError,
    block_stats,
    read_trace,
    shared_refs,
    write_trace,
)


def _parse_cores(text: str):
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad core list {text!r}; expected e.g. 1,2,4,8")
    if not counts or any(n < 1 for n in counts):
        raise argparse.ArgumentTypeError("core counts must be positive integers")
    return counts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corecast",
        description="Predict multicore cache hit rates and parallel-section "
        "runtimes from a single labeled memory trace.",
    )
    parser.add_argument("--version", action="version", version=f"corecast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic trace from a workload file")
    p.add_argument("--workload", required=True, help="workload JSON file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="trace file to write")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("mimic", help="split a trace into per-core private traces plus the interleaved shared trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--cores", type=_parse_cores, default=(2,), metavar="1,2,4,8")
    p.add_argument("--strategy", choices=("round-robin", "uniform"), default="round-robin")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--line-size", type=int, default=64,
                   help="largest cache line size, for offset alignment (default 64)")
    p.add_argument("--shared-prefix", default=DEFAULT_SHARED_PREFIX)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_mimic)

    p = sub.add_parser("profile", help="compute a reuse profile at a given line granularity")
    p.add_argument("--trace", required=True)
    p.add_argument("--line-size", type=int, default=64)
    p.add_argument("--naive", action="store_true", help="use the reference O(N*M) algorithm")
    p.add_argument("--pow2-bins", action="store_true",
                   help="floor finite distances to powers of two (coarse histograms)")
    p.add_argument("--out", help="profile file to write (default: stdout)")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("hitrate", help="fold a reuse profile through a machine's cache levels")
    p.add_argument("--profile", required=True)
    p.add_argument("--machine", required=True, help="machine JSON file or preset name")
    p.add_argument("--out", help="CSV file to write (default: stdout)")
    p.set_defaults(func=_cmd_hitrate)

    p = sub.add_parser("predict", help="full pipeline: trace to hit rates and runtime per core count")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace")
    src.add_argument("--workload", help="synthesize the input trace from this workload file")
    p.add_argument("--machine", required=True)
    p.add_argument("--kernel", required=True, help="kernel stats JSON file")
    p.add_argument("--cores", type=_parse_cores, default=(1,), metavar="1,2,4,8")
    p.add_argument("--strategy", choices=("round-robin", "uniform"), default="round-robin")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--line-size", type=int, help="override every cache level's line size")
    p.add_argument("--shared-prefix", default=DEFAULT_SHARED_PREFIX)
    p.add_argument("--out", help="output directory for reports and intermediates")
    p.add_argument("--no-persist", action="store_true",
                   help="keep intermediate traces/profiles in memory; write reports only")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("oracle", help="compare model hit rates against exact LRU simulation")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace")
    src.add_argument("--workload")
    p.add_argument("--machine", required=True)
    p.add_argument("--cores", type=_parse_cores, default=(1,), metavar="1,2,4,8")
    p.add_argument("--strategy", choices=("round-robin", "uniform"), default="round-robin")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--line-size", type=int)
    p.add_argument("--shared-prefix", default=DEFAULT_SHARED_PREFIX)
    p.add_argument("--max-events", type=int, default=2_000_000)
    p.add_argument("--out", help="CSV file to write (default: stdout)")
    p.set_defaults(func=_cmd_oracle)

    return parser


def _cmd_gen(args) -> int:
    spec = load_workload(args.workload)
    trace = generate_synthetic_trace(spec, args.seed)
    write_trace(trace, args.out)
    accesses = sum(1 for e in trace.events if type(e) is int)
    print(f"wrote {len(trace)} events ({accesses} accesses) to {args.out}")
    return 0


def _cmd_mimic(args) -> int:
    trace = read_trace(args.trace)
    stats = block_stats(trace)
    shared = shared_refs(trace, args.shared_prefix)
    scheme = compute_offset(trace, args.line_size)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.trace).stem
    for n in args.cores:
        privates = gen_private_traces(trace, n, shared, stats, scheme)
        merged = interleave_traces(privates, _make_strategy(args.strategy, args.seed))
        for k, tr in enumerate(privates):
            write_trace(tr, out_dir / f"{stem}.cores{n}.core{k}.trace")
        write_trace(merged, out_dir / f"{stem}.cores{n}.shared.{args.strategy}.trace")
        print(f"cores={n}: wrote {n} private traces and 1 shared trace to {out_dir}")
    print(f"offset: 0x{scheme.offset:x}")
    return 0


def _cmd_profile(args) -> int:
    trace = read_trace(args.trace, allow_interleaved=True)
    method = "naive" if args.naive else "tree"
    profile = line_profile(trace, args.line_size, method=method, pow2_bins=args.pow2_bins)
    if args.out:
        write_profile(profile, args.out)
        print(f"wrote {len(profile.histogram)} distinct distances "
              f"({profile.total} accesses) to {args.out}")
    else:
        sys.stdout.write(format_profile(profile))
    return 0


def _cmd_hitrate(args) -> int:
    profile = read_profile(args.profile)
    machine = resolve_machine(args.machine)
    per_level = {name: hit_rate(profile, machine.levels[name]) for name in ("L1", "L2", "L3")}
    report = HitRateReport(per_level=per_level, per_core_private={})
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8", newline="\n")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(report.to_csv())
    return 0


def _cmd_predict(args) -> int:
    cfg = PipelineConfig(
        machine=args.machine,
        kernel=args.kernel,
        trace=args.trace,
        workload=args.workload,
        core_counts=args.cores,
        strategy=args.strategy,
        seed=args.seed,
        shared_label_prefix=args.shared_prefix,
        out_dir=args.out,
        persist=not args.no_persist,
        line_size=args.line_size,
    )
    report = run_pipeline(cfg)
    sys.stdout.write(report.to_text())
    if args.out:
        print(f"reports written to {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = PipelineConfig(
        machine=args.machine,
        kernel=None,
        trace=args.trace,
        workload=args.workload,
        core_counts=args.cores,
        strategy=args.strategy,
        seed=args.seed,
        shared_label_prefix=args.shared_prefix,
        out_dir=None,
        line_size=args.line_size,
    )
    table = compare_oracle(cfg, max_events=args.max_events)
    if args.out:
        Path(args.out).write_text(table.to_csv(), encoding="utf-8", newline="\n")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(table.to_csv())
    print(
        f"mean |model - simulated| = {table.mean_divergence():.6f}, "
        f"max = {table.max_divergence():.6f}",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"corecast: error {exc}", file=sys.stderr)
        return 1
    except (TraceError, ConfigError, ValueError, OSError) as exc:
        print(f"corecast: error [{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: solve, admit, simulate, sweep, curve, profile.

Exit codes: 0 success, 2 parse/validation failure, 3 insufficient budget.
Every failure prints one line to stderr of the form `error[<code>]: <detail>`
so scripts can branch on the reason. The default seed is 42 and may be
overridden by the ACIDE_SEED environment variable or the --seed flag
(flag wins).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from io import StringIO
from pathlib import Path
from typing import Sequence

from acide.admission import (
    AdmissionBudget,
    InsufficientBudgetError,
    join_cluster,
    outcome_to_dict,
)
from acide.core import (
    InfeasibleClusterError,
    PeerProfile,
    StreamParams,
    min_bandwidth,
    plan_to_dict,
    validate_cluster,
)
from acide.experiments import (
    DEFAULT_DELAY_BOUND,
    DEFAULT_DOWNLOAD_RANGES,
    DEFAULT_SEED,
    DEFAULT_UPLOAD_RANGES,
    admitted_vs_budget_curve,
    block_size_profile,
    default_scenario,
    load_scenario,
    records_to_dicts,
    run_admission_sweep,
    write_curve_csv,
    write_profile_csv,
    write_records_csv,
)
from acide.sim import playback_check, simulate, write_trace_csv, write_trace_json

SEED_ENV_VAR = "ACIDE_SEED"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3


class ParseInputError(Exception):
    """Malformed input file; message names the file (and line where known)."""


def _fail(code: str, message: str) -> None:
    print(f"error[{code}]: {message}", file=sys.stderr)


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ParseInputError(f"{SEED_ENV_VAR}={env!r} is not an integer seed") from exc
    return DEFAULT_SEED


def load_peers_csv(path: str) -> list[PeerProfile]:
    """Read peers from CSV rows id,u_bps,d_bps; a matching header row is optional."""
    peers = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fp:
            for lineno, row in enumerate(csv.reader(fp), start=1):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if lineno == 1 and [c.strip().lower() for c in row[:1]] == ["id"]:
                    continue
                if len(row) != 3:
                    raise ParseInputError(
                        f"{path}:{lineno}: expected 3 fields id,u_bps,d_bps, got {len(row)}"
                    )
                ident = row[0].strip()
                try:
                    upload = float(row[1])
                    download = float(row[2])
                except ValueError:
                    raise ParseInputError(
                        f"{path}:{lineno}: u_bps and d_bps must be numbers, got "
                        f"{row[1]!r}, {row[2]!r}"
                    ) from None
                if not ident:
                    raise ParseInputError(f"{path}:{lineno}: empty peer id")
                if upload <= 0 or download <= 0:
                    raise ParseInputError(
                        f"{path}:{lineno}: bandwidths must be positive, got {upload}, {download}"
                    )
                peers.append(PeerProfile(id=ident, upload=upload, download=download))
    except OSError as exc:
        raise ParseInputError(f"{path}: {exc.strerror or exc}") from exc
    if not peers:
        raise ParseInputError(f"{path}: no peers found")
    return peers


def load_peers_json(path: str) -> tuple[list[PeerProfile], dict]:
    """Read peers (and optional stream section) from a JSON input file.

    Accepts either a bare list of peer objects or {"peers": [...],
    "stream": {"package_bits": ..., "delay_ms": ...}}. Peer objects carry
    id, u_bps, d_bps.
    """
    try:
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
    except OSError as exc:
        raise ParseInputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseInputError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    stream_info: dict = {}
    if isinstance(data, dict):
        raw_peers = data.get("peers")
        stream_info = data.get("stream") or {}
        if not isinstance(raw_peers, list):
            raise ParseInputError(f"{path}: expected a \"peers\" list")
    elif isinstance(data, list):
        raw_peers = data
    else:
        raise ParseInputError(f"{path}: expected a peer list or an object with one")
    peers = []
    for i, item in enumerate(raw_peers):
        try:
            ident = str(item["id"])
            upload = float(item["u_bps"])
            download = float(item["d_bps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseInputError(f"{path}: peer #{i + 1} is malformed: {exc}") from exc
        if upload <= 0 or download <= 0:
            raise ParseInputError(
                f"{path}: peer #{i + 1}: bandwidths must be positive, got {upload}, {download}"
            )
        peers.append(PeerProfile(id=ident, upload=upload, download=download))
    if not peers:
        raise ParseInputError(f"{path}: no peers found")
    return peers, stream_info


def _load_peer_input(path: str) -> tuple[list[PeerProfile], dict]:
    if path.endswith(".json"):
        return load_peers_json(path)
    return load_peers_csv(path), {}


def _resolve_stream(args: argparse.Namespace, stream_info: dict) -> StreamParams:
    """Stream parameters from flags, falling back to the input file's values.

    Flags override the file. Package size comes from --package-bits, or from
    --livestream-bps times the delay bound. The delay bound defaults to 200 ms.
    """
    delay_ms = args.delay_ms
    if delay_ms is None:
        delay_ms = stream_info.get("delay_ms")
    if delay_ms is None:
        delay_ms = DEFAULT_DELAY_BOUND * 1000.0
    delay_s = float(delay_ms) / 1000.0
    if args.package_bits is not None:
        package = float(args.package_bits)
    elif args.livestream_bps is not None:
        package = float(args.livestream_bps) * delay_s
    elif stream_info.get("package_bits") is not None:
        package = float(stream_info["package_bits"])
    elif stream_info.get("livestream_bps") is not None:
        package = float(stream_info["livestream_bps"]) * delay_s
    else:
        raise ValueError(
            "no package size given: pass --package-bits or --livestream-bps, "
            "or put a stream section in the input file"
        )
    return StreamParams(package_size=package, delay_bound=delay_s)


def _report_violations(peers, stream) -> bool:
    report = validate_cluster(peers, stream)
    for v in report.violations:
        _fail(f"validation:{v.code}", v.message)
    return report.ok


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fmt_bw(x: float) -> str:
    return f"{x:.2f}"


def _plan_csv_text(plan) -> str:
    lines = ["id,u_bps,d_bps,s_bits,bw_bps"]
    for p, s, bw in zip(plan.peers, plan.block_sizes, plan.peer_bandwidths):
        lines.append(f"{p.id},{_fmt_bw(p.upload)},{_fmt_bw(p.download)},{s:.6f},{_fmt_bw(bw)}")
    return "\n".join(lines) + "\n"


def _print_plan(plan) -> None:
    print(f"peers: {len(plan.peers)}")
    print(f"phase 1: {plan.phase1_time:.6f} s   phase 2: {plan.phase2_time:.6f} s")
    print(f"total allocated bandwidth: {_fmt_bw(plan.total_bandwidth)} bps")
    print("id,u_bps,s_bits,bw_bps")
    for p, s, bw in zip(plan.peers, plan.block_sizes, plan.peer_bandwidths):
        print(f"{p.id},{_fmt_bw(p.upload)},{s:.6f},{_fmt_bw(bw)}")


def _cmd_solve(args: argparse.Namespace) -> int:
    peers, stream_info = _load_peer_input(args.input)
    stream = _resolve_stream(args, stream_info)
    if not _report_violations(peers, stream):
        return EXIT_INVALID
    plan = min_bandwidth(peers, stream)
    _print_plan(plan)
    if args.output:
        if args.format == "json":
            _write_text(args.output, json.dumps(plan_to_dict(plan), indent=2, sort_keys=True) + "\n")
        else:
            _write_text(args.output, _plan_csv_text(plan))
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_admit(args: argparse.Namespace) -> int:
    peers, stream_info = _load_peer_input(args.input)
    stream = _resolve_stream(args, stream_info)
    # Candidates only need individually consistent links here; pool-level
    # feasibility is what admission itself decides.
    bad = [p.id for p in peers if p.upload > p.download]
    if bad:
        _fail("validation:upload-over-download", f"upload exceeds download for peer(s): {', '.join(bad)}")
        return EXIT_INVALID
    outcome = join_cluster(AdmissionBudget(float(args.budget_bps), tuple(peers), stream))
    print(f"admitted {len(outcome.admitted)} of {len(peers)} candidates")
    print(
        f"allocated bandwidth: {_fmt_bw(outcome.plan.total_bandwidth)} bps "
        f"(budget {_fmt_bw(args.budget_bps)} bps)"
    )
    print(f"efficiency: {outcome.efficiency * 100.0:.2f}%")
    if outcome.rejected:
        print(f"rejected: {', '.join(p.id for p in outcome.rejected)}")
    if args.output:
        if args.format == "json":
            _write_text(
                args.output, json.dumps(outcome_to_dict(outcome), indent=2, sort_keys=True) + "\n"
            )
        else:
            _write_text(args.output, _plan_csv_text(outcome.plan))
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    peers, stream_info = _load_peer_input(args.input)
    stream = _resolve_stream(args, stream_info)
    if not _report_violations(peers, stream):
        return EXIT_INVALID
    plan = min_bandwidth(peers, stream)
    trace = simulate(plan)
    report = playback_check(trace, stream)
    status = "continuous" if report.continuous else "VIOLATION"
    print(f"playback: {status}")
    print(f"makespan: {trace.makespan:.9f} s (delay bound {stream.delay_bound:.9f} s)")
    if not report.continuous:
        print(f"worst peer: {report.worst_peer} overshoot {report.overshoot:.9f} s")
    if args.output:
        buf = StringIO()
        if args.format == "json":
            write_trace_json(trace, buf)
        else:
            write_trace_csv(trace, buf)
        _write_text(args.output, buf.getvalue())
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.input:
        try:
            spec = load_scenario(args.input)
        except json.JSONDecodeError as exc:
            raise ParseInputError(f"{args.input}:{exc.lineno}: {exc.msg}") from exc
        except OSError as exc:
            raise ParseInputError(f"{args.input}: {exc.strerror or exc}") from exc
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        if args.sizes:
            missing = [s for s in args.sizes if s not in spec.upload_ranges]
            if missing:
                raise ValueError(f"scenario has no ranges for sizes {missing}")
            spec = replace(spec, cluster_sizes=tuple(args.sizes))
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        spec = default_scenario(cluster_sizes=args.sizes or None, seed=seed)
    records = run_admission_sweep(spec)
    buf = StringIO()
    if args.format == "json":
        json.dump(records_to_dicts(records), buf, indent=2, sort_keys=True)
        buf.write("\n")
    else:
        write_records_csv(records, buf)
    _write_text(args.output, buf.getvalue())
    if args.output:
        print(f"wrote {len(records)} records to {args.output}")
    return EXIT_OK


def _suffixed(path: str, size: int) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}_n{size}{p.suffix or '.csv'}"))


def _cmd_curve(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    delay_s = (args.delay_ms if args.delay_ms is not None else DEFAULT_DELAY_BOUND * 1000.0) / 1000.0
    for size in args.sizes:
        curve = admitted_vs_budget_curve(
            size, float(args.livestream_bps), seed, delay_bound=delay_s
        )
        out = _suffixed(args.output, size)
        buf = StringIO()
        if args.format == "json":
            json.dump([{"BW_bps": b, "n": n} for b, n in curve], buf, indent=2, sort_keys=True)
            buf.write("\n")
        else:
            write_curve_csv(curve, buf)
        _write_text(out, buf.getvalue())
        print(f"wrote {out}")
    return EXIT_OK


def _cmd_profile(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    delay_s = (args.delay_ms if args.delay_ms is not None else DEFAULT_DELAY_BOUND * 1000.0) / 1000.0
    missing = [s for s in args.sizes if s not in DEFAULT_UPLOAD_RANGES]
    if missing:
        raise ValueError(f"no default ranges for sizes {missing}")
    stream = StreamParams(package_size=float(args.livestream_bps) * delay_s, delay_bound=delay_s)
    profiles = block_size_profile(
        args.sizes, DEFAULT_UPLOAD_RANGES, DEFAULT_DOWNLOAD_RANGES, stream, seed
    )
    for size in sorted(profiles):
        out = _suffixed(args.output, size)
        buf = StringIO()
        if args.format == "json":
            json.dump(
                [
                    {"peer_index": i, "u_bps": u, "s_bits": s, "bw_bps": bw}
                    for i, (u, s, bw) in enumerate(profiles[size], start=1)
                ],
                buf,
                indent=2,
                sort_keys=True,
            )
            buf.write("\n")
        else:
            write_profile_csv(profiles[size], buf)
        _write_text(out, buf.getvalue())
        print(f"wrote {out}")
    return EXIT_OK


def _add_stream_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--package-bits", type=float, help="media package size in bits")
    group.add_argument(
        "--livestream-bps", type=float, help="livestream bandwidth; package = rate * delay bound"
    )
    parser.add_argument("--delay-ms", type=float, help="delay bound in milliseconds (default 200)")


def _add_io_flags(parser: argparse.ArgumentParser, output_required: bool = False) -> None:
    parser.add_argument("--output", required=output_required, help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acide",
        description=(
            "Bandwidth planning, cluster admission, and two-phase distribution "
            "simulation for P2P livestream clusters."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimal block sizes and bandwidths for a peer list")
    solve.add_argument("--input", required=True, help="peer list (CSV id,u_bps,d_bps or JSON)")
    _add_stream_flags(solve)
    _add_io_flags(solve)
    solve.set_defaults(handler=_cmd_solve)

    admit = sub.add_parser("admit", help="greedy admission under a bandwidth budget")
    admit.add_argument("--input", required=True, help="candidate list (CSV or JSON)")
    admit.add_argument("--budget-bps", type=float, required=True, help="pre-reserved bandwidth budget")
    _add_stream_flags(admit)
    _add_io_flags(admit)
    admit.set_defaults(handler=_cmd_admit)

    simulate_p = sub.add_parser("simulate", help="solve, then replay the two-phase distribution")
    simulate_p.add_argument("--input", required=True, help="peer list (CSV or JSON)")
    _add_stream_flags(simulate_p)
    _add_io_flags(simulate_p)
    simulate_p.set_defaults(handler=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="admission sweep over sizes, stream rates, and budgets")
    source = sweep.add_mutually_exclusive_group()
    source.add_argument("--input", help="scenario JSON (defaults used when omitted)")
    source.add_argument(
        "--table1-defaults",
        action="store_true",
        help="use the built-in default scenario (implied when --input is omitted)",
    )
    sweep.add_argument("--sizes", type=int, nargs="+", help="restrict to these cluster sizes")
    sweep.add_argument("--seed", type=int, help="override the scenario seed")
    _add_io_flags(sweep)
    sweep.set_defaults(handler=_cmd_sweep)

    curve = sub.add_parser("curve", help="admitted peers vs budget for drawn pools")
    curve.add_argument("--sizes", type=int, nargs="+", required=True, help="pool sizes")
    curve.add_argument("--livestream-bps", type=float, required=True)
    curve.add_argument("--delay-ms", type=float, help="delay bound in milliseconds (default 200)")
    curve.add_argument("--seed", type=int)
    _add_io_flags(curve, output_required=True)
    curve.set_defaults(handler=_cmd_curve)

    profile = sub.add_parser("profile", help="per-peer block size and bandwidth tables")
    profile.add_argument("--sizes", type=int, nargs="+", required=True, help="cluster sizes")
    profile.add_argument("--livestream-bps", type=float, required=True)
    profile.add_argument("--delay-ms", type=float, help="delay bound in milliseconds (default 200)")
    profile.add_argument("--seed", type=int)
    _add_io_flags(profile, output_required=True)
    profile.set_defaults(handler=_cmd_profile)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseInputError as exc:
        _fail("parse", str(exc))
        return EXIT_INVALID
    except InsufficientBudgetError as exc:
        _fail("insufficient-budget", str(exc))
        return EXIT_BUDGET
    except InfeasibleClusterError as exc:
        _fail("infeasible", str(exc))
        return EXIT_INVALID
    except ValueError as exc:
        _fail("validation", str(exc))
        return EXIT_INVALID


def run() -> None:
    """Console entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()

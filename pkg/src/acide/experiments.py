"""Seeded experiment harness: scenario sweeps, trend curves, and baselines.

Candidate pools are drawn with Python's random.Random (MT19937), so a
scenario spec plus a seed pins every output byte-for-byte. The bundled
defaults describe a 200 ms delay bound, per-cluster-size upload/download
ranges that widen with the cluster size, livestream bandwidths from 10 to
16 kbps, and a shared grid of pre-reserved budget values; sweeps admit a
cluster for every (pool size, livestream bandwidth, budget) cell and record
how much of the budget the admitted cluster actually needs.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from acide.admission import AdmissionBudget, InsufficientBudgetError, join_cluster
from acide.core import PeerProfile, StreamParams, allocated_bandwidth, min_bandwidth, sort_peers

DEFAULT_SEED = 42
DEFAULT_DELAY_BOUND = 0.2  # seconds
DEFAULT_LIVESTREAM_BANDWIDTHS = (10000.0, 12000.0, 14000.0, 16000.0)
DEFAULT_CLUSTER_SIZES = (5, 10, 15, 20, 40, 60)

# Per-cluster-size draw ranges, bits/second. Larger pools come from
# progressively better-provisioned populations.
DEFAULT_UPLOAD_RANGES: dict[int, tuple[float, float]] = {
    5: (10000.0, 20000.0),
    10: (10000.0, 30000.0),
    15: (10000.0, 40000.0),
    20: (10000.0, 50000.0),
    40: (10000.0, 60000.0),
    60: (10000.0, 70000.0),
    80: (10000.0, 80000.0),
    100: (10000.0, 90000.0),
    120: (10000.0, 100000.0),
}
DEFAULT_DOWNLOAD_RANGES: dict[int, tuple[float, float]] = {
    5: (20000.0, 30000.0),
    10: (30000.0, 50000.0),
    15: (40000.0, 70000.0),
    20: (50000.0, 90000.0),
    40: (60000.0, 110000.0),
    60: (70000.0, 130000.0),
    80: (80000.0, 150000.0),
    100: (90000.0, 170000.0),
    120: (100000.0, 190000.0),
}

# Shared budget grid covering both default livestream bandwidths, bps.
DEFAULT_BUDGETS = (
    60000.0,
    50000.0,
    40000.0,
    30000.0,
    20000.0,
    18000.0,
    16000.0,
    14000.0,
    12000.0,
    10000.0,
)

MAX_REDRAWS = 10000

RECORD_COLUMNS = ("N", "livestream_bps", "BW_bps", "n_admitted", "bw_bps", "efficiency_pct")
CURVE_COLUMNS = ("BW_bps", "n")
PROFILE_COLUMNS = ("peer_index", "u_bps", "s_bits", "bw_bps")


@dataclass(frozen=True)
class ScenarioSpec:
    """A reproducible sweep: sizes, draw ranges per size, stream values, budgets, seed."""

    cluster_sizes: tuple[int, ...]
    upload_ranges: dict[int, tuple[float, float]]
    download_ranges: dict[int, tuple[float, float]]
    delay_bound: float
    livestream_bandwidths: tuple[float, ...]
    budgets: tuple[float, ...]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        object.__setattr__(
            self, "upload_ranges",
            {int(k): (float(v[0]), float(v[1])) for k, v in self.upload_ranges.items()},
        )
        object.__setattr__(
            self, "download_ranges",
            {int(k): (float(v[0]), float(v[1])) for k, v in self.download_ranges.items()},
        )
        object.__setattr__(
            self, "livestream_bandwidths", tuple(float(v) for v in self.livestream_bandwidths)
        )
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if not self.cluster_sizes:
            raise ValueError("scenario needs at least one cluster size")
        if not self.livestream_bandwidths or not self.budgets:
            raise ValueError("scenario needs livestream bandwidths and budgets")
        if self.delay_bound <= 0:
            raise ValueError(f"delay_bound must be positive, got {self.delay_bound}")
        if any(v <= 0 for v in self.livestream_bandwidths):
            raise ValueError("livestream bandwidths must be positive")
        if any(b <= 0 for b in self.budgets):
            raise ValueError("budgets must be positive")
        for size in self.cluster_sizes:
            if size < 1:
                raise ValueError(f"cluster sizes must be >= 1, got {size}")
            if size not in self.upload_ranges or size not in self.download_ranges:
                raise ValueError(f"no upload/download range given for cluster size {size}")
        for ranges in (self.upload_ranges, self.download_ranges):
            for size, (low, high) in ranges.items():
                if not (0 < low <= high):
                    raise ValueError(f"bad range [{low}, {high}] for cluster size {size}")


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep cell: pool size N, stream rate, budget, and the admission result."""

    pool_size: int
    livestream_bandwidth: float
    budget: float
    n_admitted: int
    allocated_bandwidth: float
    efficiency_pct: float

    @property
    def feasible(self) -> bool:
        return self.n_admitted > 0


def pool_seed(seed: int, size: int) -> int:
    """Sub-seed for the size-`size` candidate pool of a scenario seed.

    Derived arithmetically so a pool can be regenerated without running the
    whole sweep, and so each cluster size gets an independent stream.
    """
    return (seed * 1_000_003 + size) & 0xFFFFFFFFFFFFFFFF


def generate_peers(
    size: int,
    upload_range: tuple[float, float],
    download_range: tuple[float, float],
    seed: int,
) -> list[PeerProfile]:
    """Draw a candidate pool: uniform uploads and downloads, chain-constrained.

    Every upload must be at most every download (so any peer can absorb any
    other's block). Whole batches are redrawn until the constraint holds,
    which also keeps the draw unbiased within the constraint; pathological
    range pairs give up after MAX_REDRAWS attempts. Output is sorted
    ascending by upload and deterministic for a given seed.
    """
    if size < 1:
        raise ValueError(f"pool size must be >= 1, got {size}")
    u_low, u_high = upload_range
    d_low, d_high = download_range
    for low, high, label in ((u_low, u_high, "upload"), (d_low, d_high, "download")):
        if not (0 < low <= high):
            raise ValueError(f"bad {label} range [{low}, {high}]")
    if u_low > d_high:
        raise ValueError(
            f"impossible constraint: smallest upload {u_low} exceeds largest download {d_high}"
        )
    rng = random.Random(seed)
    for _ in range(MAX_REDRAWS):
        uploads = [rng.uniform(u_low, u_high) for _ in range(size)]
        downloads = [rng.uniform(d_low, d_high) for _ in range(size)]
        if max(uploads) <= min(downloads):
            break
    else:
        raise ValueError(
            f"could not draw {size} peers with max upload <= min download from "
            f"uploads [{u_low}, {u_high}] and downloads [{d_low}, {d_high}] "
            f"after {MAX_REDRAWS} attempts"
        )
    peers = [
        PeerProfile(id=f"u{i + 1:03d}", upload=u, download=d)
        for i, (u, d) in enumerate(zip(uploads, downloads))
    ]
    return sort_peers(peers)


def run_admission_sweep(spec: ScenarioSpec) -> list[ExperimentRecord]:
    """Admit one cluster per (pool size, livestream bandwidth, budget) cell.

    One candidate pool is drawn per cluster size (see pool_seed) and reused
    across every stream rate and budget, so trends within a size are not
    confounded by redraws. Records come out ordered: size ascending, stream
    rate ascending, budget descending. A budget below the livestream
    bandwidth admits nobody and is recorded with n_admitted = 0.
    """
    pools = {
        size: generate_peers(
            size,
            spec.upload_ranges[size],
            spec.download_ranges[size],
            pool_seed(spec.seed, size),
        )
        for size in spec.cluster_sizes
    }
    records: list[ExperimentRecord] = []
    for size in sorted(set(spec.cluster_sizes)):
        for rate in sorted(set(spec.livestream_bandwidths)):
            stream = StreamParams(package_size=rate * spec.delay_bound, delay_bound=spec.delay_bound)
            for budget in sorted(set(spec.budgets), reverse=True):
                try:
                    outcome = join_cluster(AdmissionBudget(budget, tuple(pools[size]), stream))
                    record = ExperimentRecord(
                        pool_size=size,
                        livestream_bandwidth=rate,
                        budget=budget,
                        n_admitted=len(outcome.admitted),
                        allocated_bandwidth=outcome.plan.total_bandwidth,
                        efficiency_pct=outcome.efficiency * 100.0,
                    )
                except InsufficientBudgetError:
                    record = ExperimentRecord(
                        pool_size=size,
                        livestream_bandwidth=rate,
                        budget=budget,
                        n_admitted=0,
                        allocated_bandwidth=0.0,
                        efficiency_pct=0.0,
                    )
                records.append(record)
    return records


def _max_feasible_bandwidth(pool: Sequence[PeerProfile], stream: StreamParams) -> float:
    """Bandwidth needed by the largest admissible suffix of the sorted pool."""
    ordered = sort_peers(pool)
    for removed in range(len(ordered)):
        required = allocated_bandwidth(ordered[removed:], stream)
        if math.isfinite(required):
            return required
    raise AssertionError("a single peer is always feasible")


def admitted_vs_budget_curve(
    size: int,
    livestream_bandwidth: float,
    seed: int,
    upload_range: tuple[float, float] | None = None,
    download_range: tuple[float, float] | None = None,
    delay_bound: float = DEFAULT_DELAY_BOUND,
) -> list[tuple[float, int]]:
    """Admitted cluster size as a function of the budget, for one drawn pool.

    The budget grid spans the livestream bandwidth (everything below it
    admits nobody) up to the bandwidth of the largest admissible group, with
    one grid point per candidate, endpoints included. The resulting n values
    are non-decreasing in the budget. Ranges default to the bundled
    per-size ranges.
    """
    if upload_range is None or download_range is None:
        if size not in DEFAULT_UPLOAD_RANGES:
            raise ValueError(
                f"no default ranges for cluster size {size}; pass upload_range/download_range"
            )
        upload_range = upload_range or DEFAULT_UPLOAD_RANGES[size]
        download_range = download_range or DEFAULT_DOWNLOAD_RANGES[size]
    pool = generate_peers(size, upload_range, download_range, seed)
    stream = StreamParams(package_size=livestream_bandwidth * delay_bound, delay_bound=delay_bound)
    low = stream.livestream_bandwidth
    high = _max_feasible_bandwidth(pool, stream)
    if size == 1:
        grid = [high]
    else:
        grid = [low + (high - low) * i / (size - 1) for i in range(size)]
        grid[0], grid[-1] = low, high
    curve = []
    for budget in grid:
        outcome = join_cluster(AdmissionBudget(budget, tuple(pool), stream))
        curve.append((budget, len(outcome.admitted)))
    return curve


def baseline_bandwidths(n: int, stream: StreamParams) -> tuple[float, float]:
    """(unicast, multicast) bandwidth baselines for serving n consumers.

    Unicast sends n copies: n * livestream bandwidth. Multicast sends one
    copy regardless of n, which is also the lower bound any cluster
    allocation can approach.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rate = stream.livestream_bandwidth
    return n * rate, rate


def block_size_profile(
    sizes: Iterable[int],
    upload_ranges: Mapping[int, tuple[float, float]],
    download_ranges: Mapping[int, tuple[float, float]],
    stream: StreamParams,
    seed: int,
) -> dict[int, list[tuple[float, float, float]]]:
    """Per-peer (upload, block size, bandwidth) tables for a set of cluster sizes.

    Each cluster is drawn with its size's pool_seed and solved; rows are in
    upload order, ready for plotting block size against upload capacity.
    The equal transfer-time property (block size over bandwidth identical
    for all peers) is asserted on every cluster as a self-check.
    """
    profiles: dict[int, list[tuple[float, float, float]]] = {}
    for size in sorted(set(int(s) for s in sizes)):
        pool = generate_peers(
            size, upload_ranges[size], download_ranges[size], pool_seed(seed, size)
        )
        plan = min_bandwidth(pool, stream)
        for s, bw in zip(plan.block_sizes, plan.peer_bandwidths):
            if abs(s / bw - plan.phase1_time) > 1e-9 * plan.phase1_time:
                raise AssertionError(f"unequal phase-1 transfer times in cluster of {size}")
        profiles[size] = [
            (p.upload, s, bw)
            for p, s, bw in zip(plan.peers, plan.block_sizes, plan.peer_bandwidths)
        ]
    return profiles


def default_scenario(
    cluster_sizes: Sequence[int] | None = None,
    seed: int = DEFAULT_SEED,
    livestream_bandwidths: Sequence[float] | None = None,
    budgets: Sequence[float] | None = None,
    delay_bound: float = DEFAULT_DELAY_BOUND,
) -> ScenarioSpec:
    """The bundled scenario, optionally restricted or reseeded."""
    sizes = tuple(cluster_sizes) if cluster_sizes is not None else DEFAULT_CLUSTER_SIZES
    return ScenarioSpec(
        cluster_sizes=sizes,
        upload_ranges={s: DEFAULT_UPLOAD_RANGES[s] for s in sizes},
        download_ranges={s: DEFAULT_DOWNLOAD_RANGES[s] for s in sizes},
        delay_bound=delay_bound,
        livestream_bandwidths=tuple(livestream_bandwidths)
        if livestream_bandwidths is not None
        else DEFAULT_LIVESTREAM_BANDWIDTHS,
        budgets=tuple(budgets) if budgets is not None else DEFAULT_BUDGETS,
        seed=seed,
    )


def scenario_from_dict(data: Mapping, source: str = "<scenario>") -> ScenarioSpec:
    """Build a ScenarioSpec from parsed JSON, filling gaps from the defaults.

    Recognised keys: cluster_sizes, upload_ranges, download_ranges,
    delay_bound_s, livestream_bandwidths_bps, budgets_bps, seed. Range keys
    arrive as JSON strings and are converted back to integer sizes.
    """
    try:
        sizes = tuple(int(s) for s in data.get("cluster_sizes", DEFAULT_CLUSTER_SIZES))
        upload_ranges = {
            int(k): (float(v[0]), float(v[1]))
            for k, v in data.get("upload_ranges", DEFAULT_UPLOAD_RANGES).items()
        }
        download_ranges = {
            int(k): (float(v[0]), float(v[1]))
            for k, v in data.get("download_ranges", DEFAULT_DOWNLOAD_RANGES).items()
        }
        return ScenarioSpec(
            cluster_sizes=sizes,
            upload_ranges={s: upload_ranges[s] for s in sizes},
            download_ranges={s: download_ranges[s] for s in sizes},
            delay_bound=float(data.get("delay_bound_s", DEFAULT_DELAY_BOUND)),
            livestream_bandwidths=tuple(
                float(v) for v in data.get("livestream_bandwidths_bps", DEFAULT_LIVESTREAM_BANDWIDTHS)
            ),
            budgets=tuple(float(b) for b in data.get("budgets_bps", DEFAULT_BUDGETS)),
            seed=int(data.get("seed", DEFAULT_SEED)),
        )
    except (KeyError, TypeError, IndexError, AttributeError) as exc:
        raise ValueError(f"{source}: malformed scenario: {exc}") from exc


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "cluster_sizes": list(spec.cluster_sizes),
        "upload_ranges": {str(k): list(v) for k, v in spec.upload_ranges.items()},
        "download_ranges": {str(k): list(v) for k, v in spec.download_ranges.items()},
        "delay_bound_s": spec.delay_bound,
        "livestream_bandwidths_bps": list(spec.livestream_bandwidths),
        "budgets_bps": list(spec.budgets),
        "seed": spec.seed,
    }


def load_scenario(path: str) -> ScenarioSpec:
    """Read a scenario JSON file; missing keys fall back to the defaults."""
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp)
    return scenario_from_dict(data, source=path)


def write_records_csv(records: Iterable[ExperimentRecord], fp: IO[str]) -> None:
    """Sweep records as CSV: N,livestream_bps,BW_bps,n_admitted,bw_bps,efficiency_pct."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.pool_size,
                f"{r.livestream_bandwidth:.2f}",
                f"{r.budget:.2f}",
                r.n_admitted,
                f"{r.allocated_bandwidth:.2f}",
                f"{r.efficiency_pct:.2f}",
            ]
        )


def records_to_dicts(records: Iterable[ExperimentRecord]) -> list[dict]:
    return [
        {
            "N": r.pool_size,
            "livestream_bps": r.livestream_bandwidth,
            "BW_bps": r.budget,
            "n_admitted": r.n_admitted,
            "bw_bps": r.allocated_bandwidth,
            "efficiency_pct": r.efficiency_pct,
        }
        for r in records
    ]


def write_curve_csv(curve: Iterable[tuple[float, int]], fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for budget, n in curve:
        writer.writerow([f"{budget:.2f}", n])


def write_profile_csv(rows: Iterable[tuple[float, float, float]], fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(PROFILE_COLUMNS)
    for index, (upload, size, bandwidth) in enumerate(rows, start=1):
        writer.writerow([index, f"{upload:.2f}", f"{size:.6f}", f"{bandwidth:.2f}"])

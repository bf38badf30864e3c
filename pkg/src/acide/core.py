"""Optimal block-size and bandwidth allocation for two-phase P2P livestream clusters.

A base station streams media to a cluster of n peers in packages, one package
per delay-bound window. Each package of S bits is split into n blocks: the
base station sends block i to peer i (phase 1), then the peers exchange their
blocks over direct peer-to-peer links in n-1 barrier-synchronised steps
(phase 2). Given the peers' upload capacities, this module computes the block
sizes and per-peer phase-1 bandwidths that minimise the total base-station
bandwidth while the whole distribution still finishes within the delay bound.

Units throughout: sizes in bits, bandwidths in bits/second, times in seconds.
All derived quantities are double-precision floats; equality checks use a
relative tolerance of 1e-9 with a 1e-12 absolute floor for near-zero values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

REL_TOL = 1e-9
ABS_TOL = 1e-12

# Violation codes reported by validate_cluster.
UPLOAD_OVER_DOWNLOAD = "upload-over-download"
STREAM_OVER_CLUSTER_DOWNLOAD = "stream-over-cluster-download"
UPLOAD_OVER_MIN_DOWNLOAD = "upload-over-min-download"
STREAM_OVER_MEAN_UPLOAD = "stream-over-mean-upload"


def close(a: float, b: float, rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
    """Equality at the library's working tolerance."""
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


@dataclass(frozen=True)
class PeerProfile:
    """One user's link capacities in bits/second.

    A well-formed peer uploads no faster than it downloads and has strictly
    positive capacities. Violations are reported by validate_cluster rather
    than rejected at construction, so that broken inputs can be diagnosed.
    """

    id: str
    upload: float
    download: float


@dataclass(frozen=True)
class StreamParams:
    """A livestream's package size (bits) and delay bound (seconds).

    Each package must be fully delivered within one delay-bound window for
    playback to continue without stalling. The ratio package_size/delay_bound
    is the livestream bandwidth: the rate a single consumer would need.
    """

    package_size: float
    delay_bound: float

    def __post_init__(self) -> None:
        if self.package_size <= 0:
            raise ValueError(f"package_size must be positive, got {self.package_size}")
        if self.delay_bound <= 0:
            raise ValueError(f"delay_bound must be positive, got {self.delay_bound}")

    @property
    def livestream_bandwidth(self) -> float:
        return self.package_size / self.delay_bound


@dataclass(frozen=True)
class AlphaCoefficients:
    """Diagonal coefficients of the block-size system, positions 2..n.

    For peers sorted ascending by upload, the k-th coefficient is the sum of
    the first k uploads divided by the k-th upload. Every value is >= 1
    because the sum includes the k-th upload itself.
    """

    values: tuple[float, ...]


@dataclass(frozen=True)
class AllocationPlan:
    """A solved allocation: who gets which block at what rate.

    Peers are sorted ascending by upload; block_sizes and peer_bandwidths are
    aligned with that order. total_bandwidth holds the closed-form optimum,
    which the per-peer bandwidths sum to within the working tolerance.
    Plans produced by min_bandwidth satisfy:

      sum(block_sizes) == package_size
      block_sizes[i] / peer_bandwidths[i] == phase1_time  for every i
      phase1_time + phase2_time == delay_bound
      total_bandwidth >= livestream bandwidth, equality iff n == 1
    """

    peers: tuple[PeerProfile, ...]
    block_sizes: tuple[float, ...]
    peer_bandwidths: tuple[float, ...]
    total_bandwidth: float
    phase1_time: float
    phase2_time: float


@dataclass(frozen=True)
class AssumptionViolation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_cluster: empty violations means the cluster is usable."""

    violations: tuple[AssumptionViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


class InfeasibleClusterError(ValueError):
    """No allocation can meet the delay bound for this cluster and stream.

    Raised when the mean-upload feasibility condition fails badly enough that
    the optimal-bandwidth denominator is non-positive. Carries the offending
    cluster size and upload total so admission loops can report them.
    """

    def __init__(self, n: int, sum_upload: float, stream: StreamParams) -> None:
        self.n = n
        self.sum_upload = sum_upload
        super().__init__(
            f"no feasible allocation for n={n} peers with total upload "
            f"{sum_upload:.2f} bps: livestream bandwidth "
            f"{stream.livestream_bandwidth:.2f} bps exceeds what the cluster "
            f"can redistribute within the delay bound"
        )


def validate_cluster(peers: Iterable[PeerProfile], params: StreamParams) -> ValidationReport:
    """Check the cluster assumptions and report every violated condition.

    Report-only: never raises for a bad cluster, only for an empty peer list.
    Checked conditions, in order:

      * every peer's upload is at most its download
      * the livestream bandwidth is strictly below the cluster's download total
      * every peer's upload is at most every peer's download
        (equivalently max upload <= min download)
      * the livestream bandwidth is at most the mean upload, the condition
        under which a feasible optimal allocation exists
    """
    peer_list = list(peers)
    if not peer_list:
        raise ValueError("validate_cluster requires a non-empty peer list")
    rate = params.livestream_bandwidth
    uploads = [p.upload for p in peer_list]
    downloads = [p.download for p in peer_list]
    violations: list[AssumptionViolation] = []

    bad = [p.id for p in peer_list if p.upload > p.download]
    if bad:
        violations.append(
            AssumptionViolation(
                UPLOAD_OVER_DOWNLOAD,
                f"upload exceeds download for peer(s): {', '.join(bad)}",
            )
        )
    total_download = sum(downloads)
    if rate >= total_download:
        violations.append(
            AssumptionViolation(
                STREAM_OVER_CLUSTER_DOWNLOAD,
                f"livestream bandwidth {rate:.2f} bps is not below the cluster "
                f"download total {total_download:.2f} bps",
            )
        )
    max_upload = max(uploads)
    min_download = min(downloads)
    if max_upload > min_download:
        violations.append(
            AssumptionViolation(
                UPLOAD_OVER_MIN_DOWNLOAD,
                f"largest upload {max_upload:.2f} bps exceeds smallest download "
                f"{min_download:.2f} bps, so some peer cannot absorb another's block",
            )
        )
    mean_upload = sum(uploads) / len(uploads)
    if rate > mean_upload:
        violations.append(
            AssumptionViolation(
                STREAM_OVER_MEAN_UPLOAD,
                f"livestream bandwidth {rate:.2f} bps exceeds the mean upload "
                f"{mean_upload:.2f} bps: no feasible allocation exists",
            )
        )
    return ValidationReport(tuple(violations))


def sort_peers(peers: Iterable[PeerProfile]) -> list[PeerProfile]:
    """Sort ascending by upload, ties by download then id (total order)."""
    return sorted(peers, key=lambda p: (p.upload, p.download, p.id))


def alpha_coefficients(sorted_peers: Sequence[PeerProfile]) -> AlphaCoefficients:
    """Coefficients for positions 2..n of an upload-sorted cluster; empty for n=1."""
    if not sorted_peers:
        raise ValueError("alpha_coefficients requires at least one peer")
    values = []
    prefix = sorted_peers[0].upload
    if prefix <= 0:
        raise ValueError(f"peer {sorted_peers[0].id} has non-positive upload")
    for peer in sorted_peers[1:]:
        if peer.upload <= 0:
            raise ValueError(f"peer {peer.id} has non-positive upload")
        prefix += peer.upload
        values.append(prefix / peer.upload)
    return AlphaCoefficients(tuple(values))


def solve_block_sizes(sorted_peers: Sequence[PeerProfile], params: StreamParams) -> list[float]:
    """Solve the triangular block-size system by back-substitution.

    With a_k the alpha coefficient for position k, block sizes satisfy

        s_1 + s_2 + ... + s_n           = S      (conservation row)
        a_k * s_k + s_(k+1) + ... + s_n = S      for k = 2..n

    Solved bottom-up in linear time with a running suffix sum:
    s_n = S/a_n, then s_k = (S - suffix)/a_k down to k=2, and the
    conservation row fixes s_1. The unique solution is proportional to the
    uploads, so every size is strictly positive.
    """
    n = len(sorted_peers)
    if n == 0:
        raise ValueError("solve_block_sizes requires at least one peer")
    alphas = alpha_coefficients(sorted_peers).values
    total = params.package_size
    sizes = [0.0] * n
    suffix = 0.0
    for k in range(n, 1, -1):
        s_k = (total - suffix) / alphas[k - 2]
        sizes[k - 1] = s_k
        suffix += s_k
    sizes[0] = total - suffix
    return sizes


def allocated_bandwidth(sorted_peers: Sequence[PeerProfile], params: StreamParams) -> float:
    """Minimum total base-station bandwidth for this cluster, or inf if infeasible.

    Closed form S / (T - (n-1)*S/sum_uploads). Written in this form so the
    single-peer case reduces to exactly S/T. Returns math.inf as the
    infeasibility sentinel when the time budget left for phase 1 is not
    positive; admission loops rely on this instead of an exception.
    """
    n = len(sorted_peers)
    if n == 0:
        raise ValueError("allocated_bandwidth requires at least one peer")
    sum_upload = 0.0
    for peer in sorted_peers:
        if peer.upload <= 0:
            raise ValueError(f"peer {peer.id} has non-positive upload")
        sum_upload += peer.upload
    phase1_budget = params.delay_bound - (n - 1) * params.package_size / sum_upload
    if phase1_budget <= 0:
        return math.inf
    return params.package_size / phase1_budget


def min_bandwidth(peers: Iterable[PeerProfile], params: StreamParams) -> AllocationPlan:
    """Compute the bandwidth-minimal allocation plan for a cluster.

    Sorts the peers ascending by upload, solves the block-size system, and
    derives the timing split: phase 2 needs (n-1)*S/sum_uploads seconds for
    the n-1 exchange steps, phase 1 gets the rest of the delay bound, and
    each peer's phase-1 bandwidth is its block size over the phase-1 time,
    making all phase-1 transfers finish together.

    Raises InfeasibleClusterError when no allocation can meet the delay
    bound (callers admitting peers catch this to shrink the cluster).
    """
    ordered = sort_peers(peers)
    n = len(ordered)
    if n == 0:
        raise ValueError("min_bandwidth requires at least one peer")
    total = allocated_bandwidth(ordered, params)
    if math.isinf(total):
        raise InfeasibleClusterError(n, sum(p.upload for p in ordered), params)
    sizes = solve_block_sizes(ordered, params)
    sum_upload = sum(p.upload for p in ordered)
    phase2 = (n - 1) * params.package_size / sum_upload
    phase1 = params.delay_bound - phase2
    bandwidths = [s / phase1 for s in sizes]
    return AllocationPlan(
        peers=tuple(ordered),
        block_sizes=tuple(sizes),
        peer_bandwidths=tuple(bandwidths),
        total_bandwidth=total,
        phase1_time=phase1,
        phase2_time=phase2,
    )


def plan_to_dict(plan: AllocationPlan) -> dict:
    """JSON-ready representation of a plan."""
    return {
        "peers": [
            {"id": p.id, "u_bps": p.upload, "d_bps": p.download} for p in plan.peers
        ],
        "block_bits": list(plan.block_sizes),
        "peer_bandwidths_bps": list(plan.peer_bandwidths),
        "total_bandwidth_bps": plan.total_bandwidth,
        "phase1_s": plan.phase1_time,
        "phase2_s": plan.phase2_time,
    }

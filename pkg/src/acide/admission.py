"""Greedy cluster admission under a pre-reserved bandwidth budget.

The base station reserves a bandwidth budget for a cluster before anyone
joins. Admission then has to pick, from N interested users, the largest
subset whose optimal allocation fits the budget. Choosing the subset exactly
is a subset-sum-like search, so the shipped algorithm is greedy: start from
everyone, repeatedly drop the weakest uploader until the required bandwidth
fits. For the cost model used here the greedy result provably reaches the
maximum cardinality; an exhaustive oracle for small inputs is included so
tests can confirm that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from acide.core import (
    AllocationPlan,
    PeerProfile,
    StreamParams,
    allocated_bandwidth,
    min_bandwidth,
    plan_to_dict,
    sort_peers,
)

# 2^N subsets are enumerated; beyond this the oracle refuses.
MAX_ORACLE_CANDIDATES = 16


class InsufficientBudgetError(ValueError):
    """The budget is below the livestream bandwidth, so not even one peer fits."""

    def __init__(self, budget: float, livestream_bandwidth: float) -> None:
        self.budget = budget
        self.livestream_bandwidth = livestream_bandwidth
        super().__init__(
            f"budget {budget:.2f} bps is below the livestream bandwidth "
            f"{livestream_bandwidth:.2f} bps; no cluster can be formed"
        )


@dataclass(frozen=True)
class AdmissionBudget:
    """Inputs to an admission decision: the reserved budget, who wants in, the stream."""

    given_allocated_bandwidth: float
    candidates: tuple[PeerProfile, ...]
    stream: StreamParams

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not (self.given_allocated_bandwidth > 0 and math.isfinite(self.given_allocated_bandwidth)):
            raise ValueError(
                f"given_allocated_bandwidth must be positive and finite, "
                f"got {self.given_allocated_bandwidth}"
            )
        if not self.candidates:
            raise ValueError("admission requires at least one candidate")
        if len({p.id for p in self.candidates}) != len(self.candidates):
            raise ValueError("candidate ids must be unique")


@dataclass(frozen=True)
class AdmissionOutcome:
    """An admitted cluster with its plan and how much of the budget it uses."""

    admitted: tuple[PeerProfile, ...]
    plan: AllocationPlan
    efficiency: float
    rejected: tuple[PeerProfile, ...]


def join_cluster(budget: AdmissionBudget) -> AdmissionOutcome:
    """Admit the largest suffix of the upload-sorted candidates that fits the budget.

    Starting from all N candidates, the required optimal bandwidth is
    computed; while it exceeds the budget the lowest-upload candidate is
    removed and the bandwidth recomputed. An infeasible remainder (no valid
    allocation) counts as requiring infinite bandwidth, so removal continues
    through it. Raises InsufficientBudgetError when even a single peer does
    not fit, i.e. the budget is below the livestream bandwidth.
    """
    ordered = sort_peers(budget.candidates)
    cap = budget.given_allocated_bandwidth
    for removed in range(len(ordered)):
        remaining = ordered[removed:]
        required = allocated_bandwidth(remaining, budget.stream)
        if required <= cap:
            plan = min_bandwidth(remaining, budget.stream)
            return AdmissionOutcome(
                admitted=tuple(remaining),
                plan=plan,
                efficiency=plan.total_bandwidth / cap,
                rejected=tuple(ordered[:removed]),
            )
    raise InsufficientBudgetError(cap, budget.stream.livestream_bandwidth)


def admitted_upper_bound(
    candidates: Sequence[PeerProfile], stream: StreamParams, bw: float
) -> float:
    """Real-valued upper bound on how many peers an allocation of bw can serve.

    1 + U/r - U/bw, with U the candidates' upload total and r the livestream
    bandwidth. Callers floor it for an integer bound. Requires bw >= r.
    """
    rate = stream.livestream_bandwidth
    if bw < rate:
        raise ValueError(
            f"bound is only defined for bw >= livestream bandwidth "
            f"({bw:.2f} < {rate:.2f})"
        )
    sum_upload = sum(p.upload for p in candidates)
    return 1.0 + sum_upload / rate - sum_upload / bw


def brute_force_admission(budget: AdmissionBudget) -> AdmissionOutcome:
    """Exhaustive admission oracle for small candidate pools.

    Enumerates every non-empty subset, keeps those whose optimal bandwidth is
    feasible and within budget, and returns the best by (max cardinality,
    min bandwidth, lexicographically smallest sorted id list). Deterministic,
    and exponential: refuses more than MAX_ORACLE_CANDIDATES candidates.

    Subsets are taken from the upload-sorted candidate list so each set's
    bandwidth is summed in canonical order; a set's cost is then the same
    float the greedy loop computes for it, keeping the two admission routes
    consistent even for budgets that sit exactly on a set's cost.
    """
    candidates = sort_peers(budget.candidates)
    n = len(candidates)
    if n > MAX_ORACLE_CANDIDATES:
        raise ValueError(
            f"brute-force admission enumerates 2^N subsets; "
            f"{n} candidates exceeds the cap of {MAX_ORACLE_CANDIDATES}"
        )
    cap = budget.given_allocated_bandwidth
    best_key: tuple[int, float, tuple[str, ...]] | None = None
    best_subset: list[PeerProfile] | None = None
    for mask in range(1, 1 << n):
        subset = [candidates[i] for i in range(n) if mask >> i & 1]
        required = allocated_bandwidth(subset, budget.stream)
        if required > cap:
            continue
        key = (-len(subset), required, tuple(sorted(p.id for p in subset)))
        if best_key is None or key < best_key:
            best_key = key
            best_subset = subset
    if best_subset is None:
        raise InsufficientBudgetError(cap, budget.stream.livestream_bandwidth)
    plan = min_bandwidth(best_subset, budget.stream)
    chosen = {p.id for p in best_subset}
    rejected = tuple(p for p in candidates if p.id not in chosen)
    return AdmissionOutcome(
        admitted=plan.peers,
        plan=plan,
        efficiency=plan.total_bandwidth / cap,
        rejected=rejected,
    )


def outcome_to_dict(outcome: AdmissionOutcome) -> dict:
    """JSON-ready representation of an admission outcome."""
    return {
        "admitted_ids": [p.id for p in outcome.admitted],
        "rejected_ids": [p.id for p in outcome.rejected],
        "efficiency": outcome.efficiency,
        "efficiency_pct": outcome.efficiency * 100.0,
        "plan": plan_to_dict(outcome.plan),
    }

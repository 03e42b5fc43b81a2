"""(eps, 0) scheme for items with Bernoulli sizes.

Two sub-schemes run at eps/8 and their outputs are re-checked against the
relaxed budget:

* the large-variance sub-scheme matches subsets on the first two moments
  (sum q, sum q^2) of rounded probabilities;
* the small-variance sub-scheme splits items into four probability buckets
  and matches, per bucket, either counts, sums or the first T0 power sums.

Each sub-scheme builds reach tables over the quantized moment vectors and
feeds candidates to the overflow gate in descending profit order.
"""

from __future__ import annotations

import heapq
import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .distributions import Bernoulli, as_fraction
from .errors import BudgetError, InstanceError
from .gate import OverflowGate
from .instance import Instance, Solution, SolverConfig, make_solution
from .pseudo_knapsack import enumerate_candidates, reach_table_raw, ReachTable


def grid_size(step) -> int:
    """Denominator N of the unit-fraction grid 1/N, the coarsest with 1/N <= step."""
    return math.ceil(1 / as_fraction(step))


def round_to_grid(p, N: int) -> int:
    """Nearest multiple k/N to p (halves round up), as the integer k."""
    return math.floor(as_fraction(p) * N + Fraction(1, 2))


@dataclass(frozen=True)
class BernoulliInstance:
    probs: tuple
    rounded: tuple
    profits: tuple
    capacity: Fraction
    budget: Fraction
    epsilon: Fraction
    grid: int

    @classmethod
    def from_instance(cls, instance: Instance, epsilon) -> "BernoulliInstance":
        probs = bernoulli_probs(instance)
        eps = as_fraction(epsilon)
        N = grid_size(eps / (4 * max(instance.n, 1)))
        rounded = tuple(Fraction(round_to_grid(p, N), N) for p in probs)
        return cls(probs, rounded, tuple(instance.profits), instance.capacity, instance.p, eps, N)


def bernoulli_probs(instance: Instance) -> tuple:
    probs = []
    for i, d in enumerate(instance.dists):
        if not isinstance(d, Bernoulli):
            raise InstanceError(f"item {i} has a {d.tag} size; the Bernoulli scheme needs Bernoulli items")
        probs.append(d.p)
    return tuple(probs)


@dataclass(frozen=True)
class BucketPartition:
    b1: tuple
    b2: tuple
    b3: tuple
    b4: tuple

    def buckets(self):
        return (self.b1, self.b2, self.b3, self.b4)


def bucket_partition(probs: Sequence, epsilon) -> BucketPartition:
    """Assign each item to the first bucket whose interval contains its p."""
    eps = as_fraction(epsilon)
    lo, hi, half = eps / 100, 1 - eps / 100, Fraction(1, 2)
    out = ([], [], [], [])
    for i, p in enumerate(probs):
        p = as_fraction(p)
        if p <= lo:
            out[0].append(i)
        elif p >= hi:
            out[1].append(i)
        elif p <= half:
            out[2].append(i)
        else:
            out[3].append(i)
    return BucketPartition(*map(tuple, out))


def moment_count(epsilon) -> int:
    """T0 = ceil(4 log2(1/eps)) power sums for the two middle buckets."""
    return math.ceil(4 * math.log2(1 / float(epsilon)))


def _warn_large(eps, name):
    if eps > Fraction(1, 8):
        warnings.warn(f"{name}: epsilon {eps} > 1/8 is outside the range the guarantees assume", stacklevel=3)


def _bernoulli_gate_threshold(p, eps):
    return p + Fraction(7, 2) * eps, eps / 2


def sk_bernoulli_large(instance: Instance, epsilon, gate: OverflowGate,
                       config: Optional[SolverConfig] = None) -> Optional[tuple]:
    """Large-variance sub-scheme: match (sum q, sum q^2), gate at p + 3.5 eps."""
    config = config or SolverConfig()
    eps = as_fraction(epsilon)
    _warn_large(eps, "sk_bernoulli_large")
    probs = bernoulli_probs(instance)
    n = len(probs)
    N = grid_size(eps / (4 * max(n, 1)))
    ks = [round_to_grid(p, N) for p in probs]
    sizes = [(k, k * k) for k in ks]
    caps = (n * N, n * N * N)
    table = ReachTable(reach_table_raw(sizes, instance.profits, range(n), caps, config.table_budget),
                       (Fraction(1, N), Fraction(1, N * N)))
    q, tau = _bernoulli_gate_threshold(instance.p, eps)
    for _, _, subset in enumerate_candidates(table):
        if gate.leq(subset, q, tau):
            return subset
    return None


def _bucket_vectors(bucket_id: int, probs, members, eps, n):
    """Integer size vectors and caps for one bucket of the small sub-scheme."""
    if bucket_id in (0, 1):
        N = grid_size(eps / (4 * max(n, 1)))
        if bucket_id == 0:
            return [(round_to_grid(probs[i], N),) for i in members], (n * N,)
        return [(1, round_to_grid(1 - probs[i], N)) for i in members], (n, n * N)
    T0 = moment_count(eps)
    N = grid_size(eps**4 / 1000)
    cap = 2 / eps**2
    caps = tuple(math.floor(cap * N**j) for j in range(1, T0 + 1))
    if bucket_id == 2:
        ks = [round_to_grid(probs[i], N) for i in members]
        return [tuple(k**j for j in range(1, T0 + 1)) for k in ks], caps
    ks = [round_to_grid(1 - probs[i], N) for i in members]
    return [(1,) + tuple(k**j for j in range(1, T0 + 1)) for k in ks], (n,) + caps


def descending_combinations(lists: Sequence[Sequence], budget: int):
    """Yield index tuples into ``lists`` (each sorted by profit descending,
    entries (profit, payload)) in descending total profit; ties by index tuple."""
    if any(len(lst) == 0 for lst in lists):
        return
    start = (0,) * len(lists)

    def total(idx):
        return sum(lists[j][i][0] for j, i in enumerate(idx))

    heap = [(-total(start), start)]
    seen = {start}
    popped = 0
    while heap:
        neg, idx = heapq.heappop(heap)
        popped += 1
        if popped > budget:
            raise BudgetError(
                f"cross-bucket combination exceeded {budget} candidates; use a larger epsilon or fewer items"
            )
        yield idx
        for j in range(len(lists)):
            if idx[j] + 1 < len(lists[j]):
                nxt = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-total(nxt), nxt))


def bucket_candidates(sizes, profits, members, caps, budget) -> list:
    """(profit, subset) for every reachable key of one bucket, profit-descending."""
    raw = reach_table_raw(sizes, [profits[i] for i in members], members, caps, budget)
    table = ReachTable(raw, ())
    return [(prof, subset) for _, prof, subset in enumerate_candidates(table)]


def sk_bernoulli_small(instance: Instance, epsilon, gate: OverflowGate,
                       config: Optional[SolverConfig] = None) -> Optional[tuple]:
    """Small-variance sub-scheme: per-bucket moment tables, combined by profit."""
    config = config or SolverConfig()
    eps = as_fraction(epsilon)
    _warn_large(eps, "sk_bernoulli_small")
    probs = bernoulli_probs(instance)
    n = len(probs)
    part = bucket_partition(probs, eps)
    lists = []
    for b, members in enumerate(part.buckets()):
        sizes, caps = _bucket_vectors(b, probs, members, eps, n)
        lists.append(bucket_candidates(sizes, instance.profits, list(members), caps, config.table_budget))
    q, tau = _bernoulli_gate_threshold(instance.p, eps)
    for idx in descending_combinations(lists, config.combo_budget):
        subset = tuple(sorted(i for j, k in enumerate(idx) for i in lists[j][k][1]))
        if gate.leq(subset, q, tau):
            return subset
    return None


def solve_bernoulli(instance: Instance, epsilon=None, seed: Optional[int] = None,
                    config: Optional[SolverConfig] = None) -> Solution:
    """Run both sub-schemes at eps/8 and keep the better output that passes
    the final check at p + 3 eps / 4 (with +-eps/4 slack)."""
    started = time.perf_counter()
    config = config or SolverConfig()
    eps = as_fraction(instance.epsilon if epsilon is None else epsilon)
    seed = instance.seed if seed is None else int(seed)
    bernoulli_probs(instance)
    sub_eps = eps / 8
    gate = OverflowGate(instance.dists, instance.capacity, seed=seed, config=config, min_tau=float(sub_eps / 2))
    outputs = {
        "large": sk_bernoulli_large(instance, sub_eps, gate, config),
        "small": sk_bernoulli_small(instance, sub_eps, gate, config),
    }
    q, tau = instance.p + 3 * eps / 4, eps / 4
    best = None
    for name, subset in outputs.items():
        if subset is None or not gate.leq(subset, q, tau):
            continue
        prof = instance.subset_profit(subset)
        if best is None or prof > best[0]:
            best = (prof, subset, name)
    diagnostics = gate.stats()
    if best is None:
        warnings.warn("no sub-scheme output passed the final overflow check; returning the empty set")
        subset, diagnostics["branch"] = (), None
    else:
        subset, diagnostics["branch"] = best[1], best[2]
    return make_solution(instance, subset, "bernoulli", eps, seed, config, started, diagnostics)

"""(eps, 0) scheme for items supported on a common finite set A = {a_1..a_k}.

Probabilities are rounded to a grid of step about eps/(4nk).  Items are
bucketed by their most likely atom and by which length-1/s interval each
rounded probability falls in; inside a bucket, two subsets whose mixed
moments sum_l prod_j q_{l,j}^alpha_j agree for every |alpha| <= w have sums
within 2^(1-w) in total variation.  Each bucket gets a reach table over those
moment vectors; bucket candidates are combined in descending profit order and
the first combination passing the overflow gate is returned.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .distributions import Bernoulli, Finite, as_fraction
from .errors import BudgetError, InstanceError
from .gate import OverflowGate
from .instance import Instance, Solution, SolverConfig, make_solution
from .scheme_bernoulli import bucket_candidates, descending_combinations, grid_size


@dataclass(frozen=True, order=True)
class BucketKey:
    argmax: int  # 1-based index of the most likely atom (smallest on ties)
    intervals: tuple  # 1-based interval index t per atom: q in [(t-1)/s, t/s]


def common_support(instance: Instance) -> tuple:
    """Sorted union of the items' support values (all items must be finite)."""
    values = set()
    for i, d in enumerate(instance.dists):
        if not isinstance(d, (Bernoulli, Finite)):
            raise InstanceError(f"item {i} has a {d.tag} size; the k-support scheme needs finite laws")
        values.update(d.support())
    return tuple(sorted(values))


def law_on(dist, support: Sequence[Fraction]) -> tuple:
    """Probabilities of ``dist`` on each value of ``support``."""
    pmf = dict(dist.exact_pmf())
    return tuple(pmf.get(a, Fraction(0)) for a in support)


def interval_count(k: int) -> int:
    """s = ceil(4 e k^3)."""
    return math.ceil(4 * math.e * k**3)


def moment_degree(k: int, epsilon) -> int:
    """w = ceil(log2(16 k s^k / eps))."""
    s = interval_count(k)
    return math.ceil(math.log2(16 * k * s**k / float(epsilon)))


def _compositions(k: int, total: int):
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(k - 1, total - first):
            yield (first,) + rest


def moment_index_set(k: int, w: int) -> list:
    """All alpha in Z^k_{>=0} with |alpha| <= w, by degree then lexicographic."""
    return [a for deg in range(w + 1) for a in sorted(_compositions(k, deg))]


def round_law(probs: Sequence[Fraction], N: int) -> tuple:
    """Largest-remainder rounding of a law to multiples of 1/N.

    Returns integer counts c_j summing to N with |c_j/N - probs_j| < 1/N.
    """
    scaled = [as_fraction(q) * N for q in probs]
    counts = [math.floor(x) for x in scaled]
    short = N - sum(counts)
    order = sorted(range(len(probs)), key=lambda j: (-(scaled[j] - counts[j]), j))
    for j in order[:short]:
        counts[j] += 1
    return tuple(counts)


@dataclass(frozen=True)
class RoundedSupportInstance:
    support: tuple
    probs: tuple  # per item, exact law on ``support``
    counts: tuple  # per item, rounded law as integer counts over ``grid``
    grid: int

    def rounded(self, i: int) -> tuple:
        return tuple(Fraction(c, self.grid) for c in self.counts[i])


def round_instance(instance: Instance, epsilon) -> RoundedSupportInstance:
    support = common_support(instance)
    k = len(support)
    n = max(instance.n, 1)
    N = grid_size(as_fraction(epsilon) / (4 * n * k))
    probs = tuple(law_on(d, support) for d in instance.dists)
    counts = tuple(round_law(pr, N) for pr in probs)
    return RoundedSupportInstance(support, probs, counts, N)


def bucket_key(probs: Sequence[Fraction], counts: Sequence[int], N: int, s: int) -> BucketKey:
    top = max(probs)
    j0 = next(j for j, q in enumerate(probs) if q == top) + 1
    # t = ceil(q s) places q in [(t-1)/s, t/s], a boundary value in the lower interval
    ts = tuple(max(1, -((-c * s) // N)) for c in counts)
    return BucketKey(j0, ts)


def bucketize(instance: Instance, epsilon) -> dict:
    """Map BucketKey -> sorted item indices."""
    r = round_instance(instance, epsilon)
    s = interval_count(len(r.support))
    out: dict = {}
    for i in range(instance.n):
        out.setdefault(bucket_key(r.probs[i], r.counts[i], r.grid, s), []).append(i)
    return {key: tuple(v) for key, v in sorted(out.items())}


def moment_vector(rounded_laws: Sequence[Sequence[Fraction]], alpha: Sequence[int]) -> Fraction:
    """sum over items of prod_j q_j ** alpha_j, exactly."""
    total = Fraction(0)
    for q in rounded_laws:
        term = Fraction(1)
        for qj, a in zip(q, alpha):
            term *= Fraction(qj) ** a
        total += term
    return total


def _integer_moments(counts: Sequence[int], alphas: Sequence[tuple], w: int) -> tuple:
    powers = [[c**e for e in range(w + 1)] for c in counts]
    out = []
    for a in alphas:
        v = 1
        for j, e in enumerate(a):
            if e:
                v *= powers[j][e]
        out.append(v)
    return tuple(out)


def solve_ksupport(instance: Instance, epsilon=None, seed: Optional[int] = None,
                   config: Optional[SolverConfig] = None) -> Solution:
    started = time.perf_counter()
    config = config or SolverConfig()
    eps = as_fraction(instance.epsilon if epsilon is None else epsilon)
    seed = instance.seed if seed is None else int(seed)
    r = round_instance(instance, eps)
    k = len(r.support)
    if k > config.k_cap:
        raise BudgetError(f"support has {k} values, above the configured cap {config.k_cap}; use the hyper scheme")
    n = instance.n
    w = moment_degree(k, eps)
    alphas = moment_index_set(k, w)
    dims = len(alphas)
    N = r.grid
    caps = tuple(max(n, 1) * N ** sum(a) for a in alphas)
    buckets = bucketize(instance, eps)
    largest = max((len(m) for m in buckets.values()), default=0)
    if dims * min(2**largest, math.comb(largest + dims, dims)) > config.cell_budget:
        raise BudgetError(
            f"moment tables would need about {dims} x 2^{largest} cells (k={k}, w={w}); "
            "use a smaller k or a larger epsilon"
        )
    lists = []
    for members in buckets.values():
        sizes = [_integer_moments(r.counts[i], alphas, w) for i in members]
        lists.append(bucket_candidates(sizes, instance.profits, list(members), caps, config.table_budget))
    gate = OverflowGate(instance.dists, instance.capacity, seed=seed, config=config, min_tau=float(eps / 4))
    q, tau = instance.p + 3 * eps / 4, eps / 4
    chosen = None
    for idx in descending_combinations(lists, config.combo_budget):
        subset = tuple(sorted(i for j, kk in enumerate(idx) for i in lists[j][kk][1]))
        if gate.leq(subset, q, tau):
            chosen = subset
            break
    diagnostics = gate.stats()
    diagnostics.update({"k": k, "moment_degree": w, "moment_dims": dims, "buckets": len(buckets)})
    if chosen is None:
        warnings.warn("no candidate passed the overflow check; returning the empty set")
        chosen = ()
    return make_solution(instance, chosen, "ksupport", eps, seed, config, started, diagnostics)

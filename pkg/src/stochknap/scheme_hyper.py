"""(eps, eps) scheme for items whose sizes have bounded kurtosis.

Every item satisfies mu4 <= c^4 * var^2.  A candidate set is summarized by its
type: the longest-variance prefix of the set, cut at the first position where
one item's variance is a tiny fraction of the remaining total (the critical
index) or at a length cap L.  For a fixed type and a fixed integer profit V,
the rest of the set is chosen by a two-coordinate DP over (profit, rounded
variance) that minimizes the total mean, and the result is re-checked with
the overflow gate.  Integer profits come from the usual scaling reduction.

Sets smaller than L whose variances never hit the critical threshold are
their own type (the whole set is the prefix) and are tested directly.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .distributions import as_fraction, max_kurtosis
from .errors import BudgetError
from .gate import OverflowGate
from .instance import Instance, Item, Solution, SolverConfig, make_solution
from .pseudo_knapsack import ReachTable, enumerate_candidates, reach_table_raw

log = logging.getLogger(__name__)

INF = math.inf
MIN_EPS = 2.0**-20


def type_cap(c4, epsilon) -> int:
    """L(c, eps) = ceil(c^4 / eps^2 * log2(1/eps))."""
    eps = float(epsilon)
    if eps < MIN_EPS:
        warnings.warn(f"epsilon {eps} clamped to {MIN_EPS} when computing the type cap")
        eps = MIN_EPS
    return max(1, math.ceil(float(c4) / eps**2 * math.log2(1 / eps)))


def critical_threshold(epsilon, c4) -> Fraction:
    return as_fraction(epsilon) ** 2 / as_fraction(c4)


def critical_index(variances: Sequence, epsilon=None, c=None, *, threshold=None, c4=None):
    """Smallest 1-based i with var_i / sum_{j>=i} var_j <= eps^2 / c^4, else inf.

    ``variances`` must be sorted non-increasing.  A zero remaining total counts
    as ratio 0, so an all-zero sequence has index 1.
    """
    if threshold is None:
        if c4 is None:
            c4 = as_fraction(c) ** 4
        threshold = critical_threshold(epsilon, c4)
    thr = as_fraction(threshold)
    vs = [as_fraction(v) for v in variances]
    tail = sum(vs, Fraction(0))
    for i, v in enumerate(vs, start=1):
        if tail == 0:
            log.debug("critical index hit an all-zero variance tail at position %d", i)
            return i
        if v / tail <= thr:
            return i
        tail -= v
    return INF


@dataclass(frozen=True)
class EpsilonType:
    """Length T and the T largest-variance items (0-based, in variance order)."""

    length: int
    prefix: tuple

    def __post_init__(self):
        if len(self.prefix) != self.length:
            raise ValueError("type length must equal the prefix length")


def variance_order(variances: Sequence) -> list:
    """Item indices by non-increasing variance, ties by index."""
    return sorted(range(len(variances)), key=lambda i: (-as_fraction(variances[i]), i))


def epsilon_type(variances: Sequence, subset, threshold, L: int) -> EpsilonType:
    ordered = sorted(subset, key=lambda i: (-as_fraction(variances[i]), i))
    K = critical_index([variances[i] for i in ordered], threshold=threshold)
    if K < L:
        return EpsilonType(K, tuple(ordered[:K]))
    T = min(L, len(ordered))
    return EpsilonType(T, tuple(ordered[:T]))


def count_types(n: int, L: int) -> int:
    return sum(math.comb(n, t) for t in range(min(L, n) + 1))


def enumerate_types(variances: Sequence, L: int, budget: int = 10**5) -> Iterator[EpsilonType]:
    """All variance-ordered tuples of length <= L, shortest first."""
    n = len(variances)
    need = count_types(n, L)
    if need > budget:
        raise BudgetError(f"{need} types needed (n={n}, L={L}) but the type budget is {budget}")
    order = variance_order(variances)
    for t in range(min(L, n) + 1):
        for combo in itertools.combinations(order, t):
            yield EpsilonType(t, combo)


@dataclass
class HyperProblem:
    """Integer-profit instance data shared by the type sub-routines."""

    instance: Instance
    weights: tuple
    means: tuple
    variances: tuple
    c4: Fraction
    rank: dict = field(default_factory=dict)
    _tables: dict = field(default_factory=dict)
    table_budget: int = 2_000_000

    @classmethod
    def from_instance(cls, instance: Instance, c4=None, table_budget: int = 2_000_000) -> "HyperProblem":
        weights = []
        for i, v in enumerate(instance.profits):
            if v.denominator != 1:
                raise ValueError(f"item {i} profit {v} is not an integer; reduce profits first")
            weights.append(int(v))
        ms = [d.moments() for d in instance.dists]
        means = tuple(as_fraction(m.mean) for m in ms)
        variances = tuple(as_fraction(m.var) for m in ms)
        if c4 is None:
            c4 = max_kurtosis(instance.dists, skip_degenerate=True) or 1
        order = variance_order(variances)
        return cls(instance, tuple(weights), means, variances, as_fraction(c4),
                   {i: r for r, i in enumerate(order)}, {}, table_budget)

    @property
    def n(self) -> int:
        return len(self.weights)

    def gamma(self, anchor: int, inclusive: bool) -> list:
        """Items at or after (inclusive) / strictly after ``anchor`` in variance order."""
        r = self.rank[anchor]
        return [i for i in range(self.n) if (self.rank[i] >= r if inclusive else self.rank[i] > r)]

    def rho(self, anchor: int, eps, power: int) -> Optional[Fraction]:
        """var(anchor) * eps^power / (2 n^power); None for a zero-variance anchor."""
        v = self.variances[anchor]
        if v == 0:
            return None
        return v * as_fraction(eps) ** power / (2 * self.n**power)

    def beta_units(self, items, rho) -> list:
        """floor(var / rho) per item (0 when rho is None)."""
        if rho is None:
            return [0 for _ in items]
        return [math.floor(self.variances[i] / rho) for i in items]

    def table(self, case: str, anchor: int, eps) -> dict:
        """{residual profit: [(beta units, -mean, subset), ...] best mean first}."""
        key = (case, anchor, as_fraction(eps))
        hit = self._tables.get(key)
        if hit is not None:
            return hit
        eps = as_fraction(eps)
        n = self.n
        if case == "large":
            members = self.gamma(anchor, inclusive=False)
            rho = self.rho(anchor, eps, 2)
            lo, hi = 0, math.floor(2 * self.c4 * n * n / eps**4)
        else:
            members = self.gamma(anchor, inclusive=True)
            rho = self.rho(anchor, eps, 4)
            lo = math.ceil(self.c4 * Fraction(n) ** 4 / eps**6 - n)
            hi = math.floor(2 * Fraction(n) ** 5 / eps**4)
        if rho is None:
            lo, hi = 0, 0
        out: dict = {}
        if lo <= hi:
            sizes = list(zip((self.weights[i] for i in members), self.beta_units(members, rho)))
            caps = (sum(self.weights[i] for i in members), hi)
            raw = reach_table_raw(sizes, [-self.means[i] for i in members], members, caps, self.table_budget)
            for (v, b), prof, subset in enumerate_candidates(ReachTable(raw, ())):
                if b >= lo:
                    out.setdefault(v, []).append((b, prof, subset))
        self._tables[key] = out
        return out


def _type_prefix(etype: EpsilonType, case: str) -> tuple:
    if case == "large":
        return etype.prefix[:-1]
    return etype.prefix[: etype.length - 1]


def _anchor(etype: EpsilonType, case: str) -> int:
    if case == "large" and etype.length >= 2:
        return etype.prefix[-2]
    return etype.prefix[-1]


def _own_type_matches(problem: HyperProblem, etype: EpsilonType, eps, L: int) -> bool:
    thr = critical_threshold(eps, problem.c4)
    return epsilon_type(problem.variances, etype.prefix, thr, L) == etype


def _run_type(problem: HyperProblem, etype: EpsilonType, V: int, eps, gate: OverflowGate,
              case: str, L: int) -> Optional[tuple]:
    eps = as_fraction(eps)
    inst = problem.instance
    q, tau = inst.p + 3 * eps / 4, eps / 4
    if etype.length == 0:
        return () if V == 0 and gate.leq((), q, tau) else None
    prefix = _type_prefix(etype, case)
    residual = V - sum(problem.weights[i] for i in prefix)
    for _, _, rest in problem.table(case, _anchor(etype, case), eps).get(residual, ()):
        subset = tuple(sorted(set(prefix) | set(rest)))
        if gate.leq(subset, q, tau):
            return subset
    # the type's own prefix, when it is a complete set of this type
    own = tuple(sorted(etype.prefix))
    if sum(problem.weights[i] for i in own) == V and _own_type_matches(problem, etype, eps, L):
        if gate.leq(own, q, tau):
            return own
    return None


def sk_hyper_large(problem: HyperProblem, etype: EpsilonType, V: int, eps, gate: OverflowGate,
                   L: Optional[int] = None) -> Optional[tuple]:
    """Type of full length L: keep the first L-1 prefix items, fill the rest
    from lower-variance items by a (profit, rounded variance) DP minimizing the
    mean, and gate at p + 3 eps/4."""
    L = etype.length if L is None else L
    return _run_type(problem, etype, V, eps, gate, "large", L)


def sk_hyper_small(problem: HyperProblem, etype: EpsilonType, V: int, eps, gate: OverflowGate,
                   L: Optional[int] = None) -> Optional[tuple]:
    """Type ending at the critical index T < L: keep the first T-1 prefix items,
    require the remaining variance to be in the window where the tail is
    close to Gaussian, and gate at p + 3 eps/4."""
    L = type_cap(problem.c4, eps) if L is None else L
    return _run_type(problem, etype, V, eps, gate, "small", L)


def _type_values(problem: HyperProblem, etype: EpsilonType, eps, L: int) -> set:
    if etype.length == 0:
        return {0}
    case = "large" if etype.length == L else "small"
    prefix_w = sum(problem.weights[i] for i in _type_prefix(etype, case))
    values = {prefix_w + v for v in problem.table(case, _anchor(etype, case), eps)}
    if _own_type_matches(problem, etype, eps, L):
        values.add(sum(problem.weights[i] for i in etype.prefix))
    return values


def _warn_negative(instance: Instance):
    neg = [i for i, d in enumerate(instance.dists) if d.lower_bound() < 0]
    if neg:
        warnings.warn(f"items {neg} can take negative sizes; accepted, but sizes are meant to be non-negative")


def _resolve_c4(instance: Instance, config: SolverConfig):
    auto = max_kurtosis(instance.dists, skip_degenerate=True) or 1
    if config.c_override is None:
        return as_fraction(auto)
    c4 = as_fraction(float(config.c_override) ** 4)
    if c4 < as_fraction(auto):
        warnings.warn(f"c override gives c^4 = {float(c4):.4g} below the items' max kurtosis {float(auto):.4g}")
    return c4


def solve_hyper_bounded(instance: Instance, epsilon=None, seed: Optional[int] = None,
                        config: Optional[SolverConfig] = None, *, scheme: str = "hyper-bounded") -> Solution:
    """Integer profits: try profits V from the top, over all types, and return
    the first set that passes its type check and the final check at
    p + 6 delta (+-2 delta), delta = eps / 8."""
    started = time.perf_counter()
    config = config or SolverConfig()
    eps = as_fraction(instance.epsilon if epsilon is None else epsilon)
    seed = instance.seed if seed is None else int(seed)
    _warn_negative(instance)
    delta = eps / 8
    c4 = _resolve_c4(instance, config)
    problem = HyperProblem.from_instance(instance, c4, config.table_budget)
    L = type_cap(c4, delta)
    types = list(enumerate_types(problem.variances, L, config.type_budget))
    gate = OverflowGate(instance.dists, instance.capacity, seed=seed, config=config, min_tau=float(delta / 4))

    by_value: dict = {}
    for ti, etype in enumerate(types):
        for V in _type_values(problem, etype, delta, L):
            by_value.setdefault(V, []).append(ti)

    q, tau = instance.p + 6 * delta, 2 * delta
    chosen = None
    for V in sorted(by_value, reverse=True):
        for ti in by_value[V]:
            etype = types[ti]
            if etype.length == L:
                subset = sk_hyper_large(problem, etype, V, delta, gate, L)
            else:
                subset = sk_hyper_small(problem, etype, V, delta, gate, L)
            if subset is not None and gate.leq(subset, q, tau):
                chosen = subset
                break
        if chosen is not None:
            break
    diagnostics = gate.stats()
    diagnostics.update({"c4": float(c4), "type_cap": L, "types": len(types)})
    if chosen is None:
        warnings.warn("no candidate passed the overflow check; returning the empty set")
        chosen = ()
    return make_solution(instance, chosen, scheme, eps, seed, config, started, diagnostics)


@dataclass(frozen=True)
class ReducedProfits:
    instance: Optional[Instance]  # kept items with integer profits
    kept: tuple  # original indices of the kept items
    scale: Optional[Fraction]  # K
    bound: int  # M


def reduce_profits(instance: Instance, epsilon=None) -> ReducedProfits:
    """Drop items too large to fit alone, then scale profits to integers <= n/eps.

    With items sorted by profit, the last item that fits alone (overflow <= p,
    from the item's exact tail) sets the scale K = eps * v / n; the kept
    profits become floor(v / K).
    """
    eps = as_fraction(instance.epsilon if epsilon is None else epsilon)
    n = instance.n
    M = math.ceil(n / eps) if n else 0
    order = sorted(range(n), key=lambda i: (instance.items[i].profit, i))
    last = None
    for pos, i in enumerate(order):
        if as_fraction(instance.items[i].dist.tail(instance.capacity)) <= instance.p:
            last = pos
    if last is None:
        return ReducedProfits(None, (), None, M)
    K = eps * instance.items[order[last]].profit / n
    kept = tuple(sorted(order[: last + 1]))
    items = tuple(Item(instance.items[i].dist, Fraction(math.floor(instance.items[i].profit / K))) for i in kept)
    return ReducedProfits(instance.with_(items=items), kept, K, M)


def solve_hyper(instance: Instance, epsilon=None, seed: Optional[int] = None,
                config: Optional[SolverConfig] = None) -> Solution:
    started = time.perf_counter()
    config = config or SolverConfig()
    eps = as_fraction(instance.epsilon if epsilon is None else epsilon)
    seed = instance.seed if seed is None else int(seed)
    red = reduce_profits(instance, eps)
    if red.instance is None:
        return make_solution(instance, (), "hyper", eps, seed, config, started, {"kept_items": 0})
    inner = solve_hyper_bounded(red.instance, eps, seed, config)
    subset = tuple(red.kept[i] for i in inner.selected)
    diagnostics = dict(inner.diagnostics)
    diagnostics.update({"kept_items": len(red.kept), "profit_scale": str(red.scale), "profit_bound": red.bound})
    return make_solution(instance, subset, "hyper", eps, seed, config, started, diagnostics)

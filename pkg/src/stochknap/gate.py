"""The tau-relaxed overflow comparison used to filter candidate subsets.

``gate.leq(S, q, tau)`` answers "is a +-tau estimate of Pr[sum_S X > C] at
most q?".  In Monte Carlo mode every estimate draws on a common bank of
samples (one column per item, seeded per item), so each estimate is an
average of m i.i.d. indicators and Hoeffding applies to it individually; the
union bound over all distinct estimates needs no independence between them.
The overall failure budget ``delta`` is split evenly over at most
``max_calls`` distinct estimates.

In exact mode the overflow of a finite-law subset is computed by convolution,
which is a +-tau estimate with zero failure probability.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .distributions import Bernoulli, SizeDistribution, as_fraction
from .errors import BudgetError
from .instance import STREAM_GATE, SolverConfig, stream
from .oracles import _exceeds, hoeffding_samples


def exact_atom_bound(dists: Sequence[SizeDistribution]) -> float:
    """Upper bound on the number of atoms of any partial sum of finite laws."""
    if not all(d.finite for d in dists):
        return math.inf
    bound = math.prod(len(d.exact_pmf()) for d in dists)
    supports = [d.support() for d in dists]
    if all(v.denominator == 1 for s in supports for v in s):
        span = sum(int(max(s) - min(s)) for s in supports) + 1
        bound = min(bound, span)
    common = set().union(*supports) if supports else set()
    k = len(common)
    if k:
        bound = min(bound, math.comb(len(dists) + k - 1, k - 1))
    return bound


class OverflowGate:
    def __init__(self, dists: Sequence[SizeDistribution], capacity, *, seed: int = 0,
                 config: Optional[SolverConfig] = None, min_tau: float = 0.01):
        config = config or SolverConfig()
        self.dists = list(dists)
        self.capacity = as_fraction(capacity)
        self.seed = int(seed)
        self.config = config
        self.delta_each = config.delta / config.max_gate_calls
        mode = config.gate_mode
        if mode == "auto":
            ok = exact_atom_bound(self.dists) <= config.exact_atom_limit
            mode = "exact" if ok else "mc"
        elif mode == "exact" and not all(d.finite for d in self.dists):
            raise ValueError("exact gate mode needs every item to be a finite law")
        self.mode = mode
        self.min_tau = float(min_tau)
        self.rows = hoeffding_samples(self.min_tau, self.delta_each) if mode == "mc" else 0
        self._bank: dict = {}
        self._memo: dict = {}
        self.estimates = 0
        self.comparisons = 0
        self._bernoulli = all(isinstance(d, Bernoulli) for d in self.dists)
        if mode == "exact" and not self._bernoulli:
            self._atoms = [[(v, float(q)) for v, q in d.exact_pmf()] for d in self.dists]

    def _column(self, i: int) -> np.ndarray:
        col = self._bank.get(i)
        if col is None:
            col = self.dists[i].sample(stream(self.seed, STREAM_GATE, i), self.rows)
            self._bank[i] = col
        return col

    def _exact(self, subset) -> float:
        c = self.capacity
        if self._bernoulli:
            pmf = np.ones(1)
            for i in subset:
                p = float(self.dists[i].p)
                pmf = np.convolve(pmf, [1.0 - p, p])
            first = math.floor(c) + 1
            if first <= 0:
                return 1.0
            return float(pmf[first:].sum())
        acc = {Fraction(0): 1.0}
        for i in subset:
            out: dict = {}
            for x, px in acc.items():
                for y, py in self._atoms[i]:
                    out[x + y] = out.get(x + y, 0.0) + px * py
            acc = out
        return float(sum(q for v, q in acc.items() if v > c))

    def estimate(self, subset, tau: float) -> float:
        key = tuple(sorted(subset))
        if self.mode == "exact":
            memo_key = key
        else:
            if tau < self.min_tau * (1 - 1e-12):
                raise ValueError(f"gate built for tau >= {self.min_tau}, asked for {tau}")
            m = hoeffding_samples(float(tau), self.delta_each)
            memo_key = (key, m)
        hit = self._memo.get(memo_key)
        if hit is not None:
            return hit
        self.estimates += 1
        if self.estimates > self.config.max_gate_calls:
            raise BudgetError(
                f"more than {self.config.max_gate_calls} overflow estimates; "
                "raise max_gate_calls or use a larger epsilon"
            )
        if self.mode == "exact":
            val = self._exact(key)
        elif not key:
            val = float(_exceeds(np.zeros(1), self.capacity)[0])
        else:
            total = np.zeros(m)
            for i in key:
                total += self._column(i)[:m]
            val = float(np.mean(_exceeds(total, self.capacity)))
        self._memo[memo_key] = val
        return val

    def leq(self, subset, q, tau) -> bool:
        self.comparisons += 1
        return self.estimate(subset, float(tau)) <= float(q)

    def stats(self) -> dict:
        return {
            "gate_mode": self.mode,
            "gate_estimates": self.estimates,
            "gate_comparisons": self.comparisons,
            "delta_per_estimate": self.delta_each if self.mode == "mc" else 0.0,
            "failure_bound": self.delta_each * self.estimates if self.mode == "mc" else 0.0,
        }

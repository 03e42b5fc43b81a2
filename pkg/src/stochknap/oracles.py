"""Overflow probabilities, distances, reference laws and brute-force baselines.

Everything here is an oracle in the testing sense: simple, exhaustive or
exact where possible, and independent of the solvers' dynamic programs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .distributions import SizeDistribution, as_fraction, fraction_str
from .errors import BudgetError, UnsupportedDistributionError

# Relative slack when comparing floating sample sums with a rational capacity,
# so that e.g. 0.1 + 0.2 is not counted as exceeding 0.3.
_CMP_TOL = 1e-9


def _exceeds(sums: np.ndarray, capacity) -> np.ndarray:
    c = float(capacity)
    return sums > c + _CMP_TOL * max(1.0, abs(c))


@dataclass(frozen=True)
class OverflowEstimate:
    point_estimate: float
    half_width: float
    confidence: float
    samples_used: int

    def to_json(self) -> dict:
        return {
            "estimate": self.point_estimate,
            "half_width": self.half_width,
            "confidence": self.confidence,
            "samples": self.samples_used,
        }


def hoeffding_samples(tau: float, delta: float) -> int:
    """Samples needed for a +-tau interval with failure probability delta."""
    if not 0 < tau < 1 or not 0 < delta < 1:
        raise ValueError(f"need tau, delta in (0,1), got tau={tau}, delta={delta}")
    return math.ceil(math.log(2.0 / delta) / (2.0 * tau * tau))


def sample_sums(items: Sequence[SizeDistribution], size: int, rng: np.random.Generator) -> np.ndarray:
    total = np.zeros(size)
    for d in items:
        total += d.sample(rng, size)
    return total


def mc_overflow(items, capacity, tau, delta, rng) -> OverflowEstimate:
    """Estimate Pr[sum of items > capacity] to +-tau with probability 1 - delta."""
    m = hoeffding_samples(float(tau), float(delta))
    sums = sample_sums(items, m, rng)
    est = float(np.mean(_exceeds(sums, capacity)))
    return OverflowEstimate(est, float(tau), 1.0 - float(delta), m)


def leq_check(items, capacity, q, tau, delta, rng) -> bool:
    """The tau-relaxed comparison: is a +-tau estimate of the overflow <= q?"""
    return mc_overflow(items, capacity, tau, delta, rng).point_estimate <= float(q)


@dataclass(frozen=True)
class Pmf:
    """A law on finitely many atoms, values strictly increasing.

    Exact pmfs carry Fraction probabilities summing to 1.  Truncated reference
    laws (Poisson and friends) carry float probabilities and record the mass
    they left out in ``omitted_mass``.
    """

    values: tuple
    probs: tuple
    omitted_mass: float = 0.0
    renormalized: bool = False

    @classmethod
    def from_dict(cls, d: dict, **kw) -> "Pmf":
        items = sorted((v, q) for v, q in d.items() if q != 0)
        return cls(tuple(v for v, _ in items), tuple(q for _, q in items), **kw)

    @property
    def exact(self) -> bool:
        return self.omitted_mass == 0 and all(isinstance(q, (Fraction, int)) for q in self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.values, self.probs))

    def total(self):
        return sum(self.probs)

    def tail(self, capacity):
        """Pr[X > capacity] (exact for exact pmfs)."""
        if self.exact:
            c = as_fraction(capacity)
            return sum((q for v, q in zip(self.values, self.probs) if v > c), Fraction(0))
        c = float(capacity)
        return float(sum(q for v, q in zip(self.values, self.probs) if float(v) > c))

    def mean(self):
        return sum(v * q for v, q in zip(self.values, self.probs))

    def var(self):
        mu = self.mean()
        return sum(q * (v - mu) ** 2 for v, q in zip(self.values, self.probs))

    def to_json(self) -> list:
        if not self.exact:
            raise ValueError("only exact pmfs serialize to [value, num, den] triples")
        return [[fraction_str(v), Fraction(q).numerator, Fraction(q).denominator] for v, q in zip(self.values, self.probs)]

    @classmethod
    def from_json(cls, triples) -> "Pmf":
        d = {}
        for v, num, den in triples:
            d[as_fraction(v)] = d.get(as_fraction(v), Fraction(0)) + Fraction(int(num), int(den))
        return cls.from_dict(d)


def _convolve(acc: dict, atoms, max_atoms: int) -> dict:
    out: dict = {}
    for x, px in acc.items():
        for y, py in atoms:
            k = x + y
            out[k] = out.get(k, 0) + px * py
    if len(out) > max_atoms:
        raise BudgetError(f"exact convolution exceeded {max_atoms} atoms")
    return out


def exact_sum_pmf(items: Sequence[SizeDistribution], max_atoms: int = 10**7) -> Pmf:
    """Exact law of the sum of independent finite laws, in rational arithmetic."""
    acc = {Fraction(0): Fraction(1)}
    for d in items:
        acc = _convolve(acc, d.exact_pmf(), max_atoms)
    return Pmf.from_dict(acc)


def exact_overflow(items: Sequence[SizeDistribution], capacity) -> Fraction:
    return exact_sum_pmf(items).tail(capacity)


def pbd_pmf(probs) -> np.ndarray:
    """Poisson binomial pmf on 0..n by direct convolution in double precision."""
    out = np.ones(1)
    for p in probs:
        p = float(p)
        out = np.convolve(out, [1.0 - p, p])
    return out


def float_pmf(values, probs) -> Pmf:
    """Wrap a float pmf (e.g. from ``pbd_pmf``) as a Pmf on integer values."""
    pairs = [(v, float(q)) for v, q in zip(values, probs) if q != 0]
    return Pmf(tuple(v for v, _ in pairs), tuple(q for _, q in pairs))


def _grid(a: Pmf, b: Pmf):
    da, db = a.as_dict(), b.as_dict()
    return sorted(set(da) | set(db)), da, db


def tv_distance(a: Pmf, b: Pmf):
    """Half the l1 distance over the union grid.

    Mass that a truncated reference law left out is added in full, so the
    result is an upper bound on the true distance in that case.
    """
    grid, da, db = _grid(a, b)
    if a.exact and b.exact:
        return sum((abs(da.get(x, 0) - db.get(x, 0)) for x in grid), Fraction(0)) / 2
    s = sum(abs(float(da.get(x, 0)) - float(db.get(x, 0))) for x in grid)
    return 0.5 * (s + a.omitted_mass + b.omitted_mass)


def cdf_distance(a: Pmf, b: Pmf):
    """max |F_a - F_b| over the union grid (plus truncated mass, if any)."""
    grid, da, db = _grid(a, b)
    exact = a.exact and b.exact
    fa = fb = Fraction(0) if exact else 0.0
    best = fa
    for x in grid:
        if exact:
            fa += da.get(x, 0)
            fb += db.get(x, 0)
        else:
            fa += float(da.get(x, 0))
            fb += float(db.get(x, 0))
        best = max(best, abs(fa - fb))
    if not exact:
        best += max(a.omitted_mass, b.omitted_mass)
    return best


def cdf_distance_to_normal(pmf: Pmf, mean: float, var: float) -> float:
    """sup_t |F(t) - Phi((t - mean)/sd)| for a discrete law F.

    The supremum is attained at an atom, approached either from the right
    (F at the atom) or from the left (F just below it).
    """
    sd = math.sqrt(float(var))
    xs = np.array([float(v) for v in pmf.values])
    ps = np.array([float(q) for q in pmf.probs])
    right = np.cumsum(ps)
    left = right - ps
    phi = stats.norm.cdf(xs, float(mean), sd)
    return float(max(np.max(np.abs(right - phi)), np.max(np.abs(left - phi))))


def poisson_pmf(lam, tail_cut: float = 1e-12, renormalize: bool = False) -> Pmf:
    """Poi(lam) restricted to a window whose omitted mass is at most tail_cut."""
    lam = float(lam)
    if lam <= 0:
        return Pmf((0,), (1.0,))
    lo = int(stats.poisson.ppf(tail_cut / 2, lam))
    lo = max(lo - 1, 0)
    hi = int(stats.poisson.isf(tail_cut / 2, lam)) + 1
    ks = np.arange(lo, hi + 1)
    probs = stats.poisson.pmf(ks, lam)
    omitted = float(stats.poisson.cdf(lo - 1, lam) + stats.poisson.sf(hi, lam))
    if renormalize:
        probs = probs / probs.sum()
    pmf = float_pmf([int(k) for k in ks], probs)
    return Pmf(pmf.values, pmf.probs, 0.0 if renormalize else omitted, renormalize)


def translated_poisson_params(mu, sigma2) -> tuple[int, Fraction]:
    """Shift floor(mu - sigma2) and rate mu - shift of TP(mu, sigma2)."""
    mu, sigma2 = as_fraction(mu), as_fraction(sigma2)
    if sigma2 <= 0:
        raise ValueError("translated Poisson needs sigma2 > 0")
    shift = math.floor(mu - sigma2)
    return shift, mu - shift


def translated_poisson_pmf(mu, sigma2, tail_cut: float = 1e-12, renormalize: bool = False) -> Pmf:
    shift, lam = translated_poisson_params(mu, sigma2)
    base = poisson_pmf(lam, tail_cut, renormalize)
    return Pmf(tuple(v + shift for v in base.values), base.probs, base.omitted_mass, base.renormalized)


def levy_concentration(items, t, samples, rng) -> float:
    """Estimate sup_a Pr[a <= sum <= a + t] with a sliding closed window."""
    if t <= 0:
        raise ValueError("window width must be positive")
    x = np.sort(sample_sums(items, int(samples), rng))
    hi = np.searchsorted(x, x + float(t) * (1 + 1e-12), side="right")
    return float(np.max(hi - np.arange(len(x))) / len(x))


@dataclass(frozen=True)
class BruteForceResult:
    subset: tuple
    profit: Fraction
    overflow: object  # Fraction when exact, else an OverflowEstimate
    exact: bool = field(default=True)


def _better(profit, subset, best) -> bool:
    if best is None:
        return True
    return profit > best[0] or (profit == best[0] and subset < best[1])


def brute_force_opt(instance, cap: int = 20, tau: Optional[float] = None, delta: float = 1e-6,
                    rng: Optional[np.random.Generator] = None) -> Optional[BruteForceResult]:
    """Max-profit subset with overflow <= p by enumerating all 2**n subsets.

    Overflow is exact when every item is a finite law; otherwise every subset
    is judged by a Monte Carlo estimate (tau defaults to epsilon / 10) using a
    common bank of samples.  Ties go to the lexicographically smallest index
    tuple.  Returns None when no subset is feasible.
    """
    dists = [it.dist for it in instance.items]
    profits = [as_fraction(it.profit) for it in instance.items]
    n = len(dists)
    if n > cap:
        raise BudgetError(f"brute force is capped at {cap} items, instance has {n}")
    p = as_fraction(instance.p)
    capacity = instance.capacity
    best = None

    if all(d.finite for d in dists):
        pmfs = [d.exact_pmf() for d in dists]
        c = as_fraction(capacity)

        def visit(i, acc, chosen, profit):
            nonlocal best
            if i == n:
                over = sum((q for v, q in acc.items() if v > c), Fraction(0))
                subset = tuple(chosen)
                if over <= p and _better(profit, subset, best):
                    best = (profit, subset, over)
                return
            visit(i + 1, _convolve(acc, pmfs[i], 10**7), chosen + [i], profit + profits[i])
            visit(i + 1, acc, chosen, profit)

        visit(0, {Fraction(0): Fraction(1)}, [], Fraction(0))
        if best is None:
            return None
        return BruteForceResult(best[1], best[0], best[2], True)

    if tau is None:
        tau = float(instance.epsilon) / 10
    if rng is None:
        rng = np.random.default_rng(getattr(instance, "seed", 0))
    m = hoeffding_samples(tau, delta)
    bank = [d.sample(rng, m) for d in dists]
    pf = float(p)

    def visit_mc(i, acc, chosen, profit):
        nonlocal best
        if i == n:
            est = float(np.mean(_exceeds(acc, capacity)))
            subset = tuple(chosen)
            if est <= pf and _better(profit, subset, best):
                best = (profit, subset, OverflowEstimate(est, tau, 1.0 - delta, m))
            return
        visit_mc(i + 1, acc + bank[i], chosen + [i], profit + profits[i])
        visit_mc(i + 1, acc, chosen, profit)

    visit_mc(0, np.zeros(m), [], Fraction(0))
    if best is None:
        return None
    return BruteForceResult(best[1], best[0], best[2], False)


__all__ = [
    "OverflowEstimate",
    "Pmf",
    "BruteForceResult",
    "hoeffding_samples",
    "sample_sums",
    "mc_overflow",
    "leq_check",
    "exact_sum_pmf",
    "exact_overflow",
    "pbd_pmf",
    "float_pmf",
    "tv_distance",
    "cdf_distance",
    "cdf_distance_to_normal",
    "poisson_pmf",
    "translated_poisson_params",
    "translated_poisson_pmf",
    "levy_concentration",
    "brute_force_opt",
    "UnsupportedDistributionError",
]

"""Seeded random instances of the supported families."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np

from .distributions import Bernoulli, Exponential, Finite, Gaussian, Laplace, Poisson, Uniform, point_mass
from .instance import STREAM_GEN, Instance, Item, stream

FAMILIES = ("bernoulli", "ksupport", "hyper", "deterministic", "gaussian", "exponential", "laplace", "poisson", "uniform")


def _profits(rng, n, unit=False, hi=20):
    if unit:
        return [Fraction(1)] * n
    return [Fraction(int(v)) for v in rng.integers(1, hi + 1, n)]


def _budget(rng):
    return Fraction(int(rng.integers(5, 41)), 100)


def random_law(rng, support, denominator=20) -> Finite:
    """Random law on ``support`` with probabilities in multiples of 1/denominator."""
    k = len(support)
    cuts = np.sort(rng.choice(np.arange(1, denominator), size=k - 1, replace=False)) if k > 1 else []
    edges = [0, *map(int, cuts), denominator]
    probs = [Fraction(edges[j + 1] - edges[j], denominator) for j in range(k)]
    return Finite(tuple(support), tuple(probs))


def bernoulli_instance(rng, n, epsilon=Fraction(1, 10), unit=False) -> Instance:
    probs = [Fraction(int(v), 100) for v in rng.integers(1, 100, n)]
    cap = Fraction(int(rng.integers(1, max(2, n // 2 + 1))))
    items = tuple(Item(Bernoulli(p), v) for p, v in zip(probs, _profits(rng, n, unit)))
    return Instance(items, cap + Fraction(1, 2) * int(rng.integers(0, 2)), _budget(rng), epsilon=epsilon)


def ksupport_instance(rng, n, k=2, epsilon=Fraction(1, 5)) -> Instance:
    support = sorted(int(v) for v in rng.choice(6, size=k, replace=False))
    items = tuple(Item(random_law(rng, support), v) for v in _profits(rng, n))
    mean_total = sum(float(it.dist.moments().mean) for it in items)
    cap = Fraction(max(1, int(round(mean_total * float(rng.uniform(0.4, 0.9))))))
    return Instance(items, cap, _budget(rng), epsilon=epsilon)


def hyper_instance(rng, n, epsilon=Fraction(1, 4)) -> Instance:
    """Mixed Gaussian / exponential / Laplace / finite sizes with positive means."""
    items = []
    for v in _profits(rng, n):
        kind = int(rng.integers(0, 4))
        if kind == 0:
            d = Gaussian(round(float(rng.uniform(1, 3)), 3), round(float(rng.uniform(0.05, 0.5)), 3))
        elif kind == 1:
            d = Exponential(round(float(rng.uniform(0.5, 2)), 3))
        elif kind == 2:
            d = Laplace(round(float(rng.uniform(1, 3)), 3), round(float(rng.uniform(0.1, 0.5)), 3))
        else:
            d = random_law(rng, sorted(int(x) for x in rng.choice(5, size=3, replace=False)), 10)
        items.append(Item(d, v))
    mean_total = sum(float(it.dist.moments().mean) for it in items)
    cap = Fraction(max(1, int(round(mean_total * float(rng.uniform(0.3, 0.8))))))
    return Instance(tuple(items), cap, _budget(rng), epsilon=epsilon)


def deterministic_instance(rng, n, max_profit=50, epsilon=Fraction(1, 4)) -> Instance:
    sizes = [int(s) for s in rng.integers(1, 11, n)]
    items = tuple(Item(point_mass(s), v) for s, v in zip(sizes, _profits(rng, n, hi=max_profit)))
    cap = Fraction(int(rng.integers(1, sum(sizes) + 1)))
    return Instance(items, cap, Fraction(int(rng.integers(0, 51)), 100), epsilon=epsilon)


def single_family_instance(rng, n, family, epsilon=Fraction(1, 4)) -> Instance:
    items = []
    for v in _profits(rng, n):
        if family == "gaussian":
            d = Gaussian(round(float(rng.uniform(1, 3)), 3), round(float(rng.uniform(0.05, 0.5)), 3))
        elif family == "exponential":
            d = Exponential(round(float(rng.uniform(0.5, 2)), 3))
        elif family == "laplace":
            d = Laplace(round(float(rng.uniform(1, 3)), 3), round(float(rng.uniform(0.1, 0.5)), 3))
        elif family == "poisson":
            d = Poisson(round(float(rng.uniform(0.5, 3)), 3))
        else:
            lo = round(float(rng.uniform(0, 1)), 3)
            d = Uniform(lo, lo + round(float(rng.uniform(0.5, 2)), 3))
        items.append(Item(d, v))
    mean_total = sum(float(it.dist.moments().mean) for it in items)
    cap = Fraction(max(1, int(round(mean_total * 0.6))))
    return Instance(tuple(items), cap, _budget(rng), epsilon=epsilon)


def generate(family: str, n: int, seed: int = 0, k: int = 2, epsilon: Optional[Fraction] = None) -> Instance:
    rng = stream(seed, STREAM_GEN)
    if family == "bernoulli":
        inst = bernoulli_instance(rng, n, epsilon or Fraction(1, 10))
    elif family == "ksupport":
        inst = ksupport_instance(rng, n, k, epsilon or Fraction(1, 5))
    elif family == "hyper":
        inst = hyper_instance(rng, n, epsilon or Fraction(1, 4))
    elif family == "deterministic":
        inst = deterministic_instance(rng, n, epsilon=epsilon or Fraction(1, 4))
    elif family in ("gaussian", "exponential", "laplace", "poisson", "uniform"):
        inst = single_family_instance(rng, n, family, epsilon or Fraction(1, 4))
    else:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    return inst.with_(seed=seed)

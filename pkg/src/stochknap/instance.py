"""Problem instances, solver configuration, solutions and their JSON forms."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from .distributions import SizeDistribution, as_fraction, distribution_from_json, fraction_str
from .errors import InstanceError
from .oracles import OverflowEstimate, mc_overflow

# Named substreams of the master seed.
STREAM_GATE = 1
STREAM_REPORT = 2
STREAM_BRUTE = 3
STREAM_GEN = 4
STREAM_MISC = 5


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one subsystem; depends only on (seed, keys)."""
    return np.random.default_rng([int(seed), *map(int, keys)])


@dataclass(frozen=True)
class Item:
    dist: SizeDistribution
    profit: Fraction

    def __post_init__(self):
        if not isinstance(self.dist, SizeDistribution):
            raise InstanceError(f"item size must be a SizeDistribution, got {self.dist!r}")
        object.__setattr__(self, "profit", as_fraction(self.profit))


@dataclass(frozen=True)
class Instance:
    """Items with random sizes and profits, a capacity and an overflow budget p.

    A subset S is feasible at level q when Pr[sum of sizes in S > capacity] <= q.
    ``epsilon``, ``seed``, ``delta`` and ``samples`` are per-instance defaults.
    """

    items: tuple
    capacity: Fraction
    p: Fraction
    epsilon: Fraction = Fraction(1, 10)
    seed: int = 0
    delta: float = 1e-6
    samples: Optional[int] = None

    def __post_init__(self):
        items = tuple(it if isinstance(it, Item) else Item(*it) for it in self.items)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "capacity", as_fraction(self.capacity))
        p = as_fraction(self.p)
        if not 0 <= p <= 1:
            raise InstanceError(f"overflow budget p must lie in [0,1], got {p}")
        object.__setattr__(self, "p", p)
        eps = as_fraction(self.epsilon)
        if not 0 < eps < 1:
            raise InstanceError(f"epsilon must lie in (0,1), got {eps}")
        object.__setattr__(self, "epsilon", eps)
        if any(it.profit < 0 for it in items):
            raise InstanceError("profits must be non-negative")
        if not 0 < float(self.delta) < 1:
            raise InstanceError("delta must lie in (0,1)")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def dists(self) -> list:
        return [it.dist for it in self.items]

    @property
    def profits(self) -> list:
        return [it.profit for it in self.items]

    def subset_profit(self, subset) -> Fraction:
        return sum((self.items[i].profit for i in subset), Fraction(0))

    def subset_dists(self, subset) -> list:
        return [self.items[i].dist for i in subset]

    def with_(self, **changes) -> "Instance":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return {
            "items": [{"dist": it.dist.to_json(), "profit": fraction_str(it.profit)} for it in self.items],
            "capacity": fraction_str(self.capacity),
            "p": fraction_str(self.p),
            "defaults": {
                "epsilon": fraction_str(self.epsilon),
                "seed": self.seed,
                "delta": self.delta,
                "samples": self.samples,
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instance":
        if not isinstance(obj, dict):
            raise InstanceError("instance file must hold a JSON object")
        try:
            raw_items = obj["items"]
            capacity = obj["capacity"]
            p = obj["p"]
        except KeyError as exc:
            raise InstanceError(f"instance is missing field {exc}") from None
        items = []
        for i, raw in enumerate(raw_items):
            try:
                dist = distribution_from_json(raw["dist"])
                profit = as_fraction(raw["profit"])
            except KeyError as exc:
                raise InstanceError(f"item {i} is missing field {exc}") from None
            except InstanceError as exc:
                raise InstanceError(f"item {i}: {exc}") from None
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise InstanceError(f"item {i}: {exc}") from None
            if profit <= 0:
                raise InstanceError(f"item {i}: profit must be positive, got {profit}")
            items.append(Item(dist, profit))
        defaults = obj.get("defaults") or {}
        try:
            return cls(
                tuple(items),
                as_fraction(capacity),
                as_fraction(p),
                epsilon=as_fraction(defaults.get("epsilon", Fraction(1, 10))),
                seed=int(defaults.get("seed", 0)),
                delta=float(defaults.get("delta", 1e-6)),
                samples=defaults.get("samples"),
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(str(exc)) from None


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return Instance.from_json(obj)


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the schemes.

    gate_mode: "mc" judges every overflow comparison by Monte Carlo with
    Hoeffding sample counts; "exact" computes the overflow of finite laws by
    convolution; "auto" uses exact convolution when every item is a finite
    law with a small atom count and Monte Carlo otherwise.
    """

    delta: float = 1e-6
    max_gate_calls: int = 10**6
    gate_mode: str = "auto"
    exact_atom_limit: int = 200_000
    table_budget: int = 2_000_000
    cell_budget: int = 60_000_000
    combo_budget: int = 10**6
    type_budget: int = 10**5
    c_override: Optional[float] = None
    report_tau: float = 0.01
    k_cap: int = 4

    def __post_init__(self):
        if self.gate_mode not in ("auto", "mc", "exact"):
            raise ValueError(f"unknown gate mode {self.gate_mode!r}")


@dataclass
class Solution:
    selected: tuple
    total_profit: Fraction
    overflow: OverflowEstimate
    scheme: str
    epsilon: Fraction
    seed: int
    wall_time_ms: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_json(self, include_time: bool = True) -> dict:
        out = {
            "selected": list(self.selected),
            "total_profit": fraction_str(self.total_profit),
            "overflow": self.overflow.to_json(),
            "scheme": self.scheme,
            "epsilon": fraction_str(self.epsilon),
            "seed": self.seed,
        }
        if include_time:
            out["wall_time_ms"] = round(self.wall_time_ms, 3)
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def report_overflow(instance: Instance, subset: Sequence[int], seed: int, config: SolverConfig) -> OverflowEstimate:
    """Fresh Monte Carlo estimate of a chosen subset's overflow for reporting."""
    rng = stream(seed, STREAM_REPORT)
    return mc_overflow(instance.subset_dists(subset), instance.capacity, config.report_tau, config.delta, rng)


def make_solution(instance: Instance, subset, scheme: str, epsilon, seed: int, config: SolverConfig,
                  started: float, diagnostics: Optional[dict] = None) -> Solution:
    subset = tuple(sorted(subset))
    est = report_overflow(instance, subset, seed, config)
    return Solution(
        selected=subset,
        total_profit=instance.subset_profit(subset),
        overflow=est,
        scheme=scheme,
        epsilon=as_fraction(epsilon),
        seed=seed,
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
        diagnostics=diagnostics or {},
    )

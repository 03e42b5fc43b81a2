"""Exact-target multidimensional subset-sum DP over quantized size vectors.

A reach table maps every reachable integer coordinate tuple (sum of a subset
of item sizes, each coordinate below its cap) to the best subset profit that
achieves it.  One table answers every target at once, so the schemes build a
table and then walk its entries in descending profit order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .distributions import as_fraction
from .errors import BudgetError

DEFAULT_TABLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class QuantizedVector:
    """A vector whose j-th value is ``coords[j] * quanta[j]`` exactly."""

    coords: tuple
    quanta: tuple

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        quanta = tuple(as_fraction(q) for q in self.quanta)
        if len(coords) != len(quanta):
            raise ValueError("coords and quanta must have the same length")
        if any(c < 0 for c in coords):
            raise ValueError("quantized coordinates must be non-negative")
        if any(q <= 0 for q in quanta):
            raise ValueError("quanta must be positive")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "quanta", quanta)

    @classmethod
    def from_values(cls, values: Sequence, quanta: Sequence) -> "QuantizedVector":
        coords = []
        for v, q in zip(values, quanta):
            r = as_fraction(v) / as_fraction(q)
            if r.denominator != 1:
                raise ValueError(f"value {v} is not an integer multiple of quantum {q}")
            coords.append(r.numerator)
        return cls(tuple(coords), tuple(quanta))

    def values(self) -> tuple:
        return tuple(c * q for c, q in zip(self.coords, self.quanta))


@dataclass(frozen=True)
class DpItem:
    size: QuantizedVector
    profit: Fraction
    id: int


class ReachTable:
    """Reachable size tuples with their best profit and a witness subset.

    Witnesses are stored as persistent linked lists ``(item_id, parent)`` so
    that later updates never invalidate an earlier entry's reconstruction.
    """

    def __init__(self, entries: dict, quanta: tuple):
        self._entries = entries
        self.quanta = quanta

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return tuple(key) in self._entries

    def keys(self):
        return self._entries.keys()

    def profit(self, key):
        return self._entries[tuple(key)][0]

    def subset(self, key) -> tuple:
        node = self._entries[tuple(key)][1]
        ids = []
        while node is not None:
            ids.append(node[0])
            node = node[1]
        return tuple(sorted(ids))

    def items(self) -> Iterator:
        """(key, profit, subset) for every entry, in insertion order."""
        for key in self._entries:
            yield key, self._entries[key][0], self.subset(key)

    def to_json(self) -> list:
        """Debug dump: [[key...], profit, [ids...]] per entry."""
        return [[list(k), str(p), list(s)] for k, p, s in self.items()]


def _check_quanta(items: Sequence[DpItem]):
    if not items:
        return ()
    quanta = items[0].size.quanta
    for it in items[1:]:
        if it.size.quanta != quanta:
            raise ValueError(f"item {it.id} uses different quanta from item {items[0].id}")
    return quanta


def reach_table_raw(sizes: Sequence[tuple], profits: Sequence, ids: Sequence[int], caps: Sequence[int],
                    budget: int = DEFAULT_TABLE_BUDGET, dims: Optional[int] = None) -> dict:
    """Core DP on plain integer tuples; returns {key: (profit, witness)}.

    On equal profit at a key the earlier (first-found in item order) witness
    is kept.
    """
    dims = len(caps) if dims is None else dims
    caps = tuple(caps)
    zero = (0,) * dims
    table = {zero: (0, None)}
    for size, profit, ident in zip(sizes, profits, ids):
        if any(s > c for s, c in zip(size, caps)):
            continue
        updates = []
        for key, (best, node) in table.items():
            new = tuple(a + b for a, b in zip(key, size))
            if any(x > c for x, c in zip(new, caps)):
                continue
            updates.append((new, best + profit, (ident, node)))
        for new, value, node in updates:
            cur = table.get(new)
            if cur is None or value > cur[0]:
                table[new] = (value, node)
        if len(table) > budget:
            prod = math.prod(c + 1 for c in caps)
            raise BudgetError(
                f"reach table grew past {budget} entries (cap product {prod}); "
                "use a larger epsilon, fewer items, or a bigger table budget"
            )
    return table


def build_reach_table(items: Sequence[DpItem], caps: Sequence[int],
                      budget: int = DEFAULT_TABLE_BUDGET) -> ReachTable:
    quanta = _check_quanta(items)
    dims = len(caps)
    if items and len(quanta) != dims:
        raise ValueError(f"caps have {dims} coordinates but sizes have {len(quanta)}")
    table = reach_table_raw(
        [it.size.coords for it in items],
        [as_fraction(it.profit) for it in items],
        [it.id for it in items],
        caps,
        budget,
        dims,
    )
    return ReachTable(table, quanta)


def solve_target(items: Sequence[DpItem], target: QuantizedVector, caps: Sequence[int],
                 budget: int = DEFAULT_TABLE_BUDGET) -> Optional[tuple]:
    """Max-profit subset whose sizes sum to ``target`` exactly, or None."""
    table = build_reach_table(items, caps, budget)
    key = tuple(target.coords)
    if key not in table:
        return None
    return table.subset(key), table.profit(key)


def enumerate_candidates(table: ReachTable, key_filter: Optional[Callable] = None) -> Iterator:
    """Yield (key, profit, subset) profit-descending, ties by ascending key."""
    keys = [k for k in table.keys() if key_filter is None or key_filter(k)]
    keys.sort(key=lambda k: (-table.profit(k), k))
    for k in keys:
        yield k, table.profit(k), table.subset(k)

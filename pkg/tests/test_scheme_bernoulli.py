from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochknap.distributions import Bernoulli, Gaussian
from stochknap.errors import InstanceError
from stochknap.gate import OverflowGate
from stochknap.generators import generate
from stochknap.instance import Instance, Item, SolverConfig
from stochknap.oracles import brute_force_opt, exact_overflow, float_pmf, pbd_pmf, tv_distance
from stochknap.scheme_bernoulli import (
    BernoulliInstance,
    _bucket_vectors,
    bucket_partition,
    descending_combinations,
    grid_size,
    moment_count,
    round_to_grid,
    sk_bernoulli_large,
    sk_bernoulli_small,
    solve_bernoulli,
)

F = Fraction


def bern_instance(probs, profits, cap, p, eps=F(1, 10)):
    return Instance(tuple(Item(Bernoulli(q), F(v)) for q, v in zip(probs, profits)), cap, p, epsilon=eps)


def gate_for(inst, eps, config=None):
    return OverflowGate(inst.dists, inst.capacity, seed=0, config=config, min_tau=float(eps / 2))


def test_grid_is_unit_fraction_no_coarser_than_step():
    assert grid_size(F(1, 10) / 40) == 400
    assert grid_size(F(3, 1000)) == 334
    assert 1 / F(grid_size(F(3, 1000))) <= F(3, 1000)


def test_round_to_grid_halves_up():
    assert round_to_grid(F(1, 8), 4) == 1  # 0.5 rounds up
    assert round_to_grid(F(1, 3), 10) == 3


def test_moment_count():
    assert moment_count(F(1, 10)) == 14  # ceil(4 * 3.3219...)
    assert moment_count(F(1, 2)) == 4


def test_rounded_probs_within_half_grid():
    inst = bern_instance([F(k, 97) for k in range(1, 12)], [1] * 11, 3, F(1, 5))
    b = BernoulliInstance.from_instance(inst, inst.epsilon)
    for p, q in zip(b.probs, b.rounded):
        assert abs(p - q) <= inst.epsilon / (8 * inst.n)
        assert 0 <= q <= 1


def test_large_all_zero_probs():
    inst = bern_instance([0] * 4, [1, 2, 3, 4], 0, 0, eps=F(1, 8))
    assert sk_bernoulli_large(inst, F(1, 8), gate_for(inst, F(1, 8))) == (0, 1, 2, 3)
    neg = inst.with_(capacity=F(-1))
    assert sk_bernoulli_large(neg, F(1, 8), gate_for(neg, F(1, 8))) is None


def test_large_two_identical_items_reach_both_keys():
    # with a budget of 1 every candidate passes, so the first is the full set
    inst = bern_instance([F(1, 2)] * 2, [1, 1], 0, 1, eps=F(1, 8))
    assert sk_bernoulli_large(inst, F(1, 8), gate_for(inst, F(1, 8))) == (0, 1)


def test_large_ten_fair_coins():
    eps = F(1, 5)
    inst = bern_instance([F(1, 2)] * 10, [1] * 10, F(13, 2), F(2, 5), eps)
    with pytest.warns(UserWarning, match="outside the range"):
        out = sk_bernoulli_large(inst, eps, gate_for(inst, eps))
    assert out is not None
    assert exact_overflow(inst.subset_dists(out), inst.capacity) <= inst.p + 4 * eps


def test_bucket_boundaries_go_low():
    eps = F(1, 10)
    part = bucket_partition([eps / 100, F(1, 2), 1 - eps / 100, F(1, 3), F(3, 4), 1 - eps / 200, 0], eps)
    assert part.b1 == (0, 6)
    assert part.b2 == (2, 5)
    assert part.b3 == (1, 3)
    assert part.b4 == (4,)


def test_b2_vector_starts_with_count():
    eps = F(1, 10)
    probs = [1 - eps / 200]
    sizes, caps = _bucket_vectors(1, probs, [0], eps, 1)
    assert sizes[0][0] == 1 and caps[0] == 1


def test_b3_b4_vectors_have_t0_power_sums():
    eps = F(1, 4)
    t0 = moment_count(eps)
    s3, c3 = _bucket_vectors(2, [F(1, 3)], [0], eps, 1)
    s4, c4 = _bucket_vectors(3, [F(2, 3)], [0], eps, 1)
    assert len(s3[0]) == len(c3) == t0
    assert len(s4[0]) == len(c4) == t0 + 1
    assert s3[0][1:] == s4[0][2:]  # 1/3 and 1 - 2/3 share power sums


def test_small_all_b1_zero():
    inst = bern_instance([0] * 3, [1, 1, 1], 0, 0, eps=F(1, 8))
    assert sk_bernoulli_small(inst, F(1, 8), gate_for(inst, F(1, 8))) == (0, 1, 2)


def test_small_eight_quarter_coins():
    eps = F(1, 5)
    inst = bern_instance([F(1, 4)] * 8, [1] * 8, F(7, 2), F(7, 20), eps)
    with pytest.warns(UserWarning):
        out = sk_bernoulli_small(inst, eps, gate_for(inst, eps))
    opt = brute_force_opt(inst)
    assert inst.subset_profit(out) >= opt.profit
    assert exact_overflow(inst.subset_dists(out), inst.capacity) <= inst.p + 4 * eps


def test_descending_combinations_order():
    lists = [[(5, "a"), (1, "b")], [(3, "c"), (2, "d"), (0, "e")]]
    got = list(descending_combinations(lists, 100))
    totals = [sum(lists[j][i][0] for j, i in enumerate(idx)) for idx in got]
    assert totals == sorted(totals, reverse=True)
    assert len(got) == 6


def test_solve_single_item():
    inst = bern_instance([F(1, 2)], [1], F(1, 2), F(3, 5))
    assert solve_bernoulli(inst).selected == (0,)


def test_solve_budget_one_takes_all():
    inst = bern_instance([F(1, 3), F(9, 10), F(1, 2)], [1, 2, 3], 0, 1)
    assert solve_bernoulli(inst).selected == (0, 1, 2)


def test_solve_large_capacity_takes_all():
    inst = bern_instance([F(1, 3), F(9, 10), F(1, 2)], [1, 2, 3], 5, 0)
    assert solve_bernoulli(inst).selected == (0, 1, 2)


def test_solve_rejects_non_bernoulli():
    inst = Instance((Item(Bernoulli(F(1, 2)), F(1)), Item(Gaussian(1.0, 1.0), F(1))), 1, F(1, 2))
    with pytest.raises(InstanceError, match="item 1"):
        solve_bernoulli(inst)


def test_solution_is_deterministic():
    inst = generate("bernoulli", 9, seed=3)
    a, b = solve_bernoulli(inst), solve_bernoulli(inst)
    assert a.to_json(include_time=False) == b.to_json(include_time=False)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_monte_carlo_gate_mode(seed):
    inst = generate("bernoulli", 8, seed=seed, epsilon=F(1, 5))
    sol = solve_bernoulli(inst, config=replace(SolverConfig(), gate_mode="mc"))
    assert sol.diagnostics["gate_mode"] == "mc"
    opt = brute_force_opt(inst)
    assert exact_overflow(inst.subset_dists(sol.selected), inst.capacity) <= inst.p + inst.epsilon
    assert sol.total_profit >= (opt.profit if opt else 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=50), min_size=1, max_size=10),
       st.sampled_from([F(1, 10), F(1, 5)]), st.integers(0, 6))
def test_rounding_moves_overflow_by_at_most_quarter_eps(ps, eps, cap):
    n = len(ps)
    N = grid_size(eps / (4 * n))
    qs = [F(round_to_grid(p, N), N) for p in ps]
    a = exact_overflow([Bernoulli(p) for p in ps], cap)
    b = exact_overflow([Bernoulli(q) for q in qs], cap)
    assert abs(a - b) <= eps / 4


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=1000), max_size=30), st.sampled_from([F(1, 10), F(1, 5)]))
def test_bucket_partition_covers_each_item_once(ps, eps):
    part = bucket_partition(ps, eps)
    assert sorted(i for b in part.buckets() for i in b) == list(range(len(ps)))


def test_matched_first_two_moments_are_close():
    # {1,5,6}/14 and {2,3,7}/14 share sum and sum of squares; pad with fair coins
    eps = 0.1
    pad = [0.5] * 420
    a = pbd_pmf([1 / 14, 5 / 14, 6 / 14] + pad)
    b = pbd_pmf([2 / 14, 3 / 14, 7 / 14] + pad)
    var = sum(p * (1 - p) for p in pad)
    assert var >= 1 / eps**2
    tv = tv_distance(float_pmf(range(len(a)), a), float_pmf(range(len(b)), b))
    assert tv <= 3 * eps

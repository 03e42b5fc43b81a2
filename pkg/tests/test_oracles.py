import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochknap.distributions import Bernoulli, Finite, Gaussian, Uniform, point_mass
from stochknap.errors import BudgetError, UnsupportedDistributionError
from stochknap.instance import Instance, Item
from stochknap.oracles import (
    OverflowEstimate,
    Pmf,
    brute_force_opt,
    cdf_distance,
    exact_overflow,
    exact_sum_pmf,
    hoeffding_samples,
    leq_check,
    levy_concentration,
    mc_overflow,
    pbd_pmf,
    poisson_pmf,
    translated_poisson_params,
    translated_poisson_pmf,
    tv_distance,
)

F = Fraction
H = Fraction(1, 2)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_hoeffding_sample_count():
    assert hoeffding_samples(0.01, 1e-6) == math.ceil(math.log(2e6) / (2 * 0.01**2))


def test_mc_overflow_empty_list_is_zero():
    est = mc_overflow([], 5, 0.01, 1e-6, rng())
    assert est.point_estimate == 0.0
    assert est.samples_used >= hoeffding_samples(0.01, 1e-6)


def test_mc_overflow_single_bernoulli():
    est = mc_overflow([Bernoulli(0.3)], 0.5, 0.01, 1e-6, rng(1))
    assert abs(est.point_estimate - 0.3) <= 0.01


def test_mc_overflow_three_fair_coins():
    est = mc_overflow([Bernoulli(H)] * 3, 2, 0.01, 1e-6, rng(2))
    assert abs(est.point_estimate - 1 / 8) <= 0.01


def test_overflow_estimate_json_keys():
    est = OverflowEstimate(0.25, 0.01, 0.99, 100)
    assert est.to_json() == {"estimate": 0.25, "half_width": 0.01, "confidence": 0.99, "samples": 100}


def test_leq_check_examples():
    assert leq_check([], 1, 0, 0.01, 1e-6, rng())
    assert leq_check([Bernoulli(H)] * 3, 2, 0.2, 0.01, 1e-6, rng(3))
    assert not leq_check([Bernoulli(H)] * 3, 1, 0.2, 0.01, 1e-6, rng(4))


def test_exact_sum_two_coins():
    assert exact_sum_pmf([Bernoulli(H)] * 2).as_dict() == {0: Fraction(1, 4), 1: H, 2: Fraction(1, 4)}


def test_exact_sum_empty():
    assert exact_sum_pmf([]).as_dict() == {0: 1}


def test_exact_sum_two_finite_laws():
    a = Finite((1, 2), (H, H))
    b = Finite((0, 10), (Fraction(9, 10), Fraction(1, 10)))
    expected = {1: Fraction(9, 20), 2: Fraction(9, 20), 11: Fraction(1, 20), 12: Fraction(1, 20)}
    assert exact_sum_pmf([a, b]).as_dict() == expected


def test_exact_sum_atom_cap():
    laws = [Finite((0, 10**i), (H, H)) for i in range(8)]
    with pytest.raises(BudgetError):
        exact_sum_pmf(laws, max_atoms=100)


def test_exact_sum_rejects_continuous():
    with pytest.raises(UnsupportedDistributionError):
        exact_sum_pmf([Gaussian(0.0, 1.0)])


def test_pmf_json_round_trip():
    pmf = exact_sum_pmf([Finite((Fraction(1, 3), 2), (Fraction(2, 7), Fraction(5, 7))), Bernoulli(H)])
    triples = pmf.to_json()
    assert all(len(t) == 3 for t in triples)
    assert Pmf.from_json(triples) == pmf


def test_distances_identical_is_zero():
    a = exact_sum_pmf([Bernoulli(Fraction(1, 3))] * 4)
    assert tv_distance(a, a) == 0
    assert cdf_distance(a, a) == 0


def test_distances_point_masses():
    a, b = Pmf((0,), (Fraction(1),)), Pmf((1,), (Fraction(1),))
    assert tv_distance(a, b) == 1
    assert cdf_distance(a, b) == 1


def test_tv_two_point_laws():
    a = Pmf((0, 1), (H, H))
    b = Pmf((0, 1), (Fraction(3, 5), Fraction(2, 5)))
    assert tv_distance(a, b) == Fraction(1, 10)


def test_translated_poisson_zero_shift_is_plain_poisson():
    assert translated_poisson_params(4, 4) == (0, 4)
    tp, poi = translated_poisson_pmf(4, 4), poisson_pmf(4)
    assert tp.values == poi.values and tp.probs == poi.probs


def test_translated_poisson_shift():
    assert translated_poisson_params(10, 4) == (6, 4)
    tp = translated_poisson_pmf(10, 4)
    assert min(tp.values) >= 6


def test_poisson_tiny_rate_is_mass_at_zero():
    pmf = poisson_pmf(1e-12)
    assert pmf.as_dict()[0] == pytest.approx(1.0)


def test_poisson_truncation_records_omitted_mass():
    pmf = poisson_pmf(30.0, tail_cut=1e-9)
    assert pmf.omitted_mass <= 1e-9
    assert sum(pmf.probs) + pmf.omitted_mass == pytest.approx(1.0, abs=1e-12)
    renorm = poisson_pmf(30.0, tail_cut=1e-9, renormalize=True)
    assert renorm.renormalized and sum(renorm.probs) == pytest.approx(1.0, abs=1e-12)


def test_levy_point_mass():
    assert levy_concentration([point_mass(3)], 0.1, 1000, rng()) == 1.0


def test_levy_uniform():
    assert levy_concentration([Uniform(0.0, 1.0)], 0.5, 200_000, rng(5)) == pytest.approx(0.5, abs=0.01)


def test_levy_standard_normal():
    # Phi(.5) - Phi(-.5)
    assert levy_concentration([Gaussian(0.0, 1.0)], 1.0, 200_000, rng(6)) == pytest.approx(0.3829, abs=0.01)


def _inst(items, cap, p):
    return Instance(tuple(Item(d, Fraction(v)) for d, v in items), cap, p)


def test_brute_force_two_coins():
    res = brute_force_opt(_inst([(Bernoulli(H), 1), (Bernoulli(H), 1)], Fraction(3, 2), Fraction(3, 10)))
    assert res.subset == (0, 1) and res.profit == 2 and res.overflow == Fraction(1, 4)


def test_brute_force_zero_budget():
    res = brute_force_opt(_inst([(Bernoulli(H), 5), (Bernoulli(Fraction(1, 3)), 7)], 0, 0))
    assert res.subset == () and res.profit == 0


def test_brute_force_full_budget_takes_all():
    res = brute_force_opt(_inst([(Bernoulli(H), 5), (point_mass(9), 7), (Bernoulli(H), 1)], 0, 1))
    assert res.subset == (0, 1, 2)


def test_brute_force_infeasible_and_cap():
    assert brute_force_opt(_inst([(Bernoulli(H), 1)], -1, 0)) is None
    with pytest.raises(BudgetError):
        brute_force_opt(_inst([(Bernoulli(H), 1)] * 3, 1, 0), cap=2)


def test_brute_force_lexicographic_ties():
    res = brute_force_opt(_inst([(point_mass(1), 1)] * 3, 1, 0))
    assert res.subset == (0,)


def test_brute_force_monte_carlo_path():
    inst = _inst([(Gaussian(1.0, 0.01), 3), (Gaussian(1.0, 0.01), 2), (Gaussian(5.0, 0.01), 10)], 2.5, 0.1)
    res = brute_force_opt(inst, tau=0.01, rng=rng(7))
    assert not res.exact and res.subset == (0, 1)


def test_mc_overflow_coverage():
    # Hoeffding intervals at delta = .01 should cover the exact value almost always
    items = [Bernoulli(Fraction(1, 4))] * 6 + [Finite((0, 2), (Fraction(2, 3), Fraction(1, 3)))]
    exact = float(exact_overflow(items, 3))
    hits = 0
    for seed in range(200):
        est = mc_overflow(items, 3, 0.05, 0.01, rng(seed))
        hits += abs(est.point_estimate - exact) <= est.half_width
    assert hits >= 195


probs_lists = st.lists(st.fractions(min_value=0, max_value=1, max_denominator=20), min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(probs_lists)
def test_poisson_bound_on_pbds(ps):
    total = sum(ps)
    if total == 0:
        return
    pmf = exact_sum_pmf([Bernoulli(p) for p in ps])
    tv = tv_distance(pmf, poisson_pmf(total))
    assert tv <= float(sum(p * p for p in ps) / total) + 1e-9


@settings(max_examples=60, deadline=None)
@given(probs_lists)
def test_float_pbd_agrees_with_exact(ps):
    exact = exact_sum_pmf([Bernoulli(p) for p in ps]).as_dict()
    fl = pbd_pmf(ps)
    for k, q in enumerate(fl):
        assert q == pytest.approx(float(exact.get(k, 0)), abs=1e-12)


def test_pte_pair_tv_frozen():
    # 6/343 from a separate enumeration of all 2^3 outcomes of each triple
    a = exact_sum_pmf([Bernoulli(F(x, 14)) for x in (1, 5, 6)])
    b = exact_sum_pmf([Bernoulli(F(x, 14)) for x in (2, 3, 7)])
    assert tv_distance(a, b) == F(6, 343)

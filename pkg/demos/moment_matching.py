"""Sums of Bernoullis whose probabilities share low power sums are close.

{1,5,8,12} and {2,3,10,11} agree in their first three power sums.  Mapping
them affinely into a narrow probability window keeps that property, and the
total variation distance between the two sums collapses as the window shrinks.
"""

from fractions import Fraction

from stochknap.distributions import Bernoulli
from stochknap.oracles import exact_sum_pmf, tv_distance

left, right = (1, 5, 8, 12), (2, 3, 10, 11)
for j in range(1, 5):
    print(f"power {j}: {sum(x**j for x in left)} vs {sum(x**j for x in right)}")

for width in (Fraction(1, 2), Fraction(1, 10), Fraction(1, 50), Fraction(1, 250)):
    prob = lambda t: Fraction(1, 4) + width * t / 12  # noqa: E731
    a = exact_sum_pmf([Bernoulli(prob(t)) for t in left])
    b = exact_sum_pmf([Bernoulli(prob(t)) for t in right])
    print(f"window {str(width):6s}: TV = {float(tv_distance(a, b)):.3e}")

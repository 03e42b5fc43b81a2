"""Item-size laws with exact moments, samplers, finite pmfs and kurtosis constants.

Finite laws (Bernoulli and explicit finite support) keep every parameter as an
exact ``Fraction`` so their moments and pmfs are exact.  The named continuous
families keep double-precision parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Any, ClassVar, Optional, Sequence, Union

import numpy as np
from scipy import stats

from .errors import InstanceError, UnsupportedDistributionError

Number = Union[Fraction, float]


def as_fraction(x: Any) -> Fraction:
    """Convert ints, strings ("3/7", "0.25"), Decimals and floats to a Fraction.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10`` and not
    the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not accepted as numbers")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(float(x)):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def fraction_str(x: Fraction) -> str:
    """Serialize a rational as "n/d", or as an integer string when d == 1."""
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _positive_float(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InstanceError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _finite_float(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise InstanceError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MomentSummary:
    """Mean, second and fourth central moments, and kurtosis mu4 / var**2.

    ``kurtosis`` is None for a point mass (var == 0).
    """

    mean: Number
    var: Number
    mu4: Number
    kurtosis: Optional[Number]


def _summary(mean, var, mu4) -> MomentSummary:
    kurt = None if var == 0 else mu4 / (var * var)
    return MomentSummary(mean, var, mu4, kurt)


def _central_from_raw(m1, m2, m3, m4):
    var = m2 - m1 * m1
    mu4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1**4
    return var, mu4


class SizeDistribution:
    """Base class of the item-size laws.

    Subclasses are frozen dataclasses; ``tag`` is the JSON type name.
    """

    tag: ClassVar[str] = ""
    finite: ClassVar[bool] = False

    def moments(self) -> MomentSummary:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def tail(self, x) -> Number:
        """Pr[X > x]; exact for finite laws."""
        raise NotImplementedError

    def exact_pmf(self) -> list[tuple[Fraction, Fraction]]:
        raise UnsupportedDistributionError(
            f"{self.tag} is a continuous or unbounded family; an exact pmf needs "
            "a Bernoulli or finite law"
        )

    def support(self) -> tuple[Fraction, ...]:
        """Support values of a finite law, including zero-probability atoms."""
        raise UnsupportedDistributionError(f"{self.tag} has no finite support")

    def lower_bound(self) -> float:
        return 0.0

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Bernoulli(SizeDistribution):
    p: Fraction

    tag: ClassVar[str] = "bernoulli"
    finite: ClassVar[bool] = True

    def __post_init__(self):
        p = as_fraction(self.p)
        if not 0 <= p <= 1:
            raise InstanceError(f"Bernoulli p must lie in [0,1], got {p}")
        object.__setattr__(self, "p", p)

    def moments(self):
        p = self.p
        var = p * (1 - p)
        return _summary(p, var, var * (1 - 3 * p + 3 * p * p))

    def sample(self, rng, size=None):
        u = rng.random(size)
        return (u < float(self.p)).astype(float) if size is not None else float(u < float(self.p))

    def tail(self, x):
        x = as_fraction(x)
        if x < 0:
            return Fraction(1)
        return self.p if x < 1 else Fraction(0)

    def exact_pmf(self):
        return [(v, q) for v, q in ((Fraction(0), 1 - self.p), (Fraction(1), self.p)) if q > 0]

    def support(self):
        return (Fraction(0), Fraction(1))

    def to_json(self):
        return {"type": self.tag, "p": fraction_str(self.p)}


@dataclass(frozen=True)
class Finite(SizeDistribution):
    """Law on finitely many rational atoms, stored sorted by value."""

    values: tuple
    probs: tuple

    tag: ClassVar[str] = "finite"
    finite: ClassVar[bool] = True

    def __post_init__(self):
        values = [as_fraction(v) for v in self.values]
        probs = [as_fraction(q) for q in self.probs]
        if not values or len(values) != len(probs):
            raise InstanceError("finite law needs matching, non-empty support and probs")
        if len(set(values)) != len(values):
            raise InstanceError("finite law support values must be distinct")
        if any(q < 0 or q > 1 for q in probs):
            raise InstanceError("finite law probabilities must lie in [0,1]")
        if sum(probs) != 1:
            raise InstanceError(f"finite law probabilities sum to {sum(probs)}, not 1")
        pairs = sorted(zip(values, probs))
        object.__setattr__(self, "values", tuple(v for v, _ in pairs))
        object.__setattr__(self, "probs", tuple(q for _, q in pairs))

    def moments(self):
        mean = sum(v * q for v, q in zip(self.values, self.probs))
        var = sum(q * (v - mean) ** 2 for v, q in zip(self.values, self.probs))
        mu4 = sum(q * (v - mean) ** 4 for v, q in zip(self.values, self.probs))
        return _summary(mean, var, mu4)

    def sample(self, rng, size=None):
        cum = np.cumsum([float(q) for q in self.probs])
        cum[-1] = 1.0
        vals = np.array([float(v) for v in self.values])
        idx = np.searchsorted(cum, rng.random(size), side="right")
        idx = np.minimum(idx, len(vals) - 1)
        return vals[idx] if size is not None else float(vals[idx])

    def tail(self, x):
        x = as_fraction(x)
        return sum((q for v, q in zip(self.values, self.probs) if v > x), Fraction(0))

    def exact_pmf(self):
        return [(v, q) for v, q in zip(self.values, self.probs) if q > 0]

    def support(self):
        return self.values

    def min_atom(self) -> Fraction:
        """Smallest positive atom probability."""
        return min(q for q in self.probs if q > 0)

    def lower_bound(self):
        return float(min(v for v, q in zip(self.values, self.probs) if q > 0))

    def to_json(self):
        return {
            "type": self.tag,
            "support": [fraction_str(v) for v in self.values],
            "probs": [fraction_str(q) for q in self.probs],
        }


def point_mass(value) -> Finite:
    return Finite((as_fraction(value),), (Fraction(1),))


@dataclass(frozen=True)
class Gaussian(SizeDistribution):
    mean: float
    var: float

    tag: ClassVar[str] = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "mean", _finite_float("mean", self.mean))
        object.__setattr__(self, "var", _positive_float("var", self.var))

    def moments(self):
        return _summary(self.mean, self.var, 3.0 * self.var**2)

    def sample(self, rng, size=None):
        return rng.normal(self.mean, math.sqrt(self.var), size)

    def tail(self, x):
        return float(stats.norm.sf(float(x), self.mean, math.sqrt(self.var)))

    def lower_bound(self):
        return -math.inf

    def to_json(self):
        return {"type": self.tag, "mean": self.mean, "var": self.var}


@dataclass(frozen=True)
class Poisson(SizeDistribution):
    lam: float

    tag: ClassVar[str] = "poisson"

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive_float("lambda", self.lam))

    def moments(self):
        lam = self.lam
        return _summary(lam, lam, lam + 3.0 * lam * lam)

    def sample(self, rng, size=None):
        draw = rng.poisson(self.lam, size)
        return draw.astype(float) if size is not None else float(draw)

    def tail(self, x):
        return float(stats.poisson.sf(math.floor(float(x)), self.lam))

    def to_json(self):
        return {"type": self.tag, "lambda": self.lam}


@dataclass(frozen=True)
class Exponential(SizeDistribution):
    rate: float

    tag: ClassVar[str] = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive_float("rate", self.rate))

    def moments(self):
        r = self.rate
        return _summary(1.0 / r, 1.0 / r**2, 9.0 / r**4)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def tail(self, x):
        return float(stats.expon.sf(float(x), scale=1.0 / self.rate))

    def to_json(self):
        return {"type": self.tag, "rate": self.rate}


@dataclass(frozen=True)
class Laplace(SizeDistribution):
    loc: float
    scale: float

    tag: ClassVar[str] = "laplace"

    def __post_init__(self):
        object.__setattr__(self, "loc", _finite_float("location", self.loc))
        object.__setattr__(self, "scale", _positive_float("scale", self.scale))

    def moments(self):
        b = self.scale
        return _summary(self.loc, 2.0 * b**2, 24.0 * b**4)

    def sample(self, rng, size=None):
        return rng.laplace(self.loc, self.scale, size)

    def tail(self, x):
        return float(stats.laplace.sf(float(x), self.loc, self.scale))

    def lower_bound(self):
        return -math.inf

    def to_json(self):
        return {"type": self.tag, "location": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class Uniform(SizeDistribution):
    a: float
    b: float

    tag: ClassVar[str] = "uniform"

    def __post_init__(self):
        a, b = _finite_float("a", self.a), _finite_float("b", self.b)
        if not a < b:
            raise InstanceError(f"uniform needs a < b, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def moments(self):
        w = self.b - self.a
        return _summary((self.a + self.b) / 2.0, w**2 / 12.0, w**4 / 80.0)

    def sample(self, rng, size=None):
        return rng.uniform(self.a, self.b, size)

    def tail(self, x):
        return float(stats.uniform.sf(float(x), self.a, self.b - self.a))

    def lower_bound(self):
        return self.a

    def to_json(self):
        return {"type": self.tag, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Beta(SizeDistribution):
    alpha: float
    beta: float

    tag: ClassVar[str] = "beta"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive_float("alpha", self.alpha))
        object.__setattr__(self, "beta", _positive_float("beta", self.beta))

    def moments(self):
        a, b = self.alpha, self.beta
        raw, m = [], 1.0
        for r in range(4):
            m *= (a + r) / (a + b + r)
            raw.append(m)
        var, mu4 = _central_from_raw(*raw)
        return _summary(raw[0], var, mu4)

    def sample(self, rng, size=None):
        return rng.beta(self.alpha, self.beta, size)

    def tail(self, x):
        return float(stats.beta.sf(float(x), self.alpha, self.beta))

    def to_json(self):
        return {"type": self.tag, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Gamma(SizeDistribution):
    shape: float
    scale: float

    tag: ClassVar[str] = "gamma"

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive_float("shape", self.shape))
        object.__setattr__(self, "scale", _positive_float("scale", self.scale))

    def moments(self):
        k, th = self.shape, self.scale
        return _summary(k * th, k * th**2, 3.0 * k * (k + 2.0) * th**4)

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, self.scale, size)

    def tail(self, x):
        return float(stats.gamma.sf(float(x), self.shape, scale=self.scale))

    def to_json(self):
        return {"type": self.tag, "shape": self.shape, "scale": self.scale}


@dataclass(frozen=True)
class MaxwellBoltzmann(SizeDistribution):
    scale: float

    tag: ClassVar[str] = "maxwell"

    def __post_init__(self):
        object.__setattr__(self, "scale", _positive_float("scale", self.scale))

    def moments(self):
        a = self.scale
        c = math.sqrt(2.0 / math.pi)
        raw = (2.0 * a * c, 3.0 * a**2, 8.0 * a**3 * c, 15.0 * a**4)
        var, mu4 = _central_from_raw(*raw)
        return _summary(raw[0], var, mu4)

    def sample(self, rng, size=None):
        return self.scale * np.sqrt(rng.chisquare(3, size))

    def tail(self, x):
        return float(stats.maxwell.sf(float(x), scale=self.scale))

    def to_json(self):
        return {"type": self.tag, "scale": self.scale}


FAMILIES = {
    cls.tag: cls
    for cls in (Bernoulli, Finite, Gaussian, Poisson, Exponential, Laplace, Uniform, Beta, Gamma, MaxwellBoltzmann)
}


def distribution_from_json(obj: dict) -> SizeDistribution:
    """Parse the JSON encoding used in instance files."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise InstanceError(f"distribution must be an object with a 'type' field, got {obj!r}")
    kind = str(obj["type"]).lower()
    try:
        if kind == "bernoulli":
            return Bernoulli(as_fraction(obj["p"]))
        if kind == "finite":
            return Finite(tuple(obj["support"]), tuple(obj["probs"]))
        if kind in ("point", "deterministic"):
            return point_mass(obj["value"])
        if kind == "gaussian":
            return Gaussian(obj["mean"], obj["var"])
        if kind == "poisson":
            return Poisson(obj["lambda"])
        if kind == "exponential":
            return Exponential(obj["rate"])
        if kind == "laplace":
            return Laplace(obj.get("location", 0.0), obj["scale"])
        if kind == "uniform":
            return Uniform(obj["a"], obj["b"])
        if kind == "beta":
            return Beta(obj["alpha"], obj["beta"])
        if kind == "gamma":
            return Gamma(obj["shape"], obj.get("scale", 1.0))
        if kind in ("maxwell", "maxwell_boltzmann"):
            return MaxwellBoltzmann(obj.get("scale", 1.0))
    except KeyError as exc:
        raise InstanceError(f"{kind} distribution is missing field {exc}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"bad {kind} parameters: {exc}") from None
    raise InstanceError(f"unknown distribution type {obj['type']!r}")


def moments(dist: SizeDistribution) -> MomentSummary:
    return dist.moments()


def sample(dist: SizeDistribution, rng: np.random.Generator) -> float:
    """One draw from ``dist``."""
    return float(dist.sample(rng))


def exact_pmf(dist: SizeDistribution) -> list[tuple[Fraction, Fraction]]:
    """Exact (value, probability) pairs of a Bernoulli or finite law."""
    return dist.exact_pmf()


def reference_kurtosis(dist: SizeDistribution) -> Optional[float]:
    """Closed-form kurtosis of the named families, written independently of
    ``moments`` so the two can be cross-checked.  None for finite laws."""
    if isinstance(dist, Gaussian):
        return 3.0
    if isinstance(dist, Poisson):
        return 3.0 + 1.0 / dist.lam
    if isinstance(dist, Exponential):
        return 9.0
    if isinstance(dist, Laplace):
        return 6.0
    if isinstance(dist, Uniform):
        return 9.0 / 5.0
    if isinstance(dist, Beta):
        a, b = dist.alpha, dist.beta
        num = (a - b) ** 2 * (a + b + 1) - a * b * (a + b + 2)
        return 3.0 + 6.0 * num / (a * b * (a + b + 2) * (a + b + 3))
    if isinstance(dist, Gamma):
        return 3.0 + 6.0 / dist.shape
    if isinstance(dist, MaxwellBoltzmann):
        pi = math.pi
        return 3.0 + 4.0 * (40 * pi - 96 - 3 * pi**2) / (3 * pi - 8) ** 2
    return None


def max_kurtosis(dists: Sequence[SizeDistribution], skip_degenerate: bool = False) -> Optional[Number]:
    """Largest kurtosis over ``dists`` (the smallest valid c**4).

    Zero-variance items raise unless ``skip_degenerate``; they satisfy the
    fourth-moment inequality for every c.  Returns None when nothing is left.
    """
    best = None
    for i, d in enumerate(dists):
        k = d.moments().kurtosis
        if k is None:
            if skip_degenerate:
                continue
            raise InstanceError(f"item {i} ({d.tag}) has zero variance; its kurtosis is undefined")
        if best is None or k > best:
            best = k
    return best


def hyper_constant(dists: Sequence[SizeDistribution]) -> float:
    """The smallest c with mu4 <= c**4 * var**2 for every item."""
    k = max_kurtosis(dists)
    if k is None:
        raise InstanceError("hyper_constant needs at least one item")
    return float(k) ** 0.25

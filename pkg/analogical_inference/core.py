"""Generalized means, analogies in powers, analogical equations and q-distances.

A quadruple of positive reals is an analogy in power ``p`` when
``a**p + d**p == b**p + c**p`` (``a*d == b*c`` for ``p == 0``), i.e. when the
``p``-generalized means of the extremes and of the means coincide. Vectors
are compared componentwise, one exponent per attribute.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConvergenceError, DomainError, UsageError

logger = logging.getLogger(__name__)

# float64 powers overflow or go subnormal past a binary exponent of about 1021
POWER_EXPONENT_LIMIT = 1000

ArrayLike = Union[float, Sequence[float], np.ndarray]


class DistanceMode(str, Enum):
    UNIFORM = "uniform"
    EXPECTED = "expected"


@dataclass(frozen=True)
class PowerProfile:
    """Attribute exponents ``p`` (one per coordinate) and the label exponent ``q``."""

    p: Tuple[float, ...]
    q: float = 1.0

    def __post_init__(self):
        p = tuple(float(v) for v in np.atleast_1d(np.asarray(self.p, dtype=float)))
        if not p:
            raise UsageError("a power profile needs at least one attribute exponent")
        if not all(math.isfinite(v) for v in p):
            raise UsageError(f"attribute exponents must be finite, got {p}")
        q = float(self.q)
        if not (math.isfinite(q) and q > 0):
            raise UsageError(f"the label exponent q must be a positive real, got {self.q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def uniform(cls, n: int, p: float = 1.0, q: float = 1.0) -> "PowerProfile":
        return cls(tuple([p] * n), q)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def exponents(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def require_positive(self):
        """Raises DomainError unless every attribute exponent is strictly positive."""
        if any(v <= 0 for v in self.p):
            raise DomainError(f"regression requires strictly positive exponents, got p={self.p}")


@dataclass(frozen=True)
class Tolerance:
    """Mixed tolerance: a residual passes when it is at most ``abs + rel * scale``."""

    rel: float = 1e-9
    abs: float = 1e-12

    def __post_init__(self):
        if not (self.rel >= 0 and self.abs >= 0):
            raise UsageError(f"tolerances must be nonnegative, got rel={self.rel} abs={self.abs}")
        if self.rel == 0 and self.abs == 0:
            raise UsageError("relative and absolute tolerance cannot both be zero")

    def bound(self, scale):
        return self.abs + self.rel * scale

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(rel=self.rel * factor, abs=self.abs * factor)


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """A probability measure on finitely many points of the positive orthant."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        weights = np.array(self.weights, dtype=float).ravel()
        if len(weights) != len(points):
            raise UsageError(f"{len(weights)} weights given for {len(points)} points")
        if len(weights) == 0:
            raise UsageError("a measure needs at least one point")
        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            raise DomainError("measure weights must be finite and nonnegative")
        total = math.fsum(weights)
        if not math.isclose(total, 1.0, rel_tol=1e-12):
            raise DomainError(f"measure weights must sum to 1, got {total!r}")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points) -> "FiniteMeasure":
        """The normalized counting measure on ``points``."""
        points = np.asarray(points, dtype=float)
        return cls(points, np.full(len(points), 1.0 / len(points)))

    def __len__(self):
        return len(self.weights)

    def expectation(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise UsageError(f"expected {len(self.weights)} values, got {values.shape}")
        return float(np.dot(self.weights, values))


def as_vector(x: ArrayLike, n: Optional[int] = None, name: str = "vector") -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and len(v) != n:
        raise UsageError(f"{name} has dimension {len(v)}, expected {n}")
    return v


def check_domain(values: np.ndarray, exponents: np.ndarray, what: str = "value"):
    """Rejects negative or NaN entries, and zeros under a nonpositive exponent.

    ``values`` has shape ``(..., n)`` and ``exponents`` shape ``(n,)``.
    """
    values = np.asarray(values, dtype=float)
    if np.any(np.isnan(values)):
        raise DomainError(f"{what} contains NaN")
    if np.any(values < 0):
        raise DomainError(f"{what} must be nonnegative, got {values[values < 0][0]}")
    zero_bad = (values == 0) & (np.asarray(exponents) <= 0)
    if np.any(zero_bad):
        raise DomainError(f"{what} has a zero coordinate under a nonpositive exponent")


def generalized_mean(values: ArrayLike, p: float) -> float:
    """Generalized (power) mean ``((1/n) sum x_i**p) ** (1/p)``.

    ``p = 0`` gives the geometric mean, ``p = +inf`` the maximum and
    ``p = -inf`` the minimum. Zero values are accepted only for ``p > 0``.
    """
    x = np.asarray(values, dtype=float).ravel()
    p = float(p)
    if x.size == 0:
        raise DomainError("generalized mean of an empty list")
    if math.isnan(p):
        raise UsageError("the mean exponent must not be NaN")
    if np.any(np.isnan(x)) or np.any(x < 0) or np.any(np.isinf(x)):
        raise DomainError(f"generalized mean needs finite nonnegative values, got {x}")
    if np.any(x == 0) and not p > 0:
        raise DomainError(f"zero values are only allowed for a positive exponent, got p={p}")
    if p == math.inf:
        return float(x.max())
    if p == -math.inf:
        return float(x.min())
    if np.all(x == x[0]):
        return float(x[0])
    if p == 0:
        return float(np.exp(np.mean(np.log(x))))
    if p == 1:
        return float(np.mean(x))
    # shift by the extreme value so that every exponentiated term is <= 1
    ref = x.max() if p > 0 else x.min()
    with np.errstate(divide="ignore"):
        shifted = p * (np.log(x) - np.log(ref))
    return float(ref * np.exp(np.log1p(np.mean(np.expm1(shifted))) / p))


def analogy_mask(a, b, c, d, exponents, tol: Tolerance = Tolerance()) -> np.ndarray:
    """Componentwise analogy test with broadcasting.

    All four arrays broadcast against each other with the attribute axis
    last; returns a boolean array of the broadcast shape without the last
    axis. Inputs are assumed domain-checked.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    p = np.asarray(exponents, dtype=float)
    geometric = p == 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ref = np.where(p > 0, np.maximum(np.maximum(a, b), np.maximum(c, d)),
                       np.minimum(np.minimum(a, b), np.minimum(c, d)))
        ref = np.where((ref == 0) | geometric, 1.0, ref)
        safe_p = np.where(geometric, 1.0, p)
        pa, pb, pc, pd = ((v / ref) ** safe_p for v in (a, b, c, d))
        residual = np.abs(pa + pd - pb - pc)
        scale = np.maximum(np.maximum(pa, pb), np.maximum(pc, pd))
        ok = residual <= tol.abs / ref ** safe_p + tol.rel * scale

        geo_residual = np.abs(a * d - b * c)
        geo_ok = geo_residual <= tol.bound(np.maximum(a * d, b * c))
    return np.all(np.where(geometric, geo_ok, ok), axis=-1)


def analogy_holds(a: ArrayLike, b: ArrayLike, c: ArrayLike, d: ArrayLike,
                  profile: PowerProfile, tol: Tolerance = Tolerance()) -> bool:
    """True iff ``a : b :: c : d`` holds componentwise in the powers ``profile.p``."""
    n = profile.n
    vectors = np.stack([as_vector(v, n, name) for v, name in zip((a, b, c, d), "abcd")])
    check_domain(vectors, profile.exponents, "analogy term")
    return bool(analogy_mask(*vectors, profile.exponents, tol))


def _power_scale(value: float, q: float) -> int:
    """Binary exponent to divide out before raising ``value`` to ``q``; 0 while the power stays in range."""
    _, exponent = math.frexp(value)
    return exponent if abs(exponent) * q > POWER_EXPONENT_LIMIT else 0


def sol(a: float, b: float, c: float, q: float, tol: Tolerance = Tolerance()) -> Optional[float]:
    """Solves ``a : b ::^q c : y`` for ``y``.

    Returns None when ``a**q > b**q + c**q`` beyond tolerance. A radicand
    within tolerance of zero is clamped to zero. Terms whose q-th powers
    would leave the float range are first scaled by a power of two, and the
    tolerance then applies to the scaled powers.

    Raises:
        DomainError: a negative or NaN term, or a solution too large for a float.
    """
    if not q > 0:
        raise UsageError(f"q must be positive, got {q}")
    if min(a, b, c) < 0 or any(math.isnan(v) for v in (a, b, c)):
        raise DomainError(f"analogical equation terms must be nonnegative, got {(a, b, c)}")
    if a == b:
        return float(c)
    if a == c:
        return float(b)
    exponent = _power_scale(max(a, b, c), q)
    aq, bq, cq = (math.ldexp(v, -exponent) ** q for v in (a, b, c))
    radicand = bq + cq - aq
    if radicand < 0:
        if -radicand > tol.bound(max(aq, bq, cq)):
            return None
        return 0.0
    try:
        return math.ldexp(radicand ** (1.0 / q), exponent)
    except OverflowError:
        raise DomainError(f"solution of {(a, b, c)} at q={q} exceeds the float range")


def solve_power(a: float, b: float, c: float, d: float,
                max_exponent: int = 60, steps: int = 200) -> float:
    """Finds the analogical power of an increasing quadruple ``0 < a < b <= c < d``.

    Bisects ``phi(p) = m_p(a, d) - m_p(b, c)`` on the first bracket
    ``[-2**k, 2**k]`` (``k <= max_exponent``) showing a sign change.

    Raises:
        DomainError: the quadruple is not increasing.
        ConvergenceError: no bracket was found.
    """
    if not 0 < a < b <= c < d:
        raise DomainError(f"solve_power needs 0 < a < b <= c < d, got {(a, b, c, d)}")

    def phi(p):
        return generalized_mean([a, d], p) - generalized_mean([b, c], p)

    for k in range(max_exponent + 1):
        lo, hi = -2.0 ** k, 2.0 ** k
        phi_lo, phi_hi = phi(lo), phi(hi)
        if phi_lo <= 0 <= phi_hi:
            break
    else:
        raise ConvergenceError("no sign change of m_p(a,d) - m_p(b,c)", (lo, hi))
    if phi_lo == 0:
        return lo
    if phi_hi == 0:
        return hi

    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        phi_mid = phi(mid)
        if phi_mid == 0:
            return mid
        if phi_mid < 0:
            lo = mid
        else:
            hi = mid
    logger.debug(f"solve_power{(a, b, c, d)} bracketed in [{lo}, {hi}]")
    return 0.5 * (lo + hi)


def q_distance(x: float, y: float, q: float) -> float:
    """The q-semidistance ``|x**q - y**q| ** (1/q)``."""
    if not q > 0:
        raise UsageError(f"q must be positive, got {q}")
    if x < 0 or y < 0:
        raise DomainError(f"q-distance is defined on nonnegative reals, got {(x, y)}")
    if x == y:
        return 0.0
    exponent = _power_scale(max(x, y), q)
    gap = abs(math.ldexp(x, -exponent) ** q - math.ldexp(y, -exponent) ** q)
    return math.ldexp(gap ** (1.0 / q), exponent)


def functional_distance(f_values: ArrayLike, g_values: ArrayLike, q: float,
                        mode: Union[DistanceMode, str] = DistanceMode.UNIFORM,
                        measure: Optional[FiniteMeasure] = None) -> float:
    """Uniform or expected q-distance between two labelings of the same points.

    Args:
        f_values: labels of the first function.
        g_values: labels of the second function, same order.
        q: label exponent.
        mode: ``uniform`` takes the maximum pointwise gap, ``expected``
            integrates the gap against ``measure``.
        measure: weights over the points; uniform when omitted.

    Returns:
        ``(max |f^q - g^q|) ** (1/q)`` or ``(sum w |f^q - g^q|) ** (1/q)``.
    """
    if not q > 0:
        raise UsageError(f"q must be positive, got {q}")
    f = np.asarray(f_values, dtype=float).ravel()
    g = np.asarray(g_values, dtype=float).ravel()
    if len(f) != len(g) or (measure is not None and len(measure) != len(f)):
        raise UsageError(
            f"length mismatch: {len(f)} and {len(g)} labels"
            + (f" over a measure of {len(measure)} points" if measure is not None else "")
        )
    if len(f) == 0:
        raise UsageError("functional distance over an empty domain")
    if np.any(f < 0) or np.any(g < 0):
        raise DomainError("labels must be nonnegative")
    gaps = np.abs(f ** q - g ** q)
    mode = DistanceMode(mode)
    if mode is DistanceMode.UNIFORM:
        return float(gaps.max() ** (1.0 / q))
    return q_expected_value(gaps ** (1.0 / q), q, measure)


def q_expected_value(values: ArrayLike, q: float, measure: Optional[FiniteMeasure] = None) -> float:
    """The q-expected value ``(sum w v**q) ** (1/q)`` of a nonnegative function.

    ``measure`` weighs the values; it defaults to the normalized counting measure.
    """
    if not q > 0:
        raise UsageError(f"q must be positive, got {q}")
    v = np.asarray(values, dtype=float).ravel()
    if len(v) == 0:
        raise UsageError("q-expected value over an empty domain")
    if np.any(np.isnan(v)) or np.any(v < 0):
        raise DomainError("q-expected value needs nonnegative values")
    if measure is not None and len(measure) != len(v):
        raise UsageError(f"{len(v)} values for a measure of {len(measure)} points")
    weights = measure.weights if measure is not None else np.full(len(v), 1.0 / len(v))
    return float(max(np.dot(weights, v ** q), 0.0) ** (1.0 / q))

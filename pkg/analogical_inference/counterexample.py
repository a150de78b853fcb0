"""Exhaustive lower bound showing the classical 4*eps error bound fails.

The function is the indicator of the all-ones point. It is at distance
``1/2**n`` from the affine class, yet any sample that avoids the all-ones
point but contains an analogy-forming triple for it predicts label 0 there
and errs. Counting those samples bounds the probability of a nonzero error
from below.
"""
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, partial
from numbers import Rational
from typing import Optional, Tuple, Union

from .boolean import BooleanModel, BooleanTable, affine_distance, analogy_triples
from .errors import ResourceError, UsageError
from .parallel import map_ranges

logger = logging.getLogger(__name__)

MAX_ARITY = 4


def indicator_f(n: int) -> BooleanTable:
    """The function that is 1 at the all-ones point and 0 elsewhere."""
    if n < 1:
        raise UsageError(f"arity must be >= 1, got {n}")
    size = 1 << n
    return BooleanTable(n, tuple([0] * (size - 1) + [1]))


def theorem3_rhs(epsilon: Union[Rational, float], delta: Union[Rational, float]) -> Fraction:
    """The claimed upper bound ``4 * epsilon * (1 - delta)`` as an exact rational."""
    if not 0 <= epsilon <= Fraction(1, 2):
        raise UsageError(f"epsilon must lie in [0, 1/2], got {epsilon}")
    if not 0 <= delta <= 1:
        raise UsageError(f"delta must lie in [0, 1], got {delta}")
    return 4 * Fraction(epsilon) * (1 - Fraction(delta))


@lru_cache(maxsize=None)
def forming_triples(n: int, model: BooleanModel) -> Tuple[Tuple[int, int, int], ...]:
    """Triples of points other than all-ones that form an analogy with all-ones, in lexicographic order."""
    top = (1 << n) - 1
    rows = analogy_triples(n, BooleanModel(model))[top]
    return tuple(tuple(row) for row in rows.tolist() if top not in row)


@lru_cache(maxsize=None)
def _triple_masks(n: int, model: BooleanModel) -> Tuple[int, ...]:
    return tuple((1 << a) | (1 << b) | (1 << c) for a, b, c in forming_triples(n, model))


def is_counted(subset: int, n: int, model: BooleanModel = BooleanModel.MINIMAL) -> bool:
    """Whether a sample (bitset over points other than all-ones) has at least 3 points and a forming triple."""
    if bin(subset).count("1") < 3:
        return False
    return any(subset & mask == mask for mask in _triple_masks(n, BooleanModel(model)))


def _count_range(bounds: Tuple[int, int], n: int, model: BooleanModel, audit: bool) -> Tuple[int, int]:
    masks = _triple_masks(n, model)
    counted = small_forming = 0
    for subset in range(*bounds):
        if bin(subset).count("1") < 3:
            if audit and any(subset & mask == mask for mask in masks):
                small_forming += 1
            continue
        for mask in masks:
            if subset & mask == mask:
                counted += 1
                break
    return counted, small_forming


@dataclass
class FalsificationReport:
    n: int
    model: BooleanModel
    subset_count: int
    denominator: int
    lower_bound: Fraction
    epsilon: Fraction
    theorem3_rhs: Fraction
    violated: bool
    wall_time: float
    # samples with fewer than 3 points that form a triple; None unless audited
    small_subset_roots: Optional[int] = None


def algorithm1_lower_bound(n: int, model: BooleanModel = BooleanModel.MINIMAL,
                           workers: Optional[int] = None, audit: bool = False,
                           progress: bool = False) -> FalsificationReport:
    """Counts the samples avoiding all-ones that contain a triple forming an analogy with it.

    Samples are enumerated as bitsets over the ``2**n - 1`` other points;
    those with at least three points are counted when some triple forms an
    analogy with all-ones, scanning the triples in lexicographic order and
    stopping at the first hit. The count is divided by ``2**(2**n)``, the
    number of all samples.

    Args:
        n: arity, at most 4.
        model: Boolean analogy model.
        workers: process count for the subset ranges.
        audit: also scan samples with fewer than 3 points.
        progress: show a progress bar.
    """
    model = BooleanModel(model)
    if n < 1:
        raise UsageError(f"arity must be >= 1, got {n}")
    if n > MAX_ARITY:
        raise ResourceError(f"enumerating 2^{(1 << n) - 1} samples is out of reach; arity is capped at {MAX_ARITY}")
    start = time.time()
    total = 1 << ((1 << n) - 1)
    parts = map_ranges(partial(_count_range, n=n, model=model, audit=audit), total,
                       workers=workers, desc=f"samples n={n}", progress=progress)
    count = sum(c for c, _ in parts)
    small = sum(s for _, s in parts)
    denominator = 1 << (1 << n)
    lower_bound = Fraction(count, denominator)
    epsilon, _ = affine_distance(indicator_f(n))
    rhs = theorem3_rhs(epsilon, 0)
    wall_time = time.time() - start
    logger.info(f"counted {count} of {total} samples (n={n}, model={model.value}) in {wall_time:.2f}s; "
                f"lower bound {float(lower_bound):.4f} vs claimed {float(rhs):.4f}")
    if audit and small:
        logger.warning(f"{small} samples with fewer than 3 points form an analogy with all-ones")
    return FalsificationReport(
        n=n,
        model=model,
        subset_count=count,
        denominator=denominator,
        lower_bound=lower_bound,
        epsilon=epsilon,
        theorem3_rhs=rhs,
        violated=lower_bound > rhs,
        wall_time=wall_time,
        small_subset_roots=small if audit else None,
    )

"""Executable checks of the analogical regression error bounds.

Ground truth is an AP model ``g``; labels ``f`` are obtained by perturbing
``g**q`` by at most ``delta**q`` (pointwise or on average) and the observed
inference error is compared with ``4**(1/q) * delta``. Next to that stated
bound every report carries the triangle-inequality bound built from the
actual perturbation at the selected triples, which holds unconditionally.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from .boolean import (
    BooleanModel,
    BooleanSample,
    BooleanSelectionMap,
    BooleanTable,
    build_boolean_selection,
)
from .core import (
    DistanceMode,
    FiniteMeasure,
    PowerProfile,
    Tolerance,
    functional_distance,
    q_distance,
    sol,
)
from .errors import (
    BoundViolation,
    ConstructionError,
    CoverageError,
    PreconditionError,
    UsageError,
)
from .regression import (
    APModel,
    LabeledDataset,
    SelectionMap,
    analogical_value,
    ap_eval,
    build_selection_map,
    points_of,
    selected_values,
)

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

# relative slack on a stated bound, plus an absolute floor relative to the label scale
BOUND_REL_TOL = 1e-9
NOISE_REL_TOL = 1e-12


class PerturbationShape(str, Enum):
    POINTWISE = "pointwise-bounded"
    CONCENTRATED = "concentrated"
    CONSTANT = "constant"


class Suite(str, Enum):
    WORST = "worst"
    AVERAGE = "average"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class PerturbationSpec:
    delta: float
    mode: DistanceMode = DistanceMode.UNIFORM
    seed: int = 0
    shape: PerturbationShape = PerturbationShape.POINTWISE

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise UsageError(f"delta must be a finite nonnegative number, got {self.delta}")
        object.__setattr__(self, "mode", DistanceMode(self.mode))
        object.__setattr__(self, "shape", PerturbationShape(self.shape))


@dataclass(frozen=True, eq=False)
class Perturbation:
    labels: np.ndarray
    base: np.ndarray
    achieved: float
    spec: PerturbationSpec


@dataclass
class BoundReport:
    bound_kind: str
    q: float
    delta: Number
    achieved_delta: Number
    constant: float
    bound_value: Number
    observed: Number
    holds: bool
    adjusted_bound: Number
    adjusted_holds: bool
    hypothesis_holds: bool
    trials: int
    checked: int
    seed: Optional[int] = None
    # (1/m) sum over selected positions of the expected label gap; None for the worst case
    selection_gap: Optional[Number] = None
    # per-position form of the independence hypothesis (relaxed or exact)
    position_hypothesis: Optional[bool] = None

    @property
    def ratio(self) -> Optional[float]:
        """Observed error over the bound; None when the bound is 0 and the error is not."""
        if self.bound_value == 0:
            return 0.0 if self.observed == 0 else None
        return float(self.observed) / float(self.bound_value)

    @property
    def verified(self) -> bool:
        """The unconditional bound holds, and so does the stated one whenever its hypothesis does."""
        return self.adjusted_holds and (self.holds or not self.hypothesis_holds)

    def raise_if_violated(self):
        if not self.verified:
            raise BoundViolation(
                f"{self.bound_kind} bound violated: observed {float(self.observed):.6g} "
                f"vs bound {float(self.bound_value):.6g} (adjusted {float(self.adjusted_bound):.6g})",
                self,
            )


def power_grid(profile: PowerProfile, levels: Sequence[int]) -> np.ndarray:
    """Grid points whose powered coordinates ``x_j**p_j`` run over ``levels``."""
    profile.require_positive()
    axes = [np.asarray(levels, dtype=float) ** (1.0 / p) for p in profile.p]
    return np.array(list(itertools.product(*axes)), dtype=float)


def standard_model(profile: PowerProfile, seed: int = 0) -> APModel:
    """A random AP model with coefficients in [0.5, 2] and intercept in [1, 2]."""
    rng = np.random.default_rng(seed)
    return APModel(tuple(rng.uniform(0.5, 2.0, profile.n)), float(rng.uniform(1.0, 2.0)), profile)


def _measure_of(domain, points: np.ndarray) -> FiniteMeasure:
    return domain.measure if isinstance(domain, LabeledDataset) else FiniteMeasure.uniform(points)


def perturb_ap(model: APModel, domain, spec: PerturbationSpec,
               support: Optional[np.ndarray] = None) -> Perturbation:
    """Labels ``f`` with ``|f**q - g**q|`` controlled by ``spec.delta**q``.

    ``pointwise-bounded`` draws every gap uniformly from ``[-delta**q, delta**q]``,
    ``constant`` uses ``+-delta**q`` everywhere and ``concentrated`` puts the
    whole budget on one seeded point (divided by its weight in expected
    mode). ``support`` restricts the perturbed points.

    Raises:
        ConstructionError: a label would become negative or the support is empty.
    """
    points = points_of(domain)
    measure = _measure_of(domain, points)
    q = model.profile.q
    g = ap_eval(model, points)
    support = np.ones(len(points), dtype=bool) if support is None else np.asarray(support, dtype=bool)
    if support.shape != (len(points),) or not support.any():
        raise ConstructionError("perturbation support must select at least one domain point")
    rng = np.random.default_rng(spec.seed)
    budget = spec.delta ** q
    gaps = np.zeros(len(points))
    where = np.flatnonzero(support)
    if spec.shape is PerturbationShape.CONSTANT:
        gaps[where] = budget * rng.choice([-1.0, 1.0], size=len(where))
    elif spec.shape is PerturbationShape.POINTWISE:
        gaps[where] = budget * rng.uniform(-1.0, 1.0, size=len(where))
    else:
        where = where[measure.weights[where] > 0]
        if len(where) == 0:
            raise ConstructionError("concentrated perturbation needs a support point of positive weight")
        k = where[rng.integers(len(where))]
        gaps[k] = budget if spec.mode is DistanceMode.UNIFORM else budget / measure.weights[k]
    powered = g ** q + gaps
    if np.any(powered < 0):
        k = int(np.argmin(powered))
        raise ConstructionError(f"delta={spec.delta} pushes the label at {tuple(points[k])} below 0")
    labels = np.where(gaps == 0, g, powered ** (1.0 / q))
    achieved = functional_distance(labels, g, q, spec.mode, measure)
    logger.debug(f"perturbation {spec.shape.value}/{spec.mode.value} delta={spec.delta}: achieved {achieved:.6g}")
    return Perturbation(labels, g, achieved, spec)


def _check_distance(measured: float, delta: float, what: str):
    if measured > delta * (1 + BOUND_REL_TOL) + NOISE_REL_TOL:
        raise PreconditionError(f"{what} distance {measured:.12g} exceeds delta={delta}")


def _within(observed_q: float, bound_q: float, scale: float) -> bool:
    return observed_q <= bound_q * (1 + BOUND_REL_TOL) + NOISE_REL_TOL * max(scale, 1.0)


def _snap(observed: float, q: float, scale: float) -> float:
    """``observed``, or 0 when its q-th power is within the noise tolerance of zero."""
    observed = float(observed)
    return 0.0 if np.float64(observed) ** q <= NOISE_REL_TOL * max(scale, 1.0) else observed


def _find_point(points: np.ndarray, x: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(np.all(np.isclose(points, x, rtol=1e-9, atol=1e-12), axis=1))
    return int(hits[0]) if len(hits) else None


def verify_worst_case(labels, model: APModel, domain, delta: float, trials: int = 200,
                      seed: int = 0, tol: Tolerance = Tolerance(), progress: bool = False) -> BoundReport:
    """Checks the pointwise bound on single analogies and on analogical values.

    For each trial a triple ``a, b, c`` is drawn from the domain and ``d`` is
    solved coordinatewise; when ``d`` lies in the domain and the label
    equation is solvable, the solution is compared with ``f(d)``. Each
    trial also draws a random sample and query and compares the analogical
    value with ``f(x)``. All errors must stay within ``4**(1/q) * delta``.

    Raises:
        PreconditionError: the labels are farther than ``delta`` from the model.
    """
    points = points_of(domain)
    profile = model.profile
    q = profile.q
    labels = np.asarray(labels, dtype=float)
    g = ap_eval(model, points)
    achieved = functional_distance(labels, g, q, DistanceMode.UNIFORM)
    _check_distance(achieved, delta, "uniform")
    dataset = LabeledDataset(points, labels)
    n_points = len(points)

    errors = []
    for t in tqdm(range(trials), desc="worst-case trials", disable=not progress):
        rng = np.random.default_rng([seed, 0, t])
        a, b, c = rng.integers(n_points, size=3)
        d = [sol(points[a, j], points[b, j], points[c, j], profile.p[j], tol) for j in range(profile.n)]
        if all(v is not None for v in d):
            k = _find_point(points, np.asarray(d))
            if k is not None:
                y = sol(labels[a], labels[b], labels[c], q, tol)
                if y is not None:
                    errors.append(q_distance(labels[k], y, q))

        rng = np.random.default_rng([seed, 1, t])
        members = np.flatnonzero(rng.random(n_points) < 0.5)
        if len(members) == 0:
            members = rng.integers(n_points, size=1)
        x = int(rng.integers(n_points))
        value = analogical_value(dataset.subset(members), points[x], profile, tol)
        if value is not None:
            errors.append(q_distance(labels[x], value, q))

    scale = float(np.max(labels ** q))
    observed = _snap(max(errors, default=0.0), q, scale)
    constant = 4.0 ** (1.0 / q)
    bound = constant * delta
    holds = _within(observed ** q, bound ** q, scale)
    logger.info(f"worst case q={q} delta={delta}: max error {observed:.6g} over {len(errors)} checks, "
                f"bound {bound:.6g}, holds={holds}")
    return BoundReport(
        bound_kind=Suite.WORST.value, q=q, delta=delta, achieved_delta=achieved, constant=constant,
        bound_value=bound, observed=observed, holds=holds, adjusted_bound=bound, adjusted_holds=holds,
        hypothesis_holds=True, trials=trials, checked=len(errors), seed=seed,
    )


def verify_average_case(labels, model: APModel, sample_indices: Sequence[int], selection: SelectionMap,
                        domain, delta: float, relaxed: bool = False,
                        tol: Tolerance = Tolerance()) -> BoundReport:
    """Checks the expected bound for predictions made from a selection map.

    ``sample_indices`` picks the sample out of the domain and the selection
    rows index into that sample. The independence hypothesis is checked in
    its averaged form (the selected positions carry at most three times the
    expected gap); ``relaxed`` only changes the per-position form reported
    next to it (``<=`` instead of ``==``).

    Raises:
        PreconditionError: the labels are farther than ``delta`` on average.
        CoverageError: a selected triple has no label solution.
    """
    points = points_of(domain)
    measure = _measure_of(domain, points)
    q = model.profile.q
    labels = np.asarray(labels, dtype=float)
    sample_indices = np.asarray(sample_indices, dtype=np.int64)
    if selection.rows.shape[0] != len(points):
        raise UsageError(f"selection has {selection.rows.shape[0]} rows for {len(points)} domain points")
    g = ap_eval(model, points)
    gaps = np.abs(labels ** q - g ** q)
    achieved = functional_distance(labels, g, q, DistanceMode.EXPECTED, measure)
    _check_distance(achieved, delta, "expected")

    sample = LabeledDataset(points[sample_indices], labels[sample_indices])
    predictions = selected_values(sample, selection, q, tol)
    observed = functional_distance(predictions, labels, q, DistanceMode.EXPECTED, measure)

    expected_gap = measure.expectation(gaps)
    sample_gaps = gaps[sample_indices][selection.rows]
    position_means = measure.weights @ sample_gaps.reshape(len(points), -1)
    selection_gap = float(position_means.sum()) / selection.m
    scale = float(np.max(labels ** q))
    observed = _snap(observed, q, scale)
    hypothesis = _within(selection_gap, 3 * expected_gap, scale)
    if relaxed:
        per_position = all(_within(v, expected_gap, scale) for v in position_means)
    else:
        per_position = bool(np.all(np.abs(position_means - expected_gap)
                                   <= BOUND_REL_TOL * expected_gap + NOISE_REL_TOL * max(scale, 1.0)))

    constant = 4.0 ** (1.0 / q)
    bound = constant * delta
    adjusted = (expected_gap + selection_gap) ** (1.0 / q)
    report = BoundReport(
        bound_kind=Suite.AVERAGE.value, q=q, delta=delta, achieved_delta=achieved, constant=constant,
        bound_value=bound, observed=observed, holds=_within(observed ** q, bound ** q, scale),
        adjusted_bound=adjusted, adjusted_holds=_within(observed ** q, adjusted ** q, scale),
        hypothesis_holds=hypothesis, trials=1, checked=len(points),
        selection_gap=selection_gap, position_hypothesis=per_position,
    )
    if not hypothesis:
        logger.warning(f"selection gap {selection_gap:.6g} exceeds 3 x expected gap {expected_gap:.6g}; "
                       f"the stated bound is not guaranteed")
    logger.info(f"average case q={q} delta={delta}: observed {observed:.6g}, bound {bound:.6g}, "
                f"adjusted {adjusted:.6g}")
    return report


def verify_boolean_average(f: BooleanTable, g: BooleanTable, selection: BooleanSelectionMap,
                           model: BooleanModel = BooleanModel.MINIMAL,
                           delta: Optional[Number] = None) -> BoundReport:
    """Checks ``E|x~ - f| <= 4 delta`` exactly, with ``delta`` the Hamming distance of ``f`` to ``g``.

    Raises:
        UsageError: ``g`` is not affine or arities differ.
        PreconditionError: ``f`` is farther than the given ``delta`` from ``g``.
        CoverageError: a selected triple is unsolvable under the model.
    """
    model = BooleanModel(model)
    if f.n != g.n or selection.n != f.n:
        raise UsageError(f"arity mismatch: f={f.n}, g={g.n}, selection={selection.n}")
    if not g.is_affine():
        raise UsageError(f"reference function {g.to_bitstring()} is not affine")
    distance = f.hamming(g)
    if delta is None:
        delta = distance
    elif distance > delta:
        raise PreconditionError(f"Hamming distance {distance} exceeds delta={delta}")
    size = 1 << f.n
    labels = f.array()
    errors = labels ^ g.array()
    rows = selection.rows
    fa, fb, fc = labels[rows[..., 0]], labels[rows[..., 1]], labels[rows[..., 2]]
    if model is BooleanModel.MINIMAL and not np.all((fa == fb) | (fa == fc)):
        x, i = np.argwhere(~((fa == fb) | (fa == fc)))[0]
        raise CoverageError(f"selected triple {tuple(rows[x, i])} for point {x} is unsolvable")
    ones = (fa ^ fb ^ fc).sum(axis=1)
    m = selection.m
    observed = Fraction(int(np.abs(ones - m * labels).sum()), m * size)
    position_sums = errors[rows].sum(axis=0)
    selection_gap = Fraction(int(position_sums.sum()), m * size)
    delta = Fraction(delta)
    adjusted = distance + selection_gap
    report = BoundReport(
        bound_kind=Suite.BOOLEAN.value, q=1.0, delta=delta, achieved_delta=distance, constant=4.0,
        bound_value=4 * delta, observed=observed, holds=observed <= 4 * delta,
        adjusted_bound=adjusted, adjusted_holds=observed <= adjusted,
        hypothesis_holds=selection_gap <= 3 * distance, trials=1, checked=size,
        selection_gap=selection_gap,
        position_hypothesis=bool(np.all(position_sums <= int(size * distance))),
    )
    logger.info(f"boolean average n={f.n} model={model.value}: observed {observed} vs bound {4 * delta}")
    return report


def _flip(table: BooleanTable, indices) -> BooleanTable:
    bits = list(table.bits)
    for i in indices:
        bits[i] ^= 1
    return BooleanTable(table.n, tuple(bits))


def run_suite(suite: Union[Suite, str], profile: PowerProfile, deltas: Sequence[float], seed: int = 0,
              trials: int = 200, relaxed: bool = False, n: int = 3,
              model: BooleanModel = BooleanModel.MINIMAL, progress: bool = False) -> List[BoundReport]:
    """Builds the standard construction for ``suite`` and verifies it at every delta.

    * ``worst``: random AP model on the grid of powered levels 1..4, pointwise
      perturbation, ``trials`` sampled checks.
    * ``average``: powered levels 1..5 as domain, levels 1..3 as sample,
      label-blind selection; constant perturbation, or pointwise off the
      sample when ``relaxed``.
    * ``boolean``: random affine ``g`` of arity ``n`` with ``round(delta * 2**n)``
      points flipped, full sample, label-aware selection.
    """
    suite = Suite(suite)
    reports = []
    if suite is Suite.BOOLEAN:
        rng = np.random.default_rng(seed)
        size = 1 << n
        g = BooleanTable.affine(n, int(rng.integers(size)), int(rng.integers(2)))
        for delta in deltas:
            flips = rng.choice(size, size=int(round(delta * size)), replace=False)
            f = _flip(g, flips)
            selection = build_boolean_selection(BooleanSample.full(n), f, model)
            reports.append(verify_boolean_average(f, g, selection, model, Fraction(len(flips), size)))
        return reports

    ap_model = standard_model(profile, seed)
    if suite is Suite.WORST:
        domain = power_grid(profile, range(1, 5))
        for delta in deltas:
            spec = PerturbationSpec(delta, DistanceMode.UNIFORM, seed, PerturbationShape.POINTWISE)
            f = perturb_ap(ap_model, domain, spec).labels
            reports.append(verify_worst_case(f, ap_model, domain, delta, trials, seed, progress=progress))
        return reports

    domain = power_grid(profile, range(1, 6))
    sample_points = power_grid(profile, range(1, 4))
    sample_indices = [_find_point(domain, x) for x in sample_points]
    sample = LabeledDataset(sample_points, ap_eval(ap_model, sample_points))
    selection = build_selection_map(sample, domain, profile, use_labels=False)
    support = None
    if relaxed:
        support = np.ones(len(domain), dtype=bool)
        support[sample_indices] = False
    shape = PerturbationShape.POINTWISE if relaxed else PerturbationShape.CONSTANT
    for delta in deltas:
        spec = PerturbationSpec(delta, DistanceMode.EXPECTED, seed, shape)
        f = perturb_ap(ap_model, domain, spec, support).labels
        reports.append(verify_average_case(f, ap_model, sample_indices, selection, domain, delta, relaxed))
    return reports

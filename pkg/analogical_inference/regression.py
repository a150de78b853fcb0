"""Analogy-based regression on the positive orthant.

A query is labeled from a training sample by collecting every triple of
sample points that forms an analogy in powers ``p`` with it (its root),
solving the label equation in power ``q`` for each triple, and taking the
``q``-generalized mean of the solutions.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import nnls
from tqdm import tqdm

from .core import (
    DistanceMode,
    FiniteMeasure,
    PowerProfile,
    Tolerance,
    as_vector,
    analogy_holds,
    analogy_mask,
    check_domain,
    functional_distance,
    generalized_mean,
)
from .errors import CoverageError, DomainError, FitError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Points of the positive orthant with labels and a probability measure.

    The measure defaults to the normalized counting measure.
    """

    points: np.ndarray
    labels: np.ndarray
    measure: Optional[FiniteMeasure] = None
    columns: Optional[Tuple[str, ...]] = None
    label_name: str = "y"

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        labels = np.array(self.labels, dtype=float).ravel()
        if points.ndim != 2 or len(points) == 0:
            raise UsageError(f"a dataset needs a nonempty 2-d array of points, got shape {points.shape}")
        if len(labels) != len(points):
            raise UsageError(f"{len(points)} points but {len(labels)} labels")
        for name, values in (("coordinate", points), ("label", labels)):
            bad = np.argwhere(np.isnan(values) | (values < 0))
            if len(bad):
                raise DomainError(f"{name} at row {int(bad[0][0])} must be a nonnegative number")
        measure = self.measure if self.measure is not None else FiniteMeasure.uniform(points)
        if len(measure) != len(points):
            raise UsageError(f"measure over {len(measure)} points for {len(points)} points")
        columns = tuple(self.columns) if self.columns is not None else tuple(f"x{j + 1}" for j in range(points.shape[1]))
        if len(columns) != points.shape[1]:
            raise UsageError(f"{len(columns)} column names for {points.shape[1]} coordinates")
        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "columns", columns)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.labels)

    def check_profile(self, profile: PowerProfile):
        if profile.n != self.n:
            raise UsageError(f"profile has {profile.n} exponents for {self.n} attributes")
        check_domain(self.points, profile.exponents, "dataset point")

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        """Rows ``indices`` under their own counting measure."""
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.points[indices], self.labels[indices], columns=self.columns,
                              label_name=self.label_name)


@dataclass(frozen=True, eq=False)
class RootSet:
    query: np.ndarray
    # (k, 3) indices (a, b, c) into the dataset, lexicographically ordered
    triples: np.ndarray
    truncated: bool = False

    def __len__(self):
        return len(self.triples)

    def __contains__(self, triple) -> bool:
        return bool(np.any(np.all(self.triples == np.asarray(triple), axis=1)))


def points_of(domain) -> np.ndarray:
    if isinstance(domain, LabeledDataset):
        return domain.points
    points = np.asarray(domain, dtype=float)
    return points.reshape(-1, 1) if points.ndim == 1 else points


def _prepare(dataset: LabeledDataset, query, profile: PowerProfile) -> np.ndarray:
    profile.require_positive()
    dataset.check_profile(profile)
    x = as_vector(query, dataset.n, "query")
    check_domain(x, profile.exponents, "query")
    return x


def _solvable(fq_a, fq_b, fq_c, tol: Tolerance):
    return fq_a - fq_b - fq_c <= tol.bound(np.maximum(np.maximum(fq_a, fq_b), fq_c))


def _enumerate(dataset: LabeledDataset, x: np.ndarray, profile: PowerProfile, tol: Tolerance,
               cap: Optional[int], use_labels: bool) -> RootSet:
    if cap is not None and cap < 1:
        raise UsageError(f"cap must be a positive integer, got {cap}")
    points, p = dataset.points, profile.exponents
    fq = dataset.labels ** profile.q
    limit = None if cap is None else cap + 1
    found, count = [], 0
    for a in range(len(points)):
        mask = analogy_mask(points[a][None, None, :], points[:, None, :], points[None, :, :],
                            x[None, None, :], p, tol)
        if use_labels:
            mask &= _solvable(fq[a], fq[:, None], fq[None, :], tol)
        bs, cs = np.nonzero(mask)
        if len(bs):
            found.append(np.column_stack([np.full(len(bs), a), bs, cs]))
            count += len(bs)
            if limit is not None and count >= limit:
                break
    triples = np.concatenate(found).astype(np.int64) if found else np.empty((0, 3), dtype=np.int64)
    truncated = cap is not None and len(triples) > cap
    if truncated:
        triples = triples[:cap]
    return RootSet(x, triples, truncated)


def root_set(dataset: LabeledDataset, query, profile: PowerProfile,
             tol: Tolerance = Tolerance(), cap: Optional[int] = None) -> RootSet:
    """All sample triples forming an analogy with ``query`` whose label equation is solvable.

    Triples range over the sample cubed, repeats allowed, in lexicographic
    order of indices; ``cap`` keeps the first ``cap`` and flags truncation.
    """
    x = _prepare(dataset, query, profile)
    return _enumerate(dataset, x, profile, tol, cap, use_labels=True)


def geometric_root(dataset: LabeledDataset, query, profile: PowerProfile,
                   tol: Tolerance = Tolerance(), cap: Optional[int] = None) -> RootSet:
    """Like :func:`root_set` but without looking at the labels."""
    x = _prepare(dataset, query, profile)
    return _enumerate(dataset, x, profile, tol, cap, use_labels=False)


def solutions(dataset: LabeledDataset, triples: np.ndarray, q: float,
              tol: Tolerance = Tolerance()) -> np.ndarray:
    """Solutions of the label equations of ``triples``; radicands within tolerance of 0 clamp to 0."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    fq = dataset.labels ** q
    fa, fb, fc = fq[triples[:, 0]], fq[triples[:, 1]], fq[triples[:, 2]]
    radicand = fb + fc - fa
    bad = ~_solvable(fa, fb, fc, tol)
    if np.any(bad):
        raise CoverageError(f"triple {tuple(triples[bad][0])} has no label solution")
    return np.maximum(radicand, 0.0) ** (1.0 / q)


def analogical_value(dataset: LabeledDataset, query, profile: PowerProfile,
                     tol: Tolerance = Tolerance(), cap: Optional[int] = None) -> Optional[float]:
    """The q-mean of all root solutions, or None outside the analogical extension."""
    root = root_set(dataset, query, profile, tol, cap)
    if len(root) == 0:
        return None
    return generalized_mean(solutions(dataset, root.triples, profile.q, tol), profile.q)


def check_regular(sample: LabeledDataset, domain, profile: PowerProfile,
                  tol: Tolerance = Tolerance()) -> Optional[int]:
    """The common root size over the domain, or None if the sample is not regular."""
    domain_points = points_of(domain)
    for row in sample.points:
        if not np.any(np.all(np.isclose(domain_points, row, rtol=1e-12, atol=0.0), axis=1)):
            raise UsageError(f"sample point {tuple(row)} is not in the domain")
    sizes = {len(root_set(sample, x, profile, tol)) for x in domain_points}
    if len(sizes) != 1 or 0 in sizes:
        logger.debug(f"root sizes over the domain: {sorted(sizes)}")
        return None
    return sizes.pop()


@dataclass(frozen=True, eq=False)
class SelectionMap:
    """Exactly ``m`` root triples per domain point; ``rows`` has shape ``(|D|, m, 3)``."""

    m: int
    rows: np.ndarray
    queries: np.ndarray


def build_selection_map(sample: LabeledDataset, domain, profile: PowerProfile,
                        tol: Tolerance = Tolerance(), m: Optional[int] = None,
                        use_labels: bool = True) -> SelectionMap:
    """Selects the lexicographically first ``m`` root triples for every domain point.

    ``m`` defaults to the smallest root size. With ``use_labels=False`` the
    roots are purely geometric, so the selection never depends on labels.

    Raises:
        CoverageError: a domain point has an empty root, or ``m`` exceeds a root.
    """
    queries = points_of(domain)
    find = root_set if use_labels else geometric_root
    roots = []
    for x in queries:
        root = find(sample, x, profile, tol)
        if len(root) == 0:
            raise CoverageError(f"domain point {tuple(x)} has an empty root")
        roots.append(root.triples)
    smallest = min(len(r) for r in roots)
    if m is None:
        m = smallest
    if not 1 <= m <= smallest:
        raise CoverageError(f"selection width {m} exceeds the smallest root ({smallest} triples)")
    return SelectionMap(m, np.stack([r[:m] for r in roots]), queries)


def selected_values(dataset: LabeledDataset, selection: SelectionMap, q: float,
                    tol: Tolerance = Tolerance()) -> np.ndarray:
    """The analogical value of every domain point computed from its selected triples only."""
    return np.array([generalized_mean(solutions(dataset, row, q, tol), q) for row in selection.rows])


def remark19_value(dataset: LabeledDataset, triples: np.ndarray, q: float) -> float:
    """Closed form ``((1/m) sum (f(b)^q + f(c)^q - f(a)^q)) ** (1/q)`` over ``m`` triples."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    fq = dataset.labels ** q
    radicands = fq[triples[:, 1]] + fq[triples[:, 2]] - fq[triples[:, 0]]
    return float(max(np.mean(radicands), 0.0) ** (1.0 / q))


@dataclass(frozen=True)
class APModel:
    """``x -> (sum_j a_j x_j**p_j + b) ** (1/q)`` with nonnegative ``a`` and ``b``."""

    coefficients: Tuple[float, ...]
    intercept: float
    profile: PowerProfile

    def __post_init__(self):
        coefficients = tuple(float(v) for v in np.atleast_1d(self.coefficients))
        if len(coefficients) != self.profile.n:
            raise UsageError(f"{len(coefficients)} coefficients for a profile of {self.profile.n} exponents")
        if not all(np.isfinite(coefficients)) or min(coefficients) < 0:
            raise DomainError(f"coefficients must be finite and nonnegative, got {coefficients}")
        if not (np.isfinite(self.intercept) and self.intercept >= 0):
            raise DomainError(f"intercept must be finite and nonnegative, got {self.intercept}")
        self.profile.require_positive()
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "intercept", float(self.intercept))

    def conjugate(self, p_prime: Sequence[float], q_prime: float) -> "APModel":
        """The model ``x -> g(x**p') ** (1/q')``, an AP model in powers ``(p * p', q * q')``."""
        p_prime = as_vector(p_prime, self.profile.n, "p'")
        if np.any(p_prime <= 0) or not q_prime > 0:
            raise UsageError("conjugation exponents must be positive")
        profile = PowerProfile(tuple(self.profile.exponents * p_prime), self.profile.q * q_prime)
        return APModel(self.coefficients, self.intercept, profile)

    def to_dict(self) -> Dict:
        return {"p": list(self.profile.p), "q": self.profile.q, "a": list(self.coefficients), "b": self.intercept}

    @classmethod
    def from_dict(cls, doc: Dict) -> "APModel":
        return cls(tuple(doc["a"]), doc["b"], PowerProfile(tuple(doc["p"]), doc["q"]))


def ap_eval(model: APModel, x) -> Union[float, np.ndarray]:
    """Evaluates an AP model at one point (returns a float) or at a ``(k, n)`` batch."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != model.profile.n:
        raise UsageError(f"point of dimension {arr.shape[1]} for a model of {model.profile.n} attributes")
    check_domain(arr, model.profile.exponents, "evaluation point")
    powered = (arr ** model.profile.exponents) @ np.asarray(model.coefficients) + model.intercept
    values = powered ** (1.0 / model.profile.q)
    return float(values[0]) if single else values


def maps_analogies(model: APModel, a, b, c, d, tol: Tolerance = Tolerance()) -> bool:
    """Whether the model sends the quadruple to an analogy in power ``q``; vacuously true for non-analogies."""
    if not analogy_holds(a, b, c, d, model.profile, tol):
        return True
    outputs = ap_eval(model, np.stack([a, b, c, d]))
    return analogy_holds(*outputs, PowerProfile((model.profile.q,)), tol)


@dataclass(frozen=True)
class FitResult:
    model: APModel
    residual_uniform: float
    residual_expected: float


def ap_fit(dataset: LabeledDataset, profile: PowerProfile) -> FitResult:
    """Fits an AP model by nonnegative least squares in the linearized coordinates.

    The design is ``[x_j**p_j, 1]`` against ``label**q``; both residuals are
    functional q-distances between the labels and the fitted model.
    """
    profile.require_positive()
    dataset.check_profile(profile)
    points = dataset.points
    if np.all(points == points[0]):
        raise FitError(f"degenerate design: all {len(points)} points are identical")
    design = np.column_stack([points ** profile.exponents, np.ones(len(points))])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        logger.warning(f"design of rank {np.linalg.matrix_rank(design)} < {design.shape[1]}; "
                       f"coefficients are not identifiable")
    solution, rnorm = nnls(design, dataset.labels ** profile.q)
    model = APModel(tuple(solution[:-1]), solution[-1], profile)
    fitted = ap_eval(model, points)
    result = FitResult(
        model,
        functional_distance(dataset.labels, fitted, profile.q, DistanceMode.UNIFORM, dataset.measure),
        functional_distance(dataset.labels, fitted, profile.q, DistanceMode.EXPECTED, dataset.measure),
    )
    logger.info(f"ap_fit: a={model.coefficients} b={model.intercept:.6g} "
                f"residual uniform={result.residual_uniform:.3g} expected={result.residual_expected:.3g}")
    return result


@dataclass
class Predictions:
    values: List[Optional[float]] = field(default_factory=list)
    root_sizes: List[int] = field(default_factory=list)
    truncated: List[bool] = field(default_factory=list)

    @property
    def covered(self) -> int:
        return sum(v is not None for v in self.values)

    @property
    def coverage(self) -> float:
        return self.covered / len(self.values) if self.values else 0.0


def predict_dataset(train: LabeledDataset, queries, profile: PowerProfile,
                    tol: Tolerance = Tolerance(), cap: Optional[int] = None,
                    progress: bool = False) -> Predictions:
    """Analogical value of every query; queries outside the extension get None."""
    predictions = Predictions()
    for x in tqdm(points_of(queries), desc="predict", disable=not progress):
        root = root_set(train, x, profile, tol, cap)
        value = None
        if len(root):
            value = generalized_mean(solutions(train, root.triples, profile.q, tol), profile.q)
        predictions.values.append(value)
        predictions.root_sizes.append(len(root))
        predictions.truncated.append(root.truncated)
    if any(predictions.truncated):
        logger.warning(f"{sum(predictions.truncated)} predictions used a truncated root (cap={cap})")
    logger.info(f"predicted {predictions.covered}/{len(predictions.values)} queries "
                f"(coverage {predictions.coverage:.3f})")
    return predictions

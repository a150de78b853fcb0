"""Boolean analogical proportions, inference on the hypercube and affine functions.

Points of the hypercube are addressed by their index, the integer whose
binary expansion lists the coordinates with x1 as the most significant bit.
Coordinatewise XOR of points is then XOR of indices, and a sample is a
Python int used as a bitset over indices.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache, partial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CoverageError, ResourceError, UnsolvableError, UsageError
from .parallel import map_ranges

logger = logging.getLogger(__name__)

MAX_AFFINE_DISTANCE_ARITY = 20
MAX_ERR_ARITY = 4
MAX_VERIFY_ARITY = 3


class BooleanModel(str, Enum):
    KLEIN = "klein"
    MINIMAL = "minimal"

    @property
    def patterns(self) -> frozenset:
        return KLEIN_PATTERNS if self is BooleanModel.KLEIN else MINIMAL_PATTERNS


# columns (a, b, c, d) of the two pattern matrices
KLEIN_PATTERNS = frozenset(
    (a, b, c, d) for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)
    if a ^ b ^ c ^ d == 0
)
MINIMAL_PATTERNS = frozenset(
    [(x, x, y, y) for x in (0, 1) for y in (0, 1)] + [(x, y, x, y) for x in (0, 1) for y in (0, 1)]
)


def vector_to_index(x: Sequence[int]) -> int:
    index = 0
    for bit in x:
        if bit not in (0, 1):
            raise UsageError(f"not a Boolean vector: {tuple(x)}")
        index = (index << 1) | int(bit)
    return index


def index_to_vector(index: int, n: int) -> Tuple[int, ...]:
    return tuple((index >> (n - 1 - j)) & 1 for j in range(n))


def _popcount_parity(values: np.ndarray) -> np.ndarray:
    parity = np.zeros_like(values)
    v = values.copy()
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


@dataclass(frozen=True)
class BooleanTable:
    """Truth table of a function on the n-dimensional hypercube."""

    n: int
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if self.n < 0 or len(bits) != 1 << self.n:
            raise UsageError(f"a table of arity {self.n} needs {1 << max(self.n, 0)} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise UsageError("truth table entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bitstring(cls, text: str) -> "BooleanTable":
        text = text.strip()
        size = len(text)
        if size == 0 or size & (size - 1):
            raise UsageError(f"a truth table has a power-of-two length, got {size}")
        return cls(size.bit_length() - 1, tuple(int(ch) for ch in text))

    @classmethod
    def from_function(cls, n: int, func: Callable[[Tuple[int, ...]], int]) -> "BooleanTable":
        return cls(n, tuple(int(func(index_to_vector(i, n))) & 1 for i in range(1 << n)))

    @classmethod
    def affine(cls, n: int, coefficients: int, constant: int = 0) -> "BooleanTable":
        """``x -> <a, x> xor b`` where bit j of ``coefficients`` (MSB first) is ``a_{j+1}``."""
        indices = np.arange(1 << n, dtype=np.int64)
        return cls(n, tuple((_popcount_parity(indices & coefficients) ^ (constant & 1)).tolist()))

    def to_bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    def array(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.int64)

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise UsageError(f"point of dimension {len(x)} for a table of arity {self.n}")
        return self.bits[vector_to_index(x)]

    def is_affine(self) -> bool:
        """Direct test of ``f(x xor y xor z) == f(x) xor f(y) xor f(z)`` with ``z = 0``."""
        f = self.array()
        x = np.arange(1 << self.n)
        xor = x[:, None] ^ x[None, :]
        return bool(np.all(f[xor] == f[:, None] ^ f[None, :] ^ f[0]))

    def hamming(self, other: "BooleanTable") -> Fraction:
        """Normalized Hamming distance."""
        if other.n != self.n:
            raise UsageError(f"arity mismatch: {self.n} and {other.n}")
        return Fraction(sum(a != b for a, b in zip(self.bits, other.bits)), 1 << self.n)


@dataclass(frozen=True)
class BooleanSample:
    """A subset of the hypercube, bit i of ``members`` standing for point index i."""

    n: int
    members: int

    def __post_init__(self):
        if self.members < 0 or self.members >> (1 << self.n):
            raise UsageError(f"sample bitset does not fit {1 << self.n} points")

    @classmethod
    def from_points(cls, n: int, points: Iterable) -> "BooleanSample":
        members = 0
        for x in points:
            index = x if isinstance(x, (int, np.integer)) else vector_to_index(x)
            if not 0 <= index < 1 << n:
                raise UsageError(f"point {x} outside the hypercube of dimension {n}")
            members |= 1 << int(index)
        return cls(n, members)

    @classmethod
    def full(cls, n: int) -> "BooleanSample":
        return cls(n, (1 << (1 << n)) - 1)

    def __contains__(self, index: int) -> bool:
        return bool((self.members >> index) & 1)

    def __len__(self):
        return bin(self.members).count("1")

    def indices(self) -> List[int]:
        return [i for i in range(1 << self.n) if (self.members >> i) & 1]

    def mask(self) -> np.ndarray:
        return np.array([(self.members >> i) & 1 for i in range(1 << self.n)], dtype=bool)


def bool_analogy_holds(model: BooleanModel, a: Sequence[int], b: Sequence[int],
                       c: Sequence[int], d: Sequence[int]) -> bool:
    """True iff every component quadruple is a column of the model's pattern matrix."""
    model = BooleanModel(model)
    if not len(a) == len(b) == len(c) == len(d):
        raise UsageError(f"dimension mismatch: {len(a)}, {len(b)}, {len(c)}, {len(d)}")
    return all(tuple(int(v) for v in column) in model.patterns for column in zip(a, b, c, d))


def holds_mask(model: BooleanModel, a, b, c, d, n: int):
    """Analogy test on point indices, vectorized over numpy integer arrays."""
    full = (1 << n) - 1
    if BooleanModel(model) is BooleanModel.KLEIN:
        return (a ^ b ^ c ^ d) == 0
    eq_ab, eq_cd = ~(a ^ b) & full, ~(c ^ d) & full
    eq_ac, eq_bd = ~(a ^ c) & full, ~(b ^ d) & full
    return ((eq_ab & eq_cd) | (eq_ac & eq_bd)) == full


def bool_sol(model: BooleanModel, a: int, b: int, c: int) -> Optional[int]:
    """Solves ``a : b :: c : x`` for a bit ``x``.

    Klein always answers ``c == (a == b)``, which is ``a xor b xor c``; the
    minimal model answers the same bit when ``a == b`` or ``a == c`` and
    None otherwise.
    """
    if BooleanModel(model) is BooleanModel.MINIMAL and a != b and a != c:
        return None
    return (a ^ b ^ c) & 1


def affine_distance(f: BooleanTable) -> Tuple[Fraction, BooleanTable]:
    """Normalized Hamming distance from ``f`` to the closest affine function.

    Uses the fast Walsh-Hadamard transform of ``(-1)**f``: the affine
    function ``<a, x> xor b`` agrees with ``f`` on ``(2**n + (-1)**b W(a)) / 2``
    points. Ties go to the smallest coefficient mask, then to ``b = 0``.

    Returns:
        The distance and one nearest affine function.
    """
    n = f.n
    if n > MAX_AFFINE_DISTANCE_ARITY:
        raise ResourceError(f"affine distance enumerates 2^{n + 1} functions; arity is capped at {MAX_AFFINE_DISTANCE_ARITY}")
    size = 1 << n
    wht = np.where(f.array() == 0, 1, -1).astype(np.int64)
    h = 1
    while h < size:
        wht = wht.reshape(-1, 2, h)
        wht = np.concatenate([wht[:, 0] + wht[:, 1], wht[:, 0] - wht[:, 1]], axis=1)
        h *= 2
    wht = wht.reshape(size)
    best = int(np.argmax(np.abs(wht)))
    constant = 0 if wht[best] >= 0 else 1
    distance = Fraction(size - abs(int(wht[best])), 2 * size)
    return distance, BooleanTable.affine(n, best, constant)


@lru_cache(maxsize=None)
def analogy_triples(n: int, model: BooleanModel) -> Tuple[np.ndarray, ...]:
    """Per target index, the lexicographically ordered triples forming an analogy with it.

    Each entry is an int array of shape ``(k, 3)`` over the whole hypercube.
    """
    model = BooleanModel(model)
    size = 1 << n
    grid = np.arange(size ** 3, dtype=np.int64)
    a, b, c = grid // (size * size), (grid // size) % size, grid % size
    triples = []
    for target in range(size):
        keep = holds_mask(model, a, b, c, np.int64(target), n)
        rows = np.stack([a[keep], b[keep], c[keep]], axis=1)
        rows.setflags(write=False)
        triples.append(rows)
    return tuple(triples)


def _solvable(model: BooleanModel, fa, fb, fc):
    if model is BooleanModel.KLEIN:
        return np.ones_like(fa, dtype=bool)
    return (fa == fb) | (fa == fc)


def boolean_root(sample: BooleanSample, f: BooleanTable, x: int,
                 model: BooleanModel = BooleanModel.MINIMAL, use_labels: bool = True) -> np.ndarray:
    """Lexicographically ordered sample triples forming an analogy with ``x``.

    With ``use_labels`` the triples must also have a solvable label equation.
    """
    model = BooleanModel(model)
    if sample.n != f.n:
        raise UsageError(f"sample arity {sample.n} differs from function arity {f.n}")
    rows = analogy_triples(f.n, model)[x]
    member = sample.mask()
    keep = member[rows[:, 0]] & member[rows[:, 1]] & member[rows[:, 2]]
    if use_labels:
        labels = f.array()
        keep &= _solvable(model, labels[rows[:, 0]], labels[rows[:, 1]], labels[rows[:, 2]])
    return rows[keep]


@dataclass(frozen=True)
class BooleanErr:
    err: Fraction
    extension: int
    mislabeled: int
    ties: int

    @property
    def tie_count(self) -> int:
        return bin(self.ties).count("1")


def boolean_err(sample: BooleanSample, f: BooleanTable,
                model: BooleanModel = BooleanModel.MINIMAL) -> BooleanErr:
    """Exact error of the analogical inference principle on ``sample``.

    Every point with a nonempty root joins the extension; points outside the
    sample get the majority label of their root solutions (ties go to 0 and
    are flagged), and the error is the share of the hypercube mislabeled.
    """
    model = BooleanModel(model)
    n = f.n
    if n > MAX_ERR_ARITY:
        raise ResourceError(f"boolean_err enumerates all triples per target; arity is capped at {MAX_ERR_ARITY}")
    labels = f.array()
    extension = mislabeled = ties = 0
    for x in range(1 << n):
        if x in sample:
            extension |= 1 << x
            continue
        rows = boolean_root(sample, f, x, model)
        if len(rows) == 0:
            continue
        extension |= 1 << x
        solutions = labels[rows[:, 0]] ^ labels[rows[:, 1]] ^ labels[rows[:, 2]]
        ones = int(solutions.sum())
        zeros = len(solutions) - ones
        if ones == zeros:
            ties |= 1 << x
        if int(ones > zeros) != labels[x]:
            mislabeled |= 1 << x
    err = Fraction(bin(mislabeled).count("1"), 1 << n)
    return BooleanErr(err, extension, mislabeled, ties)


@dataclass(frozen=True, eq=False)
class BooleanSelectionMap:
    """For every point of the hypercube, ``m`` selected root triples (shape ``(2**n, m, 3)``)."""

    n: int
    m: int
    rows: np.ndarray


def build_boolean_selection(sample: BooleanSample, f: BooleanTable,
                            model: BooleanModel = BooleanModel.MINIMAL,
                            m: Optional[int] = None, use_labels: bool = True) -> BooleanSelectionMap:
    roots = [boolean_root(sample, f, x, model, use_labels) for x in range(1 << f.n)]
    for x, rows in enumerate(roots):
        if len(rows) == 0:
            raise CoverageError(f"point {index_to_vector(x, f.n)} has an empty root")
    smallest = min(len(rows) for rows in roots)
    if m is None:
        m = smallest
    if not 1 <= m <= smallest:
        raise CoverageError(f"selection width {m} exceeds the smallest root ({smallest} triples)")
    return BooleanSelectionMap(f.n, m, np.stack([rows[:m] for rows in roots]))


def bool_confidence(sample: BooleanSample, f: BooleanTable, x: Sequence[int],
                    model: BooleanModel = BooleanModel.MINIMAL, m: Optional[int] = None) -> float:
    """Mean of the real-embedded solutions over the first ``m`` root triples of ``x``."""
    index = vector_to_index(x)
    rows = boolean_root(sample, f, index, model)
    if len(rows) == 0:
        raise UnsolvableError(f"no solvable triple in the sample for {tuple(x)}")
    if m is not None:
        if not 1 <= m <= len(rows):
            raise CoverageError(f"selection width {m} exceeds the root of {tuple(x)} ({len(rows)} triples)")
        rows = rows[:m]
    return confidence_of_rows(f, rows)


def confidence_of_rows(f: BooleanTable, rows: np.ndarray) -> float:
    labels = f.array()
    return float(np.mean(labels[rows[:, 0]] ^ labels[rows[:, 1]] ^ labels[rows[:, 2]]))


def mode_label(confidence: float) -> int:
    """Majority label recovered from a confidence value, ties to 0."""
    return int(confidence > 0.5)


def _mislabeled_per_sample(labels: np.ndarray, n: int, model: BooleanModel) -> np.ndarray:
    """Mislabeled point counts of ``labels`` for every sample of the hypercube."""
    size = 1 << n
    samples = np.arange(1 << size, dtype=np.int64)
    member = ((samples[:, None] >> np.arange(size)[None, :]) & 1).astype(bool)
    counts = np.zeros(len(samples), dtype=np.int64)
    for x, rows in enumerate(analogy_triples(n, model)):
        fa, fb, fc = labels[rows[:, 0]], labels[rows[:, 1]], labels[rows[:, 2]]
        valid = member[:, rows[:, 0]] & member[:, rows[:, 1]] & member[:, rows[:, 2]]
        valid &= _solvable(model, fa, fb, fc)[None, :]
        total = valid.sum(axis=1)
        ones = (valid & ((fa ^ fb ^ fc) == 1)[None, :]).sum(axis=1)
        predicted = (2 * ones > total).astype(np.int64)
        counts += (total > 0) & ~member[:, x] & (predicted != labels[x])
    return counts


def _verify_functions(bounds: Tuple[int, int], n: int, model: BooleanModel):
    size = 1 << n
    results = []
    for code in range(*bounds):
        labels = np.array([(code >> (size - 1 - i)) & 1 for i in range(size)], dtype=np.int64)
        table = BooleanTable(n, tuple(labels.tolist()))
        counts = _mislabeled_per_sample(labels, n, model)
        bad = np.nonzero(counts)[0]
        results.append((table.to_bitstring(), table.is_affine(), int(bad[0]) if len(bad) else None))
    return results


@dataclass
class ApAffineReport:
    n: int
    model: BooleanModel
    passed: bool
    affine_count: int
    nonaffine_count: int
    # (truth table, sample bitset) pairs where an affine function was mislabeled
    soundness_failures: List[Tuple[str, int]]
    # non-affine truth tables that no sample could expose
    completeness_failures: List[str]
    # one exposing sample per non-affine function
    witnesses: Dict[str, int]


def verify_ap_affine(n: int, model: BooleanModel = BooleanModel.MINIMAL,
                     workers: Optional[int] = None, progress: bool = False) -> ApAffineReport:
    """Exhaustively checks that the functions inferred without error are exactly the affine ones.

    Every truth table of arity ``n`` is run against every sample: affine
    tables must never be mislabeled, other tables must be mislabeled by at
    least one sample.
    """
    model = BooleanModel(model)
    if not 1 <= n <= MAX_VERIFY_ARITY:
        raise ResourceError(f"verify_ap_affine is exhaustive; arity must be in 1..{MAX_VERIFY_ARITY}, got {n}")
    total = 1 << (1 << n)
    chunks = map_ranges(partial(_verify_functions, n=n, model=model), total, workers=workers,
                        desc=f"functions n={n}", progress=progress)
    soundness, completeness, witnesses = [], [], {}
    affine_count = 0
    for bitstring, affine, sample in (row for chunk in chunks for row in chunk):
        if affine:
            affine_count += 1
            if sample is not None:
                soundness.append((bitstring, sample))
        elif sample is None:
            completeness.append(bitstring)
        else:
            witnesses[bitstring] = sample
    passed = not soundness and not completeness
    logger.info(f"verify_ap_affine n={n} model={model.value}: {affine_count} affine, "
                f"{total - affine_count} non-affine, passed={passed}")
    return ApAffineReport(n, model, passed, affine_count, total - affine_count, soundness, completeness, witnesses)

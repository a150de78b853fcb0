from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from analogical_inference.boolean import BooleanModel, BooleanSample, affine_distance, boolean_err
from analogical_inference.counterexample import (
    algorithm1_lower_bound,
    forming_triples,
    indicator_f,
    is_counted,
    theorem3_rhs,
)
from analogical_inference.errors import ResourceError, UsageError


def test_indicator_function():
    f = indicator_f(4)
    assert f.bits[15] == 1
    assert sum(f.bits) == 1
    with pytest.raises(UsageError):
        indicator_f(0)


def test_indicator_is_one_sixteenth_from_affine():
    distance, witness = affine_distance(indicator_f(4))
    assert distance == Fraction(1, 16)
    assert not any(witness.bits)


@pytest.mark.parametrize(
    "epsilon, delta, expected",
    [
        (Fraction(1, 16), 0, Fraction(1, 4)),
        (Fraction(1, 8), Fraction(1, 2), Fraction(1, 4)),
        (0, 0, 0),
    ],
)
def test_theorem3_rhs(epsilon, delta, expected):
    assert theorem3_rhs(epsilon, delta) == expected


def test_theorem3_rhs_ranges():
    with pytest.raises(UsageError):
        theorem3_rhs(Fraction(3, 4), 0)
    with pytest.raises(UsageError):
        theorem3_rhs(Fraction(1, 16), 2)


def test_forming_triples():
    triples = forming_triples(4, BooleanModel.MINIMAL)
    assert len(triples) == 50
    assert all(15 not in triple for triple in triples)
    assert list(triples) == sorted(triples)
    assert forming_triples(2, BooleanModel.MINIMAL) == ((0, 1, 2), (0, 2, 1))


def test_single_variable_has_no_counted_sample():
    report = algorithm1_lower_bound(1)
    assert report.subset_count == 0
    assert report.lower_bound == 0
    assert report.denominator == 4
    assert not report.violated


@pytest.mark.parametrize("model", list(BooleanModel))
def test_two_variables_count_only_the_full_complement(model):
    report = algorithm1_lower_bound(2, model)
    assert report.subset_count == 1
    assert report.lower_bound == Fraction(1, 16)
    assert report.epsilon == Fraction(1, 4)
    assert report.theorem3_rhs == 1


def test_small_samples_are_not_counted():
    assert not is_counted(0b011, 2)
    assert is_counted(0b111, 2)


@given(subset=st.integers(0, (1 << 15) - 1), extra=st.integers(0, (1 << 15) - 1))
def test_counting_is_monotone_in_the_sample(subset, extra):
    if is_counted(subset, 4):
        assert is_counted(subset | extra, 4)


def test_counted_samples_really_err():
    rng = np.random.default_rng(3)
    f = indicator_f(4)
    checked = 0
    while checked < 100:
        subset = int(rng.integers(0, 1 << 15))
        if not is_counted(subset, 4):
            continue
        assert boolean_err(BooleanSample(4, subset), f, BooleanModel.MINIMAL).err > 0
        checked += 1


def test_arity_cap():
    with pytest.raises(ResourceError):
        algorithm1_lower_bound(5)
    with pytest.raises(UsageError):
        algorithm1_lower_bound(0)


@pytest.mark.slow
def test_four_variable_bound_is_violated():
    report = algorithm1_lower_bound(4, BooleanModel.MINIMAL, audit=True)
    assert report.denominator == 65536
    assert report.epsilon == Fraction(1, 16)
    assert report.theorem3_rhs == Fraction(1, 4)
    assert report.lower_bound >= Fraction(42, 100)
    assert report.violated
    assert report.small_subset_roots == 0


@pytest.mark.slow
def test_parallel_count_matches_serial():
    serial = algorithm1_lower_bound(4, workers=1)
    parallel = algorithm1_lower_bound(4, workers=3)
    assert parallel.subset_count == serial.subset_count
    assert parallel.lower_bound == serial.lower_bound

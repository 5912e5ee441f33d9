"""Unit tests for denominator bookkeeping and generator rules."""

from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from mobpow.sequences import (
    GeneratorRule,
    QVal,
    Rotation,
    RotationSequence,
    SequenceError,
)
from mobpow.numerics import working_precision


def test_qval_exact():
    q = QVal.from_int(28)
    assert q.is_exact and q.as_int() == 28
    assert q.as_mpf() == 28
    with working_precision(64):
        assert abs(q.log2_value() - mpmath.log(28, 2)) < mpf(2) ** -60


def test_qval_log2_state():
    with working_precision(64):
        q = QVal(log2=mpf(10 ** 8))
        assert not q.is_exact and not q.is_huge
        with pytest.raises(SequenceError):
            q.as_int()
        assert q.reciprocal_mpf() > 0
        q_deep = QVal(log2=mpf(2) ** 1100000)
        # exponent beyond storable range: magnitude saturates, reciprocal
        # underflows to 0
        assert q_deep.as_mpf() == mpf("inf")
        assert q_deep.reciprocal_mpf() == 0


def test_qval_huge():
    q = QVal.huge()
    assert q.is_huge
    assert q.as_mpf() == mpf("inf")
    assert q.reciprocal_mpf() == 0


def test_rotation_validation():
    Rotation.of(1, 3)
    with pytest.raises(SequenceError):
        Rotation.of(2, 4)  # not reduced
    with pytest.raises(SequenceError):
        Rotation.of(3, 3)  # not < 1
    with pytest.raises(SequenceError):
        Rotation.of(0, 3)


def test_from_fractions_forms():
    seq = RotationSequence.from_fractions(["1/3", (1, 2), Fraction(2, 5)])
    assert len(seq) == 3
    assert seq[0].p == 1 and seq[0].q.as_int() == 3
    assert seq[2].p == 2 and seq[2].q.as_int() == 5
    with pytest.raises(IndexError):
        seq[3]


def test_tower_rule_growth():
    rule = GeneratorRule(kind="tower", q0=3)
    seq = RotationSequence(rule=rule)
    qs = [seq[n].q for n in range(4)]
    assert [q.as_int() for q in qs[:3]] == [3, 8, 256]
    assert qs[3].as_int() == 2 ** 256


def test_affine_and_geometric_rules():
    lin = RotationSequence(rule=GeneratorRule(kind="affine", q0=2, a=1, b=1))
    assert [lin[n].q.as_int() for n in range(5)] == [2, 3, 4, 5, 6]
    geo = RotationSequence(rule=GeneratorRule(kind="geometric", q0=7, m=2))
    assert [geo[n].q.as_int() for n in range(4)] == [7, 14, 28, 56]


def test_tower_saturation_chain():
    with working_precision(64):
        rule = GeneratorRule(kind="tower", q0=3)
        seq = RotationSequence(rule=rule)
        # by level 7 the denominator's own exponent is astronomical
        q7 = seq[7].q
        assert not q7.is_exact
        # the chain must keep degrading gracefully instead of overflowing
        q12 = seq[12].q
        assert q12.is_huge or not q12.is_exact


def test_generator_validation():
    with pytest.raises(SequenceError):
        GeneratorRule(kind="bogus", q0=3)
    with pytest.raises(SequenceError):
        GeneratorRule(kind="tower", q0=1)
    with pytest.raises(SequenceError):
        GeneratorRule(kind="affine", q0=3, a=1, b=0)  # constant sequence
    with pytest.raises(SequenceError):
        GeneratorRule(kind="geometric", q0=3, m=1)


def test_lazy_tail_and_available():
    seq = RotationSequence(rule=GeneratorRule(kind="geometric", q0=3, m=3))
    assert seq.available(1000)
    assert not seq.is_finite
    with pytest.raises(SequenceError):
        len(seq)
    finite = RotationSequence.from_fractions([(1, 3)])
    assert finite.available(0) and not finite.available(1)


def test_levin_log2_closed_forms():
    with working_precision(128):
        tower = GeneratorRule(kind="tower", q0=3, m=2)
        q = QVal(log2=mpf(10 ** 9))
        # v_n -> 1/m for towers as q grows
        assert abs(tower.levin_log2(q) + 1) < mpf(2) ** -60
        lin = GeneratorRule(kind="affine", q0=2, a=1, b=1)
        # v_n -> 1 for slowly growing rules
        assert abs(lin.levin_log2(q)) < mpf(2) ** -20

"""Unit tests for odometer addresses, the adding map, and sector labels."""

import math

import mpmath
import pytest
from mpmath import mp, mpf

from mobpow.addresses import (
    Address,
    AddressError,
    CenterHitError,
    EscapedError,
    OdometerScale,
    SectorBoundaryError,
    address_of,
    component_label,
    scale_of,
    sector_index,
    sigma_succ,
)
from mobpow.model import ModelParams, working_precision
from mobpow.numerics import LogPolarComplex
from mobpow.sequences import RotationSequence


def small_params():
    return ModelParams(1.5, RotationSequence.from_fractions(["1/3", "1/2"]),
                       precision=128)


def test_scale_invariants():
    scale = OdometerScale([3, 2, 4])
    assert len(scale) == 3
    assert [scale.cumulative(n) for n in range(4)] == [1, 3, 6, 24]
    assert scale.order == 24
    with pytest.raises(AddressError):
        OdometerScale([3, 1])


def test_address_validation():
    scale = OdometerScale([3, 2])
    Address((2, 1)).validate(scale)
    with pytest.raises(AddressError):
        Address((3, 0)).validate(scale)
    with pytest.raises(AddressError):
        Address((0, 0, 0)).validate(scale)


def test_sigma_succ_carries_and_wraps():
    scale = OdometerScale([3, 2])
    a = Address((2, 0))
    b = sigma_succ(a, scale)
    assert b.digits == (0, 1)  # carry into the second digit
    assert sigma_succ(Address((2, 1)), scale).digits == (0, 0)  # full wrap
    assert sigma_succ(Address((0, 0)), scale).digits == (1, 0)


def test_sigma_succ_is_cyclic_of_full_order():
    scale = OdometerScale([2, 3, 5])
    a = Address((0, 0, 0))
    seen = set()
    for _ in range(scale.order):
        seen.add(a.digits)
        a = sigma_succ(a, scale)
    assert len(seen) == 30 and a.digits == (0, 0, 0)


def test_sector_index_roots_of_unity():
    with working_precision(128):
        q = 5
        for m in range(q):
            u = LogPolarComplex(mpf("-0.2"), 2 * mp.pi * m / q)
            assert sector_index(u, q) == m
        # an angle halfway between sectors is rejected
        with pytest.raises(SectorBoundaryError):
            sector_index(LogPolarComplex(mpf("-0.2"), mp.pi / q), q)
        with pytest.raises(AddressError):
            sector_index(LogPolarComplex.zero(), q)


def test_component_label_inverse_property():
    for q in (5, 7, 12):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            labels = [component_label(m, p, q) for m in range(q)]
            assert sorted(labels) == list(range(q))
            for m in range(q):
                assert (labels[m] * p) % q == m
    with pytest.raises(AddressError):
        component_label(1, 2, 4)


def test_address_of_critical_points():
    with working_precision(128):
        p = small_params()
        # points on the real segment near 1 sit in the all-zero component
        addr = address_of(p, LogPolarComplex.from_real(mpf("0.97")), 2)
        assert addr.digits == (0, 0)
        assert scale_of(p, 2).moduli == (3, 2)


def test_address_of_escaping_point_raises():
    with working_precision(128):
        p = small_params()
        with pytest.raises(EscapedError):
            address_of(p, LogPolarComplex.from_real(mpf("0.2")), 2)


def test_address_of_center_hit():
    with working_precision(128):
        p = small_params()
        # z = t_0 maps to 0 at level 0: the level-1 digit is undefined
        with pytest.raises(CenterHitError):
            address_of(p, LogPolarComplex.from_real(p.t(0)), 2)
        # but its depth-1 address (needing only the sector at level 0)
        # would still hit the center point itself at level 0
        with pytest.raises(CenterHitError):
            address_of(p, LogPolarComplex.from_real(p.t(0)), 1)


def test_addresses_distinguish_components():
    """Sample one point per first-level component using conjugate symmetry
    and distinct angles; digits must differ."""
    with working_precision(128):
        p = small_params()
        digits = set()
        # crude sweep: rays from origin hit different petals of K_0
        for k in range(200):
            th = -mp.pi + (2 * mp.pi * (k + mpf("0.5"))) / 200
            for r in ("0.5", "0.7", "0.9"):
                z = LogPolarComplex(mpmath.log(mpf(r)), th)
                try:
                    a = address_of(p, z, 1)
                except AddressError:
                    continue
                digits.add(a.digits)
        assert digits == {(0,), (1,), (2,)}

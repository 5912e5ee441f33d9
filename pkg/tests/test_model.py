"""Unit tests for the level maps, their compositions, and escape traces."""

import mpmath
import pytest
from mpmath import mp, mpf

from mobpow.model import (
    ModelError,
    ModelParams,
    compose_phi,
    membership_tolerance,
    moebius_apply,
    moebius_inverse_apply,
    moebius_preimage_disk,
    orbit,
    phi_apply,
    working_precision,
)
from mobpow.numerics import LogPolarComplex
from mobpow.sequences import GeneratorRule, RotationSequence


def small_params(c=1.5, precision=128):
    return ModelParams(c, RotationSequence.from_fractions(["1/3", "1/2"]),
                       precision=precision)


def test_constant_validation():
    with pytest.raises(ModelError):
        small_params(c=0.5)
    with pytest.raises(ModelError):
        small_params(c=1)
    p = ModelParams("pi", RotationSequence.from_fractions(["1/7"]))
    with working_precision(64):
        assert abs(p.C - mp.pi) < mpf(2) ** -60
    p2 = ModelParams("2*pi", RotationSequence.from_fractions(["1/7"]))
    with working_precision(64):
        assert abs(p2.C - 2 * mp.pi) < mpf(2) ** -60


def test_t_values_and_range_check():
    with working_precision(128):
        p = small_params()
        assert abs(p.t(0) - mpf("0.5")) < mpf(2) ** -120
        assert abs(p.t(1) - mpf("0.75")) < mpf(2) ** -120
        bad = ModelParams(3, RotationSequence.from_fractions(["1/2"]))
        with pytest.raises(ModelError):
            bad.t(0)  # t = 1.5 outside (0, 1)


def test_t_underflow_flag():
    rule = GeneratorRule(kind="tower", q0=3)
    p = ModelParams(2, RotationSequence(rule=rule), precision=512)
    with working_precision(512):
        assert p.t(4) > 0
        assert p.t_underflowed(5)
        assert p.t(5) == 0


def test_moebius_fixed_points_and_round_trip():
    with working_precision(128):
        t = mpf("0.4")
        one = moebius_apply(t, LogPolarComplex.one())
        assert abs(one.log_r) < mpf(2) ** -120 and abs(one.theta) < mpf(2) ** -120
        center = moebius_apply(t, LogPolarComplex.from_real(t))
        assert center.is_zero
        z = LogPolarComplex.from_rect(mpf("0.3"), mpf("0.2"))
        back = moebius_inverse_apply(t, moebius_apply(t, z))
        re, im = back.to_rect()
        assert abs(re - mpf("0.3")) < mpf(2) ** -110
        assert abs(im - mpf("0.2")) < mpf(2) ** -110


def test_moebius_matches_mpc():
    with working_precision(128):
        t = mpf("0.7")
        z = LogPolarComplex.from_rect(mpf("-0.25"), mpf("0.6"))
        w = moebius_apply(t, z)
        zc = mpmath.mpc(mpf("-0.25"), mpf("0.6"))
        ref = (1 - t / zc) / (1 - t)
        re, im = w.to_rect()
        assert abs(re - ref.real) < mpf(2) ** -110
        assert abs(im - ref.imag) < mpf(2) ** -110


def test_preimage_disk_contains_one_excludes_origin():
    with working_precision(64):
        center, radius = moebius_preimage_disk(mpf("0.3"))
        assert abs((center + radius) - 1) < mpf(2) ** -60
        assert center - radius > 0


def test_phi_matches_direct_mpc():
    with working_precision(192):
        p = small_params(precision=192)
        z = LogPolarComplex.from_rect(mpf("0.55"), mpf("0.15"))
        w = phi_apply(p, 0, z)
        zc = mpmath.mpc(mpf("0.55"), mpf("0.15"))
        t0 = p.t(0)
        ref = ((1 - t0 / zc) / (1 - t0)) ** 3
        re, im = w.to_rect()
        assert abs(re - ref.real) < mpf(2) ** -170
        assert abs(im - ref.imag) < mpf(2) ** -170


def test_phi_fixed_point_one():
    with working_precision(128):
        p = small_params()
        w = phi_apply(p, 0, LogPolarComplex.one())
        assert w.log_r == 0 and w.theta == 0


def test_phi_small_ratio_no_cancellation():
    """A real point whose image sits hundreds of digits below 1 in
    magnitude must keep that magnitude to full relative precision, even
    though the intermediate ratio t/z underflows the mantissa."""
    rule = GeneratorRule(kind="tower", q0=3)
    p = ModelParams(2, RotationSequence(rule=rule), precision=512)
    with working_precision(512):
        x = mpf("0.9")
        z = LogPolarComplex.from_real(x)
        for n in range(5):
            z = phi_apply(p, n, z)
        # oracle: the limit form log w = C*p*(1 - 1/x) once t/x is far
        # below the mantissa, iterated from the exact level-3 value
        assert z.is_real
        sign, log_r = z.real_signed()
        assert sign == 1
        assert log_r < -mpf(10) ** 20  # hyper-tiny but tracked in logs


def test_orbit_levels_and_escape_depths():
    with working_precision(128):
        p = small_params()
        # starting outside the closed disk
        tr = orbit(p, LogPolarComplex.from_real(mpf(2)), 2)
        assert tr.escaped_at == -1 and not tr.survived
        # x = 1 is a fixed point of every level
        tr1 = orbit(p, LogPolarComplex.one(), 2)
        assert tr1.survived and tr1.escaped_at is None
        # a point inside the disk but outside the level-0 preimage disk
        tr2 = orbit(p, LogPolarComplex.from_rect(mpf(0), mpf("0.9")), 2)
        assert tr2.escaped_at == 0
        assert not tr2.in_level_set(0)
        # deep in the left half: survives level 0 only if inside K_0
        tr3 = orbit(p, LogPolarComplex.from_real(mpf("0.2")), 2)
        assert tr3.escaped_at == 0  # left of the preimage disk [1/3, 1]


def test_orbit_membership_matches_level_sets():
    with working_precision(128):
        p = small_params()
        center, radius = moebius_preimage_disk(p.t(0))
        inside = LogPolarComplex.from_real(center)
        tr = orbit(p, inside, 1)
        assert tr.in_level_set(0)


def test_compose_phi_is_iterated_phi():
    with working_precision(128):
        p = small_params()
        z = LogPolarComplex.from_rect(mpf("0.6"), mpf("0.05"))
        w1 = compose_phi(p, 2, z)
        w2 = phi_apply(p, 1, phi_apply(p, 0, z))
        assert abs(w1.log_r - w2.log_r) < mpf(2) ** -100
        assert abs(w1.theta - w2.theta) < mpf(2) ** -100


def test_membership_tolerance_tracks_precision():
    with working_precision(128):
        assert membership_tolerance() == mpf(2) ** -64
    with working_precision(512):
        assert membership_tolerance() == mpf(2) ** -256


def test_resolve_precision_auto():
    p = ModelParams(1.5, RotationSequence.from_fractions(["1/3", "1/2"]),
                    precision="auto")
    assert p.resolve_precision(2) == 256  # floor dominates tiny q
    rule = GeneratorRule(kind="tower", q0=3)
    deep = ModelParams(2, RotationSequence(rule=rule), precision="auto")
    assert deep.resolve_precision(40) == 4096  # cap under tower growth

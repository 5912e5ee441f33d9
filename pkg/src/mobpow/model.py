"""The disk model: level maps, their compositions, and escape depth.

Level n applies z -> (M_n(z))^{q_n} with the Moebius map
M_n(z) = (1 - t_n/z)/(1 - t_n), t_n = C p_n/q_n.  A point of the closed unit
disk belongs to the n-th compact set iff all compositions up to level n stay
in the closed disk; the residual set is the intersection over all n.

Levels whose t underflows (q beyond representable range) are evaluated with
the limit form log phi(z) = C p (1 - 1/z), which is the q -> inf limit of
q log M(z) at fixed q*t = C*p.  Error relative to the true map is O(t),
i.e. below every representable number at such levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .numerics import (
    LogPolarComplex,
    NumericsError,
    auto_precision_bits,
    exp2_cap,
    exp_big,
    pow_int,
    reduce_angle,
    working_precision,
)
from .sequences import GeneratorRule, QVal, Rotation, RotationSequence


class ModelError(ValueError):
    pass


def _eval_constant(spec):
    """Evaluate the constant C at the current working precision.

    Accepts numbers, numeric strings, a (num, den) pair, and the symbolic
    forms 'pi' or '<factor>*pi' (evaluated at the working precision so the
    constant never limits accuracy).
    """
    if isinstance(spec, str) and spec.endswith("pi"):
        head = spec[:-2].rstrip("*")
        return (mpf(head) if head else mpf(1)) * mp.pi
    if isinstance(spec, tuple):
        num, den = spec
        return mpf(num) / mpf(den)
    return mpf(spec)


class ModelParams:
    """Constant C > 1 plus the rotation-number sequence.

    ``c_spec`` is kept symbolically ('pi', a (num, den) pair, or a string /
    number mpmath accepts) so C can be re-evaluated at whatever precision an
    operation runs at.  ``precision`` is a bit count or 'auto'.
    """

    def __init__(self, c, rotations: RotationSequence, precision=256):
        self.c_spec = c
        self.rotations = rotations
        self.precision = precision
        with working_precision(64):
            if _eval_constant(c) <= 1:
                raise ModelError("C must exceed 1")
        self._t_cache = {}

    @classmethod
    def from_fractions(cls, c, fractions, precision=256):
        return cls(c, RotationSequence.from_fractions(fractions), precision)

    @classmethod
    def from_rule(cls, c, rule: GeneratorRule, precision=256):
        return cls(c, RotationSequence(rule=rule), precision)

    def with_constant(self, c):
        return ModelParams(c, self.rotations, self.precision)

    @property
    def C(self):
        return _eval_constant(self.c_spec)

    def rotation(self, n) -> Rotation:
        return self.rotations[n]

    def resolve_precision(self, horizon):
        """Bits for a depth-``horizon`` computation (auto mode sums log2 q)."""
        if self.precision != "auto":
            return int(self.precision)
        logs = [self.rotations[k].q.log2_value() for k in range(horizon)]
        return auto_precision_bits(logs)

    # -- t values -----------------------------------------------------

    def t(self, n):
        """t_n = C p_n / q_n at the current working precision.

        Returns 0 when t_n underflows the representable range (flagged by
        t == 0; the true value is a positive number below every mpf).
        Raises when t_n lands outside (0, 1) for representable values.
        """
        key = (n, mp.prec)
        if key in self._t_cache:
            return self._t_cache[key]
        rot = self.rotations[n]
        t = self.C * rot.value()
        if t >= 1:
            raise ModelError(
                "t_%d = C*p/q = %s not in (0,1)" % (n, mpmath.nstr(t, 8)))
        if t < 0:
            raise ModelError("t_%d negative" % n)
        self._t_cache[key] = t
        return t

    def t_underflowed(self, n):
        return self.t(n) == 0

    def validate_prefix(self, horizon):
        """Check t_n in (0,1) for all n < horizon; raises on violation."""
        for n in range(horizon):
            self.t(n)


def t_value(params: ModelParams, n):
    """t_n = C p_n/q_n; errors if outside the open unit interval."""
    return params.t(n)


def moebius_apply(t, z: LogPolarComplex) -> LogPolarComplex:
    """M_t(z) = (1 - t/z)/(1 - t): sends 0 to inf, t to 0, 1 to itself.

    Works directly in log-polar so z may carry a log-magnitude far outside
    the materializable range; only the ratio t/z is ever exponentiated.
    """
    t = mpf(t)
    if not (0 <= t < 1):
        raise ModelError("Moebius parameter t must lie in [0, 1)")
    log_one_minus_t = mpmath.log1p(-t)
    if z.is_zero:
        return LogPolarComplex.infinity()
    if z.is_inf:
        return LogPolarComplex(-log_one_minus_t, 0)
    if t == 0:
        # degenerate constant map (underflowed t); callers use the limit
        # form at the phi level, this branch only serves direct calls
        return LogPolarComplex.one()
    if z.deep:
        # z below every representable positive number, in particular below
        # t: M(z) ~ -(t/z)/(1-t), a huge negative real direction
        return LogPolarComplex.infinity()
    log_ratio = mpmath.log(t) - z.log_r  # log |t/z|
    cap = exp2_cap() * mpmath.ln(2)
    if log_ratio > cap:
        # t/z astronomically huge: M(z) ~ -(t/z)/(1-t)
        return LogPolarComplex(log_ratio - log_one_minus_t,
                               reduce_angle(mp.pi - z.theta))
    if log_ratio < -cap:
        # t/z below resolution: M(z) ~ 1/(1-t)
        return LogPolarComplex(-log_one_minus_t, 0)
    ratio = exp_big(log_ratio)
    wr = 1 - ratio * mpmath.cos(-z.theta)
    wi = -ratio * mpmath.sin(-z.theta)
    w = LogPolarComplex.from_rect(wr, wi)
    if w.is_zero:
        return LogPolarComplex.zero()
    return LogPolarComplex(w.log_r - log_one_minus_t, w.theta)


def moebius_inverse_apply(t, w: LogPolarComplex) -> LogPolarComplex:
    """M_t^{-1}(w) = t / (1 - w (1 - t)) for finite moderate values."""
    t = mpf(t)
    if w.is_inf:
        return LogPolarComplex.zero()
    wr, wi = w.to_rect()
    one_minus_t = 1 - t
    dr = 1 - wr * one_minus_t
    di = -wi * one_minus_t
    d = LogPolarComplex.from_rect(dr, di)
    if d.is_zero:
        return LogPolarComplex.infinity()
    return LogPolarComplex(mpmath.log(t) - d.log_r, reduce_angle(-d.theta))


def moebius_preimage_disk(t):
    """Center and radius of M_t^{-1}(closed unit disk).

    The preimage is the closed disk with diameter [t/(2-t), 1]; it lies
    strictly to the right of 0.
    """
    t = mpf(t)
    if not (0 < t < 1):
        raise ModelError("t must lie in (0, 1)")
    left = t / (2 - t)
    return (1 + left) / 2, (1 - left) / 2


def _phi_limit(cp, z: LogPolarComplex) -> LogPolarComplex:
    """Limit form of the level map for underflowed t: log phi = cp (1 - 1/z)."""
    if z.is_zero:
        return LogPolarComplex.infinity()
    if z.is_inf:
        return LogPolarComplex(cp, 0)
    if z.deep:
        # positive quantity below all representable scales, still above the
        # (even smaller) true t at such a level: 1/z is a huge positive real
        return LogPolarComplex.deep_zero()
    inv_log = -z.log_r  # log |1/z|
    cap = exp2_cap() * mpmath.ln(2)
    if inv_log > cap:
        c = mpmath.cos(-z.theta)
        if c > 0:
            return LogPolarComplex.deep_zero()
        # Re(1/z) <= 0 at huge magnitude: |phi| = exp(cp(1 - Re 1/z)) >> 1
        return LogPolarComplex.infinity()
    inv_mag = exp_big(inv_log)
    inv_re = inv_mag * mpmath.cos(-z.theta)
    inv_im = inv_mag * mpmath.sin(-z.theta)
    log_r = cp * (1 - inv_re)
    if log_r > cap:
        return LogPolarComplex.infinity()
    if -log_r > cap:
        return LogPolarComplex.deep_zero()
    return LogPolarComplex(log_r, reduce_angle(-cp * inv_im))


def _phi_small_ratio(t, q, z: LogPolarComplex, log_ratio) -> LogPolarComplex:
    """log phi = q*(log(1 - t/z) - log(1 - t)) computed to full relative
    precision when |t/z| is tiny.

    The rectangular Moebius step computes 1 - t/z, which rounds the ratio
    away entirely once it drops below 2^-P relative to 1; a level with huge
    q then multiplies the lost term back up to order q*t = C*p.  Expanding
    the logarithm as a short series in t/z keeps every significant bit.
    """
    u = exp_big(log_ratio)
    uc = mpmath.mpc(u * mpmath.cos(-z.theta), u * mpmath.sin(-z.theta))
    # log(1 - u) = -(u + u^2/2 + ... ); |u| <= 2^-P/4 so 6 terms overshoot
    s = mpmath.mpc(0)
    for j in range(6, 0, -1):
        s = uc * (s + mpf(1) / j)
    log_m = -s - mpmath.log1p(-t)
    log_r = q * log_m.real
    cap = exp2_cap() * mpmath.ln(2)
    if log_r > cap:
        return LogPolarComplex.infinity()
    if -log_r > cap:
        return LogPolarComplex.deep_zero()
    return LogPolarComplex(log_r, reduce_angle(q * log_m.imag))


def phi_apply(params: ModelParams, n, z: LogPolarComplex) -> LogPolarComplex:
    """Level map phi_n(z) = (M_n(z))^{q_n}; sentinels propagate, never fails."""
    rot = params.rotation(n)
    t = params.t(n)
    if t == 0:
        return _phi_limit(params.C * rot.p, z)
    if rot.q.is_exact:
        q = rot.q.exact
    else:
        q = rot.q.as_mpf()
        if q == mpf("+inf"):
            # unreachable for sane sequences: huge q implies underflowed t
            return _phi_limit(params.C * rot.p, z)
    if z.is_finite:
        log_ratio = mpmath.log(t) - z.log_r
        cap = exp2_cap() * mpmath.ln(2)
        if -cap < log_ratio < -(mp.prec // 4) * mpmath.ln(2):
            return _phi_small_ratio(t, q, z, log_ratio)
    return pow_int(moebius_apply(t, z), q)


@dataclass
class EscapeTrace:
    """Successive images z, phi_0(z), phi_1(phi_0(z)), ... and escape depth.

    The level-n compact set is "levels 0..n keep the point in the closed
    disk"; its component count is the product of the first n denominators
    (the level-0 set is a single disk, the level-0 preimage of the unit
    disk).

    ``escaped_at`` is the index of the level whose application left the
    closed disk (-1 when the starting point was already outside, None when
    every requested level was survived).  ``levels[k]`` is the value before
    level k is applied, so levels[0] is the starting point.
    """

    levels: list
    escaped_at: int | None
    n_levels: int

    @property
    def survived(self):
        return self.escaped_at is None

    def in_level_set(self, n):
        """Membership in the level-n compact set (needs n < n_levels run).

        Matches the raster convention: level n requires surviving levels
        0 through n inclusive."""
        return self.escaped_at is None or self.escaped_at > n


def membership_tolerance():
    """Closed-disk tolerance on log|z| at the current precision: 2^-P/2."""
    return mpf(2) ** -(mp.prec // 2)


def _outside_disk(z: LogPolarComplex, eps):
    if z.is_inf:
        return True
    if z.is_zero or z.deep:
        return False
    return z.log_r > eps


def orbit(params: ModelParams, z: LogPolarComplex, n_levels) -> EscapeTrace:
    """Apply levels 0..n_levels-1 to z, stopping at the first escape.

    Membership in the closed disk is tested with tolerance 2^-P/2 on log|z|
    (P = working precision) to avoid boundary flapping.
    """
    eps = membership_tolerance()
    levels = [z]
    if _outside_disk(z, eps):
        # starting point already outside the closed disk
        return EscapeTrace(levels, escaped_at=-1, n_levels=n_levels)
    cur = z
    for n in range(n_levels):
        if not params.rotations.available(n):
            raise ModelError("level %d beyond available sequence" % n)
        if cur.is_finite and cur.log_r == 0 and cur.theta == 0:
            cur = LogPolarComplex.one()  # exact fixed point, no roundoff
            levels.append(cur)
            continue
        cur = phi_apply(params, n, cur)
        levels.append(cur)
        if _outside_disk(cur, eps):
            return EscapeTrace(levels, escaped_at=n, n_levels=n_levels)
    return EscapeTrace(levels, escaped_at=None, n_levels=n_levels)


def compose_phi(params: ModelParams, n_levels, z: LogPolarComplex) -> LogPolarComplex:
    """The composition through level n_levels - 1 applied to z, no escape test.

    Used by the real-axis solvers, which need the actual (possibly huge or
    negative) value rather than an escape verdict.
    """
    cur = z
    for n in range(n_levels):
        if cur.is_finite and cur.log_r == 0 and cur.theta == 0:
            continue  # fixed point 1
        cur = phi_apply(params, n, cur)
    return cur

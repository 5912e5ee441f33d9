"""Arbitrary-precision scaffolding for the disk model.

Everything downstream works with mpmath reals ("big reals") plus a log-polar
complex representation (log-magnitude, argument).  The log-polar form is what
makes z -> z^q computable for enormous q: the magnitude update is a single
multiplication of log_r by q, so no overflow/underflow can occur as long as
the *exponent* of the result stays storable.  mpmath exponents are Python
ints, which pushes the usable range to roughly 2^(2^20) in magnitude of
log_r; beyond that we saturate explicitly (see DEEP below) instead of letting
mpmath try to allocate astronomically large integers.
"""

from __future__ import annotations

import mpmath
from mpmath import mp, mpf, workprec

DEFAULT_PRECISION = 256

# Largest |x| for which we will materialize 2^x (or e^x) as an mpf.  The
# exponent of the result is ~x, stored as a Python int, so the practical
# limit is memory/time for million-bit integers.
_EXP2_ARG_CAP_LOG2 = 20


class NumericsError(ValueError):
    pass


class PointAtInfinityError(NumericsError):
    """Raised when a rectangular form is requested for the infinity sentinel."""


def working_precision(bits):
    """Context manager setting the mpmath working precision in bits."""
    return workprec(bits)


def exp2_cap():
    """Threshold T such that 2^x is only materialized for |x| <= T."""
    return mpf(2) ** (2 ** _EXP2_ARG_CAP_LOG2)


def exp2_big(x):
    """2^x for mpf x whose value may be far outside the double range.

    Splits x into integer and fractional parts so that the huge integer part
    goes straight into the mpf exponent (mpmath's generic exp would shift
    mantissas by the argument's value and die).  Raises OverflowError when
    |x| exceeds the saturation cap; callers are expected to saturate.
    """
    x = mpf(x)
    if x == 0:
        return mpf(1)
    if abs(x) > exp2_cap():
        raise OverflowError("exp2 argument beyond saturation cap")
    n = mpmath.floor(x)
    frac = x - n
    return (mpf(2) ** int(n)) * mpmath.exp(frac * mpmath.ln(2))


def exp_big(x):
    """e^x with the same huge-argument handling as exp2_big."""
    x = mpf(x)
    if abs(x) < 1 << 24:
        return mpmath.exp(x)
    return exp2_big(x / mpmath.ln(2))


def reduce_angle(theta):
    """Reduce an angle to (-pi, pi] using pi at the working precision."""
    theta = mpf(theta)
    pi = mp.pi
    two_pi = 2 * pi
    if -pi < theta <= pi:
        return theta
    k = mpmath.floor((theta + pi) / two_pi)
    theta = theta - k * two_pi
    # roundoff can leave us a hair outside the half-open interval
    if theta > pi:
        theta -= two_pi
    elif theta <= -pi:
        theta += two_pi
    return theta


class LogPolarComplex:
    """A complex number stored as (log magnitude, argument).

    Sentinels: log_r = -inf is the point 0, log_r = +inf the point at
    infinity (theta unused for both).  A third state, "deep", marks a
    positive quantity whose log-magnitude fell below the representable
    range; it is not zero (zero maps to infinity under the Moebius maps)
    but is smaller than every representable positive number.
    """

    __slots__ = ("log_r", "theta", "deep")

    def __init__(self, log_r, theta, deep=False):
        self.log_r = mpf(log_r)
        self.theta = mpf(theta)
        self.deep = deep

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(mpf("-inf"), 0)

    @classmethod
    def infinity(cls):
        return cls(mpf("+inf"), 0)

    @classmethod
    def deep_zero(cls):
        """Positive underflow: below every representable positive number."""
        return cls(mpf("-inf"), 0, deep=True)

    @classmethod
    def one(cls):
        return cls(0, 0)

    @classmethod
    def from_rect(cls, re, im=0):
        re = mpf(re)
        im = mpf(im)
        if re == 0 and im == 0:
            return cls.zero()
        if im == 0:
            log_r = mpmath.ln(abs(re))
            theta = mp.pi if re < 0 else mpf(0)
        else:
            log_r = mpmath.ln(mpmath.hypot(re, im))
            theta = mpmath.atan2(im, re)
        return cls(log_r, reduce_angle(theta))

    @classmethod
    def from_real(cls, x):
        return cls.from_rect(x, 0)

    # -- predicates ---------------------------------------------------

    @property
    def is_zero(self):
        return (not self.deep) and self.log_r == mpf("-inf")

    @property
    def is_inf(self):
        return self.log_r == mpf("+inf")

    @property
    def is_finite(self):
        return not (self.is_zero or self.is_inf or self.deep)

    @property
    def is_real(self):
        return self.theta == 0 or self.theta == mp.pi

    # -- conversions --------------------------------------------------

    def to_rect(self):
        """Rectangular (re, im) pair of mpf.  Deep values collapse to 0."""
        if self.is_inf:
            raise PointAtInfinityError("point at infinity has no rectangular form")
        if self.is_zero or self.deep:
            return mpf(0), mpf(0)
        r = exp_big(self.log_r)
        return r * mpmath.cos(self.theta), r * mpmath.sin(self.theta)

    def to_mpc(self):
        re, im = self.to_rect()
        return mpmath.mpc(re, im)

    def real_signed(self):
        """The value as a signed real magnitude-log: (sign, log_r).

        Only valid for real points (theta 0 or pi)."""
        if not self.is_real:
            raise NumericsError("not a real point")
        sign = -1 if self.theta == mp.pi else 1
        return sign, self.log_r

    # -- arithmetic ---------------------------------------------------

    def conj(self):
        if not self.is_finite:
            return self
        return LogPolarComplex(self.log_r, reduce_angle(-self.theta))

    def reciprocal(self):
        if self.is_zero:
            return LogPolarComplex.infinity()
        if self.is_inf or self.deep:
            return LogPolarComplex.zero() if self.is_inf else LogPolarComplex.infinity()
        return LogPolarComplex(-self.log_r, reduce_angle(-self.theta))

    def __repr__(self):
        if self.is_zero:
            return "LogPolarComplex<0>"
        if self.deep:
            return "LogPolarComplex<deep zero>"
        if self.is_inf:
            return "LogPolarComplex<inf>"
        return "LogPolarComplex(log_r=%s, theta=%s)" % (
            mpmath.nstr(self.log_r, 12), mpmath.nstr(self.theta, 12))


def to_log_polar(re, im=0):
    """Rectangular big-real pair -> log-polar."""
    return LogPolarComplex.from_rect(re, im)


def from_log_polar(u):
    """Log-polar -> rectangular pair.  Errors on the infinity sentinel."""
    return u.to_rect()


def _mpf_is_even_integer(q):
    """True when the mpf q is an even integer (normalized mantissa check)."""
    sign, man, exp, bc = mpf(q)._mpf_
    return man != 0 and exp >= 1


def pow_int(u, q):
    """u^q in log-polar form.

    q may be a positive int, or an mpf for levels whose q exceeds exact
    integer range.  For mpf q the argument must be 0 or pi (real points):
    tracking a general argument through such a power would need more
    precision than any configured level provides, so we fail loudly.
    """
    if isinstance(q, int):
        if q < 1:
            raise NumericsError("pow_int requires q >= 1")
    elif not (isinstance(q, mpf) and q >= 1):
        raise NumericsError("pow_int requires a positive int or mpf exponent")
    if u.is_zero or u.deep:
        return LogPolarComplex.deep_zero() if u.deep else LogPolarComplex.zero()
    if u.is_inf:
        return LogPolarComplex.infinity()
    log_r = u.log_r * q
    if u.theta == 0:
        theta = mpf(0)
    elif u.theta == mp.pi and isinstance(q, int):
        # keep real points exactly real: rounding in theta*q would knock
        # a negative real value a few ulps off the axis
        theta = mp.pi if q % 2 else mpf(0)
    elif isinstance(q, int):
        theta = reduce_angle(u.theta * q)
    elif u.theta == mp.pi:
        theta = mpf(0) if _mpf_is_even_integer(q) else mp.pi
    else:
        raise NumericsError(
            "cannot track a non-real argument through a power with "
            "beyond-integer exponent")
    if log_r == mpf("-inf") or -log_r > exp2_cap() * mpmath.ln(2):
        return LogPolarComplex.deep_zero()
    if log_r == mpf("+inf") or log_r > exp2_cap() * mpmath.ln(2):
        return LogPolarComplex.infinity()
    return LogPolarComplex(log_r, theta)


def auto_precision_bits(log2_q_values, floor=DEFAULT_PRECISION, cap=4096):
    """Precision for a depth-n computation: 64 + sum of log2(q_k) bits.

    Each level multiplies argument error by q, so the mantissa must absorb
    the full product of the q's.  Saturating sequences would demand
    unbounded precision; the cap keeps auto mode finite (explicit precision
    is available when more is really wanted).
    """
    total = mpf(64)
    for v in log2_q_values:
        total += max(v, mpf(0))
        if total > cap:
            return cap
    bits = int(mpmath.ceil(total))
    return max(floor, min(bits, cap))

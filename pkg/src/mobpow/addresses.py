"""Component addressing: odometer scales, the adding map, and sector labels.

The connected components of the level-n compact set are counted by the
product of the denominators seen so far; each surviving orbit point picks a
digit per level from which sector (around a q-th root of unity) its Moebius
image falls in, relabeled through the inverse of p modulo q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .model import ModelParams, moebius_apply, orbit
from .numerics import LogPolarComplex


class AddressError(ValueError):
    pass


class SectorBoundaryError(AddressError):
    """The point's argument is too close to a sector boundary to classify."""


class EscapedError(AddressError):
    """The orbit escapes before the requested depth."""


class CenterHitError(AddressError):
    """The orbit lands exactly on a component center (pre-image of 0)."""


@dataclass(frozen=True)
class OdometerScale:
    """Sequence of moduli q_n >= 2 with cumulative products N_n."""

    moduli: tuple

    def __init__(self, moduli):
        object.__setattr__(self, "moduli", tuple(int(q) for q in moduli))
        if any(q < 2 for q in self.moduli):
            raise AddressError("every modulus must be >= 2")

    def __len__(self):
        return len(self.moduli)

    def cumulative(self, n):
        """N_n: the product of the first n moduli (N_0 = 1)."""
        out = 1
        for q in self.moduli[:n]:
            out *= q
        return out

    @property
    def order(self):
        return self.cumulative(len(self.moduli))


@dataclass(frozen=True)
class Address:
    """Digits (k_0, ..., k_{n-1}) with k_j reduced modulo the j-th modulus."""

    digits: tuple

    def __init__(self, digits):
        object.__setattr__(self, "digits", tuple(int(k) for k in digits))

    def validate(self, scale: OdometerScale):
        if len(self.digits) > len(scale):
            raise AddressError("address longer than scale")
        for j, k in enumerate(self.digits):
            if not 0 <= k < scale.moduli[j]:
                raise AddressError(
                    "digit %d = %d out of range for modulus %d"
                    % (j, k, scale.moduli[j]))

    def __len__(self):
        return len(self.digits)


def sigma_succ(a: Address, scale: OdometerScale) -> Address:
    """The adding map: increment with carry in mixed radix.

    The all-maximal finite address wraps around to all zeros (on the
    infinite odometer the carry would move past the truncation).
    """
    a.validate(scale)
    digits = list(a.digits)
    for j in range(len(digits)):
        if digits[j] + 1 < scale.moduli[j]:
            digits[j] += 1
            return Address(digits)
        digits[j] = 0
    return Address(digits)


def sector_index(u: LogPolarComplex, q: int) -> int:
    """Index of the q-th-root-of-unity sector containing the direction of u.

    The surviving components sit strictly inside open sectors of half-angle
    pi/q around each q-th root of unity; a direction within 2^-P/4 of a
    sector boundary therefore cannot belong to any component and is
    rejected.
    """
    if q < 2:
        raise AddressError("q must be >= 2")
    if u.is_zero or u.is_inf or u.deep:
        raise AddressError("sector index undefined for 0/inf")
    scaled = u.theta * q / (2 * mp.pi)
    nearest = mpmath.nint(scaled)
    guard = mpf(2) ** -(mp.prec // 4)
    # distance to the boundary between sectors, in angle units
    if abs(scaled - nearest) * (2 * mp.pi / q) > mp.pi / q - guard:
        raise SectorBoundaryError("argument within guard band of a sector boundary")
    return int(nearest) % q


def component_label(m: int, p: int, q: int) -> int:
    """Label of the sector-m component: k with k*p = m (mod q)."""
    if math.gcd(p, q) != 1:
        raise AddressError("p = %d not invertible modulo %d" % (p, q))
    return (m * pow(p, -1, q)) % q


def address_of(params: ModelParams, z: LogPolarComplex, n: int) -> Address:
    """Address digits of z through depth n.

    Digit j is the label of the component of the level-j preimage of the
    closed disk that the j-th orbit point falls in, read off from the
    sector of its Moebius image.
    """
    trace = orbit(params, z, n)
    if trace.escaped_at is not None:
        # an exact zero along the way is a center hit, not a true escape
        # (the next Moebius map sends 0 to infinity)
        for j, zj in enumerate(trace.levels):
            if zj.is_zero:
                raise CenterHitError(
                    "orbit hit a component center at level %d; address "
                    "defined only up to that level" % j)
        raise EscapedError(
            "orbit escaped at level %d; no depth-%d address" %
            (trace.escaped_at, n))
    digits = []
    for j in range(n):
        zj = trace.levels[j]
        if zj.is_zero:
            raise CenterHitError(
                "orbit hit a component center at level %d; address defined "
                "only up to that level" % j)
        rot = params.rotation(j)
        q = rot.q.as_int()
        u = moebius_apply(params.t(j), zj)
        if u.is_zero:
            raise CenterHitError(
                "orbit hit a component center at level %d; address defined "
                "only up to that level" % (j + 1))
        m = sector_index(u, q)
        digits.append(component_label(m, rot.p, q))
    return Address(digits)


def scale_of(params: ModelParams, n: int) -> OdometerScale:
    """Odometer scale of the first n levels (requires exact denominators)."""
    return OdometerScale([params.rotation(j).q.as_int() for j in range(n)])

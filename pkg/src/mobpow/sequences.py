"""Rotation-number sequences, including lazily generated tails.

Fast-growing generator rules (tower growth in particular) leave the exact
integer range after a handful of levels, so each denominator is carried as a
``QVal``: an exact int while feasible, then a base-2 logarithm (mpf), then a
saturated HUGE marker.  All downstream consumers go through ``QVal`` helpers
so the saturation logic lives in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .numerics import exp2_big, exp2_cap

# q kept as an exact int while its bit length stays below this
_EXACT_BITS_CAP = 1 << 20

_INF = mpf("+inf")


class SequenceError(ValueError):
    pass


class QVal:
    """A positive integer that may be far beyond exact representation.

    States, in order of degradation:
      * exact   -- Python int
      * log2    -- only log2(q) is stored (mpf, possibly itself huge)
      * huge    -- log2(q) is not representable either; q exceeds 2^(2^20)
                   raised to powers beyond bookkeeping.  Only order
                   comparisons against representable numbers remain valid.
    """

    __slots__ = ("exact", "log2")

    def __init__(self, exact=None, log2=None):
        if exact is not None:
            if exact < 1:
                raise SequenceError("q must be a positive integer")
            self.exact = int(exact)
            self.log2 = None
        else:
            self.exact = None
            self.log2 = mpf(log2)

    @classmethod
    def from_int(cls, q):
        return cls(exact=q)

    @classmethod
    def huge(cls):
        return cls(log2=_INF)

    @property
    def is_exact(self):
        return self.exact is not None

    @property
    def is_huge(self):
        return self.exact is None and self.log2 == _INF

    def log2_value(self):
        """log2(q) as mpf (exact path computed at working precision)."""
        if self.exact is not None:
            if self.exact.bit_length() <= 64:
                return mpmath.log(self.exact, 2)
            # big exact ints: log via bit length split to avoid precision loss
            return mpmath.log(mpf(self.exact), 2)
        return self.log2

    def as_mpf(self):
        """q as an mpf, or +inf when its exponent is not storable."""
        if self.exact is not None:
            return mpf(self.exact)
        if self.log2 == _INF or self.log2 > exp2_cap():
            return _INF
        return exp2_big(self.log2)

    def as_int(self):
        if self.exact is None:
            raise SequenceError("q exceeds exact integer range")
        return self.exact

    def reciprocal_mpf(self):
        """1/q as mpf; 0 (positive underflow) when below representable range."""
        if self.exact is not None:
            return 1 / mpf(self.exact)
        if self.log2 == _INF or self.log2 > exp2_cap():
            return mpf(0)
        return exp2_big(-self.log2)

    def __repr__(self):
        if self.exact is not None:
            if self.exact.bit_length() > 80:
                return "QVal(~2^%d)" % self.exact.bit_length()
            return "QVal(%d)" % self.exact
        if self.is_huge:
            return "QVal(huge)"
        return "QVal(log2=%s)" % mpmath.nstr(self.log2, 10)


@dataclass(frozen=True)
class Rotation:
    """A reduced fraction p/q in (0, 1); q possibly beyond integer range."""

    p: int
    q: QVal

    def __post_init__(self):
        if self.p < 1:
            raise SequenceError("p must be a positive integer")
        if self.q.is_exact:
            q = self.q.exact
            if not (0 < self.p < q):
                raise SequenceError("fraction %d/%d not in (0, 1)" % (self.p, q))
            if math.gcd(self.p, q) != 1:
                raise SequenceError("fraction %d/%d is not reduced" % (self.p, q))

    @classmethod
    def of(cls, p, q):
        return cls(p, QVal.from_int(q))

    def value(self):
        """p/q as mpf (0 on underflow)."""
        return self.p * self.q.reciprocal_mpf()

    def as_fraction(self):
        return Fraction(self.p, self.q.as_int())


@dataclass(frozen=True)
class GeneratorRule:
    """Extension rule for the denominator tail, with constant numerator.

    kinds:
      affine     q' = a*q + b
      geometric  q' = m*q
      tower      q' = m**q
    """

    kind: str
    q0: int
    p: int = 1
    a: int = 2
    b: int = 1
    m: int = 2

    def __post_init__(self):
        if self.kind not in ("affine", "geometric", "tower"):
            raise SequenceError("unknown generator kind %r" % (self.kind,))
        if self.q0 < 2:
            raise SequenceError("generator q0 must be >= 2")
        if self.kind == "affine" and (self.a < 1 or self.b < 0 or self.a + self.b < 2):
            raise SequenceError("affine rule must grow")
        if self.kind in ("geometric", "tower") and self.m < 2:
            raise SequenceError("growth factor m must be >= 2")

    def step(self, q: QVal) -> QVal:
        if self.kind == "affine":
            if q.is_exact:
                nxt = self.a * q.exact + self.b
                if nxt.bit_length() <= _EXACT_BITS_CAP:
                    return QVal.from_int(nxt)
                return QVal(log2=q.log2_value() + mpmath.log(self.a, 2))
            if q.is_huge:
                return QVal.huge()
            return QVal(log2=q.log2 + mpmath.log(self.a, 2))
        if self.kind == "geometric":
            if q.is_exact:
                nxt = self.m * q.exact
                if nxt.bit_length() <= _EXACT_BITS_CAP:
                    return QVal.from_int(nxt)
                return QVal(log2=q.log2_value() + mpmath.log(self.m, 2))
            if q.is_huge:
                return QVal.huge()
            return QVal(log2=q.log2 + mpmath.log(self.m, 2))
        # tower
        qm = q.as_mpf()
        if qm == _INF:
            return QVal.huge()
        if q.is_exact and q.exact * math.log2(self.m) <= _EXACT_BITS_CAP:
            return QVal.from_int(self.m ** q.exact)
        log2_next = qm * mpmath.log(self.m, 2)
        return QVal(log2=log2_next)

    def coprime_ok(self, q: QVal) -> bool:
        if not q.is_exact:
            return True  # p=1 in practice; larger p with huge q unverifiable
        return math.gcd(self.p, q.exact) == 1

    def levin_log2(self, q_n: QVal) -> mpf:
        """log2 of (p/q_{n+1})^(1/q_n) via the rule's closed form.

        Used when the direct computation saturates; exact cancellation of
        log2(q_{n+1}) = f(q_n) is what makes deep levels computable.
        """
        inv_qn = q_n.reciprocal_mpf()
        log2p = mpmath.log(self.p, 2) if self.p > 1 else mpf(0)
        if self.kind == "tower":
            # log2 q_{n+1} = q_n log2 m  =>  ratio is -log2 m + log2(p)/q_n
            return log2p * inv_qn - mpmath.log(self.m, 2)
        # affine/geometric: log2 q_{n+1} ~= log2 q_n + const
        qn_log2 = q_n.log2_value()
        if qn_log2 == _INF:
            return mpf(0)  # v_n -> 1
        growth = mpmath.log(self.a if self.kind == "affine" else self.m, 2)
        return (log2p - growth - qn_log2) * inv_qn


class RotationSequence:
    """Explicit prefix of rotations plus an optional lazy generator tail."""

    def __init__(self, prefix=(), rule: GeneratorRule | None = None):
        self._rotations = list(prefix)
        self.rule = rule
        if rule is not None and not self._rotations:
            self._rotations.append(Rotation.of(rule.p, rule.q0))
        if not self._rotations:
            raise SequenceError("empty rotation sequence")

    @classmethod
    def from_fractions(cls, fractions):
        """fractions: iterable of (p, q) pairs, Fractions, or 'p/q' strings."""
        rots = []
        for f in fractions:
            if isinstance(f, str):
                f = Fraction(f)
            if isinstance(f, Fraction):
                rots.append(Rotation.of(f.numerator, f.denominator))
            else:
                p, q = f
                rots.append(Rotation.of(p, q))
        return cls(rots)

    @property
    def is_finite(self):
        return self.rule is None

    def __len__(self):
        if self.rule is not None:
            raise SequenceError("generated sequence has no finite length")
        return len(self._rotations)

    def available(self, n):
        """True when index n can be produced."""
        return self.rule is not None or n < len(self._rotations)

    def __getitem__(self, n) -> Rotation:
        if n < 0:
            raise IndexError(n)
        while n >= len(self._rotations):
            if self.rule is None:
                raise IndexError("rotation index %d beyond explicit sequence" % n)
            last = self._rotations[-1]
            q_next = self.rule.step(last.q)
            if not self.rule.coprime_ok(q_next):
                raise SequenceError(
                    "generator produced q not coprime with p=%d" % self.rule.p)
            self._rotations.append(Rotation(self.rule.p, q_next))
        return self._rotations[n]

    def prefix(self, n):
        return [self[k] for k in range(n)]

"""Real-axis computations and verdicts for the disk model.

Covers the component centers on the real axis, the left endpoint of the
critical segment, horizon-bounded membership checks for the candidate
condition Phi_n(x) >= t_{n+1}, the explicit limsup test on the rotation
numbers, the lower-bound recursion x_{n+1} = ((1 - t_n/x_n)/(1 - t_n))^{q_n},
monotonicity in the constant C, and the sampling validators for the sector
and argument bounds.

All verdicts are horizon-bounded semi-decisions: "holds-to-horizon" is
evidence, "fails-at(n)" is definitive for the tested candidate only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .addresses import AddressError, address_of
from .model import (
    ModelParams,
    compose_phi,
    membership_tolerance,
    moebius_inverse_apply,
    phi_apply,
)
from .numerics import (
    LogPolarComplex,
    exp2_cap,
    exp_big,
    working_precision,
)
from .sequences import RotationSequence


class CriterionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# signed-log real comparisons


def _real_minus_t_sign(v: LogPolarComplex, t):
    """Sign of (v - t) for a real log-polar v and t >= 0 (0 = underflow)."""
    if v.is_inf:
        return 1
    if v.is_zero:
        return -1  # exact zero is below the (positive) target
    if v.deep:
        # below every representable positive, but above an underflowed t
        return 1 if t == 0 else -1
    sign, lr = v.real_signed()
    if sign < 0:
        return -1
    if t == 0:
        return 1
    lt = mpmath.log(t)
    if lr > lt:
        return 1
    if lr < lt:
        return -1
    return 0


def _real_as_mpf(v: LogPolarComplex):
    """Materialize a real log-polar value; saturates far out of range."""
    if v.is_inf:
        return mpf("+inf")
    if v.is_zero or v.deep:
        return mpf(0)
    sign, lr = v.real_signed()
    cap = exp2_cap() * mpmath.ln(2)
    if lr > cap:
        return mpf("+inf") * sign
    if -lr > cap:
        return mpf(0)
    return sign * exp_big(lr)


def _real_ge(a: LogPolarComplex, b: LogPolarComplex, tol_log):
    """a >= b up to relative tolerance exp(tol_log) on positive values."""
    sa = 0 if (a.is_zero or a.deep) else (a.real_signed()[0] if not a.is_inf else 1)
    sb = 0 if (b.is_zero or b.deep) else (b.real_signed()[0] if not b.is_inf else 1)
    if sa > sb:
        return True
    if sa < sb:
        return False
    if sa == 0:
        return not (a.is_zero and b.deep)  # deep > exact zero
    if a.is_inf or b.is_inf:
        return a.is_inf
    la, lb = a.log_r, b.log_r
    if sa > 0:
        return la >= lb - tol_log
    return la <= lb + tol_log


# ---------------------------------------------------------------------------
# centers and the critical-segment endpoint


def solve_center(params: ModelParams, n, prev_center=None):
    """The real pre-image of 0 at level n inside the critical component.

    s_0 = t_0; for n >= 1, s_n solves Phi_{n-1}(x) = t_n by bisection on
    (s_{n-1}, 1), where the composition is monotone increasing.  When t_n
    underflows the representable range the increment s_n - s_{n-1} is below
    every representable number and s_{n-1} is returned unchanged.
    """
    if n == 0:
        return params.t(0)
    if prev_center is None:
        prev_center = solve_center(params, n - 1,
                                   solve_center(params, n - 2) if n > 1 else None)
    t = params.t(n)
    if t == 0:
        return prev_center
    a, b = prev_center, mpf(1)
    fb = _real_minus_t_sign(compose_phi(params, n, LogPolarComplex.from_real(b)), t)
    if fb < 0:
        raise CriterionError("no sign change: t_%d outside the image of (s_%d, 1)"
                             % (n, n - 1))
    # run to bracket exhaustion: the target value can sit on a slope of
    # thousands of orders of magnitude per ulp, so no value-based stopping
    # rule is trustworthy, only x-resolution
    while True:
        mid = (a + b) / 2
        if mid <= a or mid >= b:
            break
        s = _real_minus_t_sign(
            compose_phi(params, n, LogPolarComplex.from_real(mid)), t)
        if s == 0:
            return mid
        if s < 0:
            a = mid
        else:
            b = mid
    return (a + b) / 2


def centers(params: ModelParams, horizon):
    """s_0, ..., s_horizon computed at the resolved precision."""
    bits = params.resolve_precision(horizon)
    with working_precision(bits):
        out = [params.t(0)]
        for n in range(1, horizon + 1):
            out.append(solve_center(params, n, out[-1]))
        return out


@dataclass
class X0Estimate:
    horizon: int
    precision: int
    centers: list
    x0_lower: mpf
    gap: mpf
    increments: list


def estimate_x0(params: ModelParams, horizon) -> X0Estimate:
    """Lower bound for the critical-segment endpoint: the last center.

    The centers increase toward the endpoint; the gap 1 - s_N is the model
    length of the critical real segment at this horizon.  A gap that
    stabilizes at a positive value is the model-level signal that the
    critical component is a nontrivial segment (evidence only, never a
    certificate).
    """
    if horizon < 1:
        raise CriterionError("horizon must be >= 1")
    cs = centers(params, horizon)
    for a, b in zip(cs, cs[1:]):
        if b < a:
            raise CriterionError("centers failed to increase (numerical defect)")
    return X0Estimate(
        horizon=horizon,
        precision=params.resolve_precision(horizon),
        centers=cs,
        x0_lower=cs[-1],
        gap=1 - cs[-1],
        increments=[b - a for a, b in zip(cs, cs[1:])],
    )


# ---------------------------------------------------------------------------
# candidate membership in the criterion class


@dataclass(frozen=True)
class CandidateRule:
    """How the tested point x is chosen.

    kinds: 'theorem' (x = eta*t_0 from alpha, beta), 'fixed' (explicit x),
    'center' (x = s_N + delta*(1 - s_N)).
    """

    kind: str
    alpha: float | None = None
    beta: float | None = None
    x: object = None
    delta: float = 0.5

    def describe(self):
        if self.kind == "theorem":
            return "theorem: x = eta*t0, alpha=%s beta=%s" % (self.alpha, self.beta)
        if self.kind == "fixed":
            return "fixed: x = %s" % (self.x,)
        return "center-based: x = s_N + %s*(1 - s_N)" % (self.delta,)


@dataclass
class CriterionReport:
    horizon: int
    precision: int
    candidate_rule: str
    candidate_x: mpf
    centers: list
    x0_lower: mpf
    gap: mpf
    margins: list        # per-level dicts: level, margin, ok, t_underflowed
    verdict: str         # 'holds-to-horizon' or 'fails-at(n)'

    @property
    def holds(self):
        return self.verdict == "holds-to-horizon"


def _resolve_candidate(params, rule: CandidateRule, horizon, center_list):
    if rule.kind == "theorem":
        alpha = mpf(rule.alpha)
        beta = mpf(rule.beta)
        if not (0 < alpha < 1 < beta < 1 / alpha):
            raise CriterionError("need 0 < alpha < 1 < beta < 1/alpha")
        eta = 1 / (1 - beta * alpha)
        return eta * params.t(0)
    if rule.kind == "fixed":
        return mpf(rule.x)
    if rule.kind == "center":
        s_last = center_list[-1]
        return s_last + mpf(rule.delta) * (1 - s_last)
    raise CriterionError("unknown candidate rule %r" % (rule.kind,))


def check_class_membership(params: ModelParams, rule: CandidateRule,
                           horizon) -> CriterionReport:
    """Margins Phi_n(x) - t_{n+1} for n < horizon and the resulting verdict."""
    bits = params.resolve_precision(horizon + 1)
    with working_precision(bits):
        center_list = centers(params, horizon)
        x = _resolve_candidate(params, rule, horizon, center_list)
        if not (0 < x < 1):
            raise CriterionError(
                "candidate x = %s outside (0, 1)" % mpmath.nstr(x, 8))
        margins = []
        verdict = "holds-to-horizon"
        cur = LogPolarComplex.from_real(x)
        for n in range(horizon):
            cur = phi_apply(params, n, cur)
            t_next = params.t(n + 1)
            sign = _real_minus_t_sign(cur, t_next)
            value = _real_as_mpf(cur)
            margin = value - t_next
            ok = sign >= 0
            margins.append({
                "level": n,
                "phi_value": value,
                "t_next": t_next,
                "margin": margin,
                "ok": ok,
                "t_underflowed": t_next == 0,
            })
            if not ok:
                verdict = "fails-at(%d)" % n
                break
        return CriterionReport(
            horizon=horizon,
            precision=bits,
            candidate_rule=rule.describe(),
            candidate_x=x,
            centers=center_list,
            x0_lower=center_list[-1],
            gap=1 - center_list[-1],
            margins=margins,
            verdict=verdict,
        )


# ---------------------------------------------------------------------------
# explicit limsup test


@dataclass
class LevinReport:
    window: tuple
    values: list
    sup: mpf
    threshold: mpf
    satisfied: bool
    notes: list = field(default_factory=list)


def check_levin(rotations: RotationSequence, window, delta=1e-3,
                precision=256) -> LevinReport:
    """Values v_n = (p_{n+1}/q_{n+1})^(1/q_n) over a window and their sup.

    A finite window cannot certify a limsup; "satisfied" means the windowed
    sup stays below 1 - delta.
    """
    n0, n1 = window
    if n1 <= n0:
        raise CriterionError("empty window")
    with working_precision(precision):
        values = []
        notes = []
        for n in range(n0, n1):
            q_n = rotations[n].q
            nxt = rotations[n + 1]
            log2_qnext = nxt.q.log2_value()
            qn_mpf = q_n.as_mpf()
            if mpmath.isfinite(log2_qnext) and mpmath.isfinite(qn_mpf):
                log2p = mpmath.log(nxt.p, 2) if nxt.p > 1 else mpf(0)
                log2v = (log2p - log2_qnext) / qn_mpf
            elif rotations.rule is not None:
                log2v = rotations.rule.levin_log2(q_n)
            else:
                raise CriterionError(
                    "ratio test value at n=%d beyond representable range "
                    "with no generator rule" % n)
            if log2v < -(1 << 20):
                values.append(mpf(0))
            else:
                values.append(mpf(2) ** log2v)
        sup = max(values)
        threshold = 1 - mpf(delta)
        q_last = rotations[n1].q
        if q_last.is_exact and rotations.rule is None:
            # a sequence that does not even send q -> infinity cannot meet
            # the theorem's standing hypothesis; flag, do not fail
            qs = [rotations[k].q.exact for k in range(n0, n1 + 1)]
            if len(set(qs)) == 1:
                notes.append("degenerate input: q_n constant on the window")
        return LevinReport(
            window=(n0, n1),
            values=values,
            sup=sup,
            threshold=threshold,
            satisfied=sup < threshold,
            notes=notes,
        )


# ---------------------------------------------------------------------------
# lower-bound recursion


@dataclass
class RecursionLevel:
    n: int
    t: mpf
    x: mpf
    eta_t: mpf
    x_ok: bool
    side_ok: bool
    hypothesis_ok: bool
    notes: list = field(default_factory=list)


@dataclass
class RecursionReport:
    alpha: mpf
    beta: mpf
    eta: mpf
    precision: int
    levels: list

    @property
    def all_pass(self):
        return all(l.x_ok and l.side_ok and l.hypothesis_ok for l in self.levels)


def verify_theorem_recursion(rotations: RotationSequence, c, alpha, beta, horizon,
                             precision=512) -> RecursionReport:
    """Iterate x_{n+1} = ((1 - t_n/x_n)/(1 - t_n))^{q_n} from x_0 = eta*t_0.

    Reports, per level: x_n, eta*t_n, the lower-bound comparison, the side
    condition (beta/(1 - t_n))^{q_n} >= C*eta, and the ratio hypothesis
    p_{n+1}/q_{n+1} <= alpha^{q_n}.  Violations are reported, not fatal.

    Underflowed levels use the exact identity q_n * t_n = C * p_n:
    log x_{n+1} = C p_n (1 - 1/x_n) up to corrections of order t_n.
    """
    with working_precision(precision):
        alpha = mpf(alpha)
        beta = mpf(beta)
        if not (0 < alpha < 1 < beta < 1 / alpha):
            raise CriterionError("need 0 < alpha < 1 < beta < 1/alpha")
        eta = 1 / (1 - beta * alpha)
        params = ModelParams(c, rotations, precision)
        C = params.C
        c_eta_log = mpmath.log(C * eta)
        tol = membership_tolerance()
        x = eta * params.t(0)
        levels = []
        for n in range(horizon + 1):
            t = params.t(n)
            rot = rotations[n]
            eta_t = eta * t
            notes = []
            if t == 0:
                notes.append("t underflowed; compared against 0+")
            x_ok = (t == 0 and x > 0) or x >= eta_t * (1 - tol)
            # side condition (beta/(1-t))^q >= C*eta, in logs
            q_mpf = rot.q.as_mpf()
            side_log_per_q = mpmath.log(beta) - mpmath.log1p(-t)
            if mpmath.isfinite(q_mpf):
                side_ok = q_mpf * side_log_per_q >= c_eta_log - tol
            else:
                side_ok = side_log_per_q > 0  # q beyond range: sign decides
            # ratio hypothesis for the step n -> n+1
            hyp_ok = True
            if rotations.available(n + 1):
                hyp_ok = _ratio_hypothesis(rotations, n, alpha, tol)
            level = RecursionLevel(n=n, t=t, x=x, eta_t=eta_t, x_ok=x_ok,
                                   side_ok=side_ok, hypothesis_ok=hyp_ok,
                                   notes=notes)
            levels.append(level)
            if n == horizon:
                break
            if t > 0:
                if x <= t:
                    level.notes.append(
                        "x_n <= t_n: recursion leaves the real line; stopped")
                    break
                ln_base = mpmath.log1p(-t / x) - mpmath.log1p(-t)
                exponent = q_mpf * ln_base
            else:
                exponent = C * rot.p * (1 - 1 / x)
            if abs(exponent) > exp2_cap():
                level.notes.append("iterate left representable range; stopped")
                break
            x = exp_big(exponent)
        return RecursionReport(alpha=alpha, beta=beta, eta=eta,
                               precision=precision, levels=levels)


def _ratio_hypothesis(rotations, n, alpha, tol):
    """p_{n+1}/q_{n+1} <= alpha^{q_n}, i.e. the step's root value <= alpha."""
    q_n = rotations[n].q
    nxt = rotations[n + 1]
    log2_qnext = nxt.q.log2_value()
    qn_mpf = q_n.as_mpf()
    if mpmath.isfinite(log2_qnext) and mpmath.isfinite(qn_mpf):
        log2p = mpmath.log(nxt.p, 2) if nxt.p > 1 else mpf(0)
        log2v = (log2p - log2_qnext) / qn_mpf
    elif rotations.rule is not None:
        log2v = rotations.rule.levin_log2(q_n)
    else:
        return False
    return log2v <= mpmath.log(alpha, 2) + tol


# ---------------------------------------------------------------------------
# monotonicity in the constant


@dataclass
class MonotonicityLevel:
    n: int
    x: mpf
    x_prime: mpf
    ordered: bool
    transfer_ok: bool


@dataclass
class MonotonicityReport:
    c: object
    c_prime: object
    x0: mpf
    levels: list

    @property
    def all_pass(self):
        return all(l.ordered and l.transfer_ok for l in self.levels)


def verify_monotonicity(params: ModelParams, c_prime, x0, horizon) -> MonotonicityReport:
    """Shrinking the constant can only help the candidate condition.

    Runs the real orbit of x0 under the original levels (t_n) and under the
    scaled levels (t'_n with constant c_prime <= C) and checks x'_n >= x_n
    at every level, plus the implication "margin ok at C => margin ok at
    c_prime".
    """
    bits = params.resolve_precision(horizon + 1)
    with working_precision(bits):
        if not (1 < _as_mpf_const(c_prime) <= params.C):
            raise CriterionError("need 1 < C' <= C")
        params_p = params.with_constant(c_prime)
        x0 = mpf(x0)
        if not (0 < x0 < 1):
            raise CriterionError("x0 must lie in (0, 1)")
        tol = membership_tolerance()
        tol_log = mpf(2) ** -(mp.prec // 2)
        cur = LogPolarComplex.from_real(x0)
        cur_p = LogPolarComplex.from_real(x0)
        levels = [MonotonicityLevel(0, x0, x0, True, True)]
        for n in range(horizon):
            cur = phi_apply(params, n, cur)
            cur_p = phi_apply(params_p, n, cur_p)
            ordered = _real_ge(cur_p, cur, tol_log)
            margin_c = _real_minus_t_sign(cur, params.t(n + 1)) >= 0
            margin_cp = _real_minus_t_sign(cur_p, params_p.t(n + 1)) >= 0
            transfer_ok = (not margin_c) or margin_cp
            levels.append(MonotonicityLevel(
                n + 1, _real_as_mpf(cur), _real_as_mpf(cur_p), ordered,
                transfer_ok))
        return MonotonicityReport(c=params.c_spec, c_prime=c_prime, x0=x0,
                                  levels=levels)


def _as_mpf_const(spec):
    from .model import _eval_constant
    return _eval_constant(spec)


# ---------------------------------------------------------------------------
# sampling validators


def sample_critical_component(params: ModelParams, n, count, seed=0):
    """Points of the level-n critical component via the inverse branch chain.

    Draw w uniformly in the closed disk, take the level-n Moebius preimage,
    then pull back through each level with the principal q-th root (the
    principal branch lands in the 0-labeled sector).  Each returned point
    is re-verified through its address digits.
    """
    rng = random.Random(seed)
    points = []
    while len(points) < count:
        r = mpmath.sqrt(mpf(rng.random()))
        phi = 2 * mp.pi * mpf(rng.random())
        w = LogPolarComplex.from_rect(r * mpmath.cos(phi), r * mpmath.sin(phi))
        z = moebius_inverse_apply(params.t(n), w)
        for k in range(n - 1, -1, -1):
            q = params.rotation(k).q.as_int()
            root = LogPolarComplex(z.log_r / q, z.theta / q)
            z = moebius_inverse_apply(params.t(k), root)
        try:
            addr = address_of(params, z, n)
        except AddressError:
            continue  # boundary-grazing draw; resample
        if any(addr.digits):
            continue
        points.append(z)
    return points


@dataclass
class SamplingReport:
    checked: int
    violations: list
    bound: mpf

    @property
    def ok(self):
        return not self.violations


def check_sector_bound(params: ModelParams, n, count, seed=0,
                       explore=False) -> SamplingReport:
    """Verified critical-component points obey |arg z| <= (pi/2)(pi/C)^n.

    Requires C >= pi (pass explore=True to merely record violations for
    smaller constants).
    """
    bits = params.resolve_precision(n + 1)
    with working_precision(bits):
        C = params.C
        if C < mp.pi and not explore:
            raise CriterionError("sector bound requires C >= pi "
                                 "(use explore mode below)")
        bound = (mp.pi / 2) * (mp.pi / C) ** n
        tol = membership_tolerance()
        violations = []
        for z in sample_critical_component(params, n, count, seed):
            if abs(z.theta) > bound + tol:
                violations.append((z.theta, z.log_r))
        return SamplingReport(checked=count, violations=violations, bound=bound)


def check_arg_inequality(c, q, count, seed=0, precision=128) -> SamplingReport:
    """Spot-check the paired argument inequalities for one level.

    For t = C/q and z in the closed disk with Re z >= t (equivalently
    |arg(z - t)| <= pi/2), the total argument q*(arg(z-t) - arg z) of the
    level image must exceed C|Im z|/(2|z|^2), and |arg z| is bounded by
    (pi/C)|arg phi(z)||z|.  The total (unwound) argument is used, matching
    how the level map's argument is accumulated through the power.
    """
    with working_precision(precision):
        C = _as_mpf_const(c)
        if C <= 1:
            raise CriterionError("need C > 1")
        t = C / q
        if not (0 < t < 1):
            raise CriterionError("t = C/q must lie in (0, 1)")
        rng = random.Random(seed)
        tol = membership_tolerance()
        violations = []
        checked = 0
        while checked < count:
            r = mpmath.sqrt(mpf(rng.random()))
            phi = 2 * mp.pi * mpf(rng.random())
            zr = r * mpmath.cos(phi)
            zi = r * mpmath.sin(phi)
            if zr < t or abs(zi) <= tol:
                continue
            checked += 1
            mod2 = zr * zr + zi * zi
            mod = mpmath.sqrt(mod2)
            arg_z = mpmath.atan2(zi, zr)
            arg_zt = mpmath.atan2(zi, zr - t)
            arg_phi = q * (arg_zt - arg_z)
            lower = C * abs(zi) / (2 * mod2)
            if abs(arg_phi) <= lower - tol:
                violations.append(("image_arg_lower", zr, zi, arg_phi, lower))
            upper = (mp.pi / C) * abs(arg_phi) * mod
            if abs(arg_z) > upper + tol:
                violations.append(("source_arg_upper", zr, zi, arg_z, upper))
        return SamplingReport(checked=checked, violations=violations,
                              bound=mpf(0))

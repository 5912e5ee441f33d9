"""Command-line front end: job configuration, dispatch, and reports.

Configuration is JSON (see README for the grammar); precedence is
defaults < config file < MOBPOW_* environment variables < command-line
flags.  All validation happens before any computation; reports are
line-delimited JSON written to the output directory.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from . import addresses, criterion, raster, reports
from .model import ModelError, ModelParams, membership_tolerance, orbit
from .numerics import LogPolarComplex, working_precision
from .sequences import GeneratorRule, RotationSequence, SequenceError

COMMANDS = ("render", "criterion", "levin", "verify", "address", "centers")

ENV_PREFIX = "MOBPOW_"


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    c: object = 2
    fractions: list | None = None
    generator: dict | None = None
    precision: object = "auto"
    horizon: int = 8
    # render
    window: dict | None = None
    max_depth: int = 2
    backend: str | None = None
    image: str = "depths.pgm"
    # criterion
    candidate: dict = field(default_factory=lambda: {
        "kind": "theorem", "alpha": 0.5, "beta": 1.5})
    # levin / verify
    delta: float = 1e-3
    alpha: float = 0.5
    beta: float = 1.5
    c_prime: object = None
    samples: int = 1000
    seed: int = 0
    # address
    point: list = field(default_factory=lambda: [0.9, 0.0])
    # output
    out: str = "."
    threads: int | None = None

    def resolved(self):
        """Plain-dict view embedded into report meta records.

        Output location and thread count are dropped: they do not affect
        any computed value, and identical jobs must produce byte-identical
        reports wherever they are written.
        """
        d = dict(self.__dict__)
        d.pop("out", None)
        d.pop("threads", None)
        return d

    # -- construction --------------------------------------------------

    def rotations(self) -> RotationSequence:
        if self.generator is not None:
            g = dict(self.generator)
            rule = GeneratorRule(
                kind=g.get("kind", "tower"), q0=int(g.get("q0", 3)),
                p=int(g.get("p", 1)), a=int(g.get("a", 2)),
                b=int(g.get("b", 1)), m=int(g.get("m", 2)))
            return RotationSequence(rule=rule)
        pairs = []
        for f in self.fractions:
            if isinstance(f, str):
                frac = Fraction(f)
                pairs.append((frac.numerator, frac.denominator))
            else:
                p, q = f
                pairs.append((int(p), int(q)))
        return RotationSequence.from_fractions(pairs)

    def params(self) -> ModelParams:
        return ModelParams(self.c_spec(), self.rotations(), self.precision)

    def c_spec(self):
        return tuple(self.c) if isinstance(self.c, list) else self.c

    def make_window(self) -> raster.Window:
        w = self.window or {}
        return raster.Window(
            x_min=float(w.get("x_min", -1.05)),
            x_max=float(w.get("x_max", 1.05)),
            y_min=float(w.get("y_min", -1.05)),
            y_max=float(w.get("y_max", 1.05)),
            width=int(w.get("width", 512)),
            height=int(w.get("height", 512)))

    # -- validation ----------------------------------------------------

    def validate(self):
        """All violated constraints, as messages (empty list = valid)."""
        errors = []
        if self.command not in COMMANDS:
            errors.append("unknown command %r" % (self.command,))
        sequence_ok = (self.fractions is None) != (self.generator is None)
        if not sequence_ok:
            errors.append("exactly one of 'fractions' or 'generator' required")
        if self.precision != "auto":
            try:
                bits = int(self.precision)
                if bits < 8:
                    errors.append("precision must be >= 8 bits or 'auto'")
            except (TypeError, ValueError):
                errors.append("precision must be an integer or 'auto'")
        if self.horizon < 0:
            errors.append("horizon must be >= 0")
        try:
            with working_precision(64):
                spec = self.c_spec()
                from .model import _eval_constant
                if _eval_constant(spec) <= 1:
                    errors.append("C must exceed 1")
        except (ValueError, TypeError) as e:
            errors.append("bad constant C: %s" % e)
            return errors
        if not sequence_ok:
            return errors
        try:
            rots = self.rotations()
        except (SequenceError, TypeError, ValueError) as e:
            errors.append("bad rotation sequence: %s" % e)
            return errors
        if self.command == "render":
            depth_needed = self.max_depth
        elif self.command == "address":
            # a depth-n address reads levels 0..n-1 only
            depth_needed = self.horizon
        else:
            depth_needed = self.horizon + 1
        if not rots.available(depth_needed - 1):
            errors.append("horizon %d beyond available sequence length %d"
                          % (depth_needed - 1, len(rots)))
            return errors
        try:
            params = self.params()
            with working_precision(params.resolve_precision(depth_needed)):
                params.validate_prefix(depth_needed)
        except (ModelError, SequenceError) as e:
            errors.append(str(e))
        if self.command == "render":
            try:
                self.make_window()
            except raster.RasterError as e:
                errors.append("bad window: %s" % e)
        return errors


def parse_config(text, command=None) -> JobConfig:
    """JSON text -> JobConfig (unvalidated; call .validate())."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config is not valid JSON: %s" % e)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = JobConfig(command=data.pop("command", command or "criterion"))
    for key, value in data.items():
        if not hasattr(cfg, key):
            raise ConfigError("unknown config field %r" % key)
        setattr(cfg, key, value)
    if command is not None:
        cfg.command = command
    return cfg


def _apply_env(cfg: JobConfig, environ=None):
    env = os.environ if environ is None else environ
    mapping = {
        "PRECISION": ("precision", lambda v: v if v == "auto" else int(v)),
        "HORIZON": ("horizon", int),
        "OUT": ("out", str),
        "THREADS": ("threads", int),
        "BACKEND": ("backend", str),
        "SEED": ("seed", int),
    }
    for suffix, (attr, conv) in mapping.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is not None and raw != "":
            try:
                setattr(cfg, attr, conv(raw))
            except ValueError:
                raise ConfigError("bad value for %s%s: %r"
                                  % (ENV_PREFIX, suffix, raw))
    return cfg


def _parse_fractions(text):
    out = []
    for part in text.split(","):
        f = Fraction(part.strip())
        out.append([f.numerator, f.denominator])
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mobpow",
        description="Iterated Moebius-power disk model: rendering, "
                    "centers, and numerical criterion verdicts.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("render", "rasterize escape depths and count components"),
            ("criterion", "candidate membership margins and verdict"),
            ("levin", "explicit ratio-root test over a window of levels"),
            ("verify", "run the validation bundle (disk preimage, argument "
                       "bounds, sector bound, monotonicity, recursion)"),
            ("address", "address digits and successor for a point"),
            ("centers", "real component centers and the gap estimate")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a JSON job configuration")
        p.add_argument("--precision", help="bits or 'auto'")
        p.add_argument("--horizon", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int)
        p.add_argument("--c", dest="c", help="constant C (number or 'pi')")
        p.add_argument("--fractions",
                       help="comma-separated rotation numbers, e.g. 1/3,1/2")
        p.add_argument("--seed", type=int)
        if name == "render":
            p.add_argument("--max-depth", type=int, dest="max_depth")
            p.add_argument("--backend", choices=("numba", "numpy"))
            p.add_argument("--resolution", type=int,
                           help="square pixel count override")
        if name == "verify":
            p.add_argument("--alpha", type=float)
            p.add_argument("--beta", type=float)
            p.add_argument("--samples", type=int)
        if name == "address":
            p.add_argument("--point", help="complex point 're,im'")
    return parser


def _config_from_args(args) -> JobConfig:
    if args.config:
        with open(args.config) as f:
            cfg = parse_config(f.read(), command=args.command)
    else:
        cfg = JobConfig(command=args.command)
    _apply_env(cfg)
    for attr in ("precision", "horizon", "out", "threads", "c", "seed",
                 "max_depth", "backend", "alpha", "beta", "samples"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "fractions", None):
        cfg.fractions = _parse_fractions(args.fractions)
        cfg.generator = None
    if getattr(args, "resolution", None):
        cfg.window = dict(cfg.window or {})
        cfg.window["width"] = args.resolution
        cfg.window["height"] = args.resolution
    if getattr(args, "point", None):
        parts = [float(v) for v in args.point.split(",")]
        cfg.point = parts + [0.0] * (2 - len(parts))
    if cfg.precision != "auto" and cfg.precision is not None:
        cfg.precision = int(cfg.precision)
    return cfg


# ---------------------------------------------------------------------------
# subcommand bodies


def _meta(cfg, precision, extra_tol=None):
    tol = {"membership_log": "2^-(P//2)", "sector_guard": "2^-(P//4)"}
    if extra_tol:
        tol.update(extra_tol)
    return reports.meta_record(cfg.command, cfg.resolved(), precision, tol)


def _run_centers(cfg: JobConfig, out_dir):
    params = cfg.params()
    est = criterion.estimate_x0(params, cfg.horizon)
    recs = [_meta(cfg, est.precision)]
    for n, s in enumerate(est.centers):
        recs.append({"record": "center", "n": n, "s": s,
                     "t_underflowed": bool(params.t_underflowed(n))
                     if _t_ok(params, n) else None})
    recs.append({"record": "estimate", "x0_lower": est.x0_lower,
                 "gap": est.gap,
                 "note": "model-level evidence only; horizon-bounded"})
    reports.write_report(os.path.join(out_dir, "centers.jsonl"), recs)
    return 0


def _t_ok(params, n):
    try:
        with working_precision(params.resolve_precision(n + 1)):
            params.t(n)
        return True
    except ModelError:
        return False


def _run_criterion(cfg: JobConfig, out_dir):
    params = cfg.params()
    cand = dict(cfg.candidate)
    rule = criterion.CandidateRule(
        kind=cand.get("kind", "theorem"), alpha=cand.get("alpha"),
        beta=cand.get("beta"), x=cand.get("x"),
        delta=cand.get("delta", 0.5))
    rep = criterion.check_class_membership(params, rule, cfg.horizon)
    recs = [_meta(cfg, rep.precision)]
    for n, s in enumerate(rep.centers):
        recs.append({"record": "center", "n": n, "s": s})
    for m in rep.margins:
        recs.append(dict({"record": "margin"}, **m))
    recs.append({"record": "verdict", "verdict": rep.verdict,
                 "candidate_rule": rep.candidate_rule,
                 "candidate_x": rep.candidate_x,
                 "x0_lower": rep.x0_lower, "gap": rep.gap,
                 "note": "horizon-bounded semi-decision"})
    reports.write_report(os.path.join(out_dir, "criterion.jsonl"), recs)
    return 0


def _run_levin(cfg: JobConfig, out_dir):
    rots = cfg.rotations()
    bits = 256 if cfg.precision == "auto" else int(cfg.precision)
    rep = criterion.check_levin(rots, (0, cfg.horizon), delta=cfg.delta,
                                precision=bits)
    recs = [_meta(cfg, bits, {"levin_delta": cfg.delta})]
    for k, v in enumerate(rep.values):
        recs.append({"record": "levin_value", "n": rep.window[0] + k,
                     "value": v})
    recs.append({"record": "verdict", "sup": rep.sup,
                 "threshold": rep.threshold, "satisfied": rep.satisfied,
                 "notes": rep.notes})
    reports.write_report(os.path.join(out_dir, "levin.jsonl"), recs)
    return 0


def _run_verify(cfg: JobConfig, out_dir):
    from .model import moebius_apply, moebius_preimage_disk
    import random

    params = cfg.params()
    bits = params.resolve_precision(cfg.horizon + 1)
    recs = [_meta(cfg, bits)]
    rng = random.Random(cfg.seed)

    # boundary of the preimage disk must map onto the unit circle
    with working_precision(bits):
        worst = mpf(0)
        for _ in range(max(cfg.samples // 10, 10)):
            t = mpf(rng.uniform(0.01, 0.99))
            c, r = moebius_preimage_disk(t)
            theta = 2 * mp.pi * mpf(rng.random())
            z = LogPolarComplex.from_rect(c + r * mpmath.cos(theta),
                                          r * mpmath.sin(theta))
            w = moebius_apply(t, z)
            worst = max(worst, abs(w.log_r))
        ok = worst <= membership_tolerance() * 100
    recs.append({"record": "check", "name": "disk_preimage",
                 "passed": bool(ok), "worst_log_deviation": worst})

    # argument inequalities at the first level
    rot0 = params.rotation(0)
    arep = criterion.check_arg_inequality(
        cfg.c_spec(), rot0.q.as_int(), cfg.samples, seed=cfg.seed)
    recs.append({"record": "check", "name": "argument_bounds",
                 "passed": arep.ok, "checked": arep.checked,
                 "violations": len(arep.violations)})

    # sector bound (only meaningful for C >= pi)
    with working_precision(bits):
        c_ge_pi = params.C >= mp.pi
    if c_ge_pi:
        srep = criterion.check_sector_bound(
            params, min(cfg.horizon, 3), max(cfg.samples // 10, 10),
            seed=cfg.seed)
        recs.append({"record": "check", "name": "sector_bound",
                     "passed": srep.ok, "checked": srep.checked,
                     "violations": len(srep.violations)})
    else:
        recs.append({"record": "check", "name": "sector_bound",
                     "passed": None, "skipped": "requires C >= pi"})

    # monotonicity in the constant
    with working_precision(bits):
        cp = cfg.c_prime if cfg.c_prime is not None else None
        if cp is None:
            from .model import _eval_constant
            cp = float((1 + _eval_constant(cfg.c_spec())) / 2)
        x0 = float(params.t(0)) * 1.5
        x0 = min(x0, 0.9)
    mrep = criterion.verify_monotonicity(params, cp, x0, cfg.horizon)
    recs.append({"record": "check", "name": "monotonicity",
                 "passed": mrep.all_pass, "c_prime": cp, "x0": x0})

    # lower-bound recursion
    rrep = criterion.verify_theorem_recursion(
        cfg.rotations(), cfg.c_spec(), cfg.alpha, cfg.beta, cfg.horizon,
        precision=max(bits, 512))
    recs.append({"record": "check", "name": "recursion",
                 "passed": rrep.all_pass, "alpha": rrep.alpha,
                 "beta": rrep.beta, "eta": rrep.eta,
                 "levels": [{"n": l.n, "x": l.x, "eta_t": l.eta_t,
                             "x_ok": l.x_ok, "side_ok": l.side_ok,
                             "hypothesis_ok": l.hypothesis_ok,
                             "notes": l.notes} for l in rrep.levels]})

    reports.write_report(os.path.join(out_dir, "verify.jsonl"), recs)
    failed = [r for r in recs[1:] if r.get("passed") is False]
    return 2 if failed else 0


def _run_address(cfg: JobConfig, out_dir):
    params = cfg.params()
    bits = params.resolve_precision(cfg.horizon)
    with working_precision(bits):
        z = LogPolarComplex.from_rect(mpf(cfg.point[0]), mpf(cfg.point[1]))
        addr = addresses.address_of(params, z, cfg.horizon)
        scale = addresses.scale_of(params, cfg.horizon)
        succ = addresses.sigma_succ(addr, scale)
        trace = orbit(params, z, cfg.horizon)
    recs = [_meta(cfg, bits)]
    recs.append({"record": "address", "point": cfg.point,
                 "depth": cfg.horizon, "digits": list(addr.digits),
                 "scale": list(scale.moduli),
                 "successor_digits": list(succ.digits),
                 "component_count": scale.cumulative(cfg.horizon),
                 "survived": trace.survived})
    reports.write_report(os.path.join(out_dir, "address.jsonl"), recs)
    return 0


def _run_render(cfg: JobConfig, out_dir):
    params = cfg.params()
    window = cfg.make_window()
    if cfg.threads is not None:
        try:
            import numba
            numba.set_num_threads(cfg.threads)
        except ImportError:
            pass
    grid = raster.render_depth_grid(params, window, cfg.max_depth,
                                    backend=cfg.backend)
    raster.write_image(grid, os.path.join(out_dir, cfg.image))
    recs = [_meta(cfg, 53, {"escape_log_eps": raster.DEFAULT_EPS})]
    for n in range(cfg.max_depth + 1):
        counted = raster.count_components(grid, n)
        try:
            expected = raster.expected_component_count(params, n)
        except SequenceError:
            expected = None
        recs.append({"record": "components", "level": n, "count": counted,
                     "expected": expected,
                     "note": "counts require resolution separating components"})
    recs.append({"record": "image", "path": cfg.image,
                 "backend": grid.backend,
                 "width": window.width, "height": window.height,
                 "survived_pixels": int((grid.depths ==
                                         grid.survived_value).sum())})
    reports.write_report(os.path.join(out_dir, "render.jsonl"), recs)
    return 0


_RUNNERS = {
    "centers": _run_centers,
    "criterion": _run_criterion,
    "levin": _run_levin,
    "verify": _run_verify,
    "address": _run_address,
    "render": _run_render,
}


def run(cfg: JobConfig) -> int:
    errors = cfg.validate()
    if errors:
        for e in errors:
            print("config error: %s" % e, file=sys.stderr)
        return 1
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    try:
        return _RUNNERS[cfg.command](cfg, out_dir)
    except (criterion.CriterionError, addresses.AddressError, ModelError,
            SequenceError, raster.RasterError) as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 2


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (ConfigError, OSError, ValueError) as e:
        print("config error: %s" % e, file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

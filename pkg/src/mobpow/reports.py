"""Line-delimited report records shared by the CLI subcommands.

One JSON object per line; the first record of every report is a meta
envelope embedding the fully resolved configuration, working precision,
tolerances, and package versions, so a report is reproducible from itself.
Nothing time-dependent is ever written: identical inputs give byte-identical
files.
"""

from __future__ import annotations

import json

import mpmath
from mpmath import mpf

REPORT_SCHEMA_VERSION = 1

# decimal digits used when embedding big reals in reports
REPORT_DPS = 40


def number(x):
    """A JSON-safe rendering of a numeric value.

    mpf values become decimal strings (floats would silently truncate);
    infinities become the strings "inf"/"-inf".
    """
    if isinstance(x, mpf):
        if mpmath.isinf(x):
            return "inf" if x > 0 else "-inf"
        if mpmath.isnan(x):
            return "nan"
        return mpmath.nstr(x, REPORT_DPS)
    if isinstance(x, float):
        if x != x:
            return "nan"
        if x in (float("inf"), float("-inf")):
            return "inf" if x > 0 else "-inf"
    return x


def clean(obj):
    """Recursively convert a record to JSON-serializable form."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (mpf, float)):
        return number(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    return str(obj)


def versions():
    import numpy

    from . import __version__

    out = {"mobpow": __version__, "mpmath": mpmath.__version__,
           "numpy": numpy.__version__}
    try:
        import numba
        out["numba"] = numba.__version__
    except ImportError:
        out["numba"] = None
    return out


def meta_record(command, resolved_config, precision, tolerances):
    return {
        "record": "meta",
        "schema": REPORT_SCHEMA_VERSION,
        "command": command,
        "config": clean(resolved_config),
        "precision_bits": precision,
        "tolerances": clean(tolerances),
        "versions": versions(),
    }


def write_report(path, records):
    """Write records as one sorted-key JSON object per line."""
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(clean(rec), sort_keys=True))
            f.write("\n")


def read_report(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]

"""Flat ``key=value`` snapshots of the pipeline constants.

Complex values are written with ``repr`` of each part so that reading a
file back reproduces the numbers bit for bit.  Keys are sorted with digit
runs compared numerically, so ``s2`` precedes ``s10``.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_DIGITS = re.compile(r"(\d+)")


def _natural(key: str):
    return [(0, int(t), "") if t.isdigit() else (1, 0, t) for t in _DIGITS.split(key)]


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    z = complex(v)
    return f"{z.real!r} {z.imag!r}"


def parse_value(text: str):
    parts = text.split()
    if len(parts) == 1:
        return int(parts[0])
    if len(parts) != 2:
        raise ValueError(f"malformed snapshot value: {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def dumps(values: dict) -> str:
    lines = [f"{k}={format_value(values[k])}" for k in sorted(values, key=_natural)]
    return "\n".join(lines) + "\n"


def loads(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed snapshot line: {raw!r}")
        out[key.strip()] = parse_value(value)
    return out


def write(path, values: dict) -> None:
    Path(path).write_text(dumps(values))


def read(path) -> dict:
    return loads(Path(path).read_text())


def max_difference(a: dict, b: dict) -> float:
    """Largest absolute entry-wise difference; keys must match."""
    if set(a) != set(b):
        raise KeyError(f"snapshot keys differ: {sorted(set(a) ^ set(b))}")
    return max(abs(complex(a[k]) - complex(b[k])) for k in a)

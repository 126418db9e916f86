"""JSON encoding of complex arrays and report values.

Complex numbers are ``[re, im]`` pairs; real numbers may also appear bare.
Floats are written with ``repr`` so they round-trip bit-exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValueError(f"expected a number or [re, im], got {v!r}")


def decode_complex_array(v) -> np.ndarray:
    """Flat list whose entries are numbers or ``[re, im]`` pairs."""
    if not isinstance(v, (list, tuple)):
        raise ValueError(f"expected a list of entries, got {v!r}")
    return np.array([decode_complex(x) for x in v], dtype=complex)


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_complex_array(a) -> list:
    return [encode_complex(z) for z in np.asarray(a).reshape(-1)]


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return encode_complex_array(x)
        return [to_jsonable(v) for v in x.reshape(-1).tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else repr(f)
    if isinstance(x, (complex, np.complexfloating)):
        return encode_complex(x)
    if x is None or isinstance(x, str):
        return x
    if hasattr(x, "coords"):
        return encode_complex_array(x.coords)
    return str(x)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"

"""JSON state files and report documents.

State file::

    {"kind": "density" | "pure", "dims": [2, 2], "labels": ["A", "B"],
     "re": [[...]], "im": [[...]]}

Floats are written with Python's shortest round-trip repr, so
write -> read reproduces every entry bit for bit.
"""

import json

import numpy as np

from .linalg import SystemLayout
from .states import DensityOperator, PureState

__all__ = ["SCHEMA_VERSION", "FormatError", "state_to_dict", "state_from_dict",
           "load_state", "save_state", "dumps"]

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """Malformed file contents (as opposed to a well-formed but invalid state)."""


def state_to_dict(state):
    if isinstance(state, PureState):
        arr, kind = state.vector, "pure"
    elif isinstance(state, DensityOperator):
        arr, kind = state.matrix, "density"
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    return {"kind": kind, "dims": list(state.layout.dims), "labels": list(state.layout.labels),
            "re": arr.real.tolist(), "im": arr.imag.tolist()}


def state_from_dict(doc):
    """Parse a state document.

    Raises FormatError for structural problems and ValueError (from the state
    constructors) when the numbers do not describe a valid state.
    """
    try:
        kind = doc["kind"]
        dims = [int(d) for d in doc["dims"]]
        labels = doc.get("labels") or [chr(ord("A") + i) for i in range(len(dims))]
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed state document: {exc}") from None
    if re.shape != im.shape:
        raise FormatError(f"re/im shapes differ: {re.shape} vs {im.shape}")
    try:
        layout = SystemLayout(tuple(labels), tuple(dims))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    d = layout.dim
    if kind == "density":
        if re.shape != (d, d):
            raise FormatError(f"density array shape {re.shape} does not match dims {dims}")
        return DensityOperator(re + 1j * im, layout)
    if kind == "pure":
        if re.shape != (d,):
            raise FormatError(f"pure-state array shape {re.shape} does not match dims {dims}")
        return PureState(re + 1j * im, layout)
    raise FormatError(f"unknown state kind {kind!r}")


def load_state(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return state_from_dict(doc)


def save_state(state, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state_to_dict(state)))


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(doc):
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(doc, sort_keys=True, indent=1, default=_default, allow_nan=True) + "\n"

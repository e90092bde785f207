"""JSON and CSV encodings for channels and reports.

Complex matrices travel as ``{"rows", "cols", "entries"}`` with every entry a
``[re, im]`` pair. Floats are written with ``repr`` (shortest string that
reads back to the identical double), and non-finite values as the strings
``"inf"``, ``"-inf"`` and ``"nan"`` since JSON has no literal for them.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import matops
from .dmc import CompoundDMCFamily, FiniteChannel
from .errors import InputFormatError, ValidationError

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


# ---------------------------------------------------------------- encoding


def encode_matrix(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in M],
    }


def to_jsonable(obj):
    """Recursively convert numpy values and non-finite floats into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2 and np.iscomplexobj(obj):
            return encode_matrix(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_report(report: dict) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def loads_report(text: str) -> dict:
    """Inverse of :func:`dumps_report` for numeric fields (matrices stay in their dict form)."""
    try:
        return _restore(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"malformed JSON: {exc}") from exc


def format_float(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_csv(path_or_stream, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else format_float(v) for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        Path(path_or_stream).write_text(text)


# ---------------------------------------------------------------- decoding


def _load_json(path) -> object:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputFormatError(f"cannot read {p}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{p}: malformed JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc


def _entry(v, where: str) -> complex:
    if isinstance(v, bool):
        raise InputFormatError(f"{where}: expected a number or [re, im], got {v!r}")
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, str) and v in _NONFINITE:
        return complex(_NONFINITE[v], 0.0)
    if (
        isinstance(v, list)
        and len(v) == 2
        and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v)
    ):
        return complex(float(v[0]), float(v[1]))
    raise InputFormatError(f"{where}: expected a number or [re, im], got {v!r}")


def decode_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Read the canonical ``{"rows", "cols", "entries"}`` object."""
    if not isinstance(obj, dict):
        raise InputFormatError(f"{name}: expected an object with rows, cols and entries")
    for key in ("rows", "cols", "entries"):
        if key not in obj:
            raise InputFormatError(f"{name}: missing key {key!r}")
    rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise InputFormatError(f"{name}: rows and cols must be positive integers")
    if not isinstance(entries, list) or len(entries) != rows:
        raise InputFormatError(f"{name}: expected {rows} rows of entries")
    M = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != cols:
            raise InputFormatError(f"{name}: row {i} must hold {cols} entries")
        for j, v in enumerate(row):
            M[i, j] = _entry(v, f"{name}[{i}][{j}]")
    return matops.as_matrix(M, name)


def _decode_eigen(obj) -> np.ndarray:
    vals = obj["eigenvalues"]
    if not isinstance(vals, list) or not vals:
        raise InputFormatError("eigenvalues must be a non-empty list")
    lam = np.array([_entry(v, f"eigenvalues[{i}]").real for i, v in enumerate(vals)])
    raw = obj["eigenvectors"]
    # columns are eigenvectors; accept the matrix object or its bare rows
    if isinstance(raw, list) and raw and isinstance(raw[0], list):
        raw = {"rows": len(raw), "cols": len(raw[0]), "entries": raw}
    if not isinstance(raw, dict):
        raise InputFormatError("eigenvectors must be a matrix object or a list of rows")
    U = decode_matrix(raw, "eigenvectors")
    n = lam.size
    if U.shape != (n, n):
        raise ValidationError(f"eigenvectors have shape {U.shape}, expected ({n}, {n})")
    if np.any(lam < -matops.PSD_TOL):
        k = int(np.argmin(lam))
        raise ValidationError(f"eigenvalue {k} is negative: {lam[k]}")
    dev = np.abs(U.conj().T @ U - np.eye(n))
    if dev.max() > 1e-10:
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise ValidationError(f"eigenvectors are not orthonormal: entry ({i}, {j}) of U^+U deviates by {dev[i, j]:.3e}")
    W = (U * np.maximum(lam, 0.0)) @ U.conj().T
    return 0.5 * (W + W.conj().T)


def parse_channel_file(path):
    """Load a channel file.

    Returns ``("gram", W)`` for a Hermitian PSD power-gain matrix,
    ``("channel", H)`` for a channel matrix (``"kind": "channel"``), or
    ``("family", CompoundDMCFamily)`` for a finite-alphabet family
    ``{"states": [{"legit": P, "eaves": P}, ...]}``.
    """
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise InputFormatError(f"{path}: top level must be a JSON object")
    if "states" in obj:
        return "family", decode_family(obj)
    if "eigenvalues" in obj or "eigenvectors" in obj:
        if "eigenvalues" not in obj or "eigenvectors" not in obj:
            raise InputFormatError("eigen format needs both eigenvalues and eigenvectors")
        return "gram", _decode_eigen(obj)
    kind = obj.get("kind", "gram")
    if kind not in ("gram", "channel"):
        raise InputFormatError(f"kind must be 'gram' or 'channel', got {kind!r}")
    M = decode_matrix(obj, "channel matrix" if kind == "channel" else "Gram matrix")
    if kind == "gram":
        return "gram", matops.as_psd(M, "Gram matrix")
    return "channel", M


def _stochastic(rows, where: str) -> FiniteChannel:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputFormatError(f"{where}: expected a list of probability rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputFormatError(f"{where}: row {i} has {len(r)} entries, row 0 has {width}")
        for j, v in enumerate(r):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InputFormatError(f"{where}[{i}][{j}]: expected a number, got {v!r}")
    try:
        return FiniteChannel(np.array(rows, dtype=float))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def decode_family(obj) -> CompoundDMCFamily:
    states = obj.get("states")
    if not isinstance(states, list) or not states:
        raise InputFormatError("states must be a non-empty list")
    pairs = []
    for s, st in enumerate(states):
        if not isinstance(st, dict) or "legit" not in st or "eaves" not in st:
            raise InputFormatError(f"state {s} must hold 'legit' and 'eaves' matrices")
        pairs.append((_stochastic(st["legit"], f"state {s} legit"), _stochastic(st["eaves"], f"state {s} eaves")))
    return CompoundDMCFamily(tuple(pairs))


def encode_family(fam: CompoundDMCFamily) -> dict:
    return {"states": [{"legit": l.matrix.tolist(), "eaves": e.matrix.tolist()} for l, e in fam.states]}

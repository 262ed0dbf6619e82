"""Deterministic emitters: JSON reports, CSV point chains, sign grids.

Byte-identical reruns are a hard requirement, so nothing here goes
through repr or the json module's float path.  Floats are printed at
17 significant digits (enough to round-trip a double), dictionary
order is insertion order, complex values become {"re": .., "im": ..}
objects, and every file write happens atomically through a temp file
rename in the target directory.
"""

from __future__ import annotations

import hashlib
import os
import tempfile

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1


def fmt_float(x: float) -> str:
    if x != x:
        raise ConfigError("NaN has no place in a report")
    if x in (float("inf"), float("-inf")):
        # JSON has no infinity literal
        return '"inf"' if x > 0 else '"-inf"'
    s = "%.17g" % x
    return s


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def dumps(obj, indent: int = 0) -> str:
    """Serialize to JSON with fixed key order and float formatting."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return '{"re": %s, "im": %s}' % (fmt_float(z.real), fmt_float(z.imag))
    if isinstance(obj, str):
        return '"%s"' % _escape(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = []
        for k, v in obj.items():
            if not isinstance(k, str):
                raise ConfigError(f"report keys must be strings, got {type(k).__name__}")
            rows.append('%s"%s": %s' % (inner, _escape(k), dumps(v, indent + 1)))
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, frozenset, set, np.ndarray)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
        if not items:
            return "[]"
        rows = [inner + dumps(v, indent + 1) for v in items]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    raise ConfigError(f"cannot serialize {type(obj).__name__} into a report")


def config_hash(config: dict) -> str:
    return hashlib.sha256(dumps(config).encode("utf-8")).hexdigest()


def write_atomic(path: str, data) -> None:
    """Write bytes or text through a same-directory temp file rename."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    write_atomic(path, dumps(obj) + "\n")


def csv_chains(chains) -> str:
    """CSV of tagged point chains, one point per row.

    chains is an iterable of (tag, points) with points a sequence of
    complex numbers; consecutive rows sharing a tag form a polyline.
    """
    rows = ["k1,k2,tag"]
    for tag, pts in chains:
        if "," in tag or "\n" in tag:
            raise ConfigError("chain tags must not contain commas or newlines")
        for z in np.asarray(pts, dtype=complex).ravel():
            if not (np.isfinite(z.real) and np.isfinite(z.imag)):
                raise ConfigError(f"non-finite point in chain {tag!r}")
            rows.append("%s,%s,%s" % ("%.17g" % z.real, "%.17g" % z.imag, tag))
    return "\n".join(rows) + "\n"


def write_csv_chains(path: str, chains) -> None:
    write_atomic(path, csv_chains(chains))


_SIGN_TO_BYTE = {-1: 0, 0: 1, 1: 2}


def sign_grid_bytes(sign: np.ndarray) -> bytes:
    """Row-major bytes, row 0 at the smallest k2; {0,1,2} encodes
    {negative, zero band, positive}."""
    arr = np.asarray(sign)
    if not np.isin(arr, (-1, 0, 1)).all():
        raise ConfigError("sign grid values must be -1, 0, or 1")
    return (arr.astype(np.int8) + 1).astype(np.uint8).tobytes(order="C")


def write_sign_grid(path: str, header_path: str, sign: np.ndarray, window, source: str, extra: dict | None = None) -> None:
    payload = sign_grid_bytes(sign)
    ny, nx = np.asarray(sign).shape
    header = {
        "schema": SCHEMA_VERSION,
        "source": source,
        "window": [float(v) for v in window],
        "resolution": [int(nx), int(ny)],
        "order": "row-major, row 0 at smallest k2",
        "values": {"0": "negative", "1": "zero band", "2": "positive"},
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    if extra:
        header.update(extra)
    write_atomic(path, payload)
    write_json(header_path, header)

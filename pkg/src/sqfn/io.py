"""Field serialization.

Binary layout (all little-endian)::

    b"SQFN" | u32 version=1 | u32 n | u32 N | f64 L | N**n f64 values

CSV layout: a ``# n=.. N=.. L=..`` comment line, a header ``i0,...,value``,
then one row per sample in lexicographic index order.
"""

from __future__ import annotations

import csv
import io
import itertools
import struct
from pathlib import Path

import numpy as np

from .field import GridSpec, ScalarField

MAGIC = b"SQFN"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


class FieldFormatError(ValueError):
    pass


def to_bytes(f: ScalarField) -> bytes:
    g = f.grid
    head = _HEADER.pack(MAGIC, VERSION, g.n, g.N, g.L)
    return head + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def from_bytes(data: bytes) -> ScalarField:
    if len(data) < _HEADER.size:
        raise FieldFormatError("truncated header")
    magic, version, n, N, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"unsupported version {version}")
    grid = GridSpec(n, N, L)
    body = data[_HEADER.size:]
    if len(body) != 8 * grid.size:
        raise FieldFormatError(
            f"expected {grid.size} values, found {len(body) / 8:g}")
    values = np.frombuffer(body, dtype="<f8").reshape(grid.shape)
    return ScalarField(grid, values)


def write_csv(f: ScalarField, stream) -> None:
    g = f.grid
    stream.write(f"# n={g.n} N={g.N} L={g.L!r}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([f"i{j}" for j in range(g.n)] + ["value"])
    for idx in itertools.product(range(g.N), repeat=g.n):
        w.writerow([*idx, repr(float(f.values[idx]))])


def read_csv(stream, L: float | None = None) -> ScalarField:
    first = stream.readline()
    meta = {}
    if first.startswith("#"):
        for tok in first[1:].split():
            k, _, v = tok.partition("=")
            meta[k] = v
        header = stream.readline()
    else:
        header = first
    cols = header.strip().split(",")
    n = len(cols) - 1
    rows = [r for r in csv.reader(stream) if r]
    N = int(meta.get("N", round(len(rows) ** (1.0 / n))))
    if L is None:
        if "L" not in meta:
            raise FieldFormatError("box length missing; pass L explicitly")
        L = float(meta["L"])
    grid = GridSpec(int(meta.get("n", n)), N, L)
    if len(rows) != grid.size:
        raise FieldFormatError(f"expected {grid.size} rows, got {len(rows)}")
    values = np.empty(grid.shape)
    for r in rows:
        values[tuple(int(v) for v in r[:n])] = float(r[n])
    return ScalarField(grid, values)


def save_field(f: ScalarField, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            write_csv(f, fh)
    else:
        path.write_bytes(to_bytes(f))


def load_field(path) -> ScalarField:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8") as fh:
            return read_csv(fh)
    return from_bytes(path.read_bytes())


def csv_string(f: ScalarField) -> str:
    buf = io.StringIO()
    write_csv(f, buf)
    return buf.getvalue()

"""Headered binary field files.

Layout: the magic line ``CHOQF1``, ``key=value`` header lines, one blank line,
then the samples as little-endian float64 in row-major order.
"""
from __future__ import annotations

import numpy as np

from .grid import Field, GridSpec

MAGIC = b"CHOQF1\n"
VERSION = 1
DFT_CONVENTION = "forward-unnormalized;inverse-1/M^N;xi=k/L;k=-M/2..M/2-1"


class FieldFormatError(ValueError):
    pass


def format_terms(terms) -> str:
    return ",".join(f"{c!r}:{p!r}" for c, p in terms)


def parse_terms(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.split(","):
        c, _, p = item.partition(":")
        if not p:
            raise ValueError(f"term must be 'c:p', got {item!r}")
        out.append((float(c), float(p)))
    return tuple(out)


def write_field(path, u: Field, alpha: float, terms) -> None:
    g = u.grid
    header = {
        "version": VERSION,
        "N": g.N,
        "M": g.M,
        "L": repr(g.L),
        "alpha": repr(float(alpha)),
        "terms": format_terms(terms),
        "dft": DFT_CONVENTION,
        "dtype": "<f8",
        "order": "C",
        "count": g.size,
    }
    if len(terms) == 1:
        header["p"] = repr(float(terms[0][1]))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        for k, v in header.items():
            fh.write(f"{k}={v}\n".encode())
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_field(path) -> tuple[Field, dict]:
    """Return the field and its parsed header (``alpha`` float, ``terms`` tuple)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise FieldFormatError("not a CHOQF1 field file")
    end = blob.find(b"\n\n", len(MAGIC) - 1)
    if end < 0:
        raise FieldFormatError("header not terminated by a blank line")
    header = {}
    for line in blob[len(MAGIC):end].decode().splitlines():
        k, sep, v = line.partition("=")
        if not sep:
            raise FieldFormatError(f"malformed header line {line!r}")
        header[k] = v
    try:
        if int(header["version"]) != VERSION:
            raise FieldFormatError(f"unsupported version {header['version']}")
        grid = GridSpec(int(header["N"]), int(header["M"]), float(header["L"]))
        meta = {"alpha": float(header["alpha"]), "terms": parse_terms(header["terms"]), "raw": header}
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(f"bad header: {exc}") from exc
    data = np.frombuffer(blob[end + 2:], dtype="<f8")
    if data.size != grid.size:
        raise FieldFormatError(f"expected {grid.size} samples, found {data.size}")
    return Field(grid, data.astype(float).reshape(grid.shape)), meta

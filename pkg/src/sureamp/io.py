"""Grid and image file I/O.

Grid files ("GRD1"): ASCII magic line, one JSON header line
{"dtype":"f32"|"c64","h":H,"w":W}, then the row-major little-endian
payload (f32 samples; c64 = interleaved re,im f32 pairs). The header is
serialized canonically so a read-write cycle is byte-identical.

PGM: binary "P5", 8- or 16-bit, values normalized to [0, 1] on load.
"""

import json

import numpy as np

from .validation import check_grid

__all__ = ["write_grid", "read_grid", "load_pgm", "save_pgm"]

_MAGIC = b"GRD1\n"


def _header_bytes(dtype: str, h: int, w: int) -> bytes:
    # Canonical key order and separators; required for bit-exact round-trips.
    return json.dumps({"dtype": dtype, "h": h, "w": w},
                      separators=(",", ":")).encode("ascii") + b"\n"


def write_grid(path, grid):
    grid = check_grid(grid, "grid")
    h, w = grid.shape
    if np.iscomplexobj(grid):
        dtype, payload = "c64", np.ascontiguousarray(grid, dtype="<c8").tobytes()
    else:
        dtype, payload = "f32", np.ascontiguousarray(grid, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(_header_bytes(dtype, h, w))
        f.write(payload)


def read_grid(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a GRD1 file")
        header = json.loads(f.readline().decode("ascii"))
        h, w, dtype = int(header["h"]), int(header["w"]), header["dtype"]
        if dtype == "f32":
            np_dtype, out_dtype, itemsize = "<f4", np.float64, 4
        elif dtype == "c64":
            np_dtype, out_dtype, itemsize = "<c8", np.complex128, 8
        else:
            raise ValueError(f"{path}: unknown dtype {dtype!r}")
        payload = f.read(h * w * itemsize)
        if len(payload) != h * w * itemsize:
            raise ValueError(f"{path}: truncated payload")
        data = np.frombuffer(payload, dtype=np_dtype).reshape(h, w)
        return data.astype(out_dtype)


def _read_pgm_token(f):
    # Tokens separated by whitespace; '#' starts a comment to end of line.
    token = b""
    while True:
        c = f.read(1)
        if not c:
            raise ValueError("unexpected end of PGM header")
        if c == b"#":
            while c not in (b"\n", b""):
                c = f.read(1)
            continue
        if c.isspace():
            if token:
                return token
            continue
        token += c


def load_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM; returns float64 in [0, 1]."""
    with open(path, "rb") as f:
        if _read_pgm_token(f) != b"P5":
            raise ValueError(f"{path}: only binary 'P5' PGM is supported")
        w = int(_read_pgm_token(f))
        h = int(_read_pgm_token(f))
        maxval = int(_read_pgm_token(f))
        if not (0 < maxval < 65536):
            raise ValueError(f"{path}: bad maxval {maxval}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = f.read(h * w * dtype.itemsize)
        if len(raw) != h * w * dtype.itemsize:
            raise ValueError(f"{path}: truncated pixel data")
        img = np.frombuffer(raw, dtype=dtype).reshape(h, w)
        return img.astype(np.float64) / maxval


def save_pgm(path, grid, maxval: int = 255):
    """Write a [0,1] grid as binary PGM (values clipped then quantized)."""
    grid = check_grid(grid, "grid")
    if np.iscomplexobj(grid):
        raise ValueError("cannot write a complex grid as PGM")
    if not (0 < maxval < 65536):
        raise ValueError(f"bad maxval {maxval}")
    q = np.clip(np.rint(grid * maxval), 0, maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    h, w = grid.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        f.write(q.astype(dtype).tobytes())

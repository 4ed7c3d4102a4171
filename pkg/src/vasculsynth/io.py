"""The `.vvol` volume container: one-line JSON header plus raw payload.

Header keys: dims, spacing, origin, dtype, kind (volume | mask | atlas),
byte_order, and optionally `labeled` for volumes. The payload is the scalar
array little-endian with x fastest, then y, then z. Volumes and atlases store
32-bit floats, masks 8-bit unsigned. Write-then-read is bit-exact.
"""

import json

import numpy as np

from .atlas import Atlas
from .errors import KindMismatch, ParseError, TruncatedPayload
from .grids import Grid3, Mask, Volume

_DTYPES = {"volume": "float32", "mask": "uint8", "atlas": "float32"}
_NP_DTYPES = {"float32": np.dtype("<f4"), "uint8": np.dtype("u1")}


def kind_of(obj: Grid3) -> str:
    if isinstance(obj, Mask):
        return "mask"
    if isinstance(obj, Atlas):
        return "atlas"
    if isinstance(obj, Volume):
        return "volume"
    raise TypeError(f"not a container type: {type(obj)!r}")


def write_volume(obj: Grid3, path):
    """Serialize a Volume/Mask/Atlas to a .vvol file."""
    kind = kind_of(obj)
    header = {
        "dims": list(obj.dims),
        "spacing": [float(s) for s in obj.spacing],
        "origin": [float(o) for o in obj.origin],
        "dtype": _DTYPES[kind],
        "kind": kind,
        "byte_order": "little",
    }
    if kind == "volume" and obj.labeled:
        header["labeled"] = True
    payload = np.ascontiguousarray(obj.values.transpose(2, 1, 0)).tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def read_volume(path, expect: str | None = None) -> Volume | Mask | Atlas:
    """Read a .vvol file back into its container type.

    `expect` ("volume" | "mask" | "atlas") turns a wrong kind into KindMismatch.
    Malformed headers, payload-length mismatches, and invariant violations
    (non-binary masks, atlas values outside [0, 1]) raise ParseError.
    """
    with open(path, "rb") as fh:
        head_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(head_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: malformed header: {exc}") from exc
    if not isinstance(header, dict):
        raise ParseError(f"{path}: header is not a JSON object")

    try:
        dims = [int(d) for d in header["dims"]]
        spacing = [float(s) for s in header["spacing"]]
        origin = [float(o) for o in header["origin"]]
        dtype_name = header["dtype"]
        kind = header["kind"]
        byte_order = header["byte_order"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad header field: {exc}") from exc
    if kind not in _DTYPES:
        raise ParseError(f"{path}: unknown kind {kind!r}")
    if dtype_name != _DTYPES[kind]:
        raise ParseError(f"{path}: kind {kind} requires dtype {_DTYPES[kind]}, got {dtype_name}")
    if byte_order != "little":
        raise ParseError(f"{path}: unsupported byte order {byte_order!r}")
    if len(dims) != 3 or min(dims) < 1:
        raise ParseError(f"{path}: bad dims {dims}")

    dtype = _NP_DTYPES[dtype_name]
    expected_bytes = dims[0] * dims[1] * dims[2] * dtype.itemsize
    if len(payload) < expected_bytes:
        raise TruncatedPayload(
            f"{path}: payload has {len(payload)} bytes, header promises {expected_bytes}")
    if len(payload) > expected_bytes:
        raise ParseError(f"{path}: {len(payload) - expected_bytes} trailing bytes")
    values = (
        np.frombuffer(payload, dtype=dtype)
        .reshape(dims[2], dims[1], dims[0])
        .transpose(2, 1, 0)
        .copy()
    )

    try:
        if kind == "mask":
            obj = Mask(values, tuple(spacing), np.asarray(origin))
        elif kind == "atlas":
            obj = Atlas(values, tuple(spacing), np.asarray(origin))
        else:
            obj = Volume(values, tuple(spacing), np.asarray(origin),
                         labeled=bool(header.get("labeled", False)))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc

    if expect is not None and kind != expect:
        raise KindMismatch(f"{path}: expected {expect}, found {kind}")
    return obj

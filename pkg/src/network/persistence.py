"""
Binary model files.

Layout (see docs/MODEL_FORMAT.md):

    magic            8 bytes  b"EONMODEL"
    format_version   uint32, little-endian
    header_length    uint32, little-endian
    header           UTF-8 JSON, header_length bytes
    arrays           float64, row-major, byte order from header["endianness"],
                     concatenated in the order of header["arrays"]
"""

import json
import struct
import sys
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from ..errors import MalformedModelFileError, ModelIOError, VersionMismatchError
from ..models import Hyperparameters
from .model import EonModel, Gamma0

MAGIC = b"EONMODEL"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")


def _array_entries(model: EonModel) -> List[Dict]:
    arrays = [("S", model.S)]
    arrays += [(f"theta{n}", t) for n, t in enumerate(model.theta, start=1)]
    for name in ("w", "s", "matrix"):
        value = getattr(model.gamma0, name)
        if value is not None:
            arrays.append((f"gamma0.{name}", value))
    return [{"name": name, "shape": list(arr.shape), "data": arr} for name, arr in arrays]


def to_bytes(model: EonModel) -> bytes:
    """Serialize a model into the versioned container."""
    entries = _array_entries(model)
    header = {
        "format_version": FORMAT_VERSION,
        "endianness": "little",
        "N": model.n_layers,
        "layer_dims": model.layer_dims,
        "gamma0_mode": model.gamma0.mode,
        "n_train": model.n_train,
        "hyperparameters": model.hyper.model_dump(),
        "arrays": [{"name": e["name"], "shape": e["shape"]} for e in entries],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = b"".join(np.ascontiguousarray(e["data"], dtype="<f8").tobytes(order="C") for e in entries)
    return _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + body


def from_bytes(blob: bytes) -> EonModel:
    """Parse a model container, raising a distinct error per failure kind."""
    if len(blob) < _PREFIX.size:
        raise MalformedModelFileError(f"file too short ({len(blob)} bytes)")
    magic, version, header_length = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise MalformedModelFileError("bad magic bytes")
    if version > FORMAT_VERSION or version < 1:
        raise VersionMismatchError(f"format version {version} not supported (reader is {FORMAT_VERSION})")
    start = _PREFIX.size
    if len(blob) < start + header_length:
        raise MalformedModelFileError("header truncated")
    try:
        header = json.loads(blob[start : start + header_length].decode("utf-8"))
        byte_order = {"little": "<", "big": ">"}[header["endianness"]]
        specs = header["arrays"]
        sizes = [int(np.prod(a["shape"], dtype=np.int64)) for a in specs]
    except (ValueError, KeyError, TypeError) as e:
        raise MalformedModelFileError(f"unreadable header: {e}") from e

    offset = start + header_length
    expected = offset + 8 * sum(sizes)
    if len(blob) != expected:
        raise MalformedModelFileError(f"array block has {len(blob) - offset} bytes, expected {expected - offset}")

    arrays: Dict[str, np.ndarray] = {}
    for spec, size in zip(specs, sizes):
        data = np.frombuffer(blob, dtype=f"{byte_order}f8", count=size, offset=offset)
        arrays[spec["name"]] = data.astype(np.float64).reshape(spec["shape"])
        offset += 8 * size

    try:
        hyper = Hyperparameters(**header["hyperparameters"])
        n_layers = int(header["N"])
        theta = tuple(arrays[f"theta{n}"] for n in range(1, n_layers + 1))
        gamma0 = Gamma0(
            header["gamma0_mode"],
            w=arrays.get("gamma0.w"),
            s=arrays.get("gamma0.s"),
            matrix=arrays.get("gamma0.matrix"),
        )
        return EonModel(S=arrays["S"], theta=theta, gamma0=gamma0, hyper=hyper, n_train=int(header["n_train"]))
    except (KeyError, ValueError, ValidationError) as e:
        raise MalformedModelFileError(f"inconsistent model content: {e}") from e


def save(model: EonModel, path: Union[str, Path]) -> None:
    """Write a model file."""
    try:
        Path(path).write_bytes(to_bytes(model))
    except OSError as e:
        raise ModelIOError(f"cannot write {path}: {e}") from e
    logger.info(f"Saved model {model.layer_dims} to {path}")


def load(path: Union[str, Path]) -> EonModel:
    """Read a model file written by ``save``."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise ModelIOError(f"cannot read {path}: {e}") from e
    model = from_bytes(blob)
    logger.debug(f"Loaded model {model.layer_dims} from {path} (host byte order {sys.byteorder})")
    return model

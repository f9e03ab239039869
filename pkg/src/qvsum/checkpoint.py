"""Binary parameter checkpoints.

Layout (all integers little-endian):
  magic   4 bytes  b"QVCP"
  version u32      currently 1
  cfg_len u32      length of the UTF-8 JSON model-config blob
  config  cfg_len bytes
  count   u32      number of parameters
  per parameter:
    name_len u16, name (UTF-8), ndim u8, dims (u32 each),
    payload: product(dims) little-endian float64 values, row-major
"""

from __future__ import annotations

import json
import struct
from typing import Dict

import numpy as np

from .errors import DataError
from .model import Model, ModelConfig
from .tensor import Tensor

_MAGIC = b"QVCP"
_VERSION = 1


def save_checkpoint(path, model: Model) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        cfg = json.dumps(model.config.to_dict(), sort_keys=True).encode()
        fh.write(struct.pack("<II", _VERSION, len(cfg)))
        fh.write(cfg)
        fh.write(struct.pack("<I", len(model.params)))
        for name, p in model.params.items():
            nb = name.encode()
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<B", p.array.ndim))
            for dim in p.array.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(p.array.astype("<f8").tobytes())


def load_checkpoint(path) -> Model:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise DataError(f"bad checkpoint magic in {path}")
        version, cfg_len = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise DataError(f"unsupported checkpoint version {version}")
        config = ModelConfig.from_dict(json.loads(fh.read(cfg_len).decode()))
        (count,) = struct.unpack("<I", fh.read(4))
        params: Dict[str, Tensor] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode()
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack("<" + "I" * ndim, fh.read(4 * ndim))
            n = int(np.prod(shape)) if shape else 1
            payload = fh.read(8 * n)
            if len(payload) != 8 * n:
                raise DataError(f"truncated payload for parameter {name!r}")
            arr = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
            params[name] = Tensor(arr, requires_grad=True)
    return Model(config, params=params)

"""Versioned binary model container.

Layout: ``MAGIC | u16 version | u32 header length | JSON header | payload``.
The header lists every array (name, dtype, shape) in payload order and a
CRC32 of the payload.  All integers are little-endian.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .base import FormatError
from .forest import DecisionTree, RandomForestModel, RandomForestParams
from .knn import KnnModel

MAGIC = b"FGMODEL\x00"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<HI")


def _pack(header: dict, arrays: dict[str, np.ndarray]) -> bytes:
    specs = []
    chunks = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        le = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        specs.append({"name": name, "dtype": le.dtype.str, "shape": list(arr.shape)})
        chunks.append(le.tobytes())
    payload = b"".join(chunks)
    header = dict(header, arrays=specs, payload_crc32=zlib.crc32(payload))
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + _PREFIX.pack(FORMAT_VERSION, len(head)) + head + payload


def _unpack(data: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise FormatError("model data must be bytes")
    data = bytes(data)
    if len(data) < len(MAGIC) + _PREFIX.size or not data.startswith(MAGIC):
        raise FormatError("not a model file (bad magic)")
    version, head_len = _PREFIX.unpack_from(data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")
    start = len(MAGIC) + _PREFIX.size
    try:
        header = json.loads(data[start : start + head_len])
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise FormatError("corrupt model header") from None
    payload = data[start + head_len :]
    arrays = {}
    offset = 0
    try:
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            shape = tuple(spec["shape"])
            nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64))
            if offset + nbytes > len(payload):
                raise FormatError("model payload truncated")
            arrays[spec["name"]] = (
                np.frombuffer(payload, dtype=dtype, count=nbytes // dtype.itemsize, offset=offset)
                .reshape(shape)
                .astype(dtype.newbyteorder("="))
            )
            offset += nbytes
        if offset != len(payload):
            raise FormatError("trailing bytes after model payload")
        if zlib.crc32(payload) != header["payload_crc32"]:
            raise FormatError("model payload checksum mismatch")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"corrupt model header ({exc})") from None
    return header, arrays


def save_model(model) -> bytes:
    if isinstance(model, RandomForestModel):
        sizes = np.array([t.n_nodes for t in model.trees], dtype=np.int64)
        header = {
            "kind": "rf",
            "params": model.params.to_dict(),
            "seed": model.seed,
            "n_features": model.n_features,
            "n_classes": model.n_classes,
        }
        arrays = {
            "tree_sizes": sizes,
            "feature": np.concatenate([t.feature for t in model.trees]),
            "threshold": np.concatenate([t.threshold for t in model.trees]),
            "left": np.concatenate([t.left for t in model.trees]),
            "right": np.concatenate([t.right for t in model.trees]),
            "counts": np.concatenate([t.counts for t in model.trees]),
        }
        return _pack(header, arrays)
    if isinstance(model, KnnModel):
        header = {
            "kind": "knn",
            "params": {"k": model.k},
            "n_features": model.n_features,
            "n_classes": model.n_classes,
        }
        return _pack(header, {"X": model.X, "y": model.y})
    raise TypeError(f"cannot serialise {type(model).__name__}")


def load_model(data: bytes):
    header, arrays = _unpack(data)
    try:
        kind = header["kind"]
        n_classes = int(header["n_classes"])
        n_features = int(header["n_features"])
        if kind == "rf":
            params = RandomForestParams(**header["params"])
            sizes = arrays["tree_sizes"]
            if sizes.sum() != arrays["feature"].shape[0] or len(sizes) != params.n_trees:
                raise FormatError("tree table inconsistent with node arrays")
            bounds = np.concatenate([[0], np.cumsum(sizes)])
            trees = tuple(
                DecisionTree(
                    feature=arrays["feature"][a:b].copy(),
                    threshold=arrays["threshold"][a:b].copy(),
                    left=arrays["left"][a:b].copy(),
                    right=arrays["right"][a:b].copy(),
                    counts=arrays["counts"][a:b].copy(),
                )
                for a, b in zip(bounds[:-1], bounds[1:])
            )
            return RandomForestModel(trees, params, int(header["seed"]), n_features, n_classes)
        if kind == "knn":
            X = arrays["X"]
            if X.shape[1] != n_features:
                raise FormatError("stored samples disagree with n_features")
            return KnnModel(int(header["params"]["k"]), X, arrays["y"], n_classes)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"corrupt model header ({exc})") from None
    raise FormatError(f"unknown model kind {header.get('kind')!r}")

"""Per-path (mean, variance) pooling and feature-matrix serialization."""
from __future__ import annotations

import csv
import struct
import zlib
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from .errors import ContainerError
from .scattering import ScatteringMaps, ScatteringPath

VARIANCE_CONVENTION = "population"


def feature_dim(J: int, L: int, max_order: int = 2) -> int:
    return sum(2 * L ** k * comb(J, k) for k in range(max_order + 1))


@dataclass(frozen=True)
class FeatureVector:
    """Interleaved ``[mean_0, var_0, mean_1, var_1, ...]`` in canonical path order."""

    values: np.ndarray
    paths: tuple[ScatteringPath, ...]
    variance: str = VARIANCE_CONVENTION

    def __len__(self) -> int:
        return len(self.values)

    @property
    def means(self) -> np.ndarray:
        return self.values[0::2]

    @property
    def variances(self) -> np.ndarray:
        return self.values[1::2]


def extract_features(maps: ScatteringMaps) -> FeatureVector:
    """Spatial mean and population variance (1/N) of every scattering map."""
    if len(maps) == 0:
        raise ValueError("no scattering maps to pool")
    flat = maps.coeffs.reshape(len(maps), -1)
    mean = flat.mean(axis=1)
    var = np.mean((flat - mean[:, None]) ** 2, axis=1)
    values = np.empty(2 * len(maps))
    values[0::2] = mean
    values[1::2] = var
    return FeatureVector(values, maps.paths)


def feature_names(paths) -> list[str]:
    names = []
    for p in paths:
        names += [f"{p.label}_mean", f"{p.label}_var"]
    return names


def write_csv(path, X: np.ndarray, labels, paths) -> None:
    """One row per image: label followed by features in path order."""
    X = np.atleast_2d(X)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + feature_names(paths))
        for lab, row in zip(labels, X):
            w.writerow([lab] + [repr(float(v)) for v in row])


def read_csv(path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    labels = [r[0] for r in rows[1:]]
    X = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return X, labels


# --- binary container -------------------------------------------------------
#
# header: magic, version, J, L, side, dim, count, crc32
# payload: int64 labels[count], float64 values[count * dim], little endian
# crc32 covers the header fields before it and the whole payload.

MAGIC = b"SCATFEAT"
VERSION = 1
_HEADER = struct.Struct("<8sHIIIII")
_CRC = struct.Struct("<I")


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # (count, dim)
    labels: np.ndarray  # (count,) int64
    J: int
    L: int
    side: int


def encode_container(values, labels, J: int, L: int, side: int) -> bytes:
    values = np.ascontiguousarray(np.atleast_2d(values), dtype="<f8")
    labels = np.ascontiguousarray(labels, dtype="<i8")
    count, dim = values.shape
    if labels.shape != (count,):
        raise ContainerError(f"{labels.shape[0]} labels for {count} rows")
    head = _HEADER.pack(MAGIC, VERSION, J, L, side, dim, count)
    payload = labels.tobytes() + values.tobytes()
    crc = zlib.crc32(head + payload)
    return head + _CRC.pack(crc) + payload


def decode_container(blob: bytes) -> FeatureMatrix:
    hsize = _HEADER.size + _CRC.size
    if len(blob) < hsize:
        raise ContainerError("truncated header")
    magic, version, J, L, side, dim, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ContainerError("bad magic")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    (crc,) = _CRC.unpack_from(blob, _HEADER.size)
    payload = blob[hsize:]
    if len(payload) != 8 * count * (1 + dim):
        raise ContainerError("payload size does not match header")
    if zlib.crc32(blob[:_HEADER.size] + payload) != crc:
        raise ContainerError("checksum mismatch")
    labels = np.frombuffer(payload, dtype="<i8", count=count).astype(np.int64)
    values = np.frombuffer(payload, dtype="<f8", offset=8 * count).reshape(count, dim)
    return FeatureMatrix(values.astype(np.float64), labels, J, L, side)


def write_container(path, values, labels, J: int, L: int, side: int) -> None:
    Path(path).write_bytes(encode_container(values, labels, J, L, side))


def read_container(path) -> FeatureMatrix:
    return decode_container(Path(path).read_bytes())

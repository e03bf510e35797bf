"""On-disk feature cache keyed by image content and scattering parameters."""
from __future__ import annotations

import functools
import hashlib
import json
import logging
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ContainerError
from .features import decode_container, encode_container, extract_features
from .filterbank import MorletParams, build_filterbank
from .imageio import load_image, preprocess
from .scattering import scatter

log = logging.getLogger(__name__)


class CacheCorruptionWarning(UserWarning):
    pass


def content_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def params_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class FeatureStore:
    """One container file per image under ``root/<params-hash>/``.

    Writes go through a temp file and ``os.replace`` so readers never see
    a partial entry; corrupt entries are reported and treated as misses.
    """

    def __init__(self, root, params: dict):
        self.params = params
        self.dir = Path(root) / params_hash(params)
        self.dir.mkdir(parents=True, exist_ok=True)
        meta = self.dir / "params.json"
        if not meta.exists():
            meta.write_text(json.dumps(params, indent=2, sort_keys=True))
        self.hits = 0
        self.misses = 0
        self.corrupt = 0

    def _entry(self, key: str) -> Path:
        return self.dir / f"{key}.sfc"

    def get(self, key: str) -> np.ndarray | None:
        path = self._entry(key)
        if not path.exists():
            self.misses += 1
            return None
        try:
            fm = decode_container(path.read_bytes())
        except ContainerError as exc:
            self.corrupt += 1
            self.misses += 1
            warnings.warn(f"corrupt cache entry {path.name} ({exc}); recomputing",
                          CacheCorruptionWarning)
            return None
        self.hits += 1
        return fm.values[0]

    def put(self, key: str, vec: np.ndarray) -> None:
        p = self.params
        blob = encode_container(vec[None, :], np.zeros(1, dtype=np.int64),
                                p["J"], p["L"], p["side"])
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, self._entry(key))


@functools.lru_cache(maxsize=4)
def _bank(side, J, L, sigma, xi, slant):
    return build_filterbank(side, J, L, MorletParams(sigma, xi, slant))


def compute_features(path, params: dict) -> np.ndarray:
    """Load -> preprocess -> scatter -> (mean, variance) pooling for one file."""
    m = params["morlet"]
    bank = _bank(params["side"], params["J"], params["L"], m["sigma"], m["xi"], m["slant"])
    img = preprocess(load_image(path), params["side"])
    maps = scatter(img, bank, params["max_order"], params["scale_order"])
    return extract_features(maps).values


def cache_features(paths, params: dict, cache_root, jobs: int = 1) -> tuple[np.ndarray, FeatureStore]:
    """Feature matrix for ``paths``, computing only what the cache lacks."""
    store = FeatureStore(cache_root, params)
    keys = [content_hash(p) for p in paths]
    rows: list[np.ndarray | None] = [store.get(k) for k in keys]
    todo = [i for i, r in enumerate(rows) if r is None]
    if todo:
        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                computed = list(pool.map(compute_features, [paths[i] for i in todo],
                                         [params] * len(todo), chunksize=4))
        else:
            computed = [compute_features(paths[i], params) for i in todo]
        for i, vec in zip(todo, computed):
            store.put(keys[i], vec)
            rows[i] = vec
    log.info("feature cache: %d hits, %d computed, %d corrupt", len(paths) - len(todo),
             len(todo), store.corrupt)
    store.computed = len(todo)
    return np.vstack(rows), store

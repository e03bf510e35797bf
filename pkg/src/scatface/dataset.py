"""Directory-structured face datasets and seeded per-class splits."""
from __future__ import annotations

import csv
import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, ImageError
from .imageio import load_image

LAYOUTS = ("one-dir-per-class", "filename-prefix")
IMAGE_SUFFIXES = frozenset({".pgm", ".pnm", ".png", ".jpg", ".jpeg", ".gif"})
# Yale names files "subject01.happy", "subject01.glasses", ...
PREFIX_PATTERN = re.compile(r"^(subject\d+)\.")


@dataclass(frozen=True)
class Dataset:
    name: str
    items: tuple[tuple[Path, int], ...]  # (path, label), sorted by path
    classes: tuple[str, ...]             # label -> class name

    def __len__(self) -> int:
        return len(self.items)

    @property
    def paths(self) -> list[Path]:
        return [p for p, _ in self.items]

    @property
    def labels(self) -> np.ndarray:
        return np.array([lab for _, lab in self.items], dtype=np.int64)


def _visible_files(directory: Path):
    return sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))


def _collect(root: Path, layout: str) -> dict[str, list[Path]]:
    groups: dict[str, list[Path]] = {}
    if layout == "one-dir-per-class":
        for sub in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
            files = [f for f in _visible_files(sub) if f.suffix.lower() in IMAGE_SUFFIXES]
            if not files:
                raise DatasetError(f"class {sub.name!r} has no images")
            groups[sub.name] = files
    elif layout == "filename-prefix":
        for f in _visible_files(root):
            m = PREFIX_PATTERN.match(f.name)
            if m:
                groups.setdefault(m.group(1), []).append(f)
    else:
        raise DatasetError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    return groups


def ingest(root, layout: str = "one-dir-per-class", name: str | None = None,
           verify: bool = True) -> Dataset:
    """Scan ``root`` and assign labels in sorted class-name order.

    With ``verify`` every image is decoded once so unreadable files are
    reported up front, by name.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"{root} is not a directory")
    groups = _collect(root, layout)
    if not groups:
        raise DatasetError(f"{root}: no images found for layout {layout!r}")
    classes = tuple(sorted(groups))
    items = []
    for label, cls in enumerate(classes):
        for path in groups[cls]:
            if verify:
                try:
                    load_image(path)
                except ImageError as exc:
                    raise DatasetError(f"unreadable image {path}: {exc}") from exc
            items.append((path, label))
    items.sort(key=lambda it: str(it[0]))
    return Dataset(name or root.name, tuple(items), classes)


@dataclass(frozen=True)
class SplitSpec:
    """Per-class train selection: ``count`` images or a ``fraction`` (rounded up)."""

    count: int | None = None
    fraction: float | None = None
    seed: int = 0
    repeats: int = 1

    def __post_init__(self):
        if (self.count is None) == (self.fraction is None):
            raise DatasetError("give exactly one of count or fraction")
        if self.count is not None and self.count < 1:
            raise DatasetError("count must be >= 1")
        if self.fraction is not None and not 0 < self.fraction < 1:
            raise DatasetError("fraction must lie in (0, 1)")
        if self.repeats < 1:
            raise DatasetError("repeats must be >= 1")

    def n_train(self, class_size: int) -> int:
        if self.count is not None:
            return self.count
        return math.ceil(self.fraction * class_size)


def _class_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")


def _class_rng(seed: int, repeat: int, class_name: str) -> np.random.Generator:
    # Philox is counter-based; keying by class name keeps each class's
    # stream independent of which other classes exist.
    key = np.random.SeedSequence([seed & (2**64 - 1), repeat, _class_key(class_name)])
    return np.random.Generator(np.random.Philox(key))


def split(ds: Dataset, spec: SplitSpec, repeat_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) item indices for one repeat of ``spec``."""
    if not 0 <= repeat_index < spec.repeats:
        raise DatasetError(f"repeat_index {repeat_index} outside [0, {spec.repeats})")
    labels = ds.labels
    train, test = [], []
    for label, cls in enumerate(ds.classes):
        members = np.flatnonzero(labels == label)
        k = spec.n_train(len(members))
        if len(members) < k:
            raise DatasetError(
                f"class {cls!r} has {len(members)} images, fewer than {k} training images")
        perm = _class_rng(spec.seed, repeat_index, cls).permutation(len(members))
        train.append(members[perm[:k]])
        test.append(members[perm[k:]])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def write_manifest(path, ds: Dataset, spec: SplitSpec) -> None:
    """CSV of (path, label, repeat, role) for every repeat of ``spec``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "label", "repeat", "role"])
        for r in range(spec.repeats):
            tr, te = split(ds, spec, r)
            role = {int(i): "train" for i in tr}
            role.update({int(i): "test" for i in te})
            for i, (p, lab) in enumerate(ds.items):
                w.writerow([str(p), ds.classes[lab], r, role[i]])

"""Order <= 2 windowed scattering transform.

Every convolution is circular and done in the Fourier domain. Maps are
kept at full resolution (no subsampling).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np

from .errors import ShapeMismatchError
from .filterbank import FilterBank
from .imageio import Image

SCALE_ORDERS = ("decreasing", "increasing")


@dataclass(frozen=True, order=True)
class ScatteringPath:
    """A sequence of (scale, orientation) pairs; the empty path is order 0."""

    order: int
    scales: tuple[int, ...] = ()
    orientations: tuple[int, ...] = ()

    def __post_init__(self):
        if not (self.order == len(self.scales) == len(self.orientations)):
            raise ValueError("order must equal the number of scales and orientations")
        if len(set(self.scales)) != len(self.scales):
            raise ValueError(f"repeated scale on path {self.scales}")

    @property
    def label(self) -> str:
        if self.order == 0:
            return "S0"
        steps = "_".join(f"j{j}l{l}" for j, l in zip(self.scales, self.orientations))
        return f"S{self.order}_{steps}"


def path_count(J: int, L: int, max_order: int = 2) -> int:
    return sum(L ** k * comb(J, k) for k in range(max_order + 1))


def _scale_chains(J: int, k: int, scale_order: str) -> list[tuple[int, ...]]:
    chains = list(itertools.combinations(range(J), k))  # increasing tuples
    if scale_order == "decreasing":
        chains = [c[::-1] for c in chains]
    return chains


def enumerate_paths(J: int, L: int, max_order: int = 2,
                    scale_order: str = "decreasing") -> list[ScatteringPath]:
    """All paths up to ``max_order`` in canonical (order, scales, orientations) order.

    ``scale_order="decreasing"`` keeps ``j2 < j1`` on order-2 paths;
    ``"increasing"`` keeps ``j1 < j2`` (coarser second wavelet).
    """
    if max_order not in (0, 1, 2):
        raise ValueError(f"max_order must be 0, 1 or 2, got {max_order}")
    if scale_order not in SCALE_ORDERS:
        raise ValueError(f"scale_order must be one of {SCALE_ORDERS}")
    paths = []
    for k in range(max_order + 1):
        for scales in _scale_chains(J, k, scale_order):
            for orients in itertools.product(range(L), repeat=k):
                paths.append(ScatteringPath(k, scales, orients))
    return sorted(paths)


@dataclass(frozen=True)
class ScatteringMaps:
    """Scattering maps of one image; ``coeffs[i]`` belongs to ``paths[i]``."""

    paths: tuple[ScatteringPath, ...]
    coeffs: np.ndarray  # (n_paths, side, side)

    @property
    def side(self) -> int:
        return self.coeffs.shape[-1]

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[tuple[ScatteringPath, np.ndarray]]:
        return iter(zip(self.paths, self.coeffs))

    def __getitem__(self, path: ScatteringPath) -> np.ndarray:
        return self.coeffs[self.paths.index(path)]


def _as_pixels(img) -> np.ndarray:
    return img.pixels if isinstance(img, Image) else np.asarray(img, dtype=np.float64)


def _lowpass(x_hat: np.ndarray, bank: FilterBank) -> np.ndarray:
    return np.fft.ifft2(x_hat * bank.phi_hat).real


def wavelet_modulus(x: np.ndarray, bank: FilterBank) -> np.ndarray:
    """``|x * psi_{j,l}|`` for every wavelet, shape (J, L, side, side)."""
    return np.abs(np.fft.ifft2(np.fft.fft2(x) * bank.psi_hat))


def scatter(img, bank: FilterBank, max_order: int = 2,
            scale_order: str = "decreasing") -> ScatteringMaps:
    """Scattering maps of ``img`` for every path up to ``max_order``.

    Order 0 is ``f * phi``, order 1 ``|f * psi1| * phi`` and order 2
    ``||f * psi1| * psi2| * phi``.
    """
    x = _as_pixels(img)
    if x.shape != (bank.side, bank.side):
        raise ShapeMismatchError(
            f"image shape {x.shape} does not match filter bank side {bank.side}")
    paths = enumerate_paths(bank.J, bank.L, max_order, scale_order)
    index = {p: i for i, p in enumerate(paths)}
    out = np.empty((len(paths), bank.side, bank.side))

    x_hat = np.fft.fft2(x)
    out[index[ScatteringPath(0)]] = _lowpass(x_hat, bank)
    if max_order >= 1:
        u1_hat = np.fft.fft2(np.abs(np.fft.ifft2(x_hat * bank.psi_hat)))
        s1 = _lowpass(u1_hat, bank)
        for j1, l1 in itertools.product(range(bank.J), range(bank.L)):
            out[index[ScatteringPath(1, (j1,), (l1,))]] = s1[j1, l1]
    if max_order >= 2:
        for j1, l1 in itertools.product(range(bank.J), range(bank.L)):
            if scale_order == "decreasing":
                j2s = list(range(j1))
            else:
                j2s = list(range(j1 + 1, bank.J))
            if not j2s:
                continue
            u2 = np.abs(np.fft.ifft2(u1_hat[j1, l1] * bank.psi_hat[j2s]))
            s2 = _lowpass(np.fft.fft2(u2), bank)
            for a, j2 in enumerate(j2s):
                for l2 in range(bank.L):
                    out[index[ScatteringPath(2, (j1, j2), (l1, l2))]] = s2[a, l2]
    out.setflags(write=False)
    return ScatteringMaps(tuple(paths), out)

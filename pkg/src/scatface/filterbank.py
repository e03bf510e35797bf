"""Fourier-domain Morlet filter bank on a periodic square grid.

Filters are sampled in space on the periodic grid (summing enough
neighbouring periods that the Gaussian tails are negligible) and then
transformed with a 2-D FFT, so convolution with them is circular.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import FilterBankError


@dataclass(frozen=True)
class MorletParams:
    sigma: float = 0.8
    xi: float = 3 * math.pi / 4
    slant: float | None = None  # None -> 4 / L

    def slant_for(self, L: int) -> float:
        return 4.0 / L if self.slant is None else float(self.slant)

    def to_dict(self) -> dict:
        return asdict(self)


def _n_periods(side: int, width: float) -> int:
    # tail of exp(-r^2 / (2 width^2)) beyond 8 widths is below 1e-14
    return max(1, math.ceil(8.0 * width / side))


def gabor_2d(side: int, sigma: float, theta: float, xi: float, slant: float) -> np.ndarray:
    """Periodized, sampled 2-D Gabor filter (complex, spatial domain).

    Pixel ``(0, 0)`` is the filter center. The envelope is normalized by
    its continuous integral ``2 pi sigma^2 / slant``.
    """
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    curv = rot @ np.diag([1.0, slant ** 2]) @ rot.T / (2 * sigma ** 2)
    coords = np.arange(side, dtype=np.float64)
    coords[coords >= side // 2] -= side
    width = sigma / min(slant, 1.0)
    k = _n_periods(side, width)
    out = np.zeros((side, side), dtype=np.complex128)
    for ex in range(-k, k + 1):
        x = (coords + ex * side)[:, None]
        for ey in range(-k, k + 1):
            y = (coords + ey * side)[None, :]
            quad = curv[0, 0] * x * x + 2 * curv[0, 1] * x * y + curv[1, 1] * y * y
            out += np.exp(-quad + 1j * xi * (x * math.cos(theta) + y * math.sin(theta)))
    return out / (2 * math.pi * sigma ** 2 / slant)


def morlet_2d(side: int, sigma: float, theta: float, xi: float, slant: float) -> np.ndarray:
    """Gabor minus a scaled envelope so the filter sums to exactly zero."""
    wave = gabor_2d(side, sigma, theta, xi, slant)
    env = gabor_2d(side, sigma, theta, 0.0, slant)
    return wave - (wave.sum() / env.sum()) * env


def _reflect(a: np.ndarray) -> np.ndarray:
    """Return ``a(-w)`` for an array indexed by periodic frequency."""
    return np.roll(a[..., ::-1, ::-1], 1, axis=(-2, -1))


@dataclass(frozen=True)
class FilterBank:
    """Band-pass ``psi_hat[j, l]`` and low-pass ``phi_hat`` in Fourier space."""

    J: int
    L: int
    side: int
    psi_hat: np.ndarray  # (J, L, side, side) complex
    phi_hat: np.ndarray  # (side, side) real
    frame_lower: float
    frame_upper: float
    params: MorletParams = field(default_factory=MorletParams)

    def psi(self, j: int, l: int) -> np.ndarray:
        return self.psi_hat[j, l]

    @property
    def n_wavelets(self) -> int:
        return self.J * self.L


def _lp_sum(psi_hat: np.ndarray, phi_hat: np.ndarray) -> np.ndarray:
    flat = psi_hat.reshape(-1, *psi_hat.shape[-2:])
    energy = np.abs(flat) ** 2
    band = 0.5 * (energy + _reflect(energy)).sum(axis=0)
    return np.abs(phi_hat) ** 2 + band


def littlewood_paley(bank: FilterBank) -> np.ndarray:
    """Pointwise ``|phi|^2 + 1/2 sum(|psi(w)|^2 + |psi(-w)|^2)`` over the grid."""
    return _lp_sum(bank.psi_hat, bank.phi_hat)


def build_filterbank(side: int, J: int, L: int, params: MorletParams | None = None) -> FilterBank:
    """Build ``J * L`` Morlet wavelets and a Gaussian low-pass at scale ``2**J``.

    Wavelet ``(j, l)`` is the mother wavelet dilated by ``2**j`` and
    rotated by ``pi * l / L``. All wavelets share one amplitude factor,
    chosen as the largest value keeping the Littlewood-Paley sum <= 1.
    """
    params = params or MorletParams()
    if side < 1 or J < 1 or L < 1:
        raise FilterBankError(f"side, J and L must be positive (got {side}, {J}, {L})")
    if 2 ** J > side:
        raise FilterBankError(f"low-pass scale 2**{J} exceeds image side {side}")
    slant = params.slant_for(L)

    psi_hat = np.empty((J, L, side, side), dtype=np.complex128)
    for j in range(J):
        sigma_j = params.sigma * 2 ** j
        xi_j = params.xi / 2 ** j
        for l in range(L):
            spatial = morlet_2d(side, sigma_j, math.pi * l / L, xi_j, slant)
            psi_hat[j, l] = np.fft.fft2(spatial)

    phi = gabor_2d(side, params.sigma * 2 ** J, 0.0, 0.0, 1.0).real
    phi_hat = np.fft.fft2(phi / phi.sum()).real

    # psi vanishes at DC by construction; the ratio is only meaningful elsewhere
    band = _lp_sum(psi_hat, np.zeros_like(phi_hat))
    mask = band > 1e-300
    mask[0, 0] = False
    if not mask.any():
        raise FilterBankError("wavelets carry no energy on this grid")
    gain = math.sqrt(float(np.min((1.0 - phi_hat[mask] ** 2) / band[mask])))
    psi_hat *= gain

    lp = _lp_sum(psi_hat, phi_hat)
    for arr in (psi_hat, phi_hat):
        arr.setflags(write=False)
    return FilterBank(J=J, L=L, side=side, psi_hat=psi_hat, phi_hat=phi_hat,
                      frame_lower=float(lp.min()), frame_upper=float(lp.max()),
                      params=params)


def spatial_filters(bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    """Spatial-domain versions of the bank, centered at pixel (0, 0)."""
    return np.fft.ifft2(bank.psi_hat), np.fft.ifft2(bank.phi_hat).real

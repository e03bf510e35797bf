"""Experiment configuration: a flat ``key = value`` file plus overrides."""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import LAYOUTS, SplitSpec
from .errors import ConfigError
from .filterbank import MorletParams
from .scattering import SCALE_ORDERS
from .svm import SCHEMES, Kernel

DEFAULT_K_LIST = (10, 25, 50, 75, 100, 150, 200)
SCALINGS = ("none", "standardize")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_root: str = ""
    layout: str = "one-dir-per-class"
    dataset_variant: str = ""  # free text, e.g. which GaTech crop was used
    side: int = 64
    J: int = 5
    L: int = 6
    max_order: int = 2
    scale_order: str = "decreasing"
    morlet_sigma: float = 0.8
    morlet_xi: float = 3 * math.pi / 4
    morlet_slant: float | None = None
    variance: str = "population"
    train_count: int | None = None
    train_fraction: float | None = None
    seed: int = 0
    repeats: int = 5
    k_list: tuple[int, ...] = DEFAULT_K_LIST
    kernel: str = "linear"
    gamma: float | None = None
    degree: int | None = None
    coef: float = 0.0
    C: float = 1.0
    scheme: str = "ovo"
    scaling: str = "none"
    output_dir: str = "results"
    cache_dir: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.k_list:
            raise ConfigError("k_list must not be empty")
        if list(self.k_list) != sorted(set(self.k_list)) or self.k_list[0] < 1:
            raise ConfigError("k_list must be strictly ascending positive integers")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"layout must be one of {LAYOUTS}")
        if self.side < 1 or self.side & (self.side - 1):
            raise ConfigError("side must be a power of two")
        if self.J < 1 or self.L < 1 or 2 ** self.J > self.side:
            raise ConfigError("need J >= 1, L >= 1 and 2**J <= side")
        if self.max_order not in (0, 1, 2):
            raise ConfigError("max_order must be 0, 1 or 2")
        if self.scale_order not in SCALE_ORDERS:
            raise ConfigError(f"scale_order must be one of {SCALE_ORDERS}")
        if self.variance != "population":
            raise ConfigError("only population variance is implemented")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.scaling not in SCALINGS:
            raise ConfigError(f"scaling must be one of {SCALINGS}")
        if not self.C > 0:
            raise ConfigError("C must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.train_count is not None and self.train_fraction is not None:
            raise ConfigError("set only one of train_count / train_fraction")
        self.split_spec()
        self.svm_kernel()

    def morlet(self) -> MorletParams:
        return MorletParams(self.morlet_sigma, self.morlet_xi, self.morlet_slant)

    def split_spec(self) -> SplitSpec:
        if self.train_count is None and self.train_fraction is None:
            return SplitSpec(count=6, seed=self.seed, repeats=self.repeats)
        return SplitSpec(self.train_count, self.train_fraction, self.seed, self.repeats)

    def svm_kernel(self) -> Kernel:
        try:
            return Kernel(self.kernel, self.gamma, self.degree, self.coef)
        except Exception as exc:
            raise ConfigError(str(exc)) from exc

    def scattering_params(self) -> dict:
        """Everything that determines a feature vector for a given image."""
        return {"side": self.side, "J": self.J, "L": self.L, "max_order": self.max_order,
                "scale_order": self.scale_order, "morlet": self.morlet().to_dict(),
                "variance": self.variance, "feature_layout": "mean,var per path"}

    def resolved_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.output_dir) / "cache"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(name: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    if name not in fields:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    default = fields[name].default
    if raw.lower() in ("", "none", "null") and name in (
            "morlet_slant", "train_count", "train_fraction", "gamma", "degree", "cache_dir"):
        return None
    try:
        if name == "k_list":
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if name in ("train_count", "degree"):
            return int(raw)
        if name in ("train_fraction", "gamma", "morlet_slant"):
            return float(raw)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = _parse_value(key.strip(), value)
    return out


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a ``key = value`` file (``#`` comments allowed), then apply overrides."""
    values = {}
    if path is not None:
        text = Path(path).read_text()
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string("[experiment]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for key, raw in parser["experiment"].items():
            values[key] = _parse_value(key, raw)
    values.update(overrides or {})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

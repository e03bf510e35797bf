"""End-to-end experiment runner: features -> PCA sweep -> multi-class SVM."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cache import cache_features
from .config import ExperimentConfig
from .dataset import ingest, split
from .errors import ConfigError, ExperimentError, ScatfaceError
from .pca import PcaModel, fit_pca, project
from .svm import SvmModel, train_multiclass

log = logging.getLogger(__name__)

SWEEP_HEADER = ["K", "mean_accuracy", "std_accuracy", "n_repeats"]
RUNS_HEADER = ["K", "repeat", "accuracy", "effective_K"]


@dataclass(frozen=True)
class RunRow:
    K: int
    repeat: int
    accuracy: float
    effective_K: int


@dataclass
class ResultTable:
    rows: list[RunRow] = field(default_factory=list)

    def add(self, row: RunRow) -> None:
        if not 0.0 <= row.accuracy <= 1.0:
            raise ValueError(f"accuracy {row.accuracy} outside [0, 1]")
        self.rows.append(row)

    def aggregates(self) -> list[tuple[int, float, float, int]]:
        """(K, mean, population std, n_repeats) per K, ascending K."""
        out = []
        for k in sorted({r.K for r in self.rows}):
            acc = np.array([r.accuracy for r in self.rows if r.K == k])
            out.append((k, float(acc.mean()), float(acc.std()), len(acc)))
        return out

    def best(self) -> tuple[int, float]:
        k, mean, _, _ = max(self.aggregates(), key=lambda a: (a[1], -a[0]))
        return k, mean

    @classmethod
    def from_runs_csv(cls, path) -> "ResultTable":
        table = cls()
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                table.add(RunRow(int(rec["K"]), int(rec["repeat"]), float(rec["accuracy"]),
                                 int(rec.get("effective_K") or rec["K"])))
        return table


def sweep_report(table: ResultTable, out) -> tuple[Path, Path]:
    """Write ``sweep.csv`` (aggregates) and ``runs.csv`` (per repeat) into ``out``."""
    if not table.rows:
        raise ValueError("empty result table")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    sweep_path, runs_path = out / "sweep.csv", out / "runs.csv"
    with open(sweep_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for k, mean, std, n in table.aggregates():
            w.writerow([k, repr(mean), repr(std), n])
    with open(runs_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_HEADER)
        for r in sorted(table.rows, key=lambda r: (r.K, r.repeat)):
            w.writerow([r.K, r.repeat, repr(r.accuracy), r.effective_K])
    return sweep_path, runs_path


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def __call__(self, X):
        return (X - self.mean) / self.scale


def fit_split(X_train, cfg: ExperimentConfig, k: int | None = None):
    """Fit optional scaling and PCA on training rows only.

    Returns ``(scaler or None, PcaModel)``; the PCA keeps ``k`` (default:
    the largest swept K) components, clamped to the data rank.
    """
    scaler = None
    if cfg.scaling == "standardize":
        sd = X_train.std(axis=0)
        scaler = Standardizer(X_train.mean(axis=0), np.where(sd > 0, sd, 1.0))
        X_train = scaler(X_train)
    pca = fit_pca(X_train, k or max(cfg.k_list))
    return scaler, pca


def evaluate_split(X, labels, train, test, cfg: ExperimentConfig, repeat: int = 0):
    """One ``RunRow`` per K of ``cfg.k_list`` for a single train/test split."""
    if len(test) == 0:
        raise ExperimentError("split leaves no test images", repeat=repeat)
    try:
        scaler, pca = fit_split(X[train], cfg)
    except ScatfaceError as exc:
        raise ExperimentError(f"repeat {repeat}: PCA failed: {exc}", repeat=repeat) from exc
    Xtr = X[train] if scaler is None else scaler(X[train])
    Xte = X[test] if scaler is None else scaler(X[test])
    Ztr, Zte = project(pca, Xtr), project(pca, Xte)
    kernel = cfg.svm_kernel()
    cache: dict[int, float] = {}
    rows = []
    for k in cfg.k_list:
        keff = min(k, pca.m)
        if keff not in cache:
            try:
                model = train_multiclass(Ztr[:, :keff], labels[train], kernel, cfg.C, cfg.scheme)
            except ScatfaceError as exc:
                raise ExperimentError(f"repeat {repeat}, K={k}: SVM failed: {exc}",
                                      repeat=repeat, k=k) from exc
            pred = np.asarray(model.predict(Zte[:, :keff]))
            cache[keff] = float(np.mean(pred == labels[test]))
        rows.append(RunRow(k, repeat, cache[keff], keff))
    return rows


def load_dataset(cfg: ExperimentConfig):
    if not cfg.dataset_root:
        raise ConfigError("dataset_root is not set")
    return ingest(cfg.dataset_root, cfg.layout)


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ResultTable:
    """Full protocol: ingest, cached features, per-repeat PCA + SVM sweep."""
    ds = load_dataset(cfg)
    X, store = cache_features(ds.paths, cfg.scattering_params(), cfg.resolved_cache_dir(),
                              cfg.jobs)
    labels = ds.labels
    spec = cfg.split_spec()
    table = ResultTable()
    for r in range(spec.repeats):
        train, test = split(ds, spec, r)
        for row in evaluate_split(X, labels, train, test, cfg, r):
            table.add(row)
            log.info("repeat %d K=%d (effective %d): accuracy %.4f", r, row.K,
                     row.effective_K, row.accuracy)
    if write:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(cfg.to_json())
        sweep_report(table, out)
    return table


def extract(cfg: ExperimentConfig):
    """Populate the feature cache for ``cfg``'s dataset; returns the store."""
    ds = load_dataset(cfg)
    _, store = cache_features(ds.paths, cfg.scattering_params(), cfg.resolved_cache_dir(),
                              cfg.jobs)
    return ds, store


def train_models(X, labels, train, cfg: ExperimentConfig, k: int) -> tuple[PcaModel, SvmModel]:
    """PCA and SVM fitted on ``train`` rows at dimension ``k``."""
    scaler, pca = fit_split(X[train], cfg, k)
    Xtr = X[train] if scaler is None else scaler(X[train])
    Z = project(pca, Xtr)
    return pca, train_multiclass(Z, labels[train], cfg.svm_kernel(), cfg.C, cfg.scheme)

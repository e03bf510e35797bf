"""Scattering-network face recognition: Morlet scattering features, PCA and
multi-class SVM, plus a benchmark harness."""

from .dataset import Dataset, SplitSpec, ingest, split
from .errors import ScatfaceError
from .features import FeatureVector, extract_features, feature_dim
from .filterbank import FilterBank, MorletParams, build_filterbank, littlewood_paley
from .imageio import Image, load_image, preprocess
from .pca import PcaModel, fit_pca, project
from .scattering import ScatteringMaps, ScatteringPath, enumerate_paths, scatter
from .svm import BinarySvm, Kernel, SvmModel, decision, predict, train_binary, train_multiclass

__version__ = "0.1.0"

__all__ = [
    "BinarySvm", "Dataset", "FeatureVector", "FilterBank", "Image", "Kernel", "MorletParams",
    "PcaModel", "ScatfaceError", "ScatteringMaps", "ScatteringPath", "SplitSpec", "SvmModel",
    "build_filterbank", "decision", "enumerate_paths", "extract_features", "feature_dim",
    "fit_pca", "ingest", "littlewood_paley", "load_image", "predict", "preprocess", "project",
    "scatter", "split", "train_binary", "train_multiclass",
]

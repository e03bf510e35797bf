"""Command-line entry point (``scatface``)."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .config import load_config, parse_overrides
from .dataset import LAYOUTS, write_manifest
from .errors import ScatfaceError
from .filterbank import MorletParams, build_filterbank, littlewood_paley
from .harness import ResultTable, extract, load_dataset, run_experiment, sweep_report
from .imageio import load_image, preprocess
from .scattering import scatter

log = logging.getLogger("scatface")


def _save_png(arr: np.ndarray, path: Path) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    scaled = np.zeros_like(arr) if hi <= lo else (arr - lo) / (hi - lo)
    PILImage.fromarray(np.round(scaled * 255).astype(np.uint8)).save(path)


def _config_from_args(args):
    overrides = parse_overrides(args.set)
    for key in ("seed", "jobs"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "root", None) is not None:
        overrides["dataset_root"] = args.root
    if getattr(args, "layout", None) is not None:
        overrides["layout"] = args.layout
    return load_config(args.config, overrides)


def cmd_ingest(args):
    cfg = _config_from_args(args)
    ds = load_dataset(cfg)
    counts = np.bincount(ds.labels)
    print(json.dumps({"name": ds.name, "items": len(ds), "classes": len(ds.classes),
                      "min_per_class": int(counts.min()), "max_per_class": int(counts.max())}))
    if args.manifest:
        write_manifest(args.manifest, ds, cfg.split_spec())


def cmd_extract(args):
    cfg = _config_from_args(args)
    ds, store = extract(cfg)
    print(json.dumps({"items": len(ds), "cache_dir": str(store.dir),
                      "computed": store.computed, "corrupt": store.corrupt}))


def cmd_run(args):
    cfg = _config_from_args(args)
    table = run_experiment(cfg)
    k, acc = table.best()
    print(json.dumps({"output_dir": cfg.output_dir, "best_K": k, "best_mean_accuracy": acc}))


def cmd_sweep_report(args):
    table = ResultTable.from_runs_csv(args.runs)
    sweep, runs = sweep_report(table, args.out)
    print(json.dumps({"sweep": str(sweep), "runs": str(runs)}))


def _bank_from_args(args):
    return build_filterbank(args.side, args.J, args.L, MorletParams(args.sigma, args.xi))


def cmd_filters_dump(args):
    bank = _bank_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for j in range(bank.J):
        for l in range(bank.L):
            psi = bank.psi(j, l)
            _save_png(np.fft.fftshift(np.abs(psi)), out / f"psi_j{j}_l{l}_fourier.png")
            _save_png(np.fft.fftshift(np.abs(np.fft.ifft2(psi))), out / f"psi_j{j}_l{l}_spatial.png")
    _save_png(np.fft.fftshift(bank.phi_hat), out / "phi_fourier.png")
    _save_png(np.fft.fftshift(littlewood_paley(bank)), out / "littlewood_paley.png")
    print(json.dumps({"out": str(out), "wavelets": bank.n_wavelets,
                      "frame_lower": bank.frame_lower, "frame_upper": bank.frame_upper}))


def cmd_scatter_dump(args):
    bank = _bank_from_args(args)
    img = preprocess(load_image(args.image), args.side)
    maps = scatter(img, bank, args.max_order, args.scale_order)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file", "order", "scales", "orientations", "min", "max"])
        for path, arr in maps:
            name = f"{path.label}.png"
            _save_png(arr, out / name)
            w.writerow([name, path.order, " ".join(map(str, path.scales)),
                        " ".join(map(str, path.orientations)), repr(float(arr.min())),
                        repr(float(arr.max()))])
    print(json.dumps({"out": str(out), "maps": len(maps)}))


def _add_experiment_flags(p):
    p.add_argument("--config", help="key = value experiment file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--root", help="dataset root directory")
    p.add_argument("--layout", choices=LAYOUTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes for feature extraction")


def _add_bank_flags(p):
    p.add_argument("--side", type=int, default=64)
    p.add_argument("--J", type=int, default=5)
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--sigma", type=float, default=MorletParams.sigma)
    p.add_argument("--xi", type=float, default=MorletParams.xi)
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatface", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset directory")
    _add_experiment_flags(p)
    p.add_argument("--manifest", help="write the split manifest CSV here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="populate the feature cache")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("run", help="run the full experiment")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-report", help="rebuild sweep.csv from runs.csv")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_report)

    p = sub.add_parser("filters", help="filter bank utilities")
    fsub = p.add_subparsers(dest="action", required=True)
    d = fsub.add_parser("dump", help="write filter magnitudes as PNG")
    _add_bank_flags(d)
    d.set_defaults(func=cmd_filters_dump)

    p = sub.add_parser("scatter", help="scattering utilities")
    ssub = p.add_subparsers(dest="action", required=True)
    d = ssub.add_parser("dump", help="write every scattering map of an image as PNG")
    d.add_argument("image")
    _add_bank_flags(d)
    d.add_argument("--max-order", type=int, default=2)
    d.add_argument("--scale-order", default="decreasing")
    d.set_defaults(func=cmd_scatter_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ScatfaceError, OSError, ValueError) as exc:
        kind = getattr(exc, "kind", type(exc).__name__)
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

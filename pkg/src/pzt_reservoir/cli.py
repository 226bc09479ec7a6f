"""Command line: ``pzt-reservoir encode`` and ``pzt-reservoir run``.

Settings come from, in increasing priority: built-in defaults, a JSON file
given with ``--config``, and explicit flags. ``PZT_DATA_ROOT`` supplies
default dataset locations (``<root>/mnist/train-images-idx3-ubyte`` and
``<root>/audiomnist``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .evaluation import ExperimentReport, run_experiment
from .pipeline import digest
from .readout import TrainConfig

log = logging.getLogger("pzt_reservoir")

DATA_ROOT_ENV = "PZT_DATA_ROOT"
DEFAULT_SAMPLES = {"mnist": 5000, "audiomnist": 6000}

DEFAULTS = {
    "dataset": "mnist",
    "mnist_images": None,
    "mnist_labels": None,
    "audio_dir": None,
    "samples": None,
    "methods": list(pipeline.BASELINE_METHODS),
    "delay_ns": [],
    "seed": 0,
    "out": "runs",
    "folds": 10,
    "split_mode": "kfold",
    "threshold": 128.0,
    "no_cache": False,
    "uniform": False,
    "sigma": 0.05,
    "l2_lambda": TrainConfig.l2_lambda,
    "max_iter": TrainConfig.max_iter,
    "standardize": False,
    "f1_average": "macro",
    "reservoir": {},
}


def _data_root_path(*parts) -> str | None:
    root = os.environ.get(DATA_ROOT_ENV)
    return str(Path(root, *parts)) if root else None


def build_parser() -> argparse.ArgumentParser:
    # every option defaults to None so config-file values can sit underneath
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; flags override it")
    common.add_argument("--dataset", choices=["mnist", "audiomnist"], default=None)
    common.add_argument("--mnist-images", default=None)
    common.add_argument("--mnist-labels", default=None)
    common.add_argument("--audio-dir", default=None)
    common.add_argument("--samples", type=int, default=None,
                        help="subsample size (default 5000 MNIST / 6000 AudioMNIST)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--threshold", type=float, default=None,
                        help="grayscale binarization threshold (MNIST)")
    common.add_argument("--uniform", action="store_true", default=None,
                        help="uniform instead of class-stratified subsampling")
    common.add_argument("--no-cache", action="store_true", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pzt-reservoir", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("encode", parents=[common], help="encode a dataset into a cache file")
    run = sub.add_parser("run", parents=[common], help="evaluate methods and write reports")
    run.add_argument("--methods", nargs="+", default=None,
                     help=f"any of {', '.join(pipeline.METHODS)} or cube-<delay>ns")
    run.add_argument("--delay-ns", nargs="+", type=float, default=None,
                     help="add a simulated-reservoir method per delay")
    run.add_argument("--folds", type=int, default=None)
    run.add_argument("--split-mode", choices=["kfold", "repeated-holdout"], default=None,
                     help="repeated-holdout also reports the k-fold protocol")
    run.add_argument("--sigma", type=float, default=None, help="noise baseline std")
    run.add_argument("--l2-lambda", type=float, default=None)
    run.add_argument("--max-iter", type=int, default=None)
    run.add_argument("--standardize", action="store_true", default=None)
    run.add_argument("--f1-average", choices=["macro", "weighted"], default=None)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        with open(args.config) as f:
            file_cfg = json.load(f)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown keys in {args.config}: {sorted(unknown)}")
        settings.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["samples"] is None:
        settings["samples"] = DEFAULT_SAMPLES[settings["dataset"]]
    settings["mnist_images"] = settings["mnist_images"] or _data_root_path("mnist", "train-images-idx3-ubyte")
    settings["mnist_labels"] = settings["mnist_labels"] or _data_root_path("mnist", "train-labels-idx1-ubyte")
    settings["audio_dir"] = settings["audio_dir"] or _data_root_path("audiomnist")
    methods = list(settings["methods"]) + [f"cube-{d:g}ns" for d in settings["delay_ns"]]
    settings["methods"] = list(dict.fromkeys(pipeline.check_method(m) for m in methods))
    if not settings["methods"]:
        raise ValueError("no methods selected")
    return settings


def encode(settings: dict) -> pipeline.EncodedDataset:
    stratified = not settings["uniform"]
    if settings["dataset"] == "mnist":
        for key in ("mnist_images", "mnist_labels"):
            if not settings[key] or not Path(settings[key]).exists():
                raise FileNotFoundError(f"--{key.replace('_', '-')} not found: {settings[key]}")
        return pipeline.encode_mnist(settings["mnist_images"], settings["mnist_labels"],
                                     settings["samples"], settings["seed"],
                                     settings["threshold"], stratified)
    if not settings["audio_dir"] or not Path(settings["audio_dir"]).is_dir():
        raise FileNotFoundError(f"--audio-dir not found: {settings['audio_dir']}")
    return pipeline.encode_audiomnist(settings["audio_dir"], settings["samples"],
                                      settings["seed"], stratified)


def encoding_params(settings: dict) -> dict:
    keys = ["dataset", "samples", "seed", "uniform"]
    if settings["dataset"] == "mnist":
        keys += ["mnist_images", "mnist_labels", "threshold"]
    else:
        keys += ["audio_dir"]
    params = {k: settings[k] for k in keys}
    for k in ("mnist_images", "mnist_labels", "audio_dir"):
        if params.get(k):
            params[k] = str(Path(params[k]).resolve())
    params["version"] = pipeline.CACHE_VERSION
    return params


def cache_path(settings: dict) -> Path:
    return Path(settings["out"]) / f"encoded-{settings['dataset']}-{digest(encoding_params(settings))}.bin"


def cmd_encode(settings: dict) -> pipeline.EncodedDataset:
    path = cache_path(settings)
    if path.exists() and not settings["no_cache"]:
        log.info("encoded cache %s is up to date", path)
        return pipeline.load_encoded(path)
    data = encode(settings)
    path.parent.mkdir(parents=True, exist_ok=True)
    pipeline.save_encoded(path, data)
    log.info("wrote %d encoded samples to %s (%d dropped)", len(data), path, len(data.dropped))
    for src in data.dropped:
        log.info("dropped sample: %s", src)
    return data


def _report(data, settings, split_mode) -> ExperimentReport:
    train_cfg = TrainConfig(max_iter=settings["max_iter"], l2_lambda=settings["l2_lambda"],
                            standardize=settings["standardize"])
    trace_dir = None if settings["no_cache"] else Path(settings["out"]) / "traces"
    rows = {}
    for method in settings["methods"]:
        log.info("running %s (%s)", method, split_mode)
        rows[method] = run_experiment(
            data, method, settings["seed"], settings["folds"], train_cfg, split_mode,
            settings["sigma"], settings["reservoir"], trace_dir, settings["f1_average"],
            progress=lambda done, total: log.debug("traces %d/%d", done, total))
    config = {k: settings[k] for k in ("folds", "sigma", "l2_lambda", "max_iter", "standardize",
                                       "f1_average", "reservoir")}
    config["encoding"] = data.digest
    meta = {"dataset": settings["dataset"], "samples": len(data), "dropped": len(data.dropped),
            "seed": settings["seed"], "protocol": split_mode, "config_digest": digest(config),
            "config": config}
    return ExperimentReport(rows, meta)


def _write_report(report: ExperimentReport, out: Path, stem: str) -> None:
    (out / f"{stem}.json").write_text(report.to_json())
    (out / f"{stem}.txt").write_text(report.to_text())
    (out / f"{stem}-folds.csv").write_text(report.to_csv())


def cmd_run(settings: dict) -> list[ExperimentReport]:
    data = cmd_encode(settings)
    out = Path(settings["out"])
    modes = ["kfold"] if settings["split_mode"] == "kfold" else ["kfold", "repeated-holdout"]
    reports = []
    for mode in modes:
        report = _report(data, settings, mode)
        _write_report(report, out, "report" if mode == "kfold" else "report-holdout")
        sys.stdout.write(report.to_text())
        reports.append(report)
    return reports


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        settings = resolve(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if args.command == "encode":
            cmd_encode(settings)
        else:
            cmd_run(settings)
    except Exception as exc:  # noqa: BLE001 - report and exit nonzero
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

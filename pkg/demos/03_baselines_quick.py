"""Readout-only baselines on a 1,000-image slice of MNIST."""

# %%
from pathlib import Path

from pzt_reservoir import pipeline
from pzt_reservoir.evaluation import ExperimentReport, run_experiment

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
data = pipeline.encode_mnist(DATA / "mnist5k-images-idx3-ubyte.gz",
                             DATA / "mnist5k-labels-idx1-ubyte.gz", samples=1000, seed=0)

# %% same folds and same readout for every row; only the features differ
rows = {m: run_experiment(data, m, seed=0, folds=5) for m in ("direct", "summed", "noise")}
report = ExperimentReport(rows, {"dataset": "mnist", "samples": len(data),
                                 "protocol": "5-fold", "seed": 0})
print(report.to_text())

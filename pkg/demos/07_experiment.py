"""
Running an experiment
=====================

An experiment cell is one (PCA on/off, selection on/off, classifier)
combination evaluated with stratified k-fold cross-validation, repeated
for several runs with different seeds.  PCA and feature selection are
fitted inside each fold on the training rows only.

The same thing is available from the shell::

    palmvein run --runs 3 --out results
    palmvein grid --data /path/to/PUT --set features.size=128 --out table3
    palmvein synth --out synthetic_images
    palmvein features --data synthetic_images --set data.layout='{hand}/{subject}/{session}_{shot}.pgm'
"""
import tempfile
from pathlib import Path

from palmvein import ExperimentConfig, emit_report, run_cell, run_grid
from palmvein.experiment import load_features

# a quick configuration: small images, small swarm, two runs
cfg = ExperimentConfig.from_dict({
    "data": {"synthetic": {"classes": 6, "images_per_class": 8, "size": 64}},
    "features": {"size": 64},
    "selection": {"folds": 3, "swarm": {"particles": 8, "iterations": 10}},
    "folds": 4,
    "runs": 2,
})
data = load_features(cfg)

report = run_cell(cfg.for_cell(pca=True, fs=True, classifier="svm"), data)
print(report.cell_id, {k: round(v, 4) for k, v in report.accuracy_stats.items()})
for run in report.runs:
    print(f"  run {run.run} (seed {run.seed}): accuracy {run.accuracy:.4f}, mean features kept {run.n_selected:.1f}")

# the full ablation grid: four (PCA, FS) rows times four classifiers
cfg_grid = ExperimentConfig.from_dict({**cfg.to_dict(), "runs": 1})
reports = run_grid(cfg_grid, data)
with tempfile.TemporaryDirectory() as tmp:
    paths = emit_report(reports, tmp)
    print("wrote", [p.name for p in paths])
    print(Path(tmp, "summary.csv").read_text())

"""Experiment harness: repeated cross-validated runs over the ablation grid.

One *cell* fixes (PCA on/off, feature selection on/off, classifier).  Every
run re-splits the data into stratified outer folds; inside each fold PCA and
the wrapper search only ever see the training rows.
"""
from __future__ import annotations

import copy
import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .classifiers import CLASSIFIER_NAMES, ClassifierSpec
from .dataset import (
    DEFAULT_LAYOUT,
    FeatureConfig,
    SynthSpec,
    build_feature_matrix,
    read_feature_cache,
    scan_dataset,
    synth_generate,
)
from .errors import DatasetError, ParameterError
from .imaging import AheParams
from .labeled import LabeledDataset
from .pca import pca_fit, pca_project
from .pso import SwarmConfig
from .wavelet import SubbandSelection
from .wrapper import SelectionConfig, accuracy, select_features, stratified_split

# published results-table row order: (PCA, FS)
GRID_ROWS = ((False, False), (True, False), (False, True), (True, True))


@dataclass(frozen=True)
class DataSource:
    path: str | None = None
    layout: str = DEFAULT_LAYOUT
    hand: str | None = None
    cache: str | None = None
    synthetic: SynthSpec = field(default_factory=SynthSpec)

    @property
    def name(self) -> str:
        if self.path is None and self.cache is None:
            return "synthetic"
        return self.hand or Path(self.path or self.cache).name


@dataclass(frozen=True)
class PcaSettings:
    enabled: bool = True
    retain: float | int = 0.95


@dataclass(frozen=True)
class SelectionSettings:
    enabled: bool = True
    threshold: float = 0.5
    folds: int = 5
    scheme: str = "cv"
    holdout_fraction: float = 0.3
    swarm: SwarmConfig = field(default_factory=SwarmConfig)


@dataclass(frozen=True)
class GridSettings:
    pca: tuple[bool, ...] = (False, True)
    fs: tuple[bool, ...] = (False, True)
    classifiers: tuple[str, ...] = CLASSIFIER_NAMES


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataSource = field(default_factory=DataSource)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    pca: PcaSettings = field(default_factory=PcaSettings)
    selection: SelectionSettings = field(default_factory=SelectionSettings)
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    classifier_params: dict = field(default_factory=dict)
    grid: GridSettings = field(default_factory=GridSettings)
    folds: int = 5
    runs: int = 30
    seed: int = 0
    out: str = "results"
    timing: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ParameterError(f"runs must be >= 1, got {self.runs}")
        if self.folds < 2:
            raise ParameterError(f"folds must be >= 2, got {self.folds}")

    def selection_config(self, seed: int, classifier: ClassifierSpec | None = None) -> SelectionConfig:
        s = self.selection
        return SelectionConfig(
            threshold=s.threshold,
            classifier=classifier or self.classifier,
            folds=s.folds,
            swarm=replace(s.swarm, seed=seed),
            scheme=s.scheme,
            holdout_fraction=s.holdout_fraction,
        )

    def for_cell(self, pca: bool, fs: bool, classifier: str) -> "ExperimentConfig":
        params = self.classifier_params.get(classifier, {})
        if classifier == self.classifier.name and not params:
            spec = self.classifier
        else:
            spec = ClassifierSpec(classifier, dict(params))
        return replace(
            self,
            pca=replace(self.pca, enabled=pca),
            selection=replace(self.selection, enabled=fs),
            classifier=spec,
        )

    # ------------------------------------------------------------ dict I/O

    def to_dict(self) -> dict:
        d = asdict(self)
        d["features"]["selection"] = self.features.selection.value
        d["classifier"] = {"name": self.classifier.name, "params": dict(self.classifier.params)}
        return d

    @classmethod
    def from_dict(cls, d: dict | None) -> "ExperimentConfig":
        d = copy.deepcopy(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**_sections(d))
        except TypeError as exc:
            # unexpected or missing keyword inside a nested section
            raise ParameterError(f"invalid configuration: {exc}") from None


def _sections(d: dict) -> dict[str, Any]:
    kw: dict[str, Any] = {}
    if "data" in d:
        data = dict(d["data"])
        if "synthetic" in data:
            data["synthetic"] = SynthSpec(**data["synthetic"])
        kw["data"] = DataSource(**data)
    if "features" in d:
        feat = dict(d["features"])
        if "ahe" in feat:
            ahe = dict(feat["ahe"])
            if "tile_grid" in ahe:
                ahe["tile_grid"] = tuple(ahe["tile_grid"])
            feat["ahe"] = AheParams(**ahe)
        if "selection" in feat:
            feat["selection"] = SubbandSelection(feat["selection"])
        kw["features"] = FeatureConfig(**feat)
    if "pca" in d:
        kw["pca"] = PcaSettings(**d["pca"])
    if "selection" in d:
        sel = dict(d["selection"])
        if "swarm" in sel:
            swarm = dict(sel["swarm"])
            if "pos_bounds" in swarm:
                swarm["pos_bounds"] = tuple(swarm["pos_bounds"])
            sel["swarm"] = SwarmConfig(**swarm)
        kw["selection"] = SelectionSettings(**sel)
    if "classifier" in d:
        c = d["classifier"]
        kw["classifier"] = ClassifierSpec(c) if isinstance(c, str) else ClassifierSpec(c.get("name", "svm"), c.get("params", {}))
    if "grid" in d:
        kw["grid"] = GridSettings(**{k: tuple(v) for k, v in d["grid"].items()})
    for key in ("classifier_params", "folds", "runs", "seed", "out", "timing"):
        if key in d:
            kw[key] = d[key]
    return kw


def apply_overrides(d: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` strings; values are parsed as JSON when possible."""
    d = copy.deepcopy(d)
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ParameterError(f"override {item!r} is not of the form key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = d
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ParameterError(f"override {item!r}: {p!r} is not a section")
        node[parts[-1]] = value
    return d


# ---------------------------------------------------------------- features


def dataset_hands(cfg: ExperimentConfig) -> list[str | None]:
    """Hands present under ``cfg.data.path`` (``[None]`` for caches, synthetic data or a set filter)."""
    src = cfg.data
    if src.cache or not src.path or src.hand is not None:
        return [src.hand]
    manifest = scan_dataset(src.path, src.layout)
    return sorted({e.hand for e in manifest.entries}, key=lambda h: (h is None, h or ""))


def load_features(cfg: ExperimentConfig) -> LabeledDataset:
    src = cfg.data
    if src.cache:
        return read_feature_cache(src.cache)
    if src.path:
        manifest = scan_dataset(src.path, src.layout, src.hand)
        hands = {e.hand for e in manifest.entries}
        if len(hands) > 1:
            # subject ids repeat across hands, so pooling would merge two palms into one class
            raise DatasetError(f"{src.path} holds several hands {sorted(map(str, hands))}; set data.hand")
        return build_feature_matrix(manifest, cfg=cfg.features)
    return build_feature_matrix(synth_generate(src.synthetic), cfg=cfg.features)


# ---------------------------------------------------------------- reports


@dataclass
class FoldResult:
    accuracy: float
    n_features: int
    n_selected: int
    pca_k: int | None = None
    best_fitness: float | None = None
    baseline_fitness: float | None = None
    history: list[float] = field(default_factory=list)
    selected: list[int] = field(default_factory=list)


@dataclass
class RunResult:
    run: int
    seed: int
    folds: list[FoldResult]
    seconds: float = 0.0

    @property
    def accuracy(self) -> float:
        return float(np.mean([f.accuracy for f in self.folds]))

    @property
    def n_selected(self) -> float:
        return float(np.mean([f.n_selected for f in self.folds]))

    @property
    def best_fitness(self) -> float | None:
        vals = [f.best_fitness for f in self.folds if f.best_fitness is not None]
        return float(np.mean(vals)) if vals else None


def _stats(values) -> dict[str, float]:
    values = [float(v) for v in values]
    if not values:
        return {"mean": math.nan, "std": math.nan, "min": math.nan, "max": math.nan}
    mean = math.fsum(values) / len(values)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)) if len(values) > 1 else 0.0
    return {"mean": mean, "std": std, "min": min(values), "max": max(values)}


@dataclass
class ExperimentReport:
    dataset: str
    pca: bool
    fs: bool
    classifier: str
    runs: list[RunResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def cell_id(self) -> str:
        return f"{self.dataset}/pca={'yes' if self.pca else 'no'}/fs={'yes' if self.fs else 'no'}/{self.classifier}"

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.runs]

    @property
    def accuracy_stats(self) -> dict[str, float]:
        return _stats(self.accuracies)

    @property
    def selected_stats(self) -> dict[str, float]:
        return _stats(r.n_selected for r in self.runs)

    @property
    def fitness_stats(self) -> dict[str, float]:
        return _stats(r.best_fitness for r in self.runs if r.best_fitness is not None)

    @property
    def mean_accuracy(self) -> float:
        return self.accuracy_stats["mean"]


# ---------------------------------------------------------------- running


def _fold_seed(run_seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([run_seed, fold]).generate_state(1, np.uint64)[0] >> 1)


def evaluate_fold(data: LabeledDataset, train, test, cfg: ExperimentConfig, seed: int) -> FoldResult:
    """Fit PCA / selection / classifier on ``train`` rows and score the ``test`` rows."""
    Xtr, ytr, Xte = data.X[train], data.y[train], data.X[test]
    pca_k = None
    if cfg.pca.enabled:
        model = pca_fit(Xtr, cfg.pca.retain)
        Xtr, Xte = pca_project(model, Xtr), pca_project(model, Xte)
        pca_k = model.k
    d = Xtr.shape[1]
    cols = np.arange(d)
    result = None
    if cfg.selection.enabled:
        result = select_features(LabeledDataset(Xtr, ytr), cfg.selection_config(seed))
        cols = result.mask.indices
    clf = cfg.classifier
    model = clf.train(Xtr[:, cols], ytr)
    acc = accuracy(clf.predict(model, Xte[:, cols]), data.y[test])
    return FoldResult(
        accuracy=acc,
        n_features=d,
        n_selected=len(cols),
        pca_k=pca_k,
        best_fitness=result.fitness if result else None,
        baseline_fitness=result.baseline_fitness if result else None,
        history=list(result.history) if result else [],
        selected=cols.tolist() if result else [],
    )


def run_cell(cfg: ExperimentConfig, data: LabeledDataset | None = None) -> ExperimentReport:
    """Run ``cfg.runs`` seeded repetitions of outer stratified CV for one cell."""
    if data is None:
        data = load_features(cfg)
    report = ExperimentReport(cfg.data.name, cfg.pca.enabled, cfg.selection.enabled, cfg.classifier.name)
    started = time.perf_counter()
    for r in range(cfg.runs):
        t0 = time.perf_counter()
        seed = cfg.seed + r
        split = stratified_split(data.y, cfg.folds, seed)
        folds = [
            evaluate_fold(data, train, test, cfg, _fold_seed(seed, k))
            for k, (train, test) in enumerate(split.pairs())
        ]
        report.runs.append(RunResult(r, seed, folds, time.perf_counter() - t0))
    report.seconds = time.perf_counter() - started
    return report


def grid_cells(cfg: ExperimentConfig):
    for pca, fs in GRID_ROWS:
        if pca not in cfg.grid.pca or fs not in cfg.grid.fs:
            continue
        for name in CLASSIFIER_NAMES:
            if name in cfg.grid.classifiers:
                yield pca, fs, name


def run_grid(cfg: ExperimentConfig, data: LabeledDataset | None = None) -> list[ExperimentReport]:
    """Run every configured (PCA, FS, classifier) cell, sharing one feature matrix per dataset.

    A dataset root holding both hands with no ``data.hand`` filter is run once
    per hand, each hand being its own identification problem.
    """
    unknown = set(cfg.grid.classifiers) - set(CLASSIFIER_NAMES)
    if unknown:
        raise ParameterError(f"unknown classifiers in grid: {sorted(unknown)}")
    if data is not None:
        return [run_cell(cfg.for_cell(pca, fs, name), data) for pca, fs, name in grid_cells(cfg)]
    reports = []
    for hand in dataset_hands(cfg):
        sub = replace(cfg, data=replace(cfg.data, hand=hand))
        shared = load_features(sub)
        reports += [run_cell(sub.for_cell(pca, fs, name), shared) for pca, fs, name in grid_cells(sub)]
    return reports


# ---------------------------------------------------------------- output

DETAIL_COLUMNS = ["cell_id", "pca", "fs", "classifier", "run", "seed", "accuracy", "n_selected", "seconds", "best_fitness"]
SUMMARY_COLUMNS = ["dataset", "pca", "fs", *CLASSIFIER_NAMES]
HISTORY_COLUMNS = ["cell_id", "run", "fold", "iteration", "gbest_fitness"]


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def detail_rows(reports, timing: bool = False):
    for rep in reports:
        for run in rep.runs:
            yield [
                rep.cell_id,
                _yes(rep.pca),
                _yes(rep.fs),
                rep.classifier,
                str(run.run),
                str(run.seed),
                _num(run.accuracy),
                _num(run.n_selected),
                _num(run.seconds) if timing else "",
                _num(run.best_fitness),
            ]


def summary_rows(reports):
    """Results-table layout: one row per (dataset, PCA, FS), one mean-accuracy column per classifier."""
    table: dict[tuple, dict[str, float]] = {}
    for rep in reports:
        table.setdefault((rep.dataset, rep.pca, rep.fs), {})[rep.classifier] = rep.mean_accuracy
    order = {row: i for i, row in enumerate(GRID_ROWS)}
    keys = sorted(table, key=lambda k: (order[(k[1], k[2])], k[0]))
    for key in keys:
        cells = table[key]
        yield [key[0], _yes(key[1]), _yes(key[2]), *(_num(cells.get(c)) for c in CLASSIFIER_NAMES)]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(reports, out_dir, formats=("csv", "jsonl"), timing: bool = False) -> list[Path]:
    """Write detail, summary and PSO-trace files; returns the paths written.

    Wall-clock seconds are only written when ``timing`` is set, which keeps
    every output file byte-identical across repeated runs by default.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = list(reports)
    written = []
    if "csv" in formats:
        _write_csv(out / "runs.csv", DETAIL_COLUMNS, detail_rows(reports, timing))
        _write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary_rows(reports))
        hist = (
            [rep.cell_id, run.run, k, t, _num(v)]
            for rep in reports
            for run in rep.runs
            for k, fold in enumerate(run.folds)
            for t, v in enumerate(fold.history)
        )
        _write_csv(out / "histories.csv", HISTORY_COLUMNS, hist)
        written += [out / "runs.csv", out / "summary.csv", out / "histories.csv"]
    if "jsonl" in formats:
        with open(out / "runs.jsonl", "w") as fh:
            for rep in reports:
                for run in rep.runs:
                    record = {
                        "cell_id": rep.cell_id,
                        "dataset": rep.dataset,
                        "pca": rep.pca,
                        "fs": rep.fs,
                        "classifier": rep.classifier,
                        "run": run.run,
                        "seed": run.seed,
                        "accuracy": run.accuracy,
                        "n_selected": run.n_selected,
                        "best_fitness": run.best_fitness,
                        "seconds": run.seconds if timing else None,
                        "folds": [asdict(f) for f in run.folds],
                    }
                    fh.write(json.dumps(record, sort_keys=True) + "\n")
        written.append(out / "runs.jsonl")
    return written

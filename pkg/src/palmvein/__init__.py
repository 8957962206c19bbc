"""Palm-vein identification: Haar wavelet features, PCA, PSO wrapper selection, four classifiers."""
from .classifiers import CLASSIFIER_NAMES, ClassifierSpec
from .dataset import (
    DatasetManifest,
    FeatureConfig,
    SynthSpec,
    build_feature_matrix,
    read_feature_cache,
    scan_dataset,
    synth_generate,
    write_feature_cache,
    write_synthetic,
)
from .eigen import jacobi_eigh
from .errors import (
    ConvergenceError,
    DatasetError,
    DecodeError,
    DimensionError,
    InsufficientDataError,
    PalmVeinError,
    ParameterError,
    TrainingError,
)
from .experiment import ExperimentConfig, ExperimentReport, emit_report, run_cell, run_grid
from .imaging import AheParams, GrayImage, adaptive_hist_eq, load_image, negative, preprocess, resize
from .labeled import LabeledDataset
from .pca import PcaModel, pca_fit, pca_project, pca_reconstruct
from .pso import SwarmConfig, pso_init, pso_run, pso_step
from .wavelet import DwtPyramid, SubbandSelection, dwt2_forward, dwt2_inverse, extract_features
from .wrapper import FeatureMask, SelectionConfig, accuracy, decode_mask, select_features, stratified_split

__version__ = "0.1.0"

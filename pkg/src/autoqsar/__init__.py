"""Automated QSAR: descriptors and fingerprints, split-grid model sweeps, ranking, reports."""

from .dataset import Dataset, Record, SplitSpec, load_csv, split_grid, stratified_split
from .descriptors import compute_descriptors, correlation_filter, descriptor_matrix
from .fingerprints import Fingerprint, fingerprint, tanimoto
from .learners import ModelSpec, TrainedModel, fit, predict, select_components
from .molgraph import Molecule, parse_smiles
from .persistence import load_model, load_run, save_models
from .pipeline import PipelineConfig, RankedModels, ScoreCard, default_roster, rank, run_pipeline, score
from .report import report

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Record", "SplitSpec", "load_csv", "split_grid", "stratified_split",
    "compute_descriptors", "correlation_filter", "descriptor_matrix",
    "Fingerprint", "fingerprint", "tanimoto",
    "ModelSpec", "TrainedModel", "fit", "predict", "select_components",
    "Molecule", "parse_smiles",
    "load_model", "load_run", "save_models",
    "PipelineConfig", "RankedModels", "ScoreCard", "default_roster", "rank", "run_pipeline", "score",
    "report",
]

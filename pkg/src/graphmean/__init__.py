"""graphmean: low-rank estimation of the mean of a population of graphs."""

__version__ = "0.1.0"

from .core import (AdjacencyMatrix, GraphBatch, NumericalError,
                   ProbabilityMatrix, ValidationError, clamp01,
                   log1p_transform, mse, sample_mean)
from .dimselect import (USVT, ZG, DimSelectMethod, Fixed, parse_dim_method,
                        select_dimension, usvt_dim, zg_elbow)
from .efficiency import (ExperimentReport, ReplicateRecord, abar_mse_theory,
                         approx_re_theory, cross_validate, phat_mse_theory,
                         run_sbm_experiment, sigma_matrix)
from .estimator import (PhatResult, diag_augment_iterative,
                        diag_augment_rowmean, estimate_phat, phat_from_mean)
from .io import load_adjacency, load_batch, save_matrix
from .models import (LatentPositions, Membership, SbmParams, fixture,
                     fullrank70, load_sbm_json, psd_factorize,
                     rdpg_probability_matrix, sample_iem_graph,
                     sample_memberships, sbm_probability_matrix)
from .permtest import (LabelAssignment, PermTestResult, SpatialAdjacency,
                       perm_test, test_statistic, uniform_k_flip,
                       uniform_one_flip)
from .rng import stream
from .spectral import EigenPairs, ase, eig_sym, lowrank, svd_embed

__all__ = [
    "AdjacencyMatrix", "GraphBatch", "ProbabilityMatrix", "ValidationError",
    "NumericalError", "clamp01", "log1p_transform", "mse", "sample_mean",
    "DimSelectMethod", "ZG", "USVT", "Fixed", "zg_elbow", "usvt_dim",
    "select_dimension", "parse_dim_method",
    "ExperimentReport", "ReplicateRecord", "abar_mse_theory",
    "phat_mse_theory", "approx_re_theory", "sigma_matrix",
    "run_sbm_experiment", "cross_validate",
    "PhatResult", "diag_augment_rowmean", "diag_augment_iterative",
    "estimate_phat", "phat_from_mean",
    "load_adjacency", "load_batch", "save_matrix",
    "SbmParams", "Membership", "LatentPositions", "fixture", "fullrank70",
    "load_sbm_json", "psd_factorize", "sample_memberships",
    "sbm_probability_matrix", "rdpg_probability_matrix", "sample_iem_graph",
    "LabelAssignment", "SpatialAdjacency", "PermTestResult",
    "test_statistic", "uniform_one_flip", "uniform_k_flip", "perm_test",
    "EigenPairs", "eig_sym", "lowrank", "ase", "svd_embed",
    "stream",
]

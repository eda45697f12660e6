"""Topographic mapping toolkit.

Entropy-regularized maps with continuous per-point latent positions,
classic batch-SOM / soft topographic VQ baselines, neighborhood
preservation metrics, a seeded random-search tuner and a scaling
benchmark harness.
"""

from .backends import BACKEND, get_num_threads, set_num_threads
from .baselines import (
    BsomResult,
    StvqState,
    bmu,
    bmu_indices,
    bsom_fit,
    latent_positions_of,
    pca_project,
    sequential_som_fit,
    sequential_som_step,
    stvq_fit,
    stvqf_fit,
)
from .core import (
    Assignments,
    DataError,
    Dataset,
    FitConfig,
    FitReport,
    HyperParams,
    LatentGrid,
    MapModel,
    NumericalError,
    make_square_grid,
    row_stochastic_check,
)
from .data import gen_saddle, impute_median, load_csv, save_csv, scale_by, standardize
from .initialization import PcaBasis, init_assignments, init_refs, pca
from .kernels import KernelMatrix, gaussian_kernel, neighborhood_distortion, normalized_kernel
from .metrics import (
    RankTable,
    continuity,
    quantization_error,
    rank_table,
    trustworthiness,
    tuning_score,
)
from .som_olp import (
    SomOlpState,
    local_cost,
    objective,
    objective_laplacian_form,
    update_assignments,
    update_latents,
    update_refs,
)
from .som_olp import fit as som_olp_fit

__version__ = "0.1.0"

__all__ = [
    "Assignments", "BACKEND", "BsomResult", "DataError", "Dataset",
    "FitConfig", "FitReport", "HyperParams", "KernelMatrix", "LatentGrid",
    "MapModel", "NumericalError", "PcaBasis", "RankTable", "SomOlpState",
    "StvqState", "bmu", "bmu_indices", "bsom_fit", "continuity",
    "gaussian_kernel", "gen_saddle", "get_num_threads", "impute_median",
    "init_assignments", "init_refs", "latent_positions_of", "load_csv",
    "local_cost", "make_square_grid", "neighborhood_distortion",
    "normalized_kernel", "objective", "objective_laplacian_form", "pca",
    "pca_project", "quantization_error", "rank_table", "row_stochastic_check",
    "save_csv", "scale_by", "sequential_som_fit", "sequential_som_step",
    "set_num_threads", "som_olp_fit", "standardize", "stvq_fit", "stvqf_fit",
    "trustworthiness", "tuning_score", "update_assignments", "update_latents",
    "update_refs",
]

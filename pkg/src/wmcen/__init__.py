"""Rank-based (Wilcoxon) multivariate regression with lasso sparsity and
k-means coupling of the response coefficient vectors, fit by an MM algorithm."""

from .core import (ClusterState, Dataset, FitResult, Hyperparams, SolverConfig,
                   SolverError, ValidationError, WMCENError, validate_dataset)
from .metrics import median_ape, mse_beta
from .objective import (ObjectiveBreakdown, cluster_penalty, jaeckel_dispersion,
                        majorizer_m, objective_l_dagger, pairwise_dispersion,
                        perturbed_l1, wilcoxon_dispersion)
from .pairwise import PairwiseSystem, build_pairwise
from .solver import (fit, predict, update_beta_block, update_centroids,
                     update_clusters, update_psi, update_weights)
from .tuning import TuningGrid, cv_score, grid_search, kfold_split

__version__ = "0.1.0"

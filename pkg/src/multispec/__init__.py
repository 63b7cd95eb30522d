"""Community detection for multi-relational networks.

Estimates a common community structure shared by the layers of a
multilayer network by spectral clustering of the diagonal-zeroed sum of
squared adjacency matrices, which turns assortative and disassortative
layer structure alike into a positive spectral signal.  Includes the
spherical variant for degree-corrected models, a community-count
estimator, multilayer block-model samplers, evaluation metrics, and a
reproducible experiment harness.
"""

from .detect import (
    DetectionError,
    DetectionResult,
    TheoryDiagnostics,
    algorithm1,
    algorithm2,
    algorithm3,
    baseline_spectral_sum,
    baseline_sum_spectral,
    detect_from_sum_squares,
    theory_diagnostics,
)
from .eigen import (
    DegenerateEmbeddingError,
    NormalizedEmbedding,
    SpectralEmbedding,
    all_eigenvalues,
    normalize_rows,
    top_k_eigenpairs,
)
from .evaluate import EvalReport, misclassification, nmi
from .experiment import ExperimentConfig, ResultsTable, run_experiment, summarize
from .kmeans import KMeansResult, kmeans_approx, kmeans_exact
from .models import (
    BlockSchedule,
    ModelParams,
    ParameterError,
    expected_sum_squares,
    membership_matrix,
    normalize_psi,
    sample_memberships,
    sample_network,
    scenario_schedule,
)
from .network import (
    DegeneratePruningError,
    DegreeStats,
    EdgeListError,
    MultiLayerNetwork,
    PruneResult,
    SumSquares,
    degree_stats,
    from_edges,
    load_multilayer,
    prune,
    save_multilayer,
    submatrix,
    sum_squared_adjacency,
)

__version__ = "0.1.0"

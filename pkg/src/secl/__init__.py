"""Structure-enhanced contrastive graph clustering.

Two MLP encoders (adjacency rows and low-pass-filtered attributes) are
trained jointly with a cross-view contrastive loss, a structural alignment
loss, and a modularity-maximization loss; K-means on the attribute
embeddings yields the final clustering.
"""

from ._version import __version__
from .clustering import ClusterResult, kmeans
from .config import TrainConfig, bundled_config_names, bundled_config_path, load_config
from .encoders import EncoderParams, encode, init_params, smooth_attributes
from .graphs import (
    Graph,
    GraphOperators,
    ModularityOperator,
    build_operators,
    degree_vector,
    load_graph,
    modularity_matrix,
    normalized_adjacency,
)
from .losses import (
    LossBreakdown,
    cross_view_contrastive_loss,
    modularity_loss,
    structural_contrastive_loss,
    total_loss,
)
from .metrics import (
    MetricsReport,
    accuracy,
    ari,
    evaluate,
    f1_score,
    modularity_score,
    nmi,
)
from .optim import AdamState, adam_step, finite_difference_grad
from .tape import Tape
from .training import RunRecord, ablate, run_experiment, sweep, time_report, train

__all__ = [
    "__version__",
    "AdamState",
    "ClusterResult",
    "EncoderParams",
    "Graph",
    "GraphOperators",
    "LossBreakdown",
    "MetricsReport",
    "ModularityOperator",
    "RunRecord",
    "Tape",
    "TrainConfig",
    "ablate",
    "accuracy",
    "adam_step",
    "ari",
    "build_operators",
    "bundled_config_names",
    "bundled_config_path",
    "cross_view_contrastive_loss",
    "degree_vector",
    "encode",
    "evaluate",
    "f1_score",
    "finite_difference_grad",
    "init_params",
    "kmeans",
    "load_config",
    "load_graph",
    "modularity_loss",
    "modularity_matrix",
    "modularity_score",
    "nmi",
    "normalized_adjacency",
    "run_experiment",
    "smooth_attributes",
    "structural_contrastive_loss",
    "sweep",
    "time_report",
    "total_loss",
    "train",
]

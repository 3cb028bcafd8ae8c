"""Similarity fusion, Sinkhorn, loss, evaluation and training."""

from .correspondence import Correspondence
from .evaluation import (
    exact_assignment,
    greedy_assignment,
    matching_accuracy,
    precision_at_k,
    precision_table,
    sparsify_topk,
    topk_support,
)
from .loss import matching_loss
from .similarity import combined_similarity, fuse, high_order_similarity, local_similarity
from .sinkhorn import check_marginals, sinkhorn, sinkhorn_normalize
from .hierarchical import train_hierarchical
from .training import TrainResult, build_stacks, train_khgmn

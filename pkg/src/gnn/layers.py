"""
Message-passing layers.

Parameters live in a `ParameterStore` under `layer{t}.*` names; every layer
ends with ReLU and, when `config.batch_norm` is set, full-batch feature
normalization with a learned scale and shift.
"""

from __future__ import annotations

from src.autodiff import ops
from src.autodiff.params import ParameterStore
from src.autodiff.tape import Tensor
from src.graphs.sparse import SparseMatrix
from src.schemas.config import GnnConfig


def _mlp(x: Tensor, params: ParameterStore, t: int, mlp_layers: int) -> Tensor:
    h = x
    for i in range(mlp_layers):
        h = ops.add(ops.matmul(h, params[f"layer{t}.mlp{i}.weight"]), params[f"layer{t}.mlp{i}.bias"])
        if i < mlp_layers - 1:
            h = ops.relu(h)
    return h


def _finish(h: Tensor, params: ParameterStore, t: int, config: GnnConfig) -> Tensor:
    h = ops.relu(h)
    if config.batch_norm:
        h = ops.batch_feature_normalize(h)
        h = ops.add(ops.elementwise_mul(h, params[f"layer{t}.bn.scale"]), params[f"layer{t}.bn.shift"])
    return h


def gin_layer(
    x: Tensor, adjacency: SparseMatrix, params: ParameterStore, t: int, config: GnnConfig
) -> Tensor:
    """MLP((1 + ε) x_i + Σ_{j ∈ N(i)} x_j) per node."""
    eps = params[f"layer{t}.eps"]
    self_term = ops.add(x, ops.elementwise_mul(x, eps))
    h = ops.add(self_term, ops.spmm(adjacency, x))
    return _finish(_mlp(h, params, t, config.mlp_layers), params, t, config)


def gcn_layer(
    x: Tensor, normalized_adjacency: SparseMatrix, params: ParameterStore, t: int, config: GnnConfig
) -> Tensor:
    """σ(Ã x W) followed by the per-layer MLP."""
    h = ops.relu(ops.matmul(ops.spmm(normalized_adjacency, x), params[f"layer{t}.weight"]))
    return _finish(_mlp(h, params, t, config.mlp_layers), params, t, config)


def tri_directed_layer(
    x: Tensor,
    in_adj: SparseMatrix,
    out_adj: SparseMatrix,
    params: ParameterStore,
    t: int,
    config: GnnConfig,
) -> Tensor:
    """σ(W1 x_i + Σ_{j→i} W2 x_j + Σ_{i→j} W3 x_j).

    `in_adj[i, j] = 1` iff j→i, `out_adj[i, j] = 1` iff i→j.
    """
    h = ops.matmul(x, params[f"layer{t}.w_self"])
    h = ops.add(h, ops.matmul(ops.spmm(in_adj, x), params[f"layer{t}.w_in"]))
    h = ops.add(h, ops.matmul(ops.spmm(out_adj, x), params[f"layer{t}.w_out"]))
    return _finish(h, params, t, config)

"""Siamese graph encoder: one parameter store, applied to source and target alike."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.autodiff import ops
from src.autodiff.params import ParameterStore
from src.autodiff.tape import Tensor
from src.exceptions import ContractError, NonFiniteError
from src.gnn.layers import gcn_layer, gin_layer, tri_directed_layer
from src.graphs.graph import Graph
from src.graphs.kernels import renormalized, undirected_adjacency
from src.graphs.sparse import SparseMatrix
from src.linegraph.construction import LineGraphLevel
from src.schemas.config import GnnConfig, OperatorKind

logger = logging.getLogger(__name__)


def init_encoder_params(
    config: GnnConfig, in_dim: int, seed: int, prefix: str = ""
) -> ParameterStore:
    """Glorot weights, zero biases and ε, unit normalization scale."""
    params = ParameterStore(seed=seed, prefix=prefix)
    hidden = config.hidden_dim
    for t in range(config.layers):
        width = in_dim if t == 0 else hidden
        if config.operator == OperatorKind.TRI_DIRECTED:
            for name in ("w_self", "w_in", "w_out"):
                params.glorot(f"layer{t}.{name}", width, hidden)
        else:
            if config.operator == OperatorKind.GIN:
                params.constant(f"layer{t}.eps", 1, 1, 0.0)
                mlp_in = width
            else:
                params.glorot(f"layer{t}.weight", width, hidden)
                mlp_in = hidden
            for i in range(config.mlp_layers):
                params.glorot(f"layer{t}.mlp{i}.weight", mlp_in if i == 0 else hidden, hidden)
                params.constant(f"layer{t}.mlp{i}.bias", 1, hidden, 0.0)
        if config.batch_norm:
            params.constant(f"layer{t}.bn.scale", 1, hidden, 1.0)
            params.constant(f"layer{t}.bn.shift", 1, hidden, 0.0)
    if config.use_jk:
        params.glorot("jk.weight", config.layers * hidden, hidden)
    return params


def input_width(params: ParameterStore, config: GnnConfig) -> int:
    if config.operator == OperatorKind.TRI_DIRECTED:
        return params["layer0.w_self"].shape[0]
    if config.operator == OperatorKind.GIN:
        return params["layer0.mlp0.weight"].shape[0]
    return params["layer0.weight"].shape[0]


@dataclass(frozen=True)
class GraphOperators:
    """Sparse operators one encoder pass needs, computed once per graph.

    GIN and GCN use a single symmetric kernel for both fields.
    """

    incoming: SparseMatrix
    outgoing: SparseMatrix

    @classmethod
    def for_graph(cls, g: Graph, operator: OperatorKind) -> "GraphOperators":
        if operator == OperatorKind.TRI_DIRECTED:
            adjacency = g.adjacency()
            return cls(incoming=adjacency.transpose(), outgoing=adjacency)
        if operator == OperatorKind.GCN:
            kernel = renormalized(undirected_adjacency(g))
        else:
            kernel = undirected_adjacency(g)
        return cls(incoming=kernel, outgoing=kernel)


def _layer(x, ops_, params, t, config):
    if config.operator == OperatorKind.GIN:
        return gin_layer(x, ops_.incoming, params, t, config)
    if config.operator == OperatorKind.GCN:
        return gcn_layer(x, ops_.incoming, params, t, config)
    return tri_directed_layer(x, ops_.incoming, ops_.outgoing, params, t, config)


def encode(
    graph_or_level: Union[Graph, LineGraphLevel],
    params: ParameterStore,
    config: GnnConfig,
    features=None,
    operators: Optional[GraphOperators] = None,
) -> Tensor:
    """Run T layers and return Z, one row per node.

    With `use_jk`, Z = concat(x^(1), …, x^(T)) W; otherwise Z = x^(T).
    `features` overrides the graph's own feature matrix.

    Raises:
        ContractError: If the feature width does not match the parameters.
        NonFiniteError: If a layer produces NaN or infinite values.
    """
    g = graph_or_level.graph if isinstance(graph_or_level, LineGraphLevel) else graph_or_level
    x = features if isinstance(features, Tensor) else Tensor(g.features if features is None else features)
    expected = input_width(params, config)
    if x.shape != (g.num_nodes, expected):
        raise ContractError(
            f"encode: features have shape {x.shape}, expected ({g.num_nodes}, {expected}).",
            details={"expected_width": expected, "actual_width": x.shape[1]},
        )
    operators = operators or GraphOperators.for_graph(g, config.operator)
    logger.debug("Encoding %d nodes with %s x%d.", g.num_nodes, config.operator.value, config.layers)

    hidden_states = []
    for t in range(config.layers):
        x = _layer(x, operators, params, t, config)
        if not np.all(np.isfinite(x.value)):
            raise NonFiniteError(f"Layer {t} produced non-finite values.", details={"layer": t})
        hidden_states.append(x)

    if config.use_jk:
        return ops.matmul(ops.concat_cols(hidden_states), params["jk.weight"])
    return hidden_states[-1]

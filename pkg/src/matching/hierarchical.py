"""
Hierarchical matching: levels are trained independently and in order.

Level 0 is the local-only matcher. Every later level gets a fresh encoder
whose input features are built from the frozen embeddings of the level
below, and whose local term is the frozen level-0 similarity.
"""

from __future__ import annotations

import logging

from src.autodiff.tape import Tensor
from src.events import dispatch_event, level_trained
from src.exceptions import ContractError
from src.gnn.encoder import GraphOperators, encode, init_encoder_params
from src.graphs.graph import AnchorSet, Graph
from src.linegraph.construction import lift_features
from src.matching.similarity import combined_similarity, fuse, high_order_similarity
from src.matching.training import (
    TrainResult,
    check_train_anchors,
    run_epochs,
    seed_stream,
    build_stacks,
    train_khgmn,
)
from src.schemas.config import GnnConfig, TrainConfig

logger = logging.getLogger(__name__)


def train_hierarchical(
    g_s: Graph,
    g_t: Graph,
    anchors: AnchorSet,
    cfg: TrainConfig,
    gnn: GnnConfig,
) -> TrainResult:
    """Train level 0, then levels 1..m one at a time on frozen predecessors.

    Level-k features are the concatenated frozen level-(k−1) embeddings of
    each line node's two endpoints; the local term of every level is the
    frozen level-0 similarity.
    """
    if cfg.m < 1:
        raise ContractError("The hierarchical variant needs m >= 1.")
    train = check_train_anchors(anchors, cfg)
    logger.info("Training levels 0..%d one at a time.", cfg.m)
    base_cfg = cfg.model_copy(update={"m": 0, "hierarchical": False})
    base = train_khgmn(g_s, g_t, anchors, base_cfg, gnn)
    local_params = base.params["local"]
    dispatch_event(level_trained, __name__, level=0, final_loss=base.final_loss)

    stack_s, stack_t = build_stacks(g_s, g_t, anchors, cfg)
    z_s = encode(stack_s.level_graph(0), local_params, gnn).value
    z_t = encode(stack_t.level_graph(0), local_params, gnn).value
    local = Tensor(z_s @ z_t.T)

    params = {"level0": local_params}
    curves = {0: base.loss_curve}
    level_seeds = seed_stream(cfg.seed + 1, cfg.m + 1)
    correspondence = base.correspondence
    for k in range(1, cfg.m + 1):
        level_s, level_t = stack_s.level(k), stack_t.level(k)
        x_s = lift_features(level_s.incidence, z_s, endpoints=level_s.endpoints)
        x_t = lift_features(level_t.incidence, z_t, endpoints=level_t.endpoints)
        graph_s, graph_t = level_s.graph, level_t.graph
        store = init_encoder_params(gnn, x_s.shape[1], level_seeds[k], prefix=f"level{k}.")
        ops_s = GraphOperators.for_graph(graph_s, gnn.operator)
        ops_t = GraphOperators.for_graph(graph_t, gnn.operator)
        h_s, h_t = stack_s.row_normalized_at(k), stack_t.row_normalized_at(k)

        def embed() -> tuple[Tensor, Tensor]:
            return (
                encode(graph_s, store, gnn, features=x_s, operators=ops_s),
                encode(graph_t, store, gnn, features=x_t, operators=ops_t),
            )

        def forward() -> Tensor:
            return fuse(cfg.alpha, high_order_similarity(h_s, *embed(), h_t), local)

        curves[k] = run_epochs([store], forward, cfg, train, level=k)
        params[f"level{k}"] = store

        level_z_s, level_z_t = embed()
        correspondence = combined_similarity(
            cfg.alpha,
            high_order_similarity(h_s, level_z_s, level_z_t, h_t),
            local,
            cfg.sinkhorn_iters,
            cfg.sinkhorn_tau,
            strict=cfg.sinkhorn_strict,
        ).detach()
        z_s, z_t = level_z_s.value, level_z_t.value
        dispatch_event(
            level_trained,
            __name__,
            level=k,
            final_loss=curves[k][-1] if curves[k] else float("nan"),
        )

    return TrainResult(
        correspondence=correspondence,
        params=params,
        loss_curve=curves[cfg.m],
        stacks=(stack_s, stack_t),
        level_curves=curves,
    )

"""
Joint training of the level-m encoder and the original-graph encoder.

The epoch loop, seed stream and stack construction here are shared with the
hierarchical variant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.autodiff.optim import AdamState, adam_step
from src.autodiff.params import ParameterStore
from src.autodiff.tape import Tape, Tensor
from src.events import dispatch_event, epoch_completed, stack_built
from src.exceptions import ContractError, DivergenceError, NonFiniteError, ValidationError
from src.gnn.encoder import GraphOperators, encode, init_encoder_params
from src.graphs.graph import AnchorSet, Graph
from src.linegraph.stack import IlgStack, build_ilg_stack
from src.matching.correspondence import Correspondence
from src.matching.evaluation import topk_support
from src.matching.loss import matching_loss
from src.matching.similarity import combined_similarity, fuse, high_order_similarity, local_similarity
from src.matching.sinkhorn import sinkhorn_normalize
from src.schemas.config import GnnConfig, TrainConfig

logger = logging.getLogger(__name__)

# Fused (pre-Sinkhorn) scores for the current parameters.
Forward = Callable[[], Tensor]


@dataclass
class TrainResult:
    correspondence: Correspondence
    params: dict[str, ParameterStore]
    loss_curve: list[float]
    stacks: tuple[IlgStack, IlgStack]
    level_curves: dict[int, list[float]] = field(default_factory=dict)

    @property
    def final_loss(self) -> float:
        return self.loss_curve[-1] if self.loss_curve else float("nan")


def seed_stream(seed: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def build_stacks(
    g_s: Graph, g_t: Graph, anchors: AnchorSet, cfg: TrainConfig
) -> tuple[IlgStack, IlgStack]:
    """Stacks of order cfg.m for both graphs, protecting training anchors."""
    train = anchors.train_pairs
    seed_s, seed_t = seed_stream(cfg.seed, 2)
    stack_s = build_ilg_stack(
        g_s.with_anchor_tags(train[:, 0].tolist()), cfg.m, cfg.prune, seed=seed_s
    )
    stack_t = build_ilg_stack(
        g_t.with_anchor_tags(train[:, 1].tolist()), cfg.m, cfg.prune, seed=seed_t
    )
    for side, stack in (("source", stack_s), ("target", stack_t)):
        dispatch_event(
            stack_built,
            __name__,
            side=side,
            order=stack.order,
            sizes=[size.nodes for size in stack.sizes],
        )
    return stack_s, stack_t


def _support(scores: Tensor, cfg: TrainConfig, train_pairs: np.ndarray) -> Optional[np.ndarray]:
    if cfg.topk is None:
        return None
    return topk_support(scores.value, cfg.topk, train_pairs)


def run_epochs(
    stores: list[ParameterStore],
    forward: Forward,
    cfg: TrainConfig,
    train_pairs: np.ndarray,
    level: int,
) -> list[float]:
    """Adam on the union of `stores`; returns the per-epoch loss curve.

    Raises:
        DivergenceError: If the loss or any intermediate becomes non-finite.
    """
    params = {name: tensor for store in stores for name, tensor in store.items()}
    state = AdamState(lr=cfg.lr)
    curve: list[float] = []
    for epoch in range(cfg.epochs):
        for store in stores:
            store.zero_grad()
        try:
            with Tape() as tape:
                scores = forward()
                s = sinkhorn_normalize(
                    scores,
                    cfg.sinkhorn_iters,
                    cfg.sinkhorn_tau,
                    support=_support(scores, cfg, train_pairs),
                    strict=cfg.sinkhorn_strict,
                )
                loss = matching_loss(s, train_pairs)
        except NonFiniteError as exc:
            raise DivergenceError(f"Training diverged: {exc.message}", epoch=epoch) from exc
        value = loss.item()
        if not np.isfinite(value):
            raise DivergenceError("The matching loss is not finite.", epoch=epoch)
        tape.backward(loss)
        adam_step(params, {name: tensor.grad for name, tensor in params.items()}, state)
        curve.append(value)
        dispatch_event(epoch_completed, __name__, epoch=epoch, level=level, loss=value)
    return curve


def check_train_anchors(anchors: AnchorSet, cfg: TrainConfig) -> np.ndarray:
    train = anchors.train_pairs
    if cfg.epochs > 0 and train.shape[0] == 0:
        raise ValidationError("Training needs at least one training anchor.")
    return train


def _check_widths(left: int, right: int, what: str) -> None:
    if left != right:
        raise ContractError(
            f"Source and target {what} widths differ ({left} vs {right}).",
            details={"source": left, "target": right},
        )


def train_khgmn(
    g_s: Graph,
    g_t: Graph,
    anchors: AnchorSet,
    cfg: TrainConfig,
    gnn: GnnConfig,
) -> TrainResult:
    """Jointly train the level-m encoder and the original-graph encoder.

    With m = 0 only the original-graph encoder exists and α is ignored.

    Raises:
        EmptyLevelError: If either stack cannot reach order cfg.m.
        DivergenceError: If the loss becomes non-finite.
    """
    train = check_train_anchors(anchors, cfg)
    _check_widths(g_s.feature_width, g_t.feature_width, "feature")
    stack_s, stack_t = build_stacks(g_s, g_t, anchors, cfg)
    _, _, seed_high, seed_local = seed_stream(cfg.seed, 4)

    local_params = init_encoder_params(gnn, g_s.feature_width, seed_local, prefix="local.")
    base_s, base_t = stack_s.level_graph(0), stack_t.level_graph(0)
    local_ops = (
        GraphOperators.for_graph(base_s, gnn.operator),
        GraphOperators.for_graph(base_t, gnn.operator),
    )
    stores = [local_params]

    high_params: Optional[ParameterStore] = None
    alpha = cfg.alpha if cfg.m > 0 else 0.0
    if cfg.m > 0:
        level_s, level_t = stack_s.level_graph(cfg.m), stack_t.level_graph(cfg.m)
        high_params = init_encoder_params(gnn, level_s.feature_width, seed_high, prefix="high.")
        high_ops = (
            GraphOperators.for_graph(level_s, gnn.operator),
            GraphOperators.for_graph(level_t, gnn.operator),
        )
        stores.insert(0, high_params)

    def branches() -> tuple[Optional[Tensor], Tensor]:
        local = local_similarity(
            encode(base_s, local_params, gnn, operators=local_ops[0]),
            encode(base_t, local_params, gnn, operators=local_ops[1]),
        )
        if high_params is None:
            return None, local
        high = high_order_similarity(
            stack_s.row_normalized,
            encode(level_s, high_params, gnn, operators=high_ops[0]),
            encode(level_t, high_params, gnn, operators=high_ops[1]),
            stack_t.row_normalized,
        )
        return high, local

    def forward() -> Tensor:
        return fuse(alpha, *branches())

    logger.info(
        "Training %s-HGMN on %d x %d nodes for %d epochs.",
        cfg.m,
        g_s.num_nodes,
        g_t.num_nodes,
        cfg.epochs,
    )
    curve = run_epochs(stores, forward, cfg, train, level=cfg.m)

    high, local = branches()
    correspondence = combined_similarity(
        alpha, high, local, cfg.sinkhorn_iters, cfg.sinkhorn_tau, strict=cfg.sinkhorn_strict
    )
    params = {"local": local_params}
    if high_params is not None:
        params["high"] = high_params
    return TrainResult(
        correspondence=correspondence.detach(),
        params=params,
        loss_curve=curve,
        stacks=(stack_s, stack_t),
        level_curves={cfg.m: curve},
    )

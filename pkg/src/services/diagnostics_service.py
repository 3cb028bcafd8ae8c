"""
Diagnostics service behind the `check` command.

Responsibilities:
- Run the reachability oracle on random or user-provided graphs.
- Run the finite-difference gradient suite over every differentiable op,
  the encoder and the full matching pipeline.
- Summarize both into a CheckReport.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from src.autodiff import ops
from src.autodiff.gradcheck import grad_check
from src.autodiff.tape import Tensor
from src.exceptions import CheckSuiteFailure, EmptyLevelError
from src.gnn.encoder import GraphOperators, encode, init_encoder_params
from src.graphs.graph import AnchorSet, Graph
from src.graphs.sparse import SparseMatrix
from src.linegraph.lemma import lemma1_check, run_lemma1_oracle
from src.linegraph.stack import build_ilg_stack
from src.matching.correspondence import Correspondence
from src.matching.loss import matching_loss
from src.matching.similarity import fuse, high_order_similarity, local_similarity
from src.matching.sinkhorn import sinkhorn
from src.repositories.interfaces import DatasetRepository
from src.schemas.config import GnnConfig, OperatorKind
from src.schemas.reports import CheckReport

logger = logging.getLogger(__name__)

OP_TOLERANCE = 1e-4
PIPELINE_TOLERANCE = 1e-3
# A smaller step keeps ReLU kinks out of the central difference.
PIPELINE_EPS = 1e-6


@dataclass(frozen=True)
class GradCase:
    name: str
    f: Callable[..., Tensor]
    point: Sequence[np.ndarray]
    tolerance: float = OP_TOLERANCE
    eps: float = 1e-5


def _projector(shape: tuple[int, int], rng: np.random.Generator) -> Callable[[Tensor], Tensor]:
    """Reduce a matrix to a scalar through fixed random weights."""
    weights = Tensor(rng.standard_normal(shape))
    return lambda t: ops.sum(ops.elementwise_mul(t, weights))


def _away_from_zero(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(0.5, 1.5, size=shape)


def op_cases(seed: int = 0) -> list[GradCase]:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 3))
    b = rng.standard_normal((3, 5))
    c = rng.standard_normal((4, 3))
    row = rng.standard_normal((1, 3))
    positive = rng.uniform(0.5, 2.0, size=(4, 3))
    kinked = _away_from_zero(rng, (4, 3))
    sparse = SparseMatrix(np.where(rng.random((5, 4)) < 0.5, rng.standard_normal((5, 4)), 0.0))

    p43 = _projector((4, 3), rng)
    p45 = _projector((4, 5), rng)
    p34 = _projector((3, 4), rng)
    p53 = _projector((5, 3), rng)
    p46 = _projector((4, 6), rng)
    p83 = _projector((8, 3), rng)
    p63 = _projector((6, 3), rng)
    p23 = _projector((2, 3), rng)
    p41 = _projector((4, 1), rng)
    p13 = _projector((1, 3), rng)
    p47 = _projector((4, 7), rng)

    return [
        GradCase("matmul", lambda x, y: p45(ops.matmul(x, y)), [a, b]),
        GradCase("spmm", lambda x: p53(ops.spmm(sparse, x)), [rng.standard_normal((4, 3))]),
        GradCase("transpose", lambda x: p34(ops.transpose(x)), [a]),
        GradCase("add", lambda x, y: p43(ops.add(x, y)), [a, row]),
        GradCase("sub", lambda x, y: p43(ops.sub(x, y)), [a, c]),
        GradCase("elementwise_mul", lambda x, y: p43(ops.elementwise_mul(x, y)), [a, c]),
        GradCase("div", lambda x, y: p43(ops.div(x, y)), [a, positive]),
        GradCase("scalar_mul", lambda x: p43(ops.scalar_mul(x, -2.5)), [a]),
        GradCase("relu", lambda x: p43(ops.relu(x)), [kinked]),
        GradCase("exp", lambda x: p43(ops.exp(x)), [a]),
        GradCase("log", lambda x: p43(ops.log(x)), [positive]),
        GradCase("sum", lambda x: p13(ops.sum(x, axis=0)), [a]),
        GradCase("mean", lambda x: p41(ops.mean(x, axis=1)), [a]),
        GradCase("row_softmax", lambda x: p43(ops.row_softmax(x)), [a]),
        GradCase(
            "batch_feature_normalize", lambda x: p43(ops.batch_feature_normalize(x)), [a]
        ),
        GradCase("concat_cols", lambda x, y: p46(ops.concat_cols([x, y])), [a, c]),
        GradCase("concat_rows", lambda x, y: p83(ops.concat_rows([x, y])), [a, c]),
        GradCase("pad_rows", lambda x: p63(ops.pad_rows(x, 2, 0.25)), [a]),
        GradCase("take_rows", lambda x: p23(ops.take_rows(x, np.array([3, 1]))), [a]),
        GradCase(
            "gather",
            lambda x: ops.sum(ops.log(ops.gather(x, np.array([0, 2]), np.array([1, 0])))),
            [positive],
        ),
        GradCase(
            "sinkhorn",
            lambda x: p47(sinkhorn(x, iters=5, max_iters=5)),
            [rng.standard_normal((4, 7))],
        ),
    ]


def _path_graph(n: int) -> Graph:
    edges = np.array([[i, i + 1] for i in range(n - 1)], dtype=np.int64)
    return Graph.from_edges(n, edges)


def gcn_cross_entropy_case(seed: int = 0) -> GradCase:
    """One GCN layer and the matching loss on P3 matched to itself."""
    g = _path_graph(3)
    config = GnnConfig(operator=OperatorKind.GCN, layers=1, hidden_dim=4, mlp_layers=1, use_jk=False)
    store = init_encoder_params(config, g.feature_width, seed)
    operators = GraphOperators.for_graph(g, config.operator)
    pairs = np.array([[0, 0], [1, 1], [2, 2]])

    def f(*tensors: Tensor) -> Tensor:
        params = store.rebind(tensors)
        z = encode(g, params, config, operators=operators)
        s = Correspondence(values=sinkhorn(local_similarity(z, z), iters=5, max_iters=5))
        return matching_loss(s, pairs)

    return GradCase(
        "gcn_cross_entropy_p3",
        f,
        [t.value.copy() for _, t in store.items()],
        eps=PIPELINE_EPS,
    )


def encoder_case(seed: int = 0) -> GradCase:
    rng = np.random.default_rng(seed)
    edges = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0], [0, 3]])
    g = Graph.from_edges(6, edges, features=rng.standard_normal((6, 3)))
    config = GnnConfig(operator=OperatorKind.GIN, layers=2, hidden_dim=4, mlp_layers=2)
    store = init_encoder_params(config, 3, seed)
    operators = GraphOperators.for_graph(g, config.operator)
    project = _projector((6, 4), rng)

    def f(*tensors: Tensor) -> Tensor:
        return project(encode(g, store.rebind(tensors), config, operators=operators))

    return GradCase("encoder_6_nodes", f, [t.value.copy() for _, t in store.items()], eps=PIPELINE_EPS)


def pipeline_case(seed: int = 0, alpha: float = 0.5) -> GradCase:
    """Both encoders, fused similarity, Sinkhorn and the loss on a 5-node pair."""
    rng = np.random.default_rng(seed)
    edges_s = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [1, 3]])
    edges_t = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [0, 2]])
    features = rng.standard_normal((5, 3))
    anchors = AnchorSet.from_labels(
        [[0, 0], [1, 1], [2, 2], [3, 3], [4, 4]], ["train", "train", "train", "test", "test"]
    )
    g_s = Graph.from_edges(5, edges_s, features=features).with_anchor_tags([0, 1, 2])
    g_t = Graph.from_edges(5, edges_t, features=features).with_anchor_tags([0, 1, 2])
    config = GnnConfig(operator=OperatorKind.GIN, layers=2, hidden_dim=3, mlp_layers=1)
    stack_s, stack_t = build_ilg_stack(g_s, 1), build_ilg_stack(g_t, 1)
    level_s, level_t = stack_s.level_graph(1), stack_t.level_graph(1)
    local = init_encoder_params(config, 3, seed, prefix="local.")
    high = init_encoder_params(config, level_s.feature_width, seed + 1, prefix="high.")
    n_local = len(local)

    def f(*tensors: Tensor) -> Tensor:
        local_params = local.rebind(tensors[:n_local])
        high_params = high.rebind(tensors[n_local:])
        s_local = local_similarity(encode(g_s, local_params, config), encode(g_t, local_params, config))
        s_high = high_order_similarity(
            stack_s.row_normalized,
            encode(level_s, high_params, config),
            encode(level_t, high_params, config),
            stack_t.row_normalized,
        )
        s = Correspondence(values=sinkhorn(fuse(alpha, s_high, s_local), iters=10, max_iters=10))
        return matching_loss(s, anchors)

    point = [t.value.copy() for _, t in local.items()] + [t.value.copy() for _, t in high.items()]
    return GradCase(
        "pipeline_5_nodes", f, point, tolerance=PIPELINE_TOLERANCE, eps=PIPELINE_EPS
    )


class DiagnosticsService:
    """Runs the reachability oracle and the gradient suite."""

    def __init__(self, dataset_repository: Optional[DatasetRepository] = None):
        self._datasets = dataset_repository

    def lemma_on_graph(self, g: Graph, orders: Sequence[int], report: CheckReport) -> None:
        if g.directed:
            notice = "lemma1: skipped, the reachability identity is checked on undirected graphs only"
            logger.warning(notice)
            report.notes.append(notice)
            return
        checked, ok = 0, True
        for order in orders:
            try:
                ok = lemma1_check(g, order) and ok
                checked += 1
            except EmptyLevelError:
                report.lemma_skipped += 1
        if not checked:
            notice = "lemma1: skipped, the graph runs out of edges before every requested order"
            logger.warning(notice)
            report.notes.append(notice)
            return
        report.lemma_total += 1
        if ok:
            report.lemma_passed += 1

    def run_grad_suite(self, seed: int = 0) -> tuple[float, list[str]]:
        """Return the worst relative error and the names of failed cases."""
        cases = op_cases(seed) + [gcn_cross_entropy_case(seed), encoder_case(seed), pipeline_case(seed)]
        worst, failures = 0.0, []
        for case in cases:
            error = grad_check(case.f, case.point, eps=case.eps)
            logger.debug("grad_check %s: %.3e", case.name, error)
            worst = max(worst, error)
            if error > case.tolerance:
                failures.append(f"{case.name} ({error:.3e})")
        return worst, failures

    def run(
        self,
        *,
        graphs: int = 50,
        max_nodes: int = 30,
        p: float = 0.3,
        orders: Sequence[int] = (1, 2),
        seed: int = 0,
        graph_file: Optional[Path] = None,
        directed: bool = False,
        grad: bool = True,
    ) -> CheckReport:
        """Run all diagnostics and return the report without judging it."""
        report = CheckReport(lemma_passed=0, lemma_total=0, lemma_skipped=0, grad_max_relative_error=0.0)
        if graph_file is not None and self._datasets is not None:
            g, _ = self._datasets.load_graph(graph_file, directed)
            self.lemma_on_graph(g, orders, report)
        else:
            oracle = run_lemma1_oracle(
                num_graphs=graphs, max_nodes=max_nodes, p=p, orders=tuple(orders), seed=seed
            )
            report.lemma_passed = oracle.passed
            report.lemma_total = oracle.total
            report.lemma_skipped = oracle.skipped

        if grad:
            report.grad_max_relative_error, report.grad_failures = self.run_grad_suite(seed)

        return report

    @staticmethod
    def require_ok(report: CheckReport) -> None:
        """
        Raises:
            CheckSuiteFailure: If any graph fails the identity or any gradient
                exceeds its tolerance.
        """
        if not report.ok:
            raise CheckSuiteFailure("Diagnostics failed.", details=report.model_dump())

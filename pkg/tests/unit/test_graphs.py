import numpy as np
import pytest

from src.exceptions import GraphValidationError, InvariantViolation, ValidationError
from src.graphs import normalized_adjacency, renormalized, undirected_adjacency
from src.graphs.graph import AnchorSet
from src.graphs.sparse import SparseMatrix
from tests.helpers import complete, cycle, make_graph


class TestSparseMatrix:
    def test_triplets_come_back_in_row_major_order(self):
        m = SparseMatrix.from_triplets([1, 0, 1], [0, 2, 2], [3.0, 1.0, 2.0], (2, 3))
        rows, cols, values = m.triplets()
        assert rows.tolist() == [0, 1, 1]
        assert cols.tolist() == [2, 0, 2]
        assert values.tolist() == [1.0, 3.0, 2.0]

    def test_duplicate_triplets_rejected(self):
        with pytest.raises(InvariantViolation):
            SparseMatrix.from_triplets([0, 0], [1, 1], [1.0, 1.0], (2, 2))

    def test_out_of_range_triplets_rejected(self):
        with pytest.raises(InvariantViolation):
            SparseMatrix.from_triplets([2], [0], [1.0], (2, 2))

    def test_equality_ignores_construction_order(self):
        a = SparseMatrix.from_triplets([0, 1], [1, 0], [1.0, 1.0], (2, 2))
        b = SparseMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert a == b

    def test_explicit_zeros_are_dropped(self):
        m = SparseMatrix.from_triplets([0, 1], [0, 1], [0.0, 2.0], (2, 2))
        assert m.nnz == 1

    def test_matmul_shape_mismatch(self):
        from src.exceptions import ContractError

        with pytest.raises(ContractError):
            SparseMatrix.identity(3) @ SparseMatrix.identity(2)

    def test_scale_rows_and_sums(self):
        m = SparseMatrix(np.array([[1.0, 1.0], [0.0, 2.0]]))
        scaled = m.scale_rows(np.array([0.5, 2.0]))
        assert scaled.row_sums().tolist() == [1.0, 4.0]
        assert m.col_nnz().tolist() == [1, 2]

    def test_binarized_keeps_only_positive_pattern(self):
        m = SparseMatrix(np.array([[2.5, 0.0], [0.0, 3.0]]))
        assert m.binarized().to_dense().tolist() == [[1.0, 0.0], [0.0, 1.0]]


class TestGraph:
    def test_undirected_edges_are_canonical(self):
        g = make_graph(3, [[2, 0], [1, 0]])
        assert g.edges.tolist() == [[0, 1], [0, 2]]

    def test_equal_graphs_compare_equal(self):
        assert make_graph(3, [[2, 0], [1, 0]]) == make_graph(3, [[0, 1], [0, 2]])

    def test_self_loop_rejected(self):
        with pytest.raises(GraphValidationError, match="Self-loop"):
            make_graph(2, [[1, 1]])

    def test_reversed_duplicate_rejected_when_undirected(self):
        with pytest.raises(GraphValidationError, match="Duplicate"):
            make_graph(2, [[0, 1], [1, 0]])

    def test_directed_two_cycle_is_two_edges(self):
        g = make_graph(2, [[0, 1], [1, 0]], directed=True)
        assert g.num_edges == 2

    def test_out_of_range_endpoint(self):
        with pytest.raises(GraphValidationError):
            make_graph(2, [[0, 2]])

    def test_default_features_are_degree_one_hot(self, star3):
        assert star3.features.shape == (4, 33)
        assert star3.features[0, 3] == 1.0
        assert star3.features[1, 1] == 1.0

    def test_feature_row_mismatch(self):
        with pytest.raises(GraphValidationError):
            make_graph(3, [[0, 1]], features=np.zeros((2, 4)))

    def test_graph_is_immutable(self, triangle):
        with pytest.raises(ValueError):
            triangle.edges[0, 0] = 2

    def test_adjacency_symmetric_for_undirected(self, path3):
        dense = path3.adjacency().to_dense()
        assert np.array_equal(dense, dense.T)
        assert dense.sum() == 4

    def test_incident_edges(self, path3):
        incident = path3.incident_edges()
        assert [e.tolist() for e in incident] == [[0], [0, 1], [1]]

    def test_permuted_moves_feature_rows(self):
        features = np.arange(6, dtype=float).reshape(3, 2)
        g = make_graph(3, [[0, 1]], features=features)
        p = g.permuted([2, 0, 1])
        assert p.edges.tolist() == [[0, 2]]
        assert p.features[2].tolist() == features[0].tolist()

    def test_with_edges_drops_edge_features(self):
        g = make_graph(3, [[0, 1], [1, 2]], edge_features=np.ones((2, 3)))
        assert g.edge_features.shape == (2, 3)
        assert g.with_edges([[0, 1]]).edge_features is None

    def test_is_connected(self, path3):
        assert path3.is_connected()
        assert not make_graph(3, [[0, 1]]).is_connected()


class TestKernels:
    def test_undirected_adjacency_symmetrizes_directed_graphs(self):
        g = make_graph(3, [[0, 1], [1, 2]], directed=True)
        sym = undirected_adjacency(g).to_dense()
        assert np.array_equal(sym, sym.T)

    def test_normalized_adjacency_of_an_isolated_node(self):
        assert normalized_adjacency(make_graph(1, [])).to_dense().tolist() == [[1.0]]

    def test_normalized_adjacency_of_k2(self):
        assert np.allclose(normalized_adjacency(complete(2)).to_dense(), 0.5)

    def test_normalized_adjacency_of_p3(self, path3):
        a = normalized_adjacency(path3).to_dense()
        assert a[0, 0] == pytest.approx(1 / 2)
        assert a[0, 1] == pytest.approx(1 / np.sqrt(6))
        assert a[1, 1] == pytest.approx(1 / 3)
        assert a[0, 2] == 0.0
        assert np.allclose(a, a.T)

    def test_normalized_adjacency_keeps_direction(self):
        a = normalized_adjacency(make_graph(2, [[0, 1]], directed=True)).to_dense()
        assert np.allclose(a, [[0.5, 1 / np.sqrt(2)], [0.0, 1.0]])

    def test_renormalized_symmetric_kernel_for_directed_input(self):
        g = make_graph(2, [[0, 1]], directed=True)
        assert np.allclose(renormalized(undirected_adjacency(g)).to_dense(), 0.5)

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_normalized_adjacency_rows_sum_to_one_on_cycles(self, n):
        rows = normalized_adjacency(cycle(n)).row_sums()
        assert np.allclose(rows, 1.0)

    def test_normalized_adjacency_complete_graph(self):
        rows = normalized_adjacency(complete(5)).row_sums()
        assert np.allclose(rows, 1.0)


class TestAnchorSet:
    def test_split_uses_rounded_ratio(self):
        anchors = AnchorSet.identity(10, 0.3, np.random.default_rng(0))
        assert anchors.train_pairs.shape == (3, 2)
        assert anchors.test_pairs.shape == (7, 2)

    def test_split_is_seeded(self):
        a = AnchorSet.identity(10, 0.5, np.random.default_rng(4))
        b = AnchorSet.identity(10, 0.5, np.random.default_rng(4))
        assert a == b

    def test_pairs_must_be_one_to_one(self):
        with pytest.raises(ValidationError):
            AnchorSet(pairs=[[0, 1], [0, 2]], train_mask=[True, False])

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            AnchorSet.from_labels([[0, 0]], ["validate"])

    def test_labels_round_trip_through_mask(self):
        anchors = AnchorSet.from_labels([[0, 0], [1, 2]], ["train", "test"])
        assert anchors.labels() == ["train", "test"]

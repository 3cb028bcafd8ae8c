import threading

import numpy as np
import pytest

from src.autodiff import AdamState, ParameterStore, Tape, Tensor, adam_step, grad_check, ops
from src.autodiff.tape import active_tape, record
from src.exceptions import ContractError, NonFiniteError
from src.graphs.sparse import SparseMatrix


def _leaf(value):
    return Tensor(np.asarray(value, dtype=float), requires_grad=True)


class TestTensor:
    def test_vectors_and_scalars_become_matrices(self):
        assert Tensor(3.0).shape == (1, 1)
        assert Tensor([1.0, 2.0]).shape == (1, 2)

    def test_three_dimensional_input_rejected(self):
        with pytest.raises(ContractError):
            Tensor(np.zeros((2, 2, 2)))

    def test_non_finite_input_rejected(self):
        with pytest.raises(NonFiniteError):
            Tensor([1.0, np.nan])

    def test_item_needs_a_scalar(self):
        with pytest.raises(ContractError):
            Tensor([1.0, 2.0]).item()


class TestTape:
    def test_reused_input_accumulates(self):
        w = _leaf([[1.0, -2.0], [3.0, 0.5]])
        with Tape() as tape:
            loss = ops.sum(ops.elementwise_mul(w, w))
        tape.backward(loss)
        assert np.allclose(w.grad, 2 * w.value)

    def test_constants_receive_no_gradient(self):
        w = _leaf([[1.0, 2.0]])
        c = Tensor([[3.0, 4.0]])
        with Tape() as tape:
            loss = ops.sum(ops.elementwise_mul(w, c))
        tape.backward(loss)
        assert c.grad is None
        assert w.grad.tolist() == [[3.0, 4.0]]

    def test_repeated_backward_adds_into_grad(self):
        w = _leaf([[2.0]])
        for _ in range(2):
            with Tape() as tape:
                loss = ops.scalar_mul(w, 3.0)
            tape.backward(loss)
        assert w.grad.tolist() == [[6.0]]

    def test_backward_is_bit_identical_across_runs(self):
        rng = np.random.default_rng(7)
        x, y = rng.normal(size=(4, 3)), rng.normal(size=(3, 5))
        grads = []
        for _ in range(3):
            w = _leaf(x)
            with Tape() as tape:
                loss = ops.sum(ops.log(ops.row_softmax(ops.matmul(w, Tensor(y)))))
            tape.backward(loss)
            grads.append(w.grad.tobytes())
        assert grads[0] == grads[1] == grads[2]

    def test_loss_must_be_scalar(self):
        w = _leaf([[1.0, 2.0]])
        with Tape() as tape:
            out = ops.relu(w)
        with pytest.raises(ContractError):
            tape.backward(out)

    def test_loss_from_another_tape_rejected(self):
        w = _leaf([[1.0]])
        with Tape():
            loss = ops.sum(w)
        with pytest.raises(ContractError):
            Tape().backward(loss)

    def test_nothing_is_recorded_without_a_tape(self):
        out = ops.sum(_leaf([[1.0, 2.0]]))
        assert out.node_id is None

    def test_tape_is_scoped_to_its_thread(self):
        seen = []
        with Tape():
            worker = threading.Thread(target=lambda: seen.append(active_tape()))
            worker.start()
            worker.join()
            assert active_tape() is not None
        assert seen == [None]
        assert active_tape() is None

    def test_debug_tape_catches_overflow(self):
        w = _leaf([[1000.0]])
        with pytest.raises(NonFiniteError), np.errstate(over="ignore"):
            with Tape(debug=True):
                ops.exp(w)

    def test_debug_flag_reads_environment(self, monkeypatch):
        monkeypatch.setenv("HGMN_DEBUG_NUMERICS", "1")
        assert Tape().debug
        monkeypatch.delenv("HGMN_DEBUG_NUMERICS")
        assert not Tape().debug


class TestOps:
    def test_matmul_shape_mismatch(self):
        with pytest.raises(ContractError):
            ops.matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_add_broadcasts_a_row(self):
        out = ops.add(np.zeros((3, 2)), np.array([[1.0, 2.0]]))
        assert out.value.tolist() == [[1.0, 2.0]] * 3

    def test_add_rejects_incompatible_shapes(self):
        with pytest.raises(ContractError):
            ops.add(np.ones((3, 2)), np.ones((2, 2)))

    def test_spmm_matches_dense_product(self):
        s = SparseMatrix(np.array([[0.0, 2.0], [1.0, 0.0], [0.0, 0.0]]))
        x = _leaf([[1.0, 2.0], [3.0, 4.0]])
        with Tape() as tape:
            loss = ops.sum(ops.spmm(s, x))
        tape.backward(loss)
        assert np.allclose(ops.spmm(s, x).value, s.to_dense() @ x.value)
        assert np.allclose(x.grad, s.to_dense().T @ np.ones((3, 2)))

    def test_log_is_floored(self):
        w = _leaf([[0.0, 1.0]])
        with Tape() as tape:
            loss = ops.sum(ops.log(w))
        tape.backward(loss)
        assert np.isclose(loss.item(), np.log(1e-12))
        assert w.grad.tolist() == [[0.0, 1.0]]

    def test_row_softmax_rows_sum_to_one(self):
        out = ops.row_softmax(np.array([[1.0, 2.0, 3.0], [-5.0, 0.0, 700.0]]))
        assert np.allclose(out.value.sum(axis=1), 1.0)

    def test_row_softmax_entries_are_strictly_between_zero_and_one(self):
        out = ops.row_softmax(np.random.default_rng(2).normal(scale=5.0, size=(6, 4)))
        assert np.all(out.value > 0.0)
        assert np.all(out.value < 1.0)

    def test_batch_feature_normalize_standardizes_columns(self):
        x = np.random.default_rng(0).normal(3.0, 2.0, size=(50, 4))
        out = ops.batch_feature_normalize(x).value
        assert np.allclose(out.mean(axis=0), 0.0)
        assert np.allclose(out.std(axis=0), 1.0, atol=1e-4)

    def test_take_rows_accumulates_repeated_rows(self):
        w = _leaf([[1.0], [2.0]])
        with Tape() as tape:
            loss = ops.sum(ops.take_rows(w, [0, 0, 1]))
        tape.backward(loss)
        assert w.grad.tolist() == [[2.0], [1.0]]

    def test_take_rows_out_of_range(self):
        with pytest.raises(ContractError):
            ops.take_rows(np.ones((2, 2)), [2])

    def test_gather_returns_a_column(self):
        out = ops.gather(np.arange(6.0).reshape(2, 3), [0, 1], [2, 0])
        assert out.value.tolist() == [[2.0], [3.0]]

    def test_pad_rows(self):
        out = ops.pad_rows(np.zeros((1, 2)), 2, 0.5)
        assert out.value.tolist() == [[0.0, 0.0], [0.5, 0.5], [0.5, 0.5]]


class TestGradCheck:
    def test_quadratic(self):
        error = grad_check(lambda x: ops.sum(ops.elementwise_mul(x, x)), np.array([[0.3, -1.2]]))
        assert error < 1e-6

    def test_two_arguments(self):
        rng = np.random.default_rng(1)
        point = [rng.normal(size=(3, 2)), rng.normal(size=(2, 4))]
        error = grad_check(lambda a, b: ops.sum(ops.row_softmax(ops.matmul(a, b))), point)
        assert error < 1e-4

    def test_detects_a_wrong_gradient(self):
        def wrong(x):
            # Forward doubles x; the recorded backward passes the gradient through unscaled.
            return ops.sum(record("double", x.value * 2.0, (x,), lambda g: (g,)))

        assert grad_check(wrong, np.array([[1.0]])) >= 0.49


class TestAdam:
    def test_first_step_moves_by_lr_against_the_gradient(self):
        w = _leaf([[1.0, -1.0]])
        state = AdamState(lr=0.1)
        adam_step({"w": w}, {"w": np.array([[0.5, -2.0]])}, state)
        assert np.allclose(w.value, [[0.9, -0.9]], atol=1e-6)
        assert state.step == 1

    def test_zero_gradient_leaves_parameters_unchanged(self):
        w = _leaf([[1.5, -0.25], [0.0, 3.0]])
        before = w.value.copy()
        state = AdamState(lr=0.1)
        for _ in range(3):
            adam_step({"w": w}, {"w": np.zeros((2, 2))}, state)
        assert np.array_equal(w.value, before)

    def test_missing_gradient_counts_as_zero(self):
        w = _leaf([[1.0]])
        adam_step({"w": w}, {}, AdamState(lr=0.1))
        assert w.value.tolist() == [[1.0]]

    def test_gradient_shape_mismatch(self):
        with pytest.raises(ContractError):
            adam_step({"w": _leaf([[1.0]])}, {"w": np.zeros((2, 1))}, AdamState())

    def test_minimizes_a_quadratic(self):
        w = _leaf([[4.0, -3.0]])
        state = AdamState(lr=0.1)
        for _ in range(300):
            w.zero_grad()
            with Tape() as tape:
                loss = ops.sum(ops.elementwise_mul(w, w))
            tape.backward(loss)
            adam_step({"w": w}, {"w": w.grad}, state)
        assert np.all(np.abs(w.value) < 0.1)


class TestParameterStore:
    def test_same_seed_same_checksum(self):
        a, b = ParameterStore(seed=7), ParameterStore(seed=7)
        for store in (a, b):
            store.glorot("w", 4, 3)
            store.constant("b", 1, 3, 0.0)
        assert a.checksum() == b.checksum()
        c = ParameterStore(seed=8)
        c.glorot("w", 4, 3)
        c.constant("b", 1, 3, 0.0)
        assert a.checksum() != c.checksum()

    def test_glorot_stays_within_limit(self):
        store = ParameterStore(seed=0)
        w = store.glorot("w", 10, 20)
        assert np.abs(w.value).max() <= np.sqrt(6.0 / 30)

    def test_prefix_and_duplicates(self):
        store = ParameterStore(seed=0, prefix="enc.")
        store.glorot("w", 2, 2)
        assert list(store) == ["enc.w"]
        assert "w" in store
        with pytest.raises(ContractError):
            store.glorot("w", 2, 2)

    def test_state_dict_restores_values(self):
        source = ParameterStore(seed=1)
        source.glorot("w", 3, 2)
        target = ParameterStore(seed=2)
        target.glorot("w", 3, 2)
        target.load_state_dict(source.state_dict())
        assert target.checksum() == source.checksum()

    def test_load_rejects_mismatches(self):
        store = ParameterStore(seed=1)
        store.glorot("w", 3, 2)
        with pytest.raises(ContractError):
            store.load_state_dict({"version": 99, "parameters": {}})
        with pytest.raises(ContractError):
            store.load_state_dict({"version": 1, "parameters": {"v": [[0.0]]}})
        with pytest.raises(ContractError):
            store.load_state_dict({"version": 1, "parameters": {"w": [[0.0, 0.0]]}})

    def test_rebind_swaps_tensors_in_order(self):
        store = ParameterStore(seed=0)
        store.glorot("w", 2, 2)
        store.constant("b", 1, 2, 0.0)
        replacement = [Tensor(np.ones((2, 2))), Tensor(np.zeros((1, 2)))]
        bound = store.rebind(replacement)
        assert bound["w"] is replacement[0]
        assert store["w"] is not replacement[0]

    def test_rebind_checks_count_and_shape(self):
        store = ParameterStore(seed=0)
        store.glorot("w", 2, 2)
        with pytest.raises(ContractError):
            store.rebind([])
        with pytest.raises(ContractError):
            store.rebind([Tensor(np.ones((3, 2)))])

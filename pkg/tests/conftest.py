import os

# Keep test runs from writing logs into the working tree.
os.environ.setdefault("HGMN_LOG_DIR", "logs")
os.environ.setdefault("LOG_LEVEL", "INFO")

from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from src.graphs.graph import AnchorSet
from src.schemas.config import GnnConfig, OperatorKind, TrainConfig
from tests.helpers import make_graph

HEAVY_ENV = "HGMN_RUN_HEAVY"


def _add_markers_by_path(item):
    path = str(item.fspath)
    if "tests\\unit\\" in path or "tests/unit/" in path:
        item.add_marker(pytest.mark.unit)
        return
    if "tests\\integration\\" in path or "tests/integration/" in path:
        item.add_marker(pytest.mark.integration)
        return
    # Default: treat uncategorized files as unit tests so -m selectors keep them
    item.add_marker(pytest.mark.unit)


def pytest_collection_modifyitems(config, items):
    run_heavy = os.environ.get(HEAVY_ENV) in {"1", "true", "yes"}
    skip_heavy = pytest.mark.skip(reason=f"set {HEAVY_ENV}=1 to run acceptance benchmarks")
    for item in items:
        _add_markers_by_path(item)
        if "heavy" in item.keywords and not run_heavy:
            item.add_marker(skip_heavy)


@pytest.fixture(autouse=True)
def _restore_root_log_handlers():
    """Drop handlers a CLI run attached to the root logger; they hold a closed capture stream."""
    import logging

    root = logging.getLogger()
    before = list(root.handlers)
    level = root.level
    yield
    for handler in list(root.handlers):
        if handler not in before:
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)


# --- Small graphs ---


@pytest.fixture
def triangle():
    return make_graph(3, [[0, 1], [1, 2], [0, 2]])


@pytest.fixture
def path3():
    return make_graph(3, [[0, 1], [1, 2]])


@pytest.fixture
def star3():
    """K_{1,3} with centre 0."""
    return make_graph(4, [[0, 1], [0, 2], [0, 3]])


@pytest.fixture
def small_gnn():
    return GnnConfig(operator=OperatorKind.GIN, layers=2, hidden_dim=8, mlp_layers=1)


@pytest.fixture
def quick_train():
    return TrainConfig(epochs=5, lr=0.01, alpha=0.5, train_ratio=0.7)


@pytest.fixture
def identity_anchors():
    def _make(n, train_ratio=0.7, seed=0):
        return AnchorSet.identity(n, train_ratio, np.random.default_rng(seed))

    return _make


# --- File fixtures ---

TOY_SOURCE_EDGES = """# toy source graph, external ids 100..109
100 101
101 102
102 103
103 104
104 105
105 106
106 107
107 108
108 109
109 100
100 105
102 107
"""

TOY_TARGET_EDGES = """# toy target graph, external ids 200..209
200 201
201 202
202 203
203 204
204 205
205 206
206 207
207 208
208 209
209 200
200 205
"""

TOY_ANCHORS = """100 200
101 201
102 202
103 203
104 204
105 205
106 206
"""


@pytest.fixture
def toy_dataset(tmp_path) -> dict[str, Path]:
    """A 10-node source/target pair with 7 anchors, written as text files."""
    files = {
        "source_edges": tmp_path / "source.edges",
        "target_edges": tmp_path / "target.edges",
        "anchors": tmp_path / "anchors.txt",
    }
    files["source_edges"].write_text(TOY_SOURCE_EDGES, encoding="utf-8")
    files["target_edges"].write_text(TOY_TARGET_EDGES, encoding="utf-8")
    files["anchors"].write_text(TOY_ANCHORS, encoding="utf-8")
    return files


@pytest.fixture
def edge_file(tmp_path):
    def _write(text, name="graph.edges"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def signal_tracker():
    """
    A fixture that allows capturing and tracking emitted Blinker signals.
    Usage:
        with signal_tracker(my_signal) as tracker:
            call_business_logic()
            assert tracker.called
            assert tracker.data['key'] == 'value'
    """

    class Tracker:
        def __init__(self):
            self.called = False
            self.calls = []
            self.data = None
            self.sender = None

        def handler(self, sender, **kwargs):
            self.called = True
            self.sender = sender
            self.calls.append(kwargs)
            self.data = kwargs

    @contextmanager
    def _tracker(signal):
        t = Tracker()
        signal.connect(t.handler, weak=False)
        try:
            yield t
        finally:
            signal.disconnect(t.handler)

    return _tracker

"""Node feature initializers used when a graph has no attributes of its own."""

from __future__ import annotations

import numpy as np
import pandas as pd

from src.exceptions import GraphValidationError, ParseError

DEFAULT_MAX_DEGREE = 32


def degree_one_hot(degrees, max_degree: int = DEFAULT_MAX_DEGREE) -> np.ndarray:
    """One-hot encode node degrees; degrees above `max_degree` share the last bucket."""
    if max_degree < 0:
        raise GraphValidationError("max_degree must be non-negative.")
    degrees = np.asarray(degrees, dtype=np.int64)
    buckets = np.minimum(degrees, max_degree)
    features = np.zeros((degrees.size, max_degree + 1), dtype=np.float64)
    features[np.arange(degrees.size), buckets] = 1.0
    return features


def random_injective(num_nodes: int, width: int, seed: int) -> np.ndarray:
    """Seeded Gaussian rows; distinct with probability one."""
    if width < 1:
        raise GraphValidationError("Feature width must be at least 1.")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((num_nodes, width))


def from_csv(source, num_nodes: int) -> np.ndarray:
    """Read a header-less CSV where row i holds the features of dense node i."""
    try:
        frame = pd.read_csv(source, header=None, comment="#")
    except (ValueError, pd.errors.ParserError) as exc:
        raise ParseError(f"Unreadable feature file: {exc}") from exc
    try:
        features = frame.to_numpy(dtype=np.float64)
    except ValueError as exc:
        raise ParseError("Feature file contains non-numeric values.") from exc
    if features.shape[0] != num_nodes:
        raise GraphValidationError(
            "Feature row count does not match the number of nodes.",
            details={"rows": int(features.shape[0]), "num_nodes": num_nodes},
        )
    if not np.all(np.isfinite(features)):
        raise GraphValidationError("Feature file contains NaN or Inf values.")
    return features

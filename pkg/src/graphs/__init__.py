"""Graph representation, sparse kernels, ingestion and synthetic generators."""

from .graph import AnchorSet, Graph
from .sparse import SparseMatrix
from .kernels import normalized_adjacency, renormalized, symmetrized, undirected_adjacency
from .parsing import NodeIdMap, load_anchor_text, load_edge_list
from .synthetic import generate_erdos_renyi, perturb_delete_edges

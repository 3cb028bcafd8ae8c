"""GIN, GCN and tri-directed layers and the shared encoder."""

from .encoder import GraphOperators, encode, init_encoder_params, input_width
from .layers import gcn_layer, gin_layer, tri_directed_layer

from .construction import (
    LineGraphLevel,
    adjacency_from_incidence,
    build_line_graph,
    incidence_matrix,
    lift_features,
)
from .lemma import LemmaOracleResult, lemma1_check, run_lemma1_oracle
from .pruning import bounded_degree_prune
from .stack import IlgStack, build_ilg_stack, row_normalize

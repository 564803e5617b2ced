"""Masked Wishart and GOE ensembles, subgraph census and distinguishing statistics."""

from .census import SubgraphCensus, brute_force_count, census, count, oriented_count
from .ensembles import Ensemble, MaskedMatrix, masked_goe, masked_wishart
from .graphs import (
    Graph,
    bipartite_erdos_renyi,
    complete_bipartite,
    complete_graph,
    erdos_renyi,
    parse_graph_spec,
)
from .patterns import Pattern, PatternTag
from .statistics import Statistic, kappa3, kappa4, kappa_r

__version__ = "0.1.0"

__all__ = [
    "Ensemble",
    "Graph",
    "MaskedMatrix",
    "Pattern",
    "PatternTag",
    "Statistic",
    "SubgraphCensus",
    "__version__",
    "bipartite_erdos_renyi",
    "brute_force_count",
    "census",
    "complete_bipartite",
    "complete_graph",
    "count",
    "erdos_renyi",
    "kappa3",
    "kappa4",
    "kappa_r",
    "masked_goe",
    "masked_wishart",
    "oriented_count",
    "parse_graph_spec",
]

"""Partitioning oracle for bounded-treewidth, bounded-degree graphs."""
from .graph import (Graph, Partition, Probe, QueryLedger, conductance, cut_size, degree,
                    is_isolated_neighborhood, neighbor, parse_graph, serialize_graph)
from .neighborhood import (SearchBudget, enumerate_neighborhoods, find_coverers, find_neighborhood,
                           min_cover_bruteforce)
from .forest import stronger_tree_partition
from .treedecomp import (TreeDecomposition, check_structural_lemmas, decomposition_partition,
                         exact_treewidth, normalize, validate)
from .oracle import (OracleParams, OracleSession, cut_stats, derive_parameters, global_partition,
                     local_partition, oracle_query, rank)
from .apps import check_component_membership, estimate_optimum, exact_component_optimum, test_property
from .generators import GenSpec, generate, perturb_far

__version__ = "0.1.0"

__all__ = [
    "Graph", "Partition", "Probe", "QueryLedger", "conductance", "cut_size", "degree",
    "is_isolated_neighborhood", "neighbor", "parse_graph", "serialize_graph",
    "SearchBudget", "enumerate_neighborhoods", "find_coverers", "find_neighborhood", "min_cover_bruteforce",
    "stronger_tree_partition",
    "TreeDecomposition", "check_structural_lemmas", "decomposition_partition", "exact_treewidth",
    "normalize", "validate",
    "OracleParams", "OracleSession", "cut_stats", "derive_parameters", "global_partition",
    "local_partition", "oracle_query", "rank",
    "check_component_membership", "estimate_optimum", "exact_component_optimum", "test_property",
    "GenSpec", "generate", "perturb_far",
]

"""Synthetic core-periphery social networks and edge-diversity meme cascades."""

__version__ = "0.1.0"

from .analysis import (PlateauReport, SigmoidFit, export_trace, fit_sigmoid, plateau_report,
                       read_trace)
from .cascade import (AggregateTrace, Cascade, CascadeTrace, ProbabilityTable, SeedSpec,
                      make_uniform, monte_carlo, paper_ebh_table, select_seeds, simulate)
from .classify import EdgeClass, WeightReport, classify_edge, interaction_graph, weight_report
from .errors import DegenerateFitError, MemesimError, ParseError, PreconditionError
from .generate import (LabeledGraph, SccpParams, generate_er, generate_sccp,
                       preferential_select)
from .graph import Graph, NodeIdMap, degree, load_edge_list, write_edge_list
from .structure import (NodePartition, detect_communities, k_shell, modularity,
                        select_core)

__all__ = [
    "AggregateTrace", "Cascade", "CascadeTrace", "DegenerateFitError", "EdgeClass", "Graph",
    "LabeledGraph", "MemesimError", "NodeIdMap", "NodePartition", "ParseError",
    "PlateauReport", "PreconditionError", "ProbabilityTable", "SccpParams", "SeedSpec",
    "SigmoidFit", "WeightReport", "classify_edge", "degree", "detect_communities",
    "export_trace", "fit_sigmoid", "generate_er", "generate_sccp", "interaction_graph",
    "k_shell", "load_edge_list", "make_uniform", "modularity", "monte_carlo",
    "paper_ebh_table", "plateau_report", "preferential_select", "read_trace",
    "select_core", "select_seeds", "simulate", "weight_report", "write_edge_list",
]

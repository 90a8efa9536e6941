"""Graph layout optimization: tsNET-style objectives, layout engines, a learned
graph-convolution layout model, drawing metrics and benchmark statistics."""
from .graph import (
    DisconnectedGraphError, Graph, GraphFormatError, all_pairs_bfs, parse_edge_list,
    parse_graphml, read_graph,
)
from .layouts import pivot_mds, sgd_stress, tsnet_layout
from .metrics import MetricReport, evaluate_all
from .tsnet import LossWeights, full_loss, joint_p, joint_q, loss_gradient

__version__ = "0.1.0"

__all__ = [
    "DisconnectedGraphError", "Graph", "GraphFormatError", "LossWeights", "MetricReport",
    "all_pairs_bfs", "evaluate_all", "full_loss", "joint_p", "joint_q", "loss_gradient",
    "parse_edge_list", "parse_graphml", "pivot_mds", "read_graph", "sgd_stress", "tsnet_layout",
]

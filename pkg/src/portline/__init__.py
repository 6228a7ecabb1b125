"""Layered orthogonal layout for cable plans with port constraints."""

from portline.model import (
    ContractedGraph,
    Edge,
    Port,
    PortGraph,
    PortGroup,
    PortPairing,
    Side,
    Vertex,
    Violation,
    contracted_graph,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ContractedGraph",
    "Edge",
    "Port",
    "PortGraph",
    "PortGroup",
    "PortPairing",
    "Side",
    "Vertex",
    "Violation",
    "contracted_graph",
    "validate",
    "__version__",
]

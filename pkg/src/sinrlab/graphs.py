"""Graph results and cluster analysis."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .geometry import Window
from .pathloss import PathLossModel, pathloss_eval

__all__ = [
    "GraphResult",
    "label_clusters",
    "degree_stats",
    "DegreeStats",
    "crossing_exists",
    "largest_cluster_size",
    "classify_degree2_components",
    "signal_weighted_neighbors",
]


@dataclass(frozen=True)
class GraphResult:
    """Undirected graph on the points of an observation window.

    Edges are stored once with the smaller vertex index first. Cluster
    labels are None until label_clusters has run. source_indices maps the
    vertices back into the configuration the graph was built from, and
    touch_scale is the connection length used by the face-crossing test.
    """

    positions: np.ndarray
    edges: np.ndarray
    window: Window
    labels: np.ndarray | None = None
    touch_scale: float | None = None
    source_indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.positions, dtype=float)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            if np.any(lo == hi):
                raise ValueError("self loops are not allowed")
            if len(pts) and np.max(hi) >= len(pts):
                raise ValueError("edge index out of range")
            edges = np.unique(np.stack([lo, hi], axis=1), axis=0)
        object.__setattr__(self, "positions", pts)
        object.__setattr__(self, "edges", edges)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        if self.n_edges:
            deg += np.bincount(self.edges[:, 0], minlength=self.n_vertices)
            deg += np.bincount(self.edges[:, 1], minlength=self.n_vertices)
        return deg


def label_clusters(graph: GraphResult) -> GraphResult:
    """Attach connected-component labels. Idempotent."""
    n = graph.n_vertices
    if n == 0:
        return replace(graph, labels=np.zeros(0, dtype=np.int64))
    if graph.n_edges == 0:
        return replace(graph, labels=np.arange(n, dtype=np.int64))
    ones = np.ones(graph.n_edges, dtype=np.int8)
    adj = sparse.coo_matrix(
        (ones, (graph.edges[:, 0], graph.edges[:, 1])), shape=(n, n)
    ).tocsr()
    _, labels = csgraph.connected_components(adj, directed=False)
    return replace(graph, labels=labels.astype(np.int64))


@dataclass(frozen=True)
class DegreeStats:
    histogram: np.ndarray  # counts indexed by degree
    max_degree: int


def degree_stats(graph: GraphResult) -> DegreeStats:
    deg = graph.degrees()
    if len(deg) == 0:
        return DegreeStats(histogram=np.zeros(1, dtype=np.int64), max_degree=0)
    return DegreeStats(
        histogram=np.bincount(deg), max_degree=int(np.max(deg))
    )


def crossing_exists(
    graph: GraphResult, axis: int = 0, touch: float | None = None
) -> bool:
    """Whether one cluster reaches both faces of the window along an axis.

    A vertex counts as touching a face when it lies within the touch
    distance of it, which avoids zero-measure face contact.
    """
    if graph.labels is None:
        raise ValueError("label_clusters must run before the crossing test")
    if touch is None:
        touch = graph.touch_scale
    if touch is None:
        raise ValueError("no touch scale on the graph; pass one explicitly")
    if graph.n_vertices == 0:
        return False
    coord = graph.positions[:, axis]
    lo_face = graph.window.lo()[axis]
    hi_face = graph.window.hi()[axis]
    lo_labels = graph.labels[coord <= lo_face + touch]
    hi_labels = graph.labels[coord >= hi_face - touch]
    if len(lo_labels) == 0 or len(hi_labels) == 0:
        return False
    return bool(np.intersect1d(lo_labels, hi_labels).size)


def largest_cluster_size(graph: GraphResult) -> int:
    if graph.labels is None:
        raise ValueError("label_clusters must run first")
    if graph.n_vertices == 0:
        return 0
    return int(np.max(np.bincount(graph.labels)))


def classify_degree2_components(graph: GraphResult) -> dict[int, str]:
    """Tag each cluster of a max-degree-2 graph as a path or a cycle.

    A cluster is a cycle exactly when its edge count equals its vertex
    count; isolated vertices are degenerate paths.
    """
    if graph.labels is None:
        raise ValueError("label_clusters must run first")
    deg = graph.degrees()
    if len(deg) and np.max(deg) > 2:
        raise ValueError("graph has a vertex of degree greater than 2")
    n_labels = int(np.max(graph.labels)) + 1 if graph.n_vertices else 0
    vert_count = np.bincount(graph.labels, minlength=n_labels)
    edge_count = np.zeros(n_labels, dtype=np.int64)
    if graph.n_edges:
        edge_labels = graph.labels[graph.edges[:, 0]]
        edge_count += np.bincount(edge_labels, minlength=n_labels)
    return {
        label: "cycle" if edge_count[label] == vert_count[label] else "path"
        for label in range(n_labels)
    }


def signal_weighted_neighbors(
    config, receiver, k: int, model: PathLossModel
) -> np.ndarray:
    """Indices of the k strongest transmitters toward a receiver.

    Candidates are ordered by received power, power * ell(distance),
    strongest first, with smaller distance breaking equal power. An exact
    tie in both keys means the configuration violates nonequidistance and
    raises.
    """
    if not config.is_marked:
        raise ValueError("configuration has no power marks")
    if isinstance(receiver, (int, np.integer)):
        target = config.points[int(receiver)]
        candidates = np.delete(np.arange(config.size), int(receiver))
    else:
        target = np.asarray(receiver, dtype=float)
        candidates = np.arange(config.size)
    if k < 0 or k > len(candidates):
        raise ValueError(f"k={k} outside the candidate range 0..{len(candidates)}")
    pts = config.points[candidates]
    dist = np.linalg.norm(pts - target, axis=1)
    product = config.powers[candidates] * np.asarray(pathloss_eval(model, dist))
    order = np.lexsort((dist, -product))
    sorted_prod = product[order]
    sorted_dist = dist[order]
    ties = (sorted_prod[1:] == sorted_prod[:-1]) & (sorted_dist[1:] == sorted_dist[:-1])
    if np.any(ties):
        raise ValueError(
            "unresolved tie in the signal-weighted order; "
            "the configuration violates nonequidistance"
        )
    return candidates[order[:k]]

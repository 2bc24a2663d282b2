"""Signed paraphrase graph, positive clusters and positive-path witnesses."""

import logging
from collections import Counter
from collections.abc import Iterator
from functools import cached_property
from typing import TextIO

import networkx as nx
from networkx.utils import UnionFind

from .schemas import ClusterIndex, ClusterSummary, Label, LabeledDataset, PositivePath, Split

logger = logging.getLogger(__name__)

_SIGN_SYMBOL = {Label.POSITIVE: "+", Label.NEGATIVE: "-"}


class GraphBuildError(RuntimeError):
    """Raised when a dataset cannot be turned into a simple signed graph."""


class UnknownNodeError(KeyError):
    """Raised when a query names a node the graph does not contain."""


class ParaphraseGraph:
    """Undirected signed graph over sentence node ids for one split.

    The underlying networkx graph is frozen; every edge carries a ``sign``
    attribute holding a Label.
    """

    def __init__(self, graph: nx.Graph, split: Split):
        self._graph = nx.freeze(graph)
        self.split = split

    def __contains__(self, node: int) -> bool:
        return node in self._graph

    @property
    def n_nodes(self) -> int:
        return self._graph.number_of_nodes()

    @property
    def n_edges(self) -> int:
        return self._graph.number_of_edges()

    @cached_property
    def nodes(self) -> list[int]:
        return sorted(self._graph.nodes)

    @cached_property
    def edges(self) -> list[tuple[int, int, Label]]:
        """All edges as (a, b, sign) with a < b, sorted."""
        return sorted(
            (min(u, v), max(u, v), sign) for u, v, sign in self._graph.edges(data="sign")
        )

    def sign(self, u: int, v: int) -> Label | None:
        data = self._graph.get_edge_data(u, v)
        return None if data is None else data["sign"]

    def has_edge(self, u: int, v: int) -> bool:
        return self._graph.has_edge(u, v)

    def adjacency(self, node: int) -> list[tuple[int, Label]]:
        if node not in self._graph:
            raise UnknownNodeError(node)
        return sorted((nbr, data["sign"]) for nbr, data in self._graph.adj[node].items())

    def negative_edges(self) -> Iterator[tuple[int, int]]:
        for a, b, sign in self.edges:
            if sign is Label.NEGATIVE:
                yield a, b

    @cached_property
    def positive_view(self) -> nx.Graph:
        graph = self._graph
        return nx.subgraph_view(
            graph, filter_edge=lambda u, v: graph[u][v]["sign"] is Label.POSITIVE
        )


def build_graph(dataset: LabeledDataset) -> ParaphraseGraph:
    """One node per sentence, one signed edge per pair."""
    graph = nx.Graph()
    graph.add_nodes_from(s.node_id for s in dataset.sentences)
    for pair in dataset.pairs:
        if pair.a == pair.b:
            raise GraphBuildError(f"self-loop on node {pair.a}")
        if pair.a not in graph or pair.b not in graph:
            raise GraphBuildError(f"pair {pair.key} references an unknown sentence")
        if graph.has_edge(pair.a, pair.b):
            raise GraphBuildError(f"duplicate pair {pair.key}")
        graph.add_edge(pair.a, pair.b, sign=pair.label)
    logger.debug(
        "built %s graph: %d nodes, %d edges",
        dataset.split,
        graph.number_of_nodes(),
        graph.number_of_edges(),
    )
    return ParaphraseGraph(graph, dataset.split)


def positive_components(graph: ParaphraseGraph) -> ClusterIndex:
    """Union-find over positive edges. Cluster ids follow the smallest member."""
    forest = UnionFind(graph.nodes)
    for a, b, sign in graph.edges:
        if sign is Label.POSITIVE:
            forest.union(a, b)
    groups = sorted((sorted(group) for group in forest.to_sets()), key=lambda m: m[0])
    members = {cid: tuple(group) for cid, group in enumerate(groups)}
    component_of = {node: cid for cid, group in members.items() for node in group}
    return ClusterIndex(component_of=component_of, members=members)


def shortest_positive_path(
    graph: ParaphraseGraph,
    u: int,
    v: int,
    index: ClusterIndex | None = None,
) -> PositivePath | None:
    """Minimum-hop all-positive path from u to v, or None.

    Breadth-first search from u expanding neighbors in ascending node id, so
    the witness is the same on every run.
    """
    for node in (u, v):
        if node not in graph:
            raise UnknownNodeError(node)
    if u == v:
        return PositivePath(nodes=(u,))
    if index is not None and not index.same_cluster(u, v):
        return None

    parent: dict[int, int] = {}
    for src, dst in nx.bfs_edges(graph.positive_view, u, sort_neighbors=sorted):
        parent[dst] = src
        if dst == v:
            break
    else:
        return None

    path = [v]
    while path[-1] != u:
        path.append(parent[path[-1]])
    return PositivePath(nodes=tuple(reversed(path)))


def cluster_summary(index: ClusterIndex) -> ClusterSummary:
    sizes = Counter(len(members) for members in index.members.values())
    return ClusterSummary(
        n_nodes=len(index.component_of),
        n_clusters=len(index.members),
        n_non_singleton=sum(count for size, count in sizes.items() if size > 1),
        largest=max(sizes, default=0),
        size_histogram=dict(sorted(sizes.items())),
    )


def write_edge_list(graph: ParaphraseGraph, sink: TextIO) -> int:
    """Debug export: one ``a<TAB>b<TAB>+|-`` line per edge."""
    for a, b, sign in graph.edges:
        sink.write(f"{a}\t{b}\t{_SIGN_SYMBOL[sign]}\n")
    return graph.n_edges

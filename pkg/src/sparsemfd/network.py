"""Road graph model: links, hierarchy classes, detector placement, distances.

All spatial reasoning happens along the graph. The separation between two
detectors is the shortest travelled distance over link lengths, never the
straight-line distance, so coordinates are optional metadata and play no
role here. A network is fully described by its connectivity, per-link
lengths and per-link hierarchy labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import UnreachableSiteError, ValidationError
from .tableio import iter_rows, parse_float, parse_int, parse_optional_float, parse_str

NETWORK_COLUMNS = ("link_id", "from_node", "to_node", "length_km", "hierarchy")
SITE_COLUMNS = ("detector_id", "link_id")
DEFAULT_OFFSET = 0.5


@dataclass(frozen=True)
class Link:
    """One road segment between two nodes.

    ``hierarchy`` is a small integer class label; by convention class 1 is
    the highest level (greatest traffic load).
    """

    id: str
    from_node: str
    to_node: str
    length_km: float
    hierarchy: int

    def __post_init__(self):
        if not (isinstance(self.length_km, (int, float)) and math.isfinite(self.length_km)):
            raise ValidationError(f"link '{self.id}': length must be a finite number")
        if self.length_km <= 0:
            raise ValidationError(
                f"link '{self.id}': length must be positive, got {self.length_km}"
            )
        if isinstance(self.hierarchy, bool) or not isinstance(self.hierarchy, int):
            raise ValidationError(f"link '{self.id}': hierarchy must be an integer")


@dataclass(frozen=True)
class DetectorSite:
    """A stationary detector attached to a link.

    ``offset_fraction`` locates the detector along the link, 0 at the from
    node and 1 at the to node. The default places it at the midpoint.
    """

    detector_id: str
    link_id: str
    offset_fraction: float = DEFAULT_OFFSET

    def __post_init__(self):
        f = self.offset_fraction
        if not (isinstance(f, (int, float)) and math.isfinite(f) and 0.0 <= f <= 1.0):
            raise ValidationError(
                f"detector '{self.detector_id}': offset_fraction must lie in [0, 1], got {f}"
            )


class Network:
    """Immutable undirected road graph.

    Parameters
    ----------
    links : iterable of Link
        Wholesale description of the network. Link ids must be unique.
    nodes : iterable of node ids, optional
        Explicit node set. When given, every link endpoint must be a member;
        otherwise nodes are inferred from the link endpoints.
    """

    def __init__(self, links, nodes=None):
        links = tuple(links)
        if not links:
            raise ValidationError("a network needs at least one link")
        by_id = {}
        for link in links:
            if link.id in by_id:
                raise ValidationError(f"duplicate link id '{link.id}'")
            by_id[link.id] = link
        endpoints = set()
        for link in links:
            endpoints.add(link.from_node)
            endpoints.add(link.to_node)
        if nodes is None:
            node_set = frozenset(endpoints)
        else:
            node_set = frozenset(nodes)
            dangling = sorted(endpoints - node_set)
            if dangling:
                raise ValidationError(
                    f"links reference nodes missing from the node set: {dangling[:10]}"
                )
        graph = nx.MultiGraph()
        graph.add_nodes_from(node_set)
        for link in links:
            graph.add_edge(link.from_node, link.to_node, key=link.id, length_km=link.length_km)

        self.links = links
        self.nodes = node_set
        self.hierarchy_set = frozenset(link.hierarchy for link in links)
        # fsum keeps the total independent of link order
        self.total_length_km = math.fsum(link.length_km for link in links)
        self.graph = graph
        self._by_id = by_id

    def link(self, link_id):
        try:
            return self._by_id[link_id]
        except KeyError:
            raise ValidationError(f"unknown link id '{link_id}'")

    def has_link(self, link_id):
        return link_id in self._by_id

    def links_of_hierarchy(self, hierarchy):
        return tuple(link for link in self.links if link.hierarchy == hierarchy)

    def length_by_hierarchy(self):
        out = {}
        for h in sorted(self.hierarchy_set):
            out[h] = math.fsum(l.length_km for l in self.links if l.hierarchy == h)
        return out

    def __repr__(self):
        return (
            f"Network({len(self.links)} links, {len(self.nodes)} nodes, "
            f"{self.total_length_km:.3f} km)"
        )


def load_network(source, delimiter=","):
    """Read a network table with columns link_id, from_node, to_node, length_km, hierarchy."""
    links = []
    for lineno, row in iter_rows(source, NETWORK_COLUMNS, delimiter):
        links.append(
            Link(
                id=parse_str(row, "link_id", lineno),
                from_node=parse_str(row, "from_node", lineno),
                to_node=parse_str(row, "to_node", lineno),
                length_km=parse_float(row, "length_km", lineno),
                hierarchy=parse_int(row, "hierarchy", lineno),
            )
        )
    return Network(links)


def load_detector_sites(source, network=None, delimiter=","):
    """Read a detector table with columns detector_id, link_id, offset_fraction (optional).

    When ``network`` is given every referenced link must exist in it.
    """
    sites = []
    seen = set()
    for lineno, row in iter_rows(source, SITE_COLUMNS, delimiter):
        site = DetectorSite(
            detector_id=parse_str(row, "detector_id", lineno),
            link_id=parse_str(row, "link_id", lineno),
            offset_fraction=parse_optional_float(row, "offset_fraction", lineno, DEFAULT_OFFSET),
        )
        if site.detector_id in seen:
            raise ValidationError(f"duplicate detector id '{site.detector_id}'")
        seen.add(site.detector_id)
        if network is not None:
            network.link(site.link_id)
        sites.append(site)
    return sites


def midpoint_sites(network, prefix="@"):
    """One virtual site per link at its midpoint, used as imputation targets."""
    return tuple(
        DetectorSite(prefix + link.id, link.id, 0.5) for link in network.links
    )


def _anchor(network, site):
    """Resolve a site to (link, distance to from_node, distance to to_node)."""
    link = network.link(site.link_id)
    along = site.offset_fraction * link.length_km
    return link, along, link.length_km - along


def _entry(anchor_a, anchor_b, source_maps):
    """Distance between two anchored sites given node-to-node distance maps.

    The path runs from site a to one endpoint of its link, through the graph,
    then from an endpoint of b's link to site b; all four endpoint pairings
    are tried. Sites sharing a link may also connect directly along it.
    """
    link_a, a_from, a_to = anchor_a
    link_b, b_from, b_to = anchor_b
    best = math.inf
    if link_a.id == link_b.id:
        best = abs(a_from - b_from)
    for src_node, src_off in ((link_a.from_node, a_from), (link_a.to_node, a_to)):
        lengths = source_maps[src_node]
        for dst_node, dst_off in ((link_b.from_node, b_from), (link_b.to_node, b_to)):
            through = lengths.get(dst_node)
            if through is not None:
                total = src_off + through + dst_off
                if total < best:
                    best = total
    return best


def _source_maps(network, anchors):
    maps = {}
    for link, _, _ in anchors:
        for node in (link.from_node, link.to_node):
            if node not in maps:
                maps[node] = nx.single_source_dijkstra_path_length(
                    network.graph, node, weight="length_km"
                )
    return maps


def detector_path_distance(network, site_a, site_b):
    """Shortest along-network distance between two detector sites, in km.

    Symmetric and zero for coincident sites. Raises UnreachableSiteError when
    the sites sit in disconnected components.
    """
    anchor_a = _anchor(network, site_a)
    anchor_b = _anchor(network, site_b)
    maps = _source_maps(network, [anchor_a])
    distance = _entry(anchor_a, anchor_b, maps)
    if not math.isfinite(distance):
        raise UnreachableSiteError(
            f"no path between detectors '{site_a.detector_id}' and '{site_b.detector_id}'"
        )
    return distance


def site_distance_matrix(network, sites):
    """Symmetric matrix of along-network distances between detector sites.

    Unreachable pairs are marked with inf rather than raised, so a partly
    disconnected network still yields a usable matrix. The diagonal is zero.
    """
    anchors = [_anchor(network, s) for s in sites]
    maps = _source_maps(network, anchors)
    n = len(anchors)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = _entry(anchors[i], anchors[j], maps)
            out[i, j] = d
            out[j, i] = d
    return out


def cross_distance_matrix(network, sites, targets):
    """Along-network distances from each site (rows) to each target (columns)."""
    site_anchors = [_anchor(network, s) for s in sites]
    target_anchors = [_anchor(network, t) for t in targets]
    maps = _source_maps(network, site_anchors)
    out = np.zeros((len(site_anchors), len(target_anchors)))
    for i, a in enumerate(site_anchors):
        for j, b in enumerate(target_anchors):
            out[i, j] = _entry(a, b, maps)
    return out

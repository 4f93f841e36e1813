"""Shortest paths, ECMP splitting, and exact per-arc load accounting.

Traffic toward a destination follows every shortest path; at each node the
incoming (plus locally injected) volume divides evenly across that node's
outgoing shortest-path arcs.  Loads are exact rationals so that conservation
and cross-code-path comparisons hold without tolerances.

All functions are pure in (topology, weights, demands); callers may evaluate
many weight vectors concurrently.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import UnreachableError, ValidationError
from .model import INTRA, ExtendedTopology, Topology

Net = Topology | ExtendedTopology
WeightVector = Mapping[str, int]
LoadMap = dict[str, Fraction]


def arc_weight(net: Net, w: WeightVector, aid: str) -> int:
    """Effective weight of an arc under vector `w`: the vector's entry for
    optimizable (intra) arcs, the frozen 0 for inter/virtual arcs."""
    arc = net.arcs[aid]
    if arc.kind != INTRA:
        return 0
    try:
        return w[aid]
    except KeyError:
        return arc.weight


def shortest_distances(net: Net, w: WeightVector, dst: str) -> dict[str, int]:
    """Exact integer distances from every node to `dst`.

    Nodes with no path to `dst` are absent from the result (never defaulted).
    Runs Dijkstra over reversed arcs; zero weights occur only on inter and
    virtual arcs, which cannot form cycles by construction.
    """
    if dst not in net.nodes:
        raise ValidationError(f"unknown destination {dst!r}")
    dist: dict[str, int] = {}
    heap: list[tuple[int, str]] = [(0, dst)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in dist:
            continue
        dist[node] = d
        for aid in net.into(node):
            arc = net.arcs[aid]
            if arc.src not in dist:
                heapq.heappush(heap, (d + arc_weight(net, w, aid), arc.src))
    return dist


@dataclass(frozen=True)
class EcmpDag:
    """Arcs lying on some shortest path toward `dst`, with the per-node
    out-arc lists used for even traffic splitting."""

    dst: str
    dist: Mapping[str, int]
    out: Mapping[str, tuple[str, ...]]

    @property
    def arcs(self) -> frozenset[str]:
        return frozenset(a for arcs in self.out.values() for a in arcs)


def ecmp_dag(net: Net, w: WeightVector, dst: str) -> EcmpDag:
    """The shortest-path DAG toward `dst`: arc (u,v) belongs iff
    d(u) = w(u,v) + d(v).  Acyclic because intra weights are >= 1 and the
    zero-weight inter/virtual arcs strictly advance the node-kind order."""
    dist = shortest_distances(net, w, dst)
    out: dict[str, tuple[str, ...]] = {}
    for node, d in dist.items():
        if node == dst:
            continue
        members = []
        for aid in net.out_of(node):
            arc = net.arcs[aid]
            dv = dist.get(arc.dst)
            if dv is not None and d == arc_weight(net, w, aid) + dv:
                members.append(aid)
        if members:
            out[node] = tuple(sorted(members))
    return EcmpDag(dst=dst, dist=dist, out=out)


_NODE_RANK = {"intra": 0, "neighbor": 1, "virtual": 2}


def _topo_order(net: Net, dag: EcmpDag) -> list[str]:
    """Topological order of the DAG: by decreasing distance, with ties
    (possible only across the zero-weight arcs) broken by node kind."""

    def key(node: str):
        return (-dag.dist[node], _NODE_RANK[net.nodes[node].kind], node)

    return sorted(dag.out, key=key)


def spread_demands(net: Net, w: WeightVector, dst: str, injections: Mapping[str, Fraction]) -> LoadMap:
    """Propagate several sources' volumes toward one destination in a single
    pass over the shortest-path DAG.  Exact; linear in the injections."""
    dag = ecmp_dag(net, w, dst)
    for src, volume in injections.items():
        if volume and src != dst and src not in dag.dist:
            raise UnreachableError(src, dst)
    pending: dict[str, Fraction] = {
        src: vol for src, vol in injections.items() if vol and src != dst
    }
    loads: LoadMap = {}
    for node in _topo_order(net, dag):
        vol = pending.pop(node, None)
        if not vol:
            continue
        outs = dag.out[node]
        share = vol / len(outs)
        for aid in outs:
            loads[aid] = loads.get(aid, Fraction(0)) + share
            nxt = net.arcs[aid].dst
            if nxt != dst:
                pending[nxt] = pending.get(nxt, Fraction(0)) + share
    assert not pending, f"flow stranded at {sorted(pending)}"
    return loads


def route_demand(net: Net, w: WeightVector, src: str, dst: str, volume: Fraction) -> LoadMap:
    """Per-arc loads of a single demand; errors if `dst` is unreachable."""
    return spread_demands(net, w, dst, {src: Fraction(volume)})


def add_loads(total: LoadMap, part: LoadMap) -> None:
    for aid, v in part.items():
        total[aid] = total.get(aid, Fraction(0)) + v


def compute_loads(net: Net, w: WeightVector, tm) -> LoadMap:
    """Route an aggregated traffic matrix and sum the per-arc loads.

    Diagonal entries of the invariant matrix are absorbed at their source and
    produce no load; their decomposition by originating aggregate (when known)
    is routed to the aggregate's virtual node, which places the volume on the
    source's own peering arcs and nothing else.  Aggregate columns missing
    from `net` are an error for hot-potato cells, but the diagonal
    decomposition simply contributes nothing there (the traffic still exits
    locally; the instance just does not model those peerings).
    """
    by_dst: dict[str, dict[str, Fraction]] = {}

    def inject(dst: str, src: str, vol: Fraction) -> None:
        cell = by_dst.setdefault(dst, {})
        cell[src] = cell.get(src, Fraction(0)) + vol

    for (src, dst), vol in tm.invar.items():
        if src == dst or not vol:
            continue
        if dst not in net.nodes:
            raise ValidationError(f"traffic matrix destination {dst!r} not in topology")
        inject(dst, src, vol)
    for (src, agg), vol in tm.hp.items():
        if not vol:
            continue
        if agg not in net.nodes:
            raise ValidationError(f"aggregate {agg!r} not in topology")
        inject(agg, src, vol)
    for (src, agg), vol in getattr(tm, "self_hp", {}).items():
        if vol and agg in net.nodes:
            inject(agg, src, vol)

    loads: LoadMap = {}
    for dst in sorted(by_dst):
        add_loads(loads, spread_demands(net, w, dst, by_dst[dst]))
    return loads


def utilizations(loads: LoadMap, net: Net) -> dict[str, Fraction]:
    """Per-arc utilization; virtual arcs (unbounded capacity) read as 0."""
    out: dict[str, Fraction] = {}
    for aid, arc in net.arcs.items():
        if arc.capacity is None:
            out[aid] = Fraction(0)
        else:
            out[aid] = loads.get(aid, Fraction(0)) / arc.capacity
    return out


def u_max(loads: LoadMap, net: Net, classes=(INTRA,)) -> Fraction:
    """Maximum utilization over the selected arc classes (virtual excluded)."""
    best = Fraction(0)
    for aid, arc in net.arcs.items():
        if arc.kind in classes and arc.capacity is not None:
            u = loads.get(aid, Fraction(0)) / arc.capacity
            if u > best:
                best = u
    return best


def total_load(loads: LoadMap, net: Net, classes=(INTRA,)) -> Fraction:
    return sum(
        (loads.get(aid, Fraction(0)) for aid, a in net.arcs.items() if a.kind in classes),
        Fraction(0),
    )


def mean_utilization(loads: LoadMap, net: Net, classes=(INTRA,)) -> Fraction:
    us = [
        loads.get(aid, Fraction(0)) / a.capacity
        for aid, a in net.arcs.items()
        if a.kind in classes and a.capacity is not None
    ]
    if not us:
        return Fraction(0)
    return sum(us, Fraction(0)) / len(us)

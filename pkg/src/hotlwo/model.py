"""Graph data model: intradomain topology and its BGP-aware extension.

The extended topology adds, per declared peering link, a neighbor-router node
reached by a directed interdomain arc, and, per egress aggregate, a virtual
destination node reached by directed zero-weight arcs from the neighbor nodes
in the aggregate's egress set.  Interdomain and virtual arcs keep weight 0 so
a border router always exits locally (the eBGP-over-iBGP rule) and so virtual
elements never carry transit traffic.

All graph values are immutable after construction and safe to share across
parallel evaluation workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

INTRA = "intra"
NEIGHBOR = "neighbor"
VIRTUAL = "virtual"
INTER = "inter"

_NODE_KIND_RANK = {INTRA: 0, NEIGHBOR: 1, VIRTUAL: 2}


@dataclass(frozen=True)
class Node:
    id: str
    kind: str  # intra | neighbor | virtual


@dataclass(frozen=True)
class Arc:
    """A directed arc. `link` names the physical link / peering / aggregate
    attachment it belongs to; intra arcs come in src/dst-swapped pairs that
    share a `link`. `capacity` is Mbps; None marks the unbounded virtual
    sentinel (utilization of such arcs is defined as 0)."""

    id: str
    link: str
    src: str
    dst: str
    kind: str  # intra | inter | virtual
    capacity: Fraction | None
    weight: int  # deployed weight from the input; 0 for inter/virtual


@dataclass(frozen=True)
class Peering:
    """A directed interdomain attachment: egress router -> neighbor node."""

    id: str
    egress: str
    neighbor: str
    capacity: Fraction


def arc_id(link: str, src: str, dst: str) -> str:
    return f"{link}:{src}>{dst}"


def _index_adjacency(arcs: Iterable[Arc]) -> tuple[dict, dict]:
    out: dict[str, list[str]] = {}
    inc: dict[str, list[str]] = {}
    for a in arcs:
        out.setdefault(a.src, []).append(a.id)
        inc.setdefault(a.dst, []).append(a.id)
    return (
        {n: tuple(sorted(v)) for n, v in out.items()},
        {n: tuple(sorted(v)) for n, v in inc.items()},
    )


@dataclass(frozen=True)
class Topology:
    """Intradomain topology: intra nodes and paired directed intra arcs."""

    nodes: Mapping[str, Node]
    arcs: Mapping[str, Arc]
    out_arcs: Mapping[str, tuple[str, ...]] = field(repr=False)
    in_arcs: Mapping[str, tuple[str, ...]] = field(repr=False)

    def out_of(self, node: str) -> tuple[str, ...]:
        return self.out_arcs.get(node, ())

    def into(self, node: str) -> tuple[str, ...]:
        return self.in_arcs.get(node, ())

    @property
    def optimizable(self) -> tuple[str, ...]:
        return tuple(self.arcs)


@dataclass(frozen=True)
class EgressAggregate:
    """A cluster of hot-potato prefixes sharing one egress set, represented
    by a single virtual destination node (same id as the aggregate)."""

    id: str
    egress_set: frozenset[tuple[str, str]]  # (egress router, peering id)
    member_prefixes: frozenset[str] = frozenset()
    attracted_volume: Fraction = Fraction(0)

    @property
    def egress_routers(self) -> frozenset[str]:
        return frozenset(e for e, _ in self.egress_set)

    def sorted_set(self) -> list[tuple[str, str]]:
        return sorted(self.egress_set)


@dataclass(frozen=True)
class ExtendedTopology:
    """Intradomain topology extended with neighbor and virtual elements.

    Only intra arcs are optimizable; inter and virtual arcs are frozen at
    weight 0.  No arc leaves a virtual node and neighbor nodes only reach
    virtual nodes, so nothing can transit back into the intra graph.
    """

    base: Topology
    nodes: Mapping[str, Node]  # all kinds
    arcs: Mapping[str, Arc]  # all kinds
    out_arcs: Mapping[str, tuple[str, ...]] = field(repr=False)
    in_arcs: Mapping[str, tuple[str, ...]] = field(repr=False)
    peerings: Mapping[str, Peering] = field(default_factory=dict)
    aggregates: Mapping[str, EgressAggregate] = field(default_factory=dict)

    def out_of(self, node: str) -> tuple[str, ...]:
        return self.out_arcs.get(node, ())

    def into(self, node: str) -> tuple[str, ...]:
        return self.in_arcs.get(node, ())

    @property
    def optimizable(self) -> tuple[str, ...]:
        return tuple(aid for aid, a in self.arcs.items() if a.kind == INTRA)


def _check_arc_kind(src_kind: str, dst_kind: str) -> str:
    """Arc kind is determined solely by its endpoint kinds."""
    if src_kind == INTRA and dst_kind == INTRA:
        return INTRA
    if src_kind == INTRA and dst_kind == NEIGHBOR:
        return INTER
    if src_kind == NEIGHBOR and dst_kind == VIRTUAL:
        return VIRTUAL
    raise ValidationError(f"illegal arc between node kinds {src_kind} and {dst_kind}")


@dataclass(frozen=True)
class LinkSpec:
    id: str
    a: str
    b: str
    capacity: Fraction
    weight: int


@dataclass(frozen=True)
class TopologySpec:
    """Parsed form of a topology file: intra nodes, bidirectional intra
    links, and directed peering declarations."""

    nodes: tuple[str, ...]
    links: tuple[LinkSpec, ...]
    peerings: tuple[Peering, ...]


def build_topology(spec: TopologySpec) -> Topology:
    """Expand bidirectional link specs into paired directed arcs.

    Both directions of a link share its capacity and initial weight.
    """
    nodes: dict[str, Node] = {}
    for nid in spec.nodes:
        if nid in nodes:
            raise ValidationError(f"duplicate node id {nid!r}")
        nodes[nid] = Node(nid, INTRA)
    arcs: dict[str, Arc] = {}
    seen_links: set[str] = set()
    for ln in spec.links:
        if ln.id in seen_links:
            raise ValidationError(f"duplicate link id {ln.id!r}")
        seen_links.add(ln.id)
        for end in (ln.a, ln.b):
            if end not in nodes:
                raise ValidationError(f"link {ln.id!r}: unknown endpoint {end!r}")
        if ln.a == ln.b:
            raise ValidationError(f"link {ln.id!r}: self-loop on {ln.a!r}")
        if ln.capacity <= 0:
            raise ValidationError(f"link {ln.id!r}: non-positive capacity")
        if ln.weight < 1:
            raise ValidationError(f"link {ln.id!r}: intra weight must be >= 1")
        for src, dst in ((ln.a, ln.b), (ln.b, ln.a)):
            aid = arc_id(ln.id, src, dst)
            arcs[aid] = Arc(aid, ln.id, src, dst, INTRA, ln.capacity, ln.weight)
    arcs = dict(sorted(arcs.items()))
    _check_connected(nodes, arcs.values())
    out, inc = _index_adjacency(arcs.values())
    return Topology(nodes=dict(sorted(nodes.items())), arcs=arcs, out_arcs=out, in_arcs=inc)


def _check_connected(nodes: Mapping[str, Node], arcs: Iterable[Arc]) -> None:
    if len(nodes) <= 1:
        return
    undirected: dict[str, set[str]] = {n: set() for n in nodes}
    for a in arcs:
        undirected[a.src].add(a.dst)
        undirected[a.dst].add(a.src)
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        for nb in undirected[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(nodes):
        missing = sorted(set(nodes) - seen)
        raise ValidationError(f"topology not connected; unreachable: {missing}")


def extend_topology(
    base: Topology,
    peerings: Iterable[Peering],
    aggregates: Iterable[EgressAggregate],
) -> ExtendedTopology:
    """Attach peering links and aggregate virtual nodes to the base topology.

    One neighbor node per peering link (two peerings toward the same external
    router still get distinct neighbor nodes); one virtual node per aggregate,
    fed by a zero-weight arc from each neighbor node in its egress set.
    """
    nodes: dict[str, Node] = dict(base.nodes)
    arcs: dict[str, Arc] = dict(base.arcs)
    peering_index: dict[str, Peering] = {}
    for p in sorted(peerings, key=lambda p: p.id):
        if p.id in peering_index:
            raise ValidationError(f"duplicate peering id {p.id!r}")
        if p.egress not in base.nodes:
            raise ValidationError(f"peering {p.id!r}: unknown egress router {p.egress!r}")
        if p.neighbor in nodes:
            raise ValidationError(f"peering {p.id!r}: neighbor id {p.neighbor!r} already in use")
        if p.capacity <= 0:
            raise ValidationError(f"peering {p.id!r}: non-positive capacity")
        peering_index[p.id] = p
        nodes[p.neighbor] = Node(p.neighbor, NEIGHBOR)
        aid = p.id
        arcs[aid] = Arc(aid, p.id, p.egress, p.neighbor, INTER, p.capacity, 0)

    agg_index: dict[str, EgressAggregate] = {}
    for agg in sorted(aggregates, key=lambda a: a.id):
        if agg.id in nodes or agg.id in agg_index:
            raise ValidationError(f"aggregate id {agg.id!r} already in use")
        if not agg.egress_set:
            raise ValidationError(f"aggregate {agg.id!r} has an empty egress set")
        for egress, pid in agg.sorted_set():
            p = peering_index.get(pid)
            if p is None:
                raise ValidationError(f"aggregate {agg.id!r} references undeclared peering {pid!r}")
            if p.egress != egress:
                raise ValidationError(
                    f"aggregate {agg.id!r}: peering {pid!r} hangs off {p.egress!r}, not {egress!r}"
                )
        agg_index[agg.id] = agg
        nodes[agg.id] = Node(agg.id, VIRTUAL)
        for egress, pid in agg.sorted_set():
            nb = peering_index[pid].neighbor
            vid = arc_id(f"v-{agg.id}", nb, agg.id)
            arcs[vid] = Arc(vid, f"v-{agg.id}", nb, agg.id, VIRTUAL, None, 0)

    for a in arcs.values():
        _check_arc_kind(nodes[a.src].kind, nodes[a.dst].kind)
    arcs = dict(sorted(arcs.items()))
    nodes = dict(sorted(nodes.items()))
    out, inc = _index_adjacency(arcs.values())
    return ExtendedTopology(
        base=base,
        nodes=nodes,
        arcs=arcs,
        out_arcs=out,
        in_arcs=inc,
        peerings=peering_index,
        aggregates=agg_index,
    )


def simplify_model(xt: ExtendedTopology) -> ExtendedTopology:
    """Drop interdomain links and neighbor nodes, re-homing each virtual arc
    to run directly from the candidate egress router to the virtual node.

    Valid only when interdomain links are not part of the objective: intra-arc
    loads are unchanged for every weight vector, but interdomain loads are no
    longer modeled.  Parallel attachments (one egress holding two peerings of
    the same aggregate) collapse to a single arc, which leaves intra loads
    untouched because the split rejoins immediately at the virtual node.
    """
    nodes: dict[str, Node] = dict(xt.base.nodes)
    arcs: dict[str, Arc] = dict(xt.base.arcs)
    for agg in xt.aggregates.values():
        nodes[agg.id] = Node(agg.id, VIRTUAL)
        for egress in sorted(agg.egress_routers):
            vid = arc_id(f"v-{agg.id}", egress, agg.id)
            # direct egress->virtual attachment; kind check is bypassed on
            # purpose (intra->virtual only exists in the simplified model)
            arcs[vid] = Arc(vid, f"v-{agg.id}", egress, agg.id, VIRTUAL, None, 0)
    arcs = dict(sorted(arcs.items()))
    nodes = dict(sorted(nodes.items()))
    out, inc = _index_adjacency(arcs.values())
    return ExtendedTopology(
        base=xt.base,
        nodes=nodes,
        arcs=arcs,
        out_arcs=out,
        in_arcs=inc,
        peerings={},
        aggregates=dict(xt.aggregates),
    )


def scale_instance(spec: TopologySpec, capacity_map: Mapping[Fraction, Fraction]):
    """Map link and peering capacities through `capacity_map` (identity where
    unmapped).  Returns a new TopologySpec; demand scaling is applied to the
    traffic matrix by the caller (loads are linear in demands)."""
    links = tuple(
        replace(ln, capacity=capacity_map.get(ln.capacity, ln.capacity)) for ln in spec.links
    )
    peerings = tuple(
        replace(p, capacity=capacity_map.get(p.capacity, p.capacity)) for p in spec.peerings
    )
    return TopologySpec(nodes=spec.nodes, links=links, peerings=peerings)


# ---------------------------------------------------------------------------
# topology file format
#
#   node <id> intra
#   link <id> <a> <b> <capacity_mbps> <weight>     (bidirectional intra)
#   peering <id> <egress_router> <neighbor_id> <capacity_mbps>  (directed)
#
# '#' starts a comment; fields are whitespace-separated.


def _fraction(token: str, source: str, line_no: int, what: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(source, line_no, f"bad {what}: {token!r}") from None


def parse_topology(text: str, source: str = "<topology>") -> TopologySpec:
    nodes: list[str] = []
    links: list[LinkSpec] = []
    peerings: list[Peering] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "node":
            if len(fields) != 3:
                raise ParseError(source, line_no, "expected: node <id> intra")
            if fields[2] != INTRA:
                raise ParseError(source, line_no, f"unsupported node kind {fields[2]!r}")
            nodes.append(fields[1])
        elif tag == "link":
            if len(fields) != 6:
                raise ParseError(source, line_no, "expected: link <id> <a> <b> <capacity> <weight>")
            cap = _fraction(fields[4], source, line_no, "capacity")
            try:
                weight = int(fields[5])
            except ValueError:
                raise ParseError(source, line_no, f"bad weight: {fields[5]!r}") from None
            links.append(LinkSpec(fields[1], fields[2], fields[3], cap, weight))
        elif tag == "peering":
            if len(fields) != 5:
                raise ParseError(
                    source, line_no, "expected: peering <id> <egress> <neighbor> <capacity>"
                )
            cap = _fraction(fields[4], source, line_no, "capacity")
            peerings.append(Peering(fields[1], fields[2], fields[3], cap))
        else:
            raise ParseError(source, line_no, f"unknown directive {tag!r}")
    return TopologySpec(tuple(nodes), tuple(links), tuple(peerings))


def format_topology(spec: TopologySpec, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += [f"node {n} intra" for n in spec.nodes]
    lines += [
        f"link {ln.id} {ln.a} {ln.b} {_num(ln.capacity)} {ln.weight}" for ln in spec.links
    ]
    lines += [
        f"peering {p.id} {p.egress} {p.neighbor} {_num(p.capacity)}" for p in spec.peerings
    ]
    return "\n".join(lines) + "\n"


def _num(x: Fraction) -> str:
    return str(x)


def deployed_weights(t: Topology) -> dict[str, int]:
    """The weight vector carried by the topology file itself."""
    return {aid: a.weight for aid, a in t.arcs.items() if a.kind == INTRA}

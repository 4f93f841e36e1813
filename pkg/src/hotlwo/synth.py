"""Synthetic instances: the three-router demo, seeded random instances for
property tests, and an operational-profile instance whose aggregation and
traffic-coverage structure matches a mid-size transit network (18 peering
links, 26 observed egress sets, five of them attracting all but a sliver of
the hot-potato traffic).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from .bgp import classify_prefixes, parse_route_dump
from .model import (
    EgressAggregate,
    ExtendedTopology,
    LinkSpec,
    Peering,
    TopologySpec,
    build_topology,
    deployed_weights,
    extend_topology,
)
from .tm import (
    AggregatedTM,
    aggregate_by_egress_set,
    build_aggregated_tm,
    truncate_aggregates,
)


@dataclass(frozen=True)
class Instance:
    spec: TopologySpec
    xt: ExtendedTopology
    tm: AggregatedTM
    routes_text: str
    flows_text: str

    @property
    def deployed(self) -> dict[str, int]:
        return deployed_weights(self.xt.base)


# ---------------------------------------------------------------------------
# three-router demo: one ingress, two candidate egresses for a single
# hot-potato prefix, deployed weights inversely proportional to capacity.
# The third link's capacity is set equal to the second's.


def toy_spec() -> TopologySpec:
    return TopologySpec(
        nodes=("R1", "R2", "R3"),
        links=(
            LinkSpec("L12", "R1", "R2", Fraction(10), 4),
            LinkSpec("L13", "R1", "R3", Fraction(8), 5),
            LinkSpec("L23", "R2", "R3", Fraction(8), 5),
        ),
        peerings=(
            Peering("pg1", "R2", "N1", Fraction(10)),
            Peering("pg2", "R3", "N2", Fraction(10)),
        ),
    )


def toy_instance(volume: Fraction = Fraction(5)) -> Instance:
    spec = toy_spec()
    routes = "route R2 P1 R2 pg1\nroute R3 P1 R3 pg2\nroute R1 P1 R2 pg1\n"
    flows = f"flow R1 P1 {volume}\n"
    return instance_from_texts(spec, routes, flows, coverage=Fraction(1))


def instance_from_texts(
    spec: TopologySpec, routes_text: str, flows_text: str, coverage: Fraction
) -> Instance:
    """Run the full pipeline (classify, aggregate, truncate, build) on
    in-memory file contents."""
    from .tm import parse_flows

    base = build_topology(spec)
    records = parse_route_dump(
        routes_text,
        known_routers=set(base.nodes),
        known_peerings={p.id: p.egress for p in spec.peerings},
    )
    cls = classify_prefixes(records)
    flows = parse_flows(flows_text)
    aggs = aggregate_by_egress_set(cls)
    kept, remainder = truncate_aggregates(aggs, flows, coverage)
    xt = extend_topology(base, spec.peerings, kept)
    w0 = deployed_weights(base)
    tm = build_aggregated_tm(flows, cls, kept, remainder, xt, w0)
    return Instance(spec, xt, tm, routes_text, flows_text)


# ---------------------------------------------------------------------------
# seeded random instances for property and consistency tests


def random_spec(
    rng: Random,
    n_nodes: int = 6,
    extra_links: int = 2,
    n_peerings: int = 3,
    tree: bool = False,
) -> TopologySpec:
    """Connected random topology: a random spanning tree plus `extra_links`
    chords (none when `tree`), with peerings on randomly chosen routers."""
    nodes = tuple(f"R{i}" for i in range(n_nodes))
    caps = [Fraction(c) for c in (8, 10, 16, 20)]
    links: list[LinkSpec] = []
    used: set[frozenset[str]] = set()
    for i in range(1, n_nodes):
        j = rng.randrange(i)
        links.append(
            LinkSpec(f"L{len(links)}", nodes[j], nodes[i], rng.choice(caps), rng.randint(1, 5))
        )
        used.add(frozenset((nodes[j], nodes[i])))
    attempts = 0
    while not tree and len(links) < n_nodes - 1 + extra_links and attempts < 50:
        attempts += 1
        a, b = rng.sample(range(n_nodes), 2)
        key = frozenset((nodes[a], nodes[b]))
        if key in used:
            continue
        used.add(key)
        links.append(
            LinkSpec(f"L{len(links)}", nodes[a], nodes[b], rng.choice(caps), rng.randint(1, 5))
        )
    peerings = tuple(
        Peering(f"pg{k}", rng.choice(nodes), f"N{k}", Fraction(rng.choice([10, 20, 40])))
        for k in range(n_peerings)
    )
    return TopologySpec(nodes, tuple(links), peerings)


def random_instance(
    rng: Random,
    n_nodes: int = 6,
    extra_links: int = 2,
    n_peerings: int = 3,
    n_aggregates: int = 2,
    n_invar_cells: int = 2,
    n_hp_cells: int = 3,
    max_set_size: int = 3,
    tree: bool = False,
) -> Instance:
    """Random extended instance with an aggregated matrix built directly
    (no dump/flow files): egress sets are distinct random peering subsets."""
    spec = random_spec(rng, n_nodes, extra_links, n_peerings, tree)
    base = build_topology(spec)
    sets: list[frozenset[tuple[str, str]]] = []
    seen: set[frozenset] = set()
    attempts = 0
    while len(sets) < n_aggregates and attempts < 200:
        attempts += 1
        k = rng.randint(1, min(max_set_size, len(spec.peerings)))
        chosen = rng.sample(list(spec.peerings), k)
        s = frozenset((p.egress, p.id) for p in chosen)
        if s not in seen:
            seen.add(s)
            sets.append(s)
    aggs = [EgressAggregate(f"A{i}", s) for i, s in enumerate(sets)]
    xt = extend_topology(base, spec.peerings, aggs)

    invar: dict[tuple[str, str], Fraction] = {}
    for _ in range(n_invar_cells):
        s, t = rng.sample(list(spec.nodes), 2)
        invar[(s, t)] = invar.get((s, t), Fraction(0)) + Fraction(rng.randint(1, 9))
    hp: dict[tuple[str, str], Fraction] = {}
    self_hp: dict[tuple[str, str], Fraction] = {}
    for _ in range(n_hp_cells):
        if not aggs:
            break
        agg = rng.choice(aggs)
        src = rng.choice(spec.nodes)
        vol = Fraction(rng.randint(1, 9))
        if src in agg.egress_routers:
            invar[(src, src)] = invar.get((src, src), Fraction(0)) + vol
            self_hp[(src, agg.id)] = self_hp.get((src, agg.id), Fraction(0)) + vol
        else:
            hp[(src, agg.id)] = hp.get((src, agg.id), Fraction(0)) + vol
    tm = AggregatedTM(
        invar=dict(sorted(invar.items())),
        hp=dict(sorted(hp.items())),
        self_hp=dict(sorted(self_hp.items())),
        aggregates={a.id: a for a in aggs},
    )
    return Instance(spec, xt, tm, "", "")


# ---------------------------------------------------------------------------
# operational-profile instance


def operational_texts(
    seed: int = 1,
    n_routers: int = 10,
    n_peerings: int = 18,
    n_egress_sets: int = 26,
    n_zero_traffic: int = 8,
    n_hot_prefixes: int = 486,
    n_single_prefixes: int = 14,
) -> tuple[TopologySpec, str, str]:
    """Topology, route-dump and flow texts for the operational profile.

    Hot-potato flows amount to exactly 35.6% of total traffic.  Among the
    egress sets, `n_zero_traffic` attract nothing, five attract 99.93% of the
    hot-potato volume (so a 99.9% coverage cut keeps exactly five), and the
    rest share the remaining 0.07% equally.
    """
    rng = Random(seed)
    n_border = max(4, n_peerings // 3)
    nodes = tuple(f"R{i}" for i in range(n_routers))
    caps = [Fraction(c) for c in (155, 622, 2500, 10000)]
    links: list[LinkSpec] = []
    for i in range(1, n_routers):
        j = rng.randrange(i)
        cap = rng.choice(caps)
        links.append(LinkSpec(f"L{len(links)}", nodes[j], nodes[i], cap, rng.randint(1, 20)))
    extra = 0
    used = {frozenset((ln.a, ln.b)) for ln in links}
    while extra < n_routers // 2:
        a, b = rng.sample(range(n_routers), 2)
        key = frozenset((nodes[a], nodes[b]))
        if key in used:
            continue
        used.add(key)
        cap = rng.choice(caps)
        links.append(LinkSpec(f"L{len(links)}", nodes[a], nodes[b], cap, rng.randint(1, 20)))
        extra += 1
    borders = list(nodes[:n_border])
    peerings = tuple(
        Peering(f"pg{k}", borders[k % n_border], f"N{k}", Fraction(rng.choice([622, 2500])))
        for k in range(n_peerings)
    )

    sets: list[frozenset[tuple[str, str]]] = []
    seen: set[frozenset] = set()
    while len(sets) < n_egress_sets:
        k = rng.randint(2, 5)
        chosen = rng.sample(list(peerings), k)
        s = frozenset((p.egress, p.id) for p in chosen)
        # one peering per egress router, so each router has a single best
        # route to report in the dump
        if s not in seen and len({e for e, _ in s}) == len(s):
            seen.add(s)
            sets.append(s)
    sets.sort(key=lambda s: sorted(s))

    # prefixes: hot ones spread over every set, the rest single-egress
    hot_prefixes = [f"P{i}" for i in range(n_hot_prefixes)]
    set_of_prefix: dict[str, frozenset[tuple[str, str]]] = {}
    for i, pfx in enumerate(hot_prefixes):
        set_of_prefix[pfx] = sets[i % n_egress_sets]
    single_prefixes = [f"S{i}" for i in range(n_single_prefixes)]

    route_lines = []
    for pfx in hot_prefixes:
        for egress, pid in sorted(set_of_prefix[pfx]):
            route_lines.append(f"route {egress} {pfx} {egress} {pid}")
    for pfx in single_prefixes:
        p = peerings[rng.randrange(len(peerings))]
        for router in nodes:
            route_lines.append(f"route {router} {pfx} {p.egress} {p.id}")

    # volumes: hot total 356, single total 644 -> 35.6% hot-potato share,
    # sized so the optimized network stays clear of saturation
    hot_total = Fraction(356)
    excluded = hot_total * Fraction(7, 10000)  # 0.07%
    big_total = hot_total - excluded
    big_shares = [Fraction(2, 5), Fraction(3, 10), Fraction(3, 20), Fraction(1, 10), Fraction(1, 20)]
    volumes: dict[int, Fraction] = {i: Fraction(0) for i in range(n_egress_sets)}
    big_ids = list(range(5))
    small_ids = list(range(5, n_egress_sets - n_zero_traffic))
    for i, share in zip(big_ids, big_shares):
        volumes[i] = big_total * share
    for i in small_ids:
        volumes[i] = excluded / len(small_ids)

    flow_lines = []
    prefixes_of_set: dict[int, list[str]] = {i: [] for i in range(n_egress_sets)}
    for pfx, s in set_of_prefix.items():
        prefixes_of_set[sets.index(s)].append(pfx)
    for i in range(n_egress_sets):
        vol = volumes[i]
        if vol == 0:
            continue
        members = prefixes_of_set[i]
        egress_routers = {e for e, _ in sets[i]}
        candidates = [n for n in nodes if n not in egress_routers]
        share = vol / len(members)
        for pfx in members:
            ingress = candidates[rng.randrange(len(candidates))]
            flow_lines.append(f"flow {ingress} {pfx} {share}")
    single_share = Fraction(644) / n_single_prefixes
    for pfx in single_prefixes:
        ingress = nodes[rng.randrange(len(nodes))]
        flow_lines.append(f"flow {ingress} {pfx} {single_share}")

    spec = TopologySpec(nodes, tuple(links), peerings)
    return spec, "\n".join(route_lines) + "\n", "\n".join(flow_lines) + "\n"


def scaled_flows(flows_text: str, rng: Random, lo=Fraction(1, 2), hi=Fraction(3, 2)) -> str:
    """Per-flow volume jitter used to derive a batch of traffic matrices from
    one base flow file; factors are exact thousandths for reproducibility."""
    from .tm import parse_flows

    out = []
    for fl in parse_flows(flows_text):
        f = Fraction(rng.randint(int(lo * 1000), int(hi * 1000)), 1000)
        out.append(f"flow {fl.ingress} {fl.prefix} {fl.volume * f}")
    return "\n".join(out) + "\n"

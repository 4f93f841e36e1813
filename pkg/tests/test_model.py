from fractions import Fraction
from random import Random

import pytest

from hotlwo.errors import ValidationError
from hotlwo.model import (
    INTER,
    INTRA,
    VIRTUAL,
    EgressAggregate,
    LinkSpec,
    Peering,
    TopologySpec,
    build_topology,
    extend_topology,
    format_topology,
    parse_topology,
    scale_instance,
    simplify_model,
)
from hotlwo.routing import compute_loads, route_demand
from hotlwo.synth import random_instance, toy_spec
from hotlwo.tm import AggregatedTM

from oracles import expand_symmetric, intra_links, weight_vectors


def test_toy_build_shape():
    t = build_topology(toy_spec())
    assert len(t.nodes) == 3
    assert len(t.arcs) == 6
    caps = {a.link: a.capacity for a in t.arcs.values()}
    assert caps == {"L12": 10, "L13": 8, "L23": 8}


def test_bidirectional_pairing_shares_capacity_and_weight():
    t = build_topology(toy_spec())
    fwd, rev = t.arcs["L12:R1>R2"], t.arcs["L12:R2>R1"]
    assert (fwd.capacity, fwd.weight) == (rev.capacity, rev.weight)
    assert (fwd.src, fwd.dst) == (rev.dst, rev.src)


def test_single_node_no_links():
    t = build_topology(TopologySpec(("R0",), (), ()))
    assert len(t.nodes) == 1 and len(t.arcs) == 0


def test_duplicate_link_id_rejected():
    spec = TopologySpec(
        ("A", "B"),
        (LinkSpec("L", "A", "B", Fraction(1), 1), LinkSpec("L", "B", "A", Fraction(1), 1)),
        (),
    )
    with pytest.raises(ValidationError, match="duplicate link"):
        build_topology(spec)


@pytest.mark.parametrize(
    "link,msg",
    [
        (LinkSpec("L", "A", "C", Fraction(1), 1), "unknown endpoint"),
        (LinkSpec("L", "A", "B", Fraction(0), 1), "capacity"),
        (LinkSpec("L", "A", "B", Fraction(1), 0), "weight"),
        (LinkSpec("L", "A", "A", Fraction(1), 1), "self-loop"),
    ],
)
def test_bad_link_rejected(link, msg):
    with pytest.raises(ValidationError, match=msg):
        build_topology(TopologySpec(("A", "B"), (link,), ()))


def test_disconnected_rejected():
    spec = TopologySpec(("A", "B", "C"), (LinkSpec("L", "A", "B", Fraction(1), 1),), ())
    with pytest.raises(ValidationError, match="not connected"):
        build_topology(spec)


def two_egress_extension():
    base = build_topology(
        TopologySpec(
            ("R0", "R1", "R2"),
            (
                LinkSpec("La", "R0", "R1", Fraction(10), 1),
                LinkSpec("Lb", "R0", "R2", Fraction(10), 1),
            ),
            (),
        )
    )
    peerings = [Peering("p1", "R1", "N1", Fraction(10)), Peering("p2", "R2", "N2", Fraction(10))]
    agg = EgressAggregate("P1", frozenset({("R1", "p1"), ("R2", "p2")}))
    return base, peerings, agg


def test_extend_adds_neighbor_and_virtual_elements():
    base, peerings, agg = two_egress_extension()
    xt = extend_topology(base, peerings, [agg])
    assert {n for n, node in xt.nodes.items() if node.kind == "neighbor"} == {"N1", "N2"}
    assert {n for n, node in xt.nodes.items() if node.kind == "virtual"} == {"P1"}
    inter = {(a.src, a.dst) for a in xt.arcs.values() if a.kind == INTER}
    virt = {(a.src, a.dst) for a in xt.arcs.values() if a.kind == VIRTUAL}
    assert inter == {("R1", "N1"), ("R2", "N2")}
    assert virt == {("N1", "P1"), ("N2", "P1")}
    assert all(a.weight == 0 for a in xt.arcs.values() if a.kind != INTRA)


def test_extend_zero_aggregates_keeps_base_plus_peerings():
    base, peerings, _ = two_egress_extension()
    xt = extend_topology(base, peerings, [])
    assert set(xt.arcs) == set(base.arcs) | {"p1", "p2"}
    assert not [n for n in xt.nodes.values() if n.kind == "virtual"]


def test_extend_undeclared_peering_rejected():
    base, peerings, _ = two_egress_extension()
    bad = EgressAggregate("P1", frozenset({("R1", "p9")}))
    with pytest.raises(ValidationError, match="undeclared peering"):
        extend_topology(base, peerings, [bad])


def test_single_egress_aggregate_pins_traffic():
    base, peerings, _ = two_egress_extension()
    agg = EgressAggregate("P1", frozenset({("R2", "p2")}))
    xt = extend_topology(base, peerings, [agg])
    loads = route_demand(xt, {aid: 1 for aid in xt.optimizable}, "R0", "P1", Fraction(6))
    assert loads["p2"] == 6  # all volume exits the pinned peering
    assert "p1" not in loads
    assert loads["Lb:R0>R2"] == 6


def test_arc_kind_partition_on_random_instances():
    for seed in range(30):
        inst = random_instance(Random(seed))
        for a in inst.xt.arcs.values():
            kinds = (inst.xt.nodes[a.src].kind, inst.xt.nodes[a.dst].kind)
            expected = {
                ("intra", "intra"): INTRA,
                ("intra", "neighbor"): INTER,
                ("neighbor", "virtual"): VIRTUAL,
            }[kinds]
            assert a.kind == expected


def test_no_transit_back_into_intra():
    for seed in range(30):
        inst = random_instance(Random(seed))
        for a in inst.xt.arcs.values():
            if inst.xt.nodes[a.src].kind == "virtual":
                pytest.fail("arc leaves a virtual node")
            if inst.xt.nodes[a.src].kind == "neighbor":
                assert inst.xt.nodes[a.dst].kind == "virtual"


def exhaustive_small_instance():
    """3 links, one two-egress aggregate: small enough for exhaustive weights."""
    spec = TopologySpec(
        ("R1", "R2", "R3"),
        (
            LinkSpec("L12", "R1", "R2", Fraction(10), 1),
            LinkSpec("L13", "R1", "R3", Fraction(8), 1),
            LinkSpec("L23", "R2", "R3", Fraction(8), 1),
        ),
        (Peering("p1", "R2", "N1", Fraction(10)), Peering("p2", "R3", "N2", Fraction(10))),
    )
    base = build_topology(spec)
    agg = EgressAggregate("P1", frozenset({("R2", "p1"), ("R3", "p2")}))
    xt = extend_topology(base, spec.peerings, [agg])
    tm = AggregatedTM(
        invar={("R2", "R3"): Fraction(2)},
        hp={("R1", "P1"): Fraction(5)},
        aggregates={"P1": agg},
    )
    return xt, tm


def test_simplify_preserves_intra_loads_exhaustively():
    xt, tm = exhaustive_small_instance()
    simplified = simplify_model(xt)
    assert not simplified.peerings
    assert {n for n, v in simplified.nodes.items() if v.kind == "neighbor"} == set()
    for wl in weight_vectors(intra_links(xt), (1, 2, 3)):
        w = expand_symmetric(xt, wl)
        full = compute_loads(xt, w, tm)
        slim = compute_loads(simplified, w, tm)
        for aid, arc in xt.base.arcs.items():
            assert full.get(aid, Fraction(0)) == slim.get(aid, Fraction(0))


def test_simplify_preserves_intra_loads_random_vectors():
    rng = Random(7)
    inst = random_instance(rng, n_nodes=6, extra_links=3, n_peerings=3, n_aggregates=2)
    simplified = simplify_model(inst.xt)
    links = intra_links(inst.xt)
    for _ in range(100):
        wl = {link: rng.randint(1, 9) for link in links}
        w = expand_symmetric(inst.xt, wl)
        full = compute_loads(inst.xt, w, inst.tm)
        slim = compute_loads(simplified, w, inst.tm)
        for aid in inst.xt.base.arcs:
            assert full.get(aid, Fraction(0)) == slim.get(aid, Fraction(0))


def test_simplify_without_virtual_nodes_is_base():
    base, peerings, _ = two_egress_extension()
    xt = extend_topology(base, peerings, [])
    simplified = simplify_model(xt)
    assert set(simplified.arcs) == set(base.arcs)
    assert set(simplified.nodes) == set(base.nodes)


def test_scale_capacity_map_and_factor():
    spec = toy_spec()
    scaled = scale_instance(spec, {Fraction(8): Fraction(622)})
    caps = {ln.id: ln.capacity for ln in scaled.links}
    assert caps == {"L12": 10, "L13": 622, "L23": 622}
    tm = AggregatedTM(invar={("R1", "R2"): Fraction(5)}, hp={})
    doubled = tm.scaled(Fraction(2))
    assert doubled.invar[("R1", "R2")] == 10


def test_scale_identity_is_noop():
    spec = toy_spec()
    assert scale_instance(spec, {}) == spec
    tm = AggregatedTM(invar={("R1", "R2"): Fraction(5)}, hp={})
    assert tm.scaled(Fraction(1)).invar == tm.invar


def test_scale_rejects_nonpositive_factor():
    tm = AggregatedTM(invar={}, hp={})
    with pytest.raises(ValidationError):
        tm.scaled(Fraction(0))


def test_demand_factor_scales_utilization_linearly():
    # u' = 2*l/c on an unmapped arc when demands double
    from hotlwo.routing import u_max
    from hotlwo.model import deployed_weights

    base = build_topology(toy_spec())
    xt = extend_topology(base, (), [])
    tm = AggregatedTM(invar={("R1", "R2"): Fraction(5)}, hp={})
    w = deployed_weights(base)
    u1 = u_max(compute_loads(xt, w, tm), xt)
    u2 = u_max(compute_loads(xt, w, tm.scaled(Fraction(2))), xt)
    assert u2 == 2 * u1


def test_topology_file_round_trip():
    spec = toy_spec()
    text = format_topology(spec, ["instance deadbeef"])
    assert parse_topology(text) == spec


@pytest.mark.parametrize(
    "line,msg",
    [
        ("node R1", "expected: node"),
        ("link L R1 R2 10", "expected: link"),
        ("link L R1 R2 ten 1", "bad capacity"),
        ("peering p R1", "expected: peering"),
        ("frob x y", "unknown directive"),
    ],
)
def test_topology_parse_errors_carry_line_numbers(line, msg):
    from hotlwo.errors import ParseError

    with pytest.raises(ParseError, match="2") as exc:
        parse_topology("# comment\n" + line + "\n", "topo.txt")
    assert msg in str(exc.value)

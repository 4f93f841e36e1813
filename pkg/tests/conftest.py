from fractions import Fraction

import pytest

from hotlwo.model import INTRA, EgressAggregate, LinkSpec, Peering, TopologySpec
from hotlwo.synth import toy_instance
from hotlwo.tm import AggregatedTM


@pytest.fixture(scope="session")
def toy():
    return toy_instance()


def link_weights(net, per_link: dict[str, int]) -> dict[str, int]:
    """Per-arc vector from a per-link weight map."""
    return {
        aid: per_link[a.link] for aid, a in net.arcs.items() if a.kind == INTRA
    }


def small_fold_instances():
    """Instances with at most three bidirectional links (six optimizable
    arcs), where the even-split fold provably reproduces extended-topology
    intra loads for every weight vector."""
    out = []
    # triangle, both egresses distinct
    spec = TopologySpec(
        ("R1", "R2", "R3"),
        (
            LinkSpec("L12", "R1", "R2", Fraction(10), 1),
            LinkSpec("L13", "R1", "R3", Fraction(8), 1),
            LinkSpec("L23", "R2", "R3", Fraction(8), 1),
        ),
        (Peering("p1", "R2", "N1", Fraction(9)), Peering("p2", "R3", "N2", Fraction(9))),
    )
    agg = EgressAggregate("P", frozenset({("R2", "p1"), ("R3", "p2")}))
    tm = AggregatedTM(
        invar={("R2", "R3"): Fraction(1)}, hp={("R1", "P"): Fraction(6)}, aggregates={"P": agg}
    )
    out.append((spec, [agg], tm))
    # star with three leaves, all three egresses
    spec = TopologySpec(
        ("H", "E1", "E2", "E3"),
        (
            LinkSpec("La", "H", "E1", Fraction(10), 1),
            LinkSpec("Lb", "H", "E2", Fraction(10), 1),
            LinkSpec("Lc", "H", "E3", Fraction(10), 1),
        ),
        (
            Peering("p1", "E1", "N1", Fraction(9)),
            Peering("p2", "E2", "N2", Fraction(9)),
            Peering("p3", "E3", "N3", Fraction(9)),
        ),
    )
    agg = EgressAggregate("P", frozenset({("E1", "p1"), ("E2", "p2"), ("E3", "p3")}))
    tm = AggregatedTM(invar={}, hp={("H", "P"): Fraction(9)}, aggregates={"P": agg})
    out.append((spec, [agg], tm))
    # path, egress pair at the ends, source in the middle
    spec = TopologySpec(
        ("E1", "M", "E2", "T"),
        (
            LinkSpec("La", "E1", "M", Fraction(10), 1),
            LinkSpec("Lb", "M", "E2", Fraction(10), 1),
            LinkSpec("Lc", "E2", "T", Fraction(10), 1),
        ),
        (Peering("p1", "E1", "N1", Fraction(9)), Peering("p2", "E2", "N2", Fraction(9))),
    )
    agg = EgressAggregate("P", frozenset({("E1", "p1"), ("E2", "p2")}))
    tm = AggregatedTM(
        invar={("M", "T"): Fraction(2)}, hp={("M", "P"): Fraction(4)}, aggregates={"P": agg}
    )
    out.append((spec, [agg], tm))
    # two parallel links plus a spur, one egress router with two peerings
    spec = TopologySpec(
        ("S", "E", "T"),
        (
            LinkSpec("La", "S", "E", Fraction(10), 1),
            LinkSpec("Lb", "S", "E", Fraction(10), 1),
            LinkSpec("Lc", "E", "T", Fraction(10), 1),
        ),
        (Peering("p1", "E", "N1", Fraction(9)), Peering("p2", "E", "N2", Fraction(9))),
    )
    agg = EgressAggregate("P", frozenset({("E", "p1"), ("E", "p2")}))
    tm = AggregatedTM(
        invar={("T", "E"): Fraction(3)}, hp={("S", "P"): Fraction(8)}, aggregates={"P": agg}
    )
    out.append((spec, [agg], tm))
    return out

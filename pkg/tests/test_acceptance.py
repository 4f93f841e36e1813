"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with -s to see them).  Values asserted exactly unless a
tolerance is stated in the criterion.
"""

import time
from fractions import Fraction
from random import Random

from hotlwo.cli import main as cli_main
from hotlwo.model import (
    INTER,
    INTRA,
    EgressAggregate,
    LinkSpec,
    Peering,
    TopologySpec,
    build_topology,
    extend_topology,
)
from hotlwo.objective import CostParams, phi_total
from hotlwo.routing import compute_loads, mean_utilization, total_load, u_max
from hotlwo.search import INVERSE_CAPACITY, UNIT, SearchConfig, initial_weights, optimize
from hotlwo.simulate import fold_hot_potato, intra_view, simulate_loads
from hotlwo.synth import random_instance, random_spec, toy_instance
from hotlwo.tm import AggregatedTM

from conftest import link_weights, small_fold_instances
from oracles import weight_vectors


def report(criterion: int, text: str) -> None:
    print(f"[acceptance] criterion {criterion}: PASS  {text}")


def test_criterion_1_toy_reproduction():
    t0 = time.perf_counter()
    toy = toy_instance()
    folded = fold_hot_potato(toy.tm, toy.xt, toy.deployed)
    assert dict(folded.invar) == {("R1", "R2"): Fraction(5)}

    w211 = link_weights(toy.xt, {"L12": 2, "L13": 1, "L23": 1})
    iview = intra_view(toy.xt)
    optimistic = u_max(compute_loads(iview, w211, folded), iview, (INTRA,))
    assert optimistic == Fraction(5, 16)  # 2.5/8 exactly

    refolded = fold_hot_potato(toy.tm, toy.xt, w211)
    resulting = u_max(compute_loads(iview, w211, refolded), iview, (INTRA,))
    assert resulting == Fraction(5, 8)  # 5/8 exactly

    best, _ = optimize(toy.xt, toy.tm, SearchConfig(iterations=50, seed=0))
    aware = u_max(compute_loads(toy.xt, best, toy.tm), toy.xt, (INTRA,))
    assert aware == Fraction(5, 16)

    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(1, f"toy exact: optimistic 0.3125, resulting 0.625, bgp-aware 0.3125 "
              f"({elapsed:.2f}s < 1s)")


def test_criterion_2_self_consistency_on_random_instances():
    t0 = time.perf_counter()
    checked = 0
    for seed in range(200):
        rng = Random(seed)
        inst = random_instance(
            rng,
            n_nodes=rng.randint(4, 10),
            extra_links=rng.randint(0, 3),
            n_peerings=rng.randint(2, 4),
            n_aggregates=rng.randint(1, 4),
            n_hp_cells=rng.randint(1, 4),
        )
        cfg = SearchConfig(iterations=3, seed=seed, sample_size=8)
        best, _ = optimize(inst.xt, inst.tm, cfg)
        predicted = compute_loads(inst.xt, best, inst.tm)
        resulting = simulate_loads(inst.xt, best, inst.tm)
        for aid, arc in inst.xt.arcs.items():
            if arc.kind not in (INTRA, INTER):
                continue
            p = predicted.get(aid, Fraction(0))
            r = resulting.get(aid, Fraction(0))
            assert p == r or abs(p - r) <= Fraction(1, 10**9) * max(abs(p), abs(r))
        checked += 1
    elapsed = time.perf_counter() - t0
    assert checked >= 200
    assert elapsed < 60.0
    report(2, f"{checked} instances, predicted == simulated loads exactly "
              f"({elapsed:.1f}s < 60s)")


def test_criterion_3_folding_equivalence_exhaustive():
    instances = 0
    for spec, aggs, tm in small_fold_instances():
        base = build_topology(spec)
        xt = extend_topology(base, spec.peerings, aggs)
        iview = intra_view(xt)
        arcs = sorted(xt.optimizable)
        assert len(arcs) <= 6
        vectors = 0
        for w in weight_vectors(arcs, (1, 2, 3)):
            extended = compute_loads(xt, w, tm)
            refolded = compute_loads(iview, w, fold_hot_potato(tm, xt, w))
            for aid in base.arcs:
                assert extended.get(aid, Fraction(0)) == refolded.get(aid, Fraction(0))
            vectors += 1
        assert vectors == 3 ** len(arcs)
        instances += 1
    report(3, f"{instances} instances x 3^|arcs| weight vectors, intra loads identical")


def _optimality_instance(seed: int):
    rng = Random(seed)
    spec = random_spec(rng, n_nodes=rng.choice([4, 5]), extra_links=rng.choice([0, 1]),
                       n_peerings=0, tree=(seed % 2 == 0))
    # capacities whose reciprocals scale to integers inside {1..3}
    links = tuple(
        LinkSpec(ln.id, ln.a, ln.b, Fraction(rng.choice([2, 3, 6])), 1) for ln in spec.links
    )
    spec = TopologySpec(spec.nodes, links, ())
    base = build_topology(spec)
    xt = extend_topology(base, (), [])
    cells = {}
    for _ in range(3):
        s, t = rng.sample(spec.nodes, 2)
        cells[(s, t)] = cells.get((s, t), Fraction(0)) + Fraction(rng.randint(1, 5))
    return xt, AggregatedTM(invar=cells, hp={})


def test_criterion_4_traffic_independent_optimality_oracles():
    checked = 0
    for seed in range(60):
        if checked >= 20:
            break
        xt, tm = _optimality_instance(seed)
        arcs = sorted(xt.optimizable)
        if len(arcs) > 8:
            continue
        unit = initial_weights(xt, UNIT)
        invcap = initial_weights(xt, INVERSE_CAPACITY, w_max=3)
        assert set(invcap.values()) <= {1, 2, 3}
        best_total = None
        best_mean = None
        for w in weight_vectors(arcs, (1, 2, 3)):
            loads = compute_loads(xt, w, tm)
            tl = total_load(loads, xt, (INTRA,))
            mu = mean_utilization(loads, xt, (INTRA,))
            best_total = tl if best_total is None else min(best_total, tl)
            best_mean = mu if best_mean is None else min(best_mean, mu)
        unit_total = total_load(compute_loads(xt, unit, tm), xt, (INTRA,))
        invcap_mean = mean_utilization(compute_loads(xt, invcap, tm), xt, (INTRA,))
        assert unit_total == best_total
        assert invcap_mean == best_mean
        checked += 1
    assert checked >= 20
    report(4, f"{checked} instances: unit minimizes total load, "
              f"1/capacity minimizes mean utilization (exact)")


def _brute_instance(seed: int):
    rng = Random(seed)
    nodes = ("A", "B", "C")
    links = (
        LinkSpec("L1", "A", "B", Fraction(rng.choice([5, 8, 10])), 1),
        LinkSpec("L2", "B", "C", Fraction(rng.choice([5, 8, 10])), 1),
    )
    peerings = (Peering("p1", "C", "N1", Fraction(10)),)
    spec = TopologySpec(nodes, links, peerings)
    base = build_topology(spec)
    agg = EgressAggregate("P", frozenset({("C", "p1")}))
    xt = extend_topology(base, spec.peerings, [agg])
    tm = AggregatedTM(
        invar={("A", "B"): Fraction(rng.randint(1, 9)), ("C", "A"): Fraction(rng.randint(1, 9))},
        hp={("A", "P"): Fraction(rng.randint(1, 9))},
        aggregates={"P": agg},
    )
    return xt, tm


def test_criterion_5_search_attains_bruteforce_minimum():
    t0 = time.perf_counter()
    params = CostParams()
    hits = runs = 0
    for inst_seed in range(10):
        xt, tm = _brute_instance(inst_seed)
        arcs = sorted(xt.optimizable)
        assert len(arcs) <= 4
        best_phi = None
        for w in weight_vectors(arcs, (1, 2, 3, 4)):
            phi = phi_total(compute_loads(xt, w, tm), xt, params)
            best_phi = phi if best_phi is None else min(best_phi, phi)
        for run_seed in range(10):
            cfg = SearchConfig(iterations=50, seed=run_seed, w_max=4, symmetric=False)
            _, trace = optimize(xt, tm, cfg)
            runs += 1
            hits += trace[-1].best_cost == best_phi
    elapsed = time.perf_counter() - t0
    assert runs == 100
    assert hits >= 95
    assert elapsed < 120.0
    report(5, f"{hits}/100 runs reached the exhaustive minimum ({elapsed:.1f}s < 120s)")


def test_criterion_6_aggregation_and_coverage(tmp_path):
    out = tmp_path / "op"
    assert cli_main(["gen", "--kind", "operational", "--seed", "1", "--out", str(out)]) == 0
    from hotlwo.bgp import classify_prefixes, parse_route_dump
    from hotlwo.tm import aggregate_by_egress_set, attach_volumes, parse_flows, truncate_aggregates

    records = parse_route_dump((out / "routes.txt").read_text())
    cls = classify_prefixes(records)
    flows = parse_flows((out / "flows.txt").read_text())
    aggs = aggregate_by_egress_set(cls)
    assert len(aggs) == 26
    withvol = attach_volumes(aggs, flows)
    assert sum(1 for a in withvol if a.attracted_volume == 0) == 8
    kept, remainder = truncate_aggregates(aggs, flows, Fraction(999, 1000))
    assert len(kept) == 5
    hot_total = sum((a.attracted_volume for a in withvol), Fraction(0))
    excluded = sum((a.attracted_volume for a in remainder), Fraction(0))
    assert excluded <= hot_total / 1000
    report(6, f"26 aggregates, 5 kept at 0.999 coverage, "
              f"excluded {float(excluded / hot_total) * 100:.3f}% <= 0.1%")


def _interdomain_te_instance():
    # two candidate peerings with 2:1 capacities; plentiful intra capacity;
    # the hot-potato demand exactly fills the larger peering
    spec = TopologySpec(
        ("R0", "A1", "B1", "R1", "R2"),
        (
            LinkSpec("Ld", "R0", "R2", Fraction(1000), 1),
            LinkSpec("Lb1", "R0", "B1", Fraction(1000), 1),
            LinkSpec("Lb2", "B1", "R2", Fraction(1000), 1),
            LinkSpec("La1", "R0", "A1", Fraction(1000), 1),
            LinkSpec("La2", "A1", "R1", Fraction(1000), 1),
        ),
        (Peering("pBig", "R2", "N2", Fraction(20)), Peering("pSmall", "R1", "N1", Fraction(10))),
    )
    base = build_topology(spec)
    agg = EgressAggregate("P", frozenset({("R2", "pBig"), ("R1", "pSmall")}))
    xt = extend_topology(base, spec.peerings, [agg])
    tm = AggregatedTM(invar={}, hp={("R0", "P"): Fraction(20)}, aggregates={"P": agg})
    return xt, tm


def test_criterion_7_interdomain_te_property():
    xt, tm = _interdomain_te_instance()
    w0, _ = optimize(xt, tm, SearchConfig(iterations=50, seed=0, cost=CostParams(alpha=Fraction(0))))
    loads0 = compute_loads(xt, w0, tm)
    inter0 = u_max(loads0, xt, (INTER,))
    intra0 = u_max(loads0, xt, (INTRA,))
    assert loads0.get("pBig", Fraction(0)) == 20  # saturates the larger peering
    assert inter0 == 1

    w1, _ = optimize(xt, tm, SearchConfig(iterations=50, seed=0, cost=CostParams(alpha=Fraction(1))))
    loads1 = compute_loads(xt, w1, tm)
    inter1 = u_max(loads1, xt, (INTER,))
    intra1 = u_max(loads1, xt, (INTRA,))
    assert inter1 < inter0  # strict interdomain improvement
    assert intra1 - intra0 <= Fraction(5, 100)  # at most 5 percentage points
    report(7, f"umax inter {float(inter0):.3f} -> {float(inter1):.3f}, "
              f"intra {float(intra0):.4f} -> {float(intra1):.4f}")


def test_criterion_8_blind_optimizer_can_lose_to_deployed():
    toy = toy_instance()
    iview = intra_view(toy.xt)
    folded = fold_hot_potato(toy.tm, toy.xt, toy.deployed)
    unoptimized = u_max(compute_loads(iview, toy.deployed, folded), iview, (INTRA,))
    assert unoptimized == Fraction(1, 2)  # 5 units on the 10 Mbps link

    w211 = link_weights(toy.xt, {"L12": 2, "L13": 1, "L23": 1})
    refolded = fold_hot_potato(toy.tm, toy.xt, w211)
    resulting = u_max(compute_loads(iview, w211, refolded), iview, (INTRA,))
    assert resulting == Fraction(5, 8)
    assert resulting > unoptimized
    report(8, "resulting 0.625 > unoptimized 0.5 (exact)")


def test_criterion_9_byte_identical_outputs(tmp_path):
    toy = tmp_path / "toy"
    assert cli_main(["gen", "--kind", "toy", "--out", str(toy)]) == 0
    assert cli_main([
        "build-tm", str(toy / "topology.txt"), str(toy / "routes.txt"),
        str(toy / "flows.txt"), "--coverage", "1", "--out", str(toy),
    ]) == 0
    outs = {}
    for name, extra in (
        ("seq", []),
        ("rerun", []),
        ("par", ["--workers", "3"]),
    ):
        out = tmp_path / name
        assert cli_main([
            "optimize", str(toy / "topology.txt"), str(toy / "tm.txt"),
            "--seed", "7", "--iterations", "30", "--out", str(out), *extra,
        ]) == 0
        assert cli_main([
            "compare", str(toy / "topology.txt"), str(toy / "tm.txt"),
            "--seed", "7", "--iterations", "20", "--out", str(out), *extra,
        ]) == 0
        outs[name] = out
    for name in ("rerun", "par"):
        for fname in ("weights.txt", "trace.csv", "report.csv", "cdf_bgp_aware.csv"):
            assert (outs["seq"] / fname).read_bytes() == (outs[name] / fname).read_bytes(), (
                f"{fname} differs between seq and {name}"
            )
    report(9, "weights, trace and report files byte-identical across reruns and workers")

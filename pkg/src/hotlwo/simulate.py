"""Independent hot-potato routing simulation and the optimizer comparison
harness.

Two distinct models of "what the network does" live here:

* `simulate_loads` emulates the routers themselves, with no virtual-node
  machinery: every router independently ranks the candidate egresses of an
  aggregate by its own IGP distance, border routers always exit locally, and
  forwarding follows the per-router decisions hop by hop with even ECMP
  splits.  This is the ground truth the extended-topology optimizer is
  checked against.

* `fold_hot_potato` builds the classical measured-style intradomain matrix:
  each ingress's hot-potato volume is attributed, in even shares, to the
  egresses nearest to that ingress.  This is what a BGP-blind optimizer
  consumes.  Re-routing that folded matrix reproduces the true loads only
  while equal-cost structures stay simple (one divergence point); the
  difference between the two models on richer graphs is exactly the
  information a BGP-blind optimizer lacks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import UnreachableError
from .model import INTER, INTRA, EgressAggregate, ExtendedTopology
from .objective import phi_total
from .routing import (
    LoadMap,
    WeightVector,
    add_loads,
    compute_loads,
    shortest_distances,
    u_max,
)
from .search import SearchConfig, optimize
from .tm import AggregatedTM

MULTIPATH = "multipath"
LOWEST_ID = "lowest-id"

OPTIMISTIC = "optimistic"
RESULTING = "resulting"
BGP_AWARE = "bgp-aware"
DEPLOYED = "deployed"


def select_egresses(
    xt: ExtendedTopology,
    w: WeightVector,
    agg: EgressAggregate,
    ingress: str,
    tie_break: str = MULTIPATH,
) -> frozenset[tuple[str, str]]:
    """The (egress, peering) pairs `ingress` selects for `agg`: all pairs
    whose egress router minimizes IGP distance (multipath), or the single
    lowest-id pair (lowest-id tie-break)."""
    best_d: int | None = None
    by_router: dict[str, int] = {}
    for egress in sorted(agg.egress_routers):
        d = _egress_distance(xt, w, egress).get(ingress)
        if d is None:
            continue
        by_router[egress] = d
        if best_d is None or d < best_d:
            best_d = d
    if best_d is None:
        raise UnreachableError(ingress, agg.id)
    pairs = frozenset(
        (e, p) for e, p in agg.egress_set if by_router.get(e) == best_d
    )
    if tie_break == LOWEST_ID:
        return frozenset({min(pairs)})
    return pairs


def _egress_distance(xt: ExtendedTopology, w: WeightVector, egress: str) -> dict[str, int]:
    # plain per-destination SPF on the intra graph; cheap enough to recompute
    return shortest_distances(xt.base, w, egress)


def fold_hot_potato(
    tm: AggregatedTM, xt: ExtendedTopology, w: WeightVector, tie_break: str = MULTIPATH
) -> AggregatedTM:
    """Convert hot-potato cells into intra-router cells under weights `w`:
    cell (s, aggregate, v) becomes (s, e, v/k) for each of the k selected
    egress routers (a router holding two selected peerings gets two shares).
    Invariant cells pass through; the diagonal decomposition is retained so
    interdomain placement stays available to extended-topology evaluation."""
    folded: dict[tuple[str, str], Fraction] = dict(tm.invar)

    def bump(key, vol):
        folded[key] = folded.get(key, Fraction(0)) + vol

    cache: dict[str, frozenset[tuple[str, str]]] = {}
    for (src, agg_id), vol in sorted(tm.hp.items()):
        if not vol:
            continue
        agg = tm.aggregates.get(agg_id) or xt.aggregates[agg_id]
        key = f"{src}|{agg_id}"
        if key not in cache:
            cache[key] = select_egresses(xt, w, agg, src, tie_break)
        pairs = cache[key]
        share = vol / len(pairs)
        for egress, _peering in sorted(pairs):
            bump((src, egress), share)
    return AggregatedTM(
        invar=dict(sorted(folded.items())),
        hp={},
        self_hp=dict(tm.self_hp),
        aggregates=dict(tm.aggregates),
    )


def simulate_loads(
    xt: ExtendedTopology, w: WeightVector, tm: AggregatedTM, tie_break: str = MULTIPATH
) -> LoadMap:
    """Ground-truth loads under `w`, emulating per-router BGP decisions.

    For each aggregate: a candidate egress router exits all arriving traffic
    on its own peerings in the egress set (even split under multipath, the
    lowest peering id otherwise); every other router forwards across the
    intra arcs that lie on shortest paths toward its preferred egress(es),
    splitting evenly.  Propagation runs in decreasing order of each router's
    egress distance, which strictly shrinks along every forwarding arc.
    Invariant traffic is routed by plain IGP shortest paths.
    """
    loads: LoadMap = {}
    invar_only = AggregatedTM(invar=tm.invar, hp={}, self_hp={}, aggregates={})
    add_loads(loads, compute_loads(xt.base, w, invar_only))

    for agg_id in sorted({a for (_, a) in tm.hp} | {a for (_, a) in tm.self_hp}):
        agg = tm.aggregates.get(agg_id) or xt.aggregates.get(agg_id)
        if agg is None:
            raise UnreachableError("?", agg_id)
        injections: dict[str, Fraction] = {}
        for (src, a), vol in tm.hp.items():
            if a == agg_id and vol:
                injections[src] = injections.get(src, Fraction(0)) + vol
        for (src, a), vol in tm.self_hp.items():
            if a == agg_id and vol and agg_id in xt.nodes:
                injections[src] = injections.get(src, Fraction(0)) + vol
        if injections:
            add_loads(loads, _simulate_aggregate(xt, w, agg, injections, tie_break))
    return loads


def _simulate_aggregate(
    xt: ExtendedTopology,
    w: WeightVector,
    agg: EgressAggregate,
    injections: Mapping[str, Fraction],
    tie_break: str,
) -> LoadMap:
    """Hop-by-hop forwarding of one aggregate's traffic.

    `metric[u]` is u's distance to its nearest candidate egress; it strictly
    shrinks along every forwarding arc (also under the lowest-id rule, where
    the chosen target's distance bounds the metric from above), so one pass
    over nodes in decreasing metric order sees every sender before its
    receivers.
    """
    dist_to: dict[str, dict[str, int]] = {
        e: _egress_distance(xt, w, e) for e in sorted(agg.egress_routers)
    }
    metric: dict[str, int] = {}
    for node in xt.base.nodes:
        ds = [d[node] for d in dist_to.values() if node in d]
        if ds:
            metric[node] = min(ds)

    peerings_of: dict[str, list[str]] = {}
    for egress, pid in agg.sorted_set():
        peerings_of.setdefault(egress, []).append(pid)

    for src, vol in injections.items():
        if vol and src not in metric:
            raise UnreachableError(src, agg.id)

    loads: LoadMap = {}
    pending = {s: Fraction(v) for s, v in injections.items() if v}
    for node in sorted(metric, key=lambda n: (-metric[n], n)):
        vol = pending.pop(node, None)
        if not vol:
            continue
        if node in peerings_of:
            # candidate border router: exits locally over its own peering(s)
            pids = sorted(peerings_of[node])
            if tie_break == LOWEST_ID:
                pids = pids[:1]
            for pid in pids:
                if pid in xt.arcs:
                    loads[pid] = loads.get(pid, Fraction(0)) + vol / len(pids)
            continue
        if tie_break == LOWEST_ID:
            target = min(e for e in dist_to if dist_to[e].get(node) == metric[node])
            ref = dist_to[target]
        else:
            ref = metric
        next_arcs = [
            aid
            for aid in xt.base.out_of(node)
            if ref.get(xt.base.arcs[aid].dst) is not None
            and _w_of(xt, w, aid) + ref[xt.base.arcs[aid].dst] == ref[node]
        ]
        share = vol / len(next_arcs)
        for aid in next_arcs:
            loads[aid] = loads.get(aid, Fraction(0)) + share
            nxt = xt.base.arcs[aid].dst
            pending[nxt] = pending.get(nxt, Fraction(0)) + share
    assert not pending, f"hot-potato flow stranded at {sorted(pending)}"
    return loads


def _w_of(xt: ExtendedTopology, w: WeightVector, aid: str) -> int:
    arc = xt.base.arcs[aid]
    return w.get(aid, arc.weight)


# ---------------------------------------------------------------------------
# optimizer comparison harness


@dataclass(frozen=True)
class ModeResult:
    mode: str
    umax_intra: Fraction
    umax_inter: Fraction | None  # None when the mode does not model inter links
    phi: Fraction
    weights: Mapping[str, int]
    wall_ms: float


def intra_view(xt: ExtendedTopology) -> ExtendedTopology:
    """The same instance with all interdomain machinery stripped: what a
    BGP-blind optimizer sees."""
    from .model import extend_topology

    return extend_topology(xt.base, [], [])


def evaluate_modes(
    xt: ExtendedTopology,
    tm: AggregatedTM,
    w_deployed: Mapping[str, int],
    cfg: SearchConfig,
    modes: Sequence[str] = (OPTIMISTIC, RESULTING, BGP_AWARE),
    tie_break: str = MULTIPATH,
) -> list[ModeResult]:
    """Run the requested comparison modes on one traffic matrix.

    deployed   loads the network produces under the deployed weights.
    optimistic a BGP-blind optimizer run on the intradomain matrix folded
               under the deployed weights; reports the loads it *believes*
               its weights give (the folded matrix frozen).
    resulting  the same weights, but hot-potato traffic re-folded under
               them: the loads that would actually be measured.  The
               interdomain side comes from the full simulation.
    bgp-aware  the extended-topology optimizer; predicted loads equal the
               simulated ground truth, which is asserted when multipath
               splitting is in effect.
    """
    out: list[ModeResult] = []
    iview = intra_view(xt)
    folded_deployed = fold_hot_potato(tm, xt, w_deployed, tie_break)
    w_blind: dict[str, int] | None = None

    for mode in modes:
        t0 = time.perf_counter()
        if mode == DEPLOYED:
            loads = simulate_loads(xt, w_deployed, tm, tie_break)
            out.append(
                ModeResult(
                    mode,
                    u_max(loads, xt, (INTRA,)),
                    u_max(loads, xt, (INTER,)),
                    phi_total(loads, xt, cfg.cost),
                    dict(w_deployed),
                    _ms(t0),
                )
            )
        elif mode == OPTIMISTIC:
            w_blind, _ = optimize(iview, folded_deployed, cfg)
            loads = compute_loads(iview, w_blind, folded_deployed)
            out.append(
                ModeResult(
                    mode,
                    u_max(loads, iview, (INTRA,)),
                    None,
                    phi_total(loads, iview, cfg.cost),
                    w_blind,
                    _ms(t0),
                )
            )
        elif mode == RESULTING:
            if w_blind is None:
                w_blind, _ = optimize(iview, folded_deployed, cfg)
                t0 = time.perf_counter()
            refolded = fold_hot_potato(tm, xt, w_blind, tie_break)
            intra_loads = compute_loads(iview, w_blind, refolded)
            sim = simulate_loads(xt, w_blind, tm, tie_break)
            merged = dict(intra_loads)
            for aid, v in sim.items():
                if xt.arcs[aid].kind == INTER:
                    merged[aid] = v
            out.append(
                ModeResult(
                    mode,
                    u_max(intra_loads, iview, (INTRA,)),
                    u_max(sim, xt, (INTER,)),
                    phi_total(merged, xt, cfg.cost),
                    w_blind,
                    _ms(t0),
                )
            )
        elif mode == BGP_AWARE:
            w_aware, _ = optimize(xt, tm, cfg)
            predicted = compute_loads(xt, w_aware, tm)
            if tie_break == MULTIPATH:
                simulated = simulate_loads(xt, w_aware, tm, tie_break)
                _assert_loads_match(xt, predicted, simulated)
            out.append(
                ModeResult(
                    mode,
                    u_max(predicted, xt, (INTRA,)),
                    u_max(predicted, xt, (INTER,)),
                    phi_total(predicted, xt, cfg.cost),
                    w_aware,
                    _ms(t0),
                )
            )
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def _assert_loads_match(xt: ExtendedTopology, predicted: LoadMap, simulated: LoadMap) -> None:
    for aid, arc in xt.arcs.items():
        if arc.kind not in (INTRA, INTER):
            continue
        if predicted.get(aid, Fraction(0)) != simulated.get(aid, Fraction(0)):
            raise AssertionError(
                f"optimizer load model out of sync with simulation on arc {aid}"
            )


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


def cdf(values: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """Right-continuous step points (value, cumulative fraction) with one
    entry per distinct value; fractions end at 1."""
    if not values:
        raise ValueError("cdf of an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    points: list[tuple[Fraction, Fraction]] = []
    for i, v in enumerate(ordered):
        if i + 1 == n or ordered[i + 1] != v:
            points.append((v, Fraction(i + 1, n)))
    return points


def umax_histogram(values: Sequence[Fraction]) -> list[tuple[Fraction, Fraction | None, int]]:
    """Counts per 10-percentage-point utilization interval; the last bucket
    collects everything at or above 100%."""
    bins: list[tuple[Fraction, Fraction | None, int]] = []
    for i in range(10):
        lo, hi = Fraction(i, 10), Fraction(i + 1, 10)
        bins.append((lo, hi, sum(1 for v in values if lo <= v < hi)))
    bins.append((Fraction(1), None, sum(1 for v in values if v >= 1)))
    return bins


# ---------------------------------------------------------------------------
# CSV emission (plain text; '#' metadata lines precede the header row)


def format_report(
    rows: Iterable[tuple[str, ModeResult]],
    header: Iterable[str] = (),
    timing: bool = False,
) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("tm_id,mode,umax_intra,umax_inter,phi_total,wall_ms")
    for tm_id, r in rows:
        inter = "" if r.umax_inter is None else _csv_num(r.umax_inter)
        ms = f"{r.wall_ms:.0f}" if timing else "0"
        lines.append(
            f"{tm_id},{r.mode},{_csv_num(r.umax_intra)},{inter},{_csv_num(r.phi)},{ms}"
        )
    return "\n".join(lines) + "\n"


def format_cdf(points: Iterable[tuple[Fraction, Fraction]], header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("value,fraction")
    lines += [f"{_csv_num(v)},{_csv_num(f)}" for v, f in points]
    return "\n".join(lines) + "\n"


def format_per_arc(
    loads: LoadMap, net: ExtendedTopology, header: Iterable[str] = ()
) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("arc_id,kind,load,capacity,utilization")
    for aid, arc in sorted(net.arcs.items()):
        load = loads.get(aid, Fraction(0))
        if arc.capacity is None:
            cap, util = "", ""
        else:
            cap, util = _csv_num(arc.capacity), _csv_num(load / arc.capacity)
        lines.append(f"{aid},{arc.kind},{_csv_num(load)},{cap},{util}")
    return "\n".join(lines) + "\n"


def _csv_num(x: Fraction) -> str:
    return str(float(x))

"""Tabu local search over integer link weights on the extended topology.

Candidate weight vectors are evaluated by routing the aggregated traffic
matrix on the extended topology, so the egress choice of hot-potato traffic
reacts to the candidate itself and the predicted loads are the loads the
weights would actually produce.  Interdomain and virtual arc weights are
never search variables; they stay at 0 so border routers always prefer their
own exit.

A neighbor differs in one variable (one arc, or one two-arc link under the
symmetric flag).  Undoing a recent change is tabu for `tenure` iterations
unless it would beat the best cost seen (aspiration).  Per iteration a
bounded sample of neighbors is scored and the best admissible one is taken,
even when worse than the current vector, which lets the search leave local
minima; the best-so-far vector is what gets returned.

Runs are deterministic for a fixed seed; with `workers > 1` neighbor scoring
is fanned out to threads but scores are consumed in sampling order, so the
trajectory is identical to the sequential one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from random import Random
from typing import Iterable, Mapping

from .errors import ConfigError, InfeasibleError, ValidationError
from .model import INTER, INTRA, ExtendedTopology
from .objective import CostParams, phi_total
from .routing import compute_loads, shortest_distances, u_max
from .tm import AggregatedTM

UNIT = "unit"
INVERSE_CAPACITY = "inverse-capacity"
GIVEN = "given"


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 50
    seed: int = 0
    sample_size: int | None = None  # default: min(5 * #optimizable arcs, 1000)
    tenure: int = 8
    symmetric: bool = True
    w_min: int = 1
    w_max: int = 150
    cost: CostParams = field(default_factory=CostParams)
    initial: str = UNIT
    given: Mapping[str, int] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not 1 <= self.w_min <= self.w_max:
            raise ConfigError("need 1 <= w_min <= w_max")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    best_cost: Fraction
    current_cost: Fraction
    umax_intra: Fraction
    umax_inter: Fraction


def initial_weights(
    xt: ExtendedTopology,
    strategy: str = UNIT,
    given: Mapping[str, int] | None = None,
    w_max: int = 150,
) -> dict[str, int]:
    """Starting vector over the optimizable arcs.

    `inverse-capacity` scales 1/capacity to integers preserving order: the
    exact common-denominator scaling when it fits under `w_max`, otherwise a
    rounded scaling pinning the smallest capacity to `w_max`.
    """
    arcs = [xt.arcs[aid] for aid in xt.optimizable]
    if strategy == UNIT:
        return {a.id: 1 for a in arcs}
    if strategy == GIVEN:
        if given is None:
            raise ValidationError("strategy 'given' needs a weight vector")
        out = {}
        for a in arcs:
            if a.id not in given:
                raise ValidationError(f"given weights missing arc {a.id!r}")
            w = given[a.id]
            if not 1 <= w <= w_max:
                raise ValidationError(f"weight {w} for {a.id!r} out of range [1, {w_max}]")
            out[a.id] = w
        return out
    if strategy != INVERSE_CAPACITY:
        raise ValidationError(f"unknown initial-weights strategy {strategy!r}")

    caps = sorted({a.capacity for a in arcs})
    if not caps:
        return {}
    c_max = caps[-1]
    exact = {c: c_max / c for c in caps}
    scale = 1
    for f in exact.values():
        scale = _lcm(scale, f.denominator)
    if max(f * scale for f in exact.values()) <= w_max:
        weight_of = {c: int(f * scale) for c, f in exact.items()}
    else:
        c_min = caps[0]
        weight_of = {
            c: max(1, min(w_max, round(Fraction(w_max) * c_min / c))) for c in caps
        }
    return {a.id: weight_of[a.capacity] for a in arcs}


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def _variables(xt: ExtendedTopology, symmetric: bool) -> list[tuple[str, tuple[str, ...]]]:
    """Search variables: (name, arcs it drives).  Symmetric mode ties the two
    directions of each physical link to one weight."""
    if not symmetric:
        return [(aid, (aid,)) for aid in sorted(xt.optimizable)]
    by_link: dict[str, list[str]] = {}
    for aid in xt.optimizable:
        by_link.setdefault(xt.arcs[aid].link, []).append(aid)
    return [(link, tuple(sorted(aids))) for link, aids in sorted(by_link.items())]


def neighborhood_size(n_vars: int, w_min: int, w_max: int) -> int:
    """Upper bound on distinct single-variable moves."""
    return n_vars * (w_max - w_min)


def check_feasible(xt: ExtendedTopology, tm: AggregatedTM, w: Mapping[str, int]) -> None:
    """Reachability is structural (weights are finite), so checking the
    initial vector settles feasibility for the whole search.

    Diagonal-decomposition cells whose aggregate is not modeled in `xt`
    contribute no load and are exempt; everything else must resolve.
    """
    cells: dict[str, set[str]] = {}
    for (src, dst), vol in tm.invar.items():
        if vol and src != dst:
            cells.setdefault(dst, set()).add(src)
    for (src, agg), vol in tm.hp.items():
        if vol:
            cells.setdefault(agg, set()).add(src)
    for (src, agg), vol in tm.self_hp.items():
        if vol and agg in xt.nodes:
            cells.setdefault(agg, set()).add(src)
    for dst in sorted(cells):
        if dst not in xt.nodes:
            raise InfeasibleError(f"traffic matrix destination {dst!r} not in topology")
        dist = shortest_distances(xt, w, dst)
        for src in sorted(cells[dst]):
            if src not in dist:
                raise InfeasibleError(f"no path from {src!r} to {dst!r}")


def optimize(
    xt: ExtendedTopology, tm: AggregatedTM, cfg: SearchConfig
) -> tuple[dict[str, int], list[TraceRow]]:
    """Minimize phi_total over integer weight vectors; returns the best
    vector found and the per-iteration trace."""
    variables = _variables(xt, cfg.symmetric)
    current = initial_weights(xt, cfg.initial, given=cfg.given, w_max=cfg.w_max)
    if cfg.initial != GIVEN and cfg.w_min > 1:
        current = {k: max(cfg.w_min, v) for k, v in current.items()}
    check_feasible(xt, tm, current)

    def score(w: Mapping[str, int]):
        loads = compute_loads(xt, w, tm)
        return phi_total(loads, xt, cfg.cost), loads

    rng = Random(cfg.seed)
    cost, loads = score(current)
    best = dict(current)
    best_cost = cost
    tabu: dict[tuple[str, int], int] = {}
    trace: list[TraceRow] = [
        TraceRow(0, best_cost, cost, u_max(loads, xt, (INTRA,)), u_max(loads, xt, (INTER,)))
    ]

    sample_size = cfg.sample_size or min(5 * len(xt.optimizable), 1000)
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for it in range(1, cfg.iterations + 1):
            moves = _sample_moves(variables, current, rng, sample_size, cfg)
            candidates = []
            for var, arcs, neww in moves:
                w = dict(current)
                for aid in arcs:
                    w[aid] = neww
                candidates.append((var, arcs, neww, w))
            if pool is None:
                scored = [score(c[3]) for c in candidates]
            else:
                scored = list(pool.map(lambda c: score(c[3]), candidates))

            chosen = None
            chosen_fallback = None
            for (var, arcs, neww, w), (c_cost, c_loads) in zip(candidates, scored):
                entry = (c_cost, var, neww, arcs, w, c_loads)
                if tabu.get((var, neww), 0) >= it and c_cost >= best_cost:
                    if chosen_fallback is None or entry[:3] < chosen_fallback[:3]:
                        chosen_fallback = entry
                    continue
                if chosen is None or entry[:3] < chosen[:3]:
                    chosen = entry
            if chosen is None:
                chosen = chosen_fallback
            if chosen is None:
                trace.append(replace(trace[-1], iteration=it))
                continue

            c_cost, var, neww, arcs, w, c_loads = chosen
            oldw = current[arcs[0]]
            if cfg.tenure > 0:
                tabu[(var, oldw)] = it + cfg.tenure
            current, cost, loads = w, c_cost, c_loads
            if cost < best_cost:
                best, best_cost = dict(current), cost
            trace.append(
                TraceRow(
                    it, best_cost, cost, u_max(loads, xt, (INTRA,)), u_max(loads, xt, (INTER,))
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return best, trace


def _sample_moves(variables, current, rng: Random, sample_size: int, cfg: SearchConfig):
    """A deterministic sample of (variable, arcs, new weight) moves.

    Unit steps for every variable come first: shifting a weight by one is how
    equal-cost ties appear and disappear, which is where most of the
    objective's structure lives.  The remaining budget is drawn uniformly
    from the whole neighborhood (any variable, any admissible weight); the
    full neighborhood is enumerated outright when it fits the budget.
    """
    span = cfg.w_max - cfg.w_min  # non-current choices per variable
    if span == 0:
        return []
    moves: list[tuple[str, tuple[str, ...], int]] = []
    seen: set[tuple[int, int]] = set()

    def add(vi: int, neww: int) -> None:
        var, arcs = variables[vi]
        if neww == current[arcs[0]] or not cfg.w_min <= neww <= cfg.w_max:
            return
        if (vi, neww) in seen:
            return
        seen.add((vi, neww))
        moves.append((var, arcs, neww))

    n_moves = len(variables) * span
    if n_moves <= sample_size:
        for vi in range(len(variables)):
            for neww in range(cfg.w_min, cfg.w_max + 1):
                add(vi, neww)
        return moves

    for vi in range(len(variables)):
        if len(moves) >= sample_size:
            break
        cur = current[variables[vi][1][0]]
        add(vi, cur - 1)
        add(vi, cur + 1)
    attempts = 0
    while len(moves) < sample_size and attempts < 4 * sample_size:
        attempts += 1
        idx = rng.randrange(n_moves)
        vi, offset = divmod(idx, span)
        neww = cfg.w_min + offset
        if neww >= current[variables[vi][1][0]]:
            neww += 1
        add(vi, neww)
    return moves[:sample_size]


# ---------------------------------------------------------------------------
# weights file: metadata comments plus `weight <id> <int>` lines, where <id>
# is a link id (sets both directions) or a single arc id (`link:src>dst`).


def format_weights(
    xt: ExtendedTopology, w: Mapping[str, int], header: Iterable[str] = ()
) -> str:
    lines = [f"# {h}" for h in header]
    by_link: dict[str, list[str]] = {}
    for aid in sorted(xt.optimizable):
        by_link.setdefault(xt.arcs[aid].link, []).append(aid)
    for link, aids in sorted(by_link.items()):
        ws = {w[a] for a in aids}
        if len(ws) == 1:
            lines.append(f"weight {link} {ws.pop()}")
        else:
            lines.extend(f"weight {aid} {w[aid]}" for aid in aids)
    return "\n".join(lines) + "\n"


def parse_weights(text: str, xt: ExtendedTopology, source: str = "<weights>") -> dict[str, int]:
    from .errors import ParseError

    by_link: dict[str, list[str]] = {}
    for aid in xt.optimizable:
        by_link.setdefault(xt.arcs[aid].link, []).append(aid)
    out: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] != "weight" or len(fields) != 3:
            raise ParseError(source, line_no, "expected: weight <id> <int>")
        try:
            wv = int(fields[2])
        except ValueError:
            raise ParseError(source, line_no, f"bad weight {fields[2]!r}") from None
        ident = fields[1]
        if ident in xt.arcs and xt.arcs[ident].kind == INTRA:
            out[ident] = wv
        elif ident in by_link:
            for aid in by_link[ident]:
                out[aid] = wv
        else:
            raise ParseError(source, line_no, f"unknown link or arc {ident!r}")
    missing = sorted(set(xt.optimizable) - set(out))
    if missing:
        raise ValidationError(f"weights file incomplete; missing {missing[:3]}...")
    return out

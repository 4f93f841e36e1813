"""Command-line surface: classify, build-tm, optimize, evaluate, compare,
scale, gen.

Every output file carries a comment header echoing the instance hash, seed
and parameters, and identical inputs reproduce identical bytes.  Wall-clock
timings go to the console; they are written into report files only with
--timing (which sacrifices byte-reproducibility of those files).

Exit codes: 0 success, 1 infeasible instance or evaluation failure, 2 usage
or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import bgp, model, search, synth, tm as tmmod
from .errors import (
    ConfigError,
    HotlwoError,
    InfeasibleError,
    ParseError,
    UnreachableError,
    ValidationError,
)
from .model import build_topology, deployed_weights, extend_topology, simplify_model
from .objective import CostParams, parse_breakpoints
from .routing import compute_loads
from .search import SearchConfig, optimize
from .simulate import (
    BGP_AWARE,
    DEPLOYED,
    MULTIPATH,
    OPTIMISTIC,
    RESULTING,
    cdf,
    evaluate_modes,
    format_cdf,
    format_per_arc,
    format_report,
    umax_histogram,
)


def instance_hash(*texts: str) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode())
        h.update(b"\x00")
    return h.hexdigest()[:16]


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such file: {path}")
    return p.read_text()


def _write(outdir: str, name: str, text: str) -> Path:
    d = Path(outdir)
    d.mkdir(parents=True, exist_ok=True)
    p = d / name
    p.write_text(text)
    return p


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", default="0", help="interdomain objective weight (fraction ok)")
    p.add_argument("--coverage", default="0.999", help="aggregate traffic coverage in (0,1]")
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--wmax", type=int, default=150)
    p.add_argument("--symmetric", action=argparse.BooleanOptionalAction, default=True,
                   help="tie the two directions of each link to one weight")
    p.add_argument("--simplify", action="store_true",
                   help="strip interdomain machinery (only valid with alpha 0)")
    p.add_argument("--tie-break", choices=[MULTIPATH, "lowest-id"], default=MULTIPATH)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--breakpoints", default=None, help="objective breakpoints t:slope,...")
    p.add_argument("--config", default=None, help="JSON file with defaults for these flags")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tenure", type=int, default=8)
    p.add_argument("--sample", type=int, default=None, help="neighbors scored per iteration")
    p.add_argument("--timing", action="store_true", help="write real wall_ms into reports")


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill flags from a JSON config file; explicit command-line flags win."""
    if not args.config:
        return
    data = json.loads(_read(args.config))
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if f"--{key}" not in argv and f"--{attr}" not in argv:
            setattr(args, attr, value)


def _cost_params(args) -> CostParams:
    bps = parse_breakpoints(args.breakpoints) if args.breakpoints else None
    kwargs = {"alpha": Fraction(str(args.alpha))}
    if bps:
        kwargs["breakpoints"] = bps
    return CostParams(**kwargs)


def _search_config(args, cost: CostParams, given=None, initial=None) -> SearchConfig:
    return SearchConfig(
        iterations=args.iterations,
        seed=args.seed,
        sample_size=args.sample,
        tenure=args.tenure,
        symmetric=args.symmetric,
        w_max=args.wmax,
        cost=cost,
        initial=initial or (search.GIVEN if given else search.UNIT),
        given=given,
        workers=args.workers,
    )


def _load_extended(topo_text: str, tm_text: str | None, simplify: bool, alpha: Fraction):
    spec = model.parse_topology(topo_text)
    base = build_topology(spec)
    aggregates = []
    parsed_tm = None
    if tm_text is not None:
        parsed_tm = tmmod.parse_tm(tm_text)
        aggregates = list(parsed_tm.aggregates.values())
    xt = extend_topology(base, spec.peerings, aggregates)
    if simplify:
        if alpha != 0:
            raise ConfigError("--simplify requires alpha 0 (interdomain links leave the objective)")
        xt = simplify_model(xt)
    if alpha != 0 and not any(a.kind == model.INTER for a in xt.arcs.values()):
        raise ConfigError("alpha > 0 needs interdomain links in the topology")
    return spec, xt, parsed_tm


def _echo(args, mapping: dict) -> list[str]:
    lines = [f"{k} {v}" for k, v in mapping.items()]
    return lines


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    routes_text = _read(args.routes)
    known_routers = known_peerings = None
    if args.topology:
        spec = model.parse_topology(_read(args.topology))
        known_routers = set(spec.nodes)
        known_peerings = {p.id: p.egress for p in spec.peerings}
    records = bgp.parse_route_dump(routes_text, args.routes, known_routers, known_peerings)
    cls = bgp.classify_prefixes(records)
    header = _echo(args, {"instance": instance_hash(routes_text), "seed": args.seed})
    path = _write(args.out, "classification.txt", bgp.format_classification(cls, header))
    total = len(cls.prefixes)
    print(f"prefixes: {total} total, {len(cls.hot_potato)} hot-potato, "
          f"{len(cls.single_egress)} single-egress")
    if args.flows:
        flows = tmmod.parse_flows(_read(args.flows), args.flows)
        total_vol = sum((f.volume for f in flows), Fraction(0))
        hot_vol = sum((f.volume for f in flows if f.prefix in cls.hot_potato), Fraction(0))
        share = hot_vol / total_vol * 100 if total_vol else Fraction(0)
        print(f"hot-potato traffic share: {float(share):.1f}%")
    print(f"wrote {path}")
    return 0


def cmd_build_tm(args) -> int:
    topo_text = _read(args.topology)
    routes_text = _read(args.routes)
    flows_text = _read(args.flows)
    coverage = Fraction(str(args.coverage))
    spec = model.parse_topology(topo_text)
    base = build_topology(spec)
    records = bgp.parse_route_dump(
        routes_text, args.routes, set(base.nodes), {p.id: p.egress for p in spec.peerings}
    )
    cls = bgp.classify_prefixes(records)
    flows = tmmod.parse_flows(flows_text, args.flows)
    if not flows:
        print("warning: empty flow file; traffic matrix will be empty", file=sys.stderr)
    aggs = tmmod.aggregate_by_egress_set(cls)
    kept, remainder = tmmod.truncate_aggregates(aggs, flows, coverage)
    xt = extend_topology(base, spec.peerings, kept)
    w0 = deployed_weights(base)
    if args.weights:
        w0 = search.parse_weights(_read(args.weights), xt, args.weights)
    built = tmmod.build_aggregated_tm(flows, cls, kept, remainder, xt, w0)
    hot_total = sum((a.attracted_volume for a in kept + remainder), Fraction(0))
    kept_vol = sum((a.attracted_volume for a in kept), Fraction(0))
    achieved = kept_vol / hot_total if hot_total else Fraction(1)
    header = _echo(
        args,
        {
            "instance": instance_hash(topo_text, routes_text, flows_text),
            "seed": args.seed,
            "coverage": args.coverage,
        },
    )
    path = _write(args.out, "tm.txt", tmmod.format_tm(built, header))
    print(f"aggregates: {len(aggs)} observed, {len(kept)} kept "
          f"(coverage {float(achieved) * 100:.2f}% of hot-potato traffic)")
    print(f"wrote {path}")
    return 0


def cmd_optimize(args) -> int:
    topo_text = _read(args.topology)
    tm_text = _read(args.tm)
    cost = _cost_params(args)
    spec, xt, parsed_tm = _load_extended(topo_text, tm_text, args.simplify, cost.alpha)
    given = None
    if args.weights:
        given = search.parse_weights(_read(args.weights), xt, args.weights)
    cfg = _search_config(args, cost, given=given, initial=args.init if args.init else None)
    t0 = time.perf_counter()
    best, trace = optimize(xt, parsed_tm, cfg)
    wall = time.perf_counter() - t0
    header = _echo(
        args,
        {
            "instance": instance_hash(topo_text, tm_text),
            "seed": args.seed,
            "iterations": args.iterations,
            "alpha": cost.alpha,
            "objective": cost.describe(),
            "objective_form": "slopes per unit load, thresholds on utilization",
            "wmax": args.wmax,
            "symmetric": args.symmetric,
        },
    )
    wpath = _write(args.out, "weights.txt", search.format_weights(xt, best, header))
    rows = ["iteration,best_cost,current_cost,umax_intra,umax_inter"]
    rows += [
        f"{r.iteration},{float(r.best_cost)},{float(r.current_cost)},"
        f"{float(r.umax_intra)},{float(r.umax_inter)}"
        for r in trace
    ]
    tpath = _write(args.out, "trace.csv", "\n".join([f"# {h}" for h in header] + rows) + "\n")
    final = trace[-1]
    print(f"best cost {float(final.best_cost):.6g}, "
          f"umax intra {float(final.umax_intra):.4f} after {args.iterations} iterations "
          f"({wall:.2f}s)")
    print(f"wrote {wpath}")
    print(f"wrote {tpath}")
    return 0


def _mode_list(args, default: tuple[str, ...]) -> list[str]:
    if not args.modes:
        return list(default)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    valid = {DEPLOYED, OPTIMISTIC, RESULTING, BGP_AWARE}
    for m in modes:
        if m not in valid:
            raise ConfigError(f"unknown mode {m!r}")
    return modes


def _run_modes_over_tms(args, default_modes) -> int:
    topo_text = _read(args.topology)
    cost = _cost_params(args)
    modes = _mode_list(args, default_modes)
    tm_texts = {Path(p).stem: (_read(p), p) for p in args.tms}
    if len(tm_texts) != len(args.tms):
        raise ConfigError("traffic matrix files must have distinct names")

    def run_one(item):
        tm_id, (tm_text, _path) = item
        spec, xt, parsed = _load_extended(topo_text, tm_text, args.simplify, cost.alpha)
        w0 = deployed_weights(xt.base)
        if args.weights:
            w0 = search.parse_weights(_read(args.weights), xt, args.weights)
        cfg = _search_config(args, cost)
        results = evaluate_modes(xt, parsed, w0, cfg, modes, args.tie_break)
        per_arc = None
        if args.per_arc:
            loads = compute_loads(xt, results[-1].weights, parsed)
            head = [
                f"instance {instance_hash(topo_text, tm_text)}",
                f"seed {args.seed}",
                f"tm {tm_id}",
                f"mode {results[-1].mode}",
            ]
            per_arc = format_per_arc(loads, xt, head)
        return tm_id, results, per_arc

    items = sorted(tm_texts.items())
    if args.workers > 1:
        with ThreadPoolExecutor(args.workers) as pool:
            outcomes = list(pool.map(run_one, items))
    else:
        outcomes = [run_one(it) for it in items]

    header = _echo(
        args,
        {
            "instance": instance_hash(topo_text, *[t for t, _ in tm_texts.values()]),
            "seed": args.seed,
            "alpha": cost.alpha,
            "coverage": args.coverage,
            "iterations": args.iterations,
            "objective": cost.describe(),
            "objective_form": "slopes per unit load, thresholds on utilization",
            "modes": ",".join(modes),
            "tie_break": args.tie_break,
        },
    )
    rows = [(tm_id, r) for tm_id, results, _ in outcomes for r in results]
    rpath = _write(args.out, "report.csv", format_report(rows, header, args.timing))
    print(f"wrote {rpath}")
    for mode in modes:
        vals = [r.umax_intra for _, results, _ in outcomes for r in results if r.mode == mode]
        if not vals:
            continue
        cpath = _write(args.out, f"cdf_{mode.replace('-', '_')}.csv",
                       format_cdf(cdf(vals), header + [f"mode {mode}"]))
        print(f"wrote {cpath}")
        print(f"umax intra histogram, {mode}:")
        for lo, hi, count in umax_histogram(vals):
            label = f"[{float(lo) * 100:3.0f},{float(hi) * 100:3.0f})" if hi else ">=100"
            print(f"  {label:>10} {count}")
    for tm_id, _results, per_arc in outcomes:
        if per_arc:
            print(f"wrote {_write(args.out, f'per_arc_{tm_id}.csv', per_arc)}")
    return 0


def cmd_evaluate(args) -> int:
    return _run_modes_over_tms(args, (DEPLOYED,))


def cmd_compare(args) -> int:
    return _run_modes_over_tms(args, (OPTIMISTIC, RESULTING, BGP_AWARE))


def cmd_scale(args) -> int:
    topo_text = _read(args.topology)
    spec = model.parse_topology(topo_text)
    capacity_map = {}
    if args.map:
        for part in args.map.split(","):
            old, _, new = part.partition("=")
            try:
                capacity_map[Fraction(old)] = Fraction(new)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"bad capacity mapping {part!r}") from None
    factor = Fraction(str(args.factor))
    if factor <= 0:
        raise ValidationError("demand factor must be positive")
    scaled_spec = model.scale_instance(spec, capacity_map)
    header = _echo(args, {
        "instance": instance_hash(topo_text),
        "seed": args.seed,
        "map": args.map or "identity",
        "factor": args.factor,
    })
    tpath = _write(args.out, "topology_scaled.txt", model.format_topology(scaled_spec, header))
    print(f"wrote {tpath}")
    if args.tm:
        tm_text = _read(args.tm)
        parsed = tmmod.parse_tm(tm_text, args.tm)
        scaled_tm = parsed.scaled(factor)
        mpath = _write(args.out, "tm_scaled.txt", tmmod.format_tm(scaled_tm, header))
        print(f"wrote {mpath}")
    return 0


def cmd_gen(args) -> int:
    seed = args.seed
    if args.kind == "toy":
        spec = synth.toy_spec()
        inst = synth.toy_instance()
        routes_text, flows_text = inst.routes_text, inst.flows_text
    else:
        spec, routes_text, flows_text = synth.operational_texts(seed)
    header = [f"kind {args.kind}", f"seed {seed}"]
    topo_text = model.format_topology(spec, header)
    tpath = _write(args.out, "topology.txt", topo_text)
    rpath = _write(args.out, "routes.txt", "# " + header[0] + "\n" + routes_text)
    fpath = _write(args.out, "flows.txt", "# " + header[0] + "\n" + flows_text)
    print(f"wrote {tpath}")
    print(f"wrote {rpath}")
    print(f"wrote {fpath}")
    if args.tms:
        from random import Random

        rng = Random(seed)
        coverage = Fraction(str(args.coverage))
        base = build_topology(spec)
        records = bgp.parse_route_dump(
            routes_text, "routes", set(base.nodes), {p.id: p.egress for p in spec.peerings}
        )
        cls = bgp.classify_prefixes(records)
        for i in range(args.tms):
            flows_i = synth.scaled_flows(flows_text, rng)
            flows = tmmod.parse_flows(flows_i)
            aggs = tmmod.aggregate_by_egress_set(cls)
            kept, remainder = tmmod.truncate_aggregates(aggs, flows, coverage)
            xt = extend_topology(base, spec.peerings, kept)
            built = tmmod.build_aggregated_tm(flows, cls, kept, remainder, xt, deployed_weights(base))
            head = header + [f"tm {i}", f"coverage {args.coverage}"]
            _write(args.out, f"tm_{i:04d}.txt", tmmod.format_tm(built, head))
        print(f"wrote {args.tms} traffic matrices under {args.out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotlwo",
        description="BGP-aware IGP link weight optimization with hot-potato routing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify prefixes from a best-route dump")
    p.add_argument("routes")
    p.add_argument("--flows", default=None, help="flow file for the traffic share printout")
    p.add_argument("--topology", default=None, help="validate router/peering ids against this")
    _common_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("build-tm", help="build the aggregated interdomain traffic matrix")
    p.add_argument("topology")
    p.add_argument("routes")
    p.add_argument("flows")
    p.add_argument("--weights", default=None, help="deployed weights (default: topology file)")
    _common_flags(p)
    p.set_defaults(func=cmd_build_tm)

    p = sub.add_parser("optimize", help="optimize link weights for one traffic matrix")
    p.add_argument("topology")
    p.add_argument("tm")
    p.add_argument("--weights", default=None, help="starting weights for --init given")
    p.add_argument("--init", choices=[search.UNIT, search.INVERSE_CAPACITY, search.GIVEN],
                   default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="score weight vectors on traffic matrices")
    p.add_argument("topology")
    p.add_argument("tms", nargs="+")
    p.add_argument("--weights", default=None, help="weights to score (default: topology file)")
    p.add_argument("--modes", default=None, help="comma list of deployed,optimistic,resulting,bgp-aware")
    p.add_argument("--per-arc", action="store_true", help="write per-arc utilization CSVs")
    _common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="optimistic / resulting / bgp-aware comparison")
    p.add_argument("topology")
    p.add_argument("tms", nargs="+")
    p.add_argument("--weights", default=None, help="deployed weights (default: topology file)")
    p.add_argument("--modes", default=None)
    p.add_argument("--per-arc", action="store_true")
    _common_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scale", help="rescale capacities and demands")
    p.add_argument("topology")
    p.add_argument("--tm", default=None)
    p.add_argument("--map", default=None, help="capacity mapping old=new[,old=new...]")
    p.add_argument("--factor", default="1", help="demand multiplier")
    _common_flags(p)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("gen", help="generate synthetic instances")
    p.add_argument("--kind", choices=["toy", "operational"], default="operational")
    p.add_argument("--tms", type=int, default=0, help="also emit this many jittered TM files")
    _common_flags(p)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, list(argv) if argv is not None else sys.argv[1:])
        return args.func(args)
    except (ParseError, ValidationError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnreachableError, InfeasibleError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except HotlwoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

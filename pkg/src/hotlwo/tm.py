"""Aggregation of hot-potato prefixes into egress-set clusters and
construction of the aggregated interdomain traffic matrix.

The matrix has two parts: `invar` holds weight-invariant demand between
intra routers (single-egress traffic, plus hot-potato traffic originated at
one of its own candidate egresses, booked on the diagonal because it exits
locally), and `hp` holds hot-potato demand addressed to aggregate virtual
nodes.  `self_hp` annotates the hot-potato share of the diagonal with its
originating aggregate so that the volume can be placed on the source's own
peering links when interdomain links are engineered; it is a decomposition
of diagonal cells, not extra volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .bgp import PrefixClassification
from .errors import ParseError, UnreachableError, ValidationError
from .model import EgressAggregate, ExtendedTopology
from .routing import WeightVector, shortest_distances


@dataclass(frozen=True)
class FlowRecord:
    ingress: str
    prefix: str
    volume: Fraction


@dataclass(frozen=True)
class AggregatedTM:
    invar: Mapping[tuple[str, str], Fraction]
    hp: Mapping[tuple[str, str], Fraction]
    self_hp: Mapping[tuple[str, str], Fraction] = field(default_factory=dict)
    aggregates: Mapping[str, EgressAggregate] = field(default_factory=dict)

    def total(self) -> Fraction:
        return sum(self.invar.values(), Fraction(0)) + sum(self.hp.values(), Fraction(0))

    def scaled(self, factor: Fraction) -> "AggregatedTM":
        if factor <= 0:
            raise ValidationError("demand factor must be positive")
        f = Fraction(factor)
        return AggregatedTM(
            invar={k: v * f for k, v in self.invar.items()},
            hp={k: v * f for k, v in self.hp.items()},
            self_hp={k: v * f for k, v in self.self_hp.items()},
            aggregates=self.aggregates,
        )


def aggregate_by_egress_set(cls: PrefixClassification) -> list[EgressAggregate]:
    """One aggregate per distinct egress set among the hot-potato prefixes.

    Ids are assigned deterministically (A0, A1, ... over the sorted egress
    sets); attracted volumes start at 0 until flows are attached.
    """
    by_set: dict[frozenset[tuple[str, str]], set[str]] = {}
    for prefix, pairs in cls.hot_potato.items():
        by_set.setdefault(pairs, set()).add(prefix)
    aggs = []
    for i, pairs in enumerate(sorted(by_set, key=lambda s: sorted(s))):
        aggs.append(
            EgressAggregate(
                id=f"A{i}",
                egress_set=pairs,
                member_prefixes=frozenset(by_set[pairs]),
            )
        )
    return aggs


def attach_volumes(
    aggs: Iterable[EgressAggregate], flows: Iterable[FlowRecord]
) -> list[EgressAggregate]:
    """Compute each aggregate's attracted volume: flow toward its member
    prefixes from ingresses outside the egress router set (traffic from a
    candidate egress exits locally and never reaches the virtual node)."""
    by_prefix: dict[str, EgressAggregate] = {}
    for agg in aggs:
        for p in agg.member_prefixes:
            by_prefix[p] = agg
    volume: dict[str, Fraction] = {a.id: Fraction(0) for a in aggs}
    for fl in flows:
        agg = by_prefix.get(fl.prefix)
        if agg is not None and fl.ingress not in agg.egress_routers:
            volume[agg.id] += fl.volume
    return [
        EgressAggregate(a.id, a.egress_set, a.member_prefixes, volume[a.id]) for a in aggs
    ]


def truncate_aggregates(
    aggs: Iterable[EgressAggregate],
    flows: Iterable[FlowRecord],
    coverage: Fraction,
) -> tuple[list[EgressAggregate], list[EgressAggregate]]:
    """Keep the smallest volume-sorted head of aggregates whose cumulative
    attracted volume reaches `coverage` of the hot-potato total; ties broken
    by aggregate id.  Zero-volume aggregates always land in the remainder."""
    if not 0 < coverage <= 1:
        raise ValidationError("coverage must lie in (0, 1]")
    withvol = attach_volumes(list(aggs), flows)
    order = sorted(withvol, key=lambda a: (-a.attracted_volume, a.id))
    total = sum((a.attracted_volume for a in withvol), Fraction(0))
    kept: list[EgressAggregate] = []
    cum = Fraction(0)
    for a in order:
        if cum >= coverage * total:
            break
        kept.append(a)
        cum += a.attracted_volume
    kept_ids = {a.id for a in kept}
    remainder = [a for a in order if a.id not in kept_ids]
    return kept, remainder


def build_aggregated_tm(
    flows: Iterable[FlowRecord],
    cls: PrefixClassification,
    kept: Iterable[EgressAggregate],
    remainder: Iterable[EgressAggregate],
    xt: ExtendedTopology,
    w0: WeightVector,
) -> AggregatedTM:
    """Dispatch every flow into the aggregated matrix.

    single-egress prefix -> invar (ingress, egress).  Hot-potato prefix with
    the ingress among its candidate egress routers -> diagonal invar cell
    (exits locally over eBGP) plus a self_hp annotation when the aggregate is
    kept.  Hot-potato prefix in a kept aggregate -> hp cell.  Remainder
    aggregates are pinned to the ingress's nearest egress under the deployed
    weights `w0` (lowest router id on ties) and folded into invar, so volume
    conservation is exact.
    """
    kept = list(kept)
    remainder = list(remainder)
    agg_of_prefix: dict[str, tuple[EgressAggregate, bool]] = {}
    for agg in kept:
        for p in agg.member_prefixes:
            agg_of_prefix[p] = (agg, True)
    for agg in remainder:
        for p in agg.member_prefixes:
            agg_of_prefix[p] = (agg, False)

    dist_cache: dict[str, dict[str, int]] = {}

    def pin_egress(ingress: str, agg: EgressAggregate) -> str:
        best: tuple[int, str] | None = None
        for egress in sorted(agg.egress_routers):
            if egress not in dist_cache:
                dist_cache[egress] = shortest_distances(xt.base, w0, egress)
            d = dist_cache[egress].get(ingress)
            if d is None:
                continue
            if best is None or (d, egress) < best:
                best = (d, egress)
        if best is None:
            raise UnreachableError(ingress, agg.id)
        return best[1]

    invar: dict[tuple[str, str], Fraction] = {}
    hp: dict[tuple[str, str], Fraction] = {}
    self_hp: dict[tuple[str, str], Fraction] = {}

    def bump(table: dict, key: tuple[str, str], vol: Fraction) -> None:
        table[key] = table.get(key, Fraction(0)) + vol

    total_in = Fraction(0)
    for fl in flows:
        if fl.volume < 0:
            raise ValidationError(f"negative volume for ({fl.ingress}, {fl.prefix})")
        total_in += fl.volume
        if fl.prefix in cls.single_egress:
            egress, _peering = cls.single_egress[fl.prefix]
            bump(invar, (fl.ingress, egress), fl.volume)
            continue
        if fl.prefix not in cls.hot_potato:
            raise ValidationError(f"flow references unclassified prefix {fl.prefix!r}")
        if fl.prefix not in agg_of_prefix:
            raise ValidationError(f"hot-potato prefix {fl.prefix!r} missing from aggregates")
        agg, is_kept = agg_of_prefix[fl.prefix]
        if fl.ingress in agg.egress_routers:
            bump(invar, (fl.ingress, fl.ingress), fl.volume)
            if is_kept:
                bump(self_hp, (fl.ingress, agg.id), fl.volume)
        elif is_kept:
            bump(hp, (fl.ingress, agg.id), fl.volume)
        else:
            bump(invar, (fl.ingress, pin_egress(fl.ingress, agg)), fl.volume)

    tm = AggregatedTM(
        invar=dict(sorted(invar.items())),
        hp=dict(sorted(hp.items())),
        self_hp=dict(sorted(self_hp.items())),
        aggregates={a.id: a for a in sorted(kept, key=lambda a: a.id)},
    )
    assert tm.total() == total_in, "volume conservation violated"
    return tm


# ---------------------------------------------------------------------------
# flow file: `flow <ingress> <prefix> <mbps>` lines.


def parse_flows(text: str, source: str = "<flows>") -> list[FlowRecord]:
    flows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] != "flow" or len(fields) != 4:
            raise ParseError(source, line_no, "expected: flow <ingress> <prefix> <mbps>")
        try:
            volume = Fraction(fields[3])
        except (ValueError, ZeroDivisionError):
            raise ParseError(source, line_no, f"bad volume {fields[3]!r}") from None
        if volume < 0:
            raise ParseError(source, line_no, "negative volume")
        flows.append(FlowRecord(fields[1], fields[2], volume))
    return flows


def format_flows(flows: Iterable[FlowRecord], header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += [f"flow {f.ingress} {f.prefix} {f.volume}" for f in flows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# aggregated TM file: aggregate roster plus invar/self/hp cells.  The file is
# the self-contained optimizer input.
#
#   aggregate <id> <egress>:<peering>[,...]
#   invar <src> <dst> <mbps>
#   self <src> <aggregate_id> <mbps>
#   hp <src> <aggregate_id> <mbps>


def format_tm(tm: AggregatedTM, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for agg in sorted(tm.aggregates.values(), key=lambda a: a.id):
        body = ",".join(f"{e}:{p}" for e, p in agg.sorted_set())
        lines.append(f"aggregate {agg.id} {body}")
    for (s, t), v in sorted(tm.invar.items()):
        lines.append(f"invar {s} {t} {v}")
    for (s, a), v in sorted(tm.self_hp.items()):
        lines.append(f"self {s} {a} {v}")
    for (s, a), v in sorted(tm.hp.items()):
        lines.append(f"hp {s} {a} {v}")
    return "\n".join(lines) + "\n"


def parse_tm(text: str, source: str = "<tm>") -> AggregatedTM:
    aggregates: dict[str, EgressAggregate] = {}
    invar: dict[tuple[str, str], Fraction] = {}
    hp: dict[tuple[str, str], Fraction] = {}
    self_hp: dict[tuple[str, str], Fraction] = {}

    def vol(token: str, line_no: int) -> Fraction:
        try:
            v = Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ParseError(source, line_no, f"bad volume {token!r}") from None
        if v < 0:
            raise ParseError(source, line_no, "negative volume")
        return v

    entries: list[tuple[str, str, str, Fraction]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "aggregate" and len(fields) == 3:
            pairs = set()
            for part in fields[2].split(","):
                e, sep, p = part.partition(":")
                if not sep:
                    raise ParseError(source, line_no, f"bad egress pair {part!r}")
                pairs.add((e, p))
            aggregates[fields[1]] = EgressAggregate(fields[1], frozenset(pairs))
        elif fields[0] in ("invar", "self", "hp") and len(fields) == 4:
            entries.append((fields[0], fields[1], fields[2], vol(fields[3], line_no)))
        else:
            raise ParseError(source, line_no, "expected aggregate/invar/self/hp line")

    for tag, src, dst, v in entries:
        if tag == "invar":
            invar[(src, dst)] = invar.get((src, dst), Fraction(0)) + v
            continue
        if dst not in aggregates:
            raise ParseError(source, 0, f"{tag} cell references unknown aggregate {dst!r}")
        table = self_hp if tag == "self" else hp
        table[(src, dst)] = table.get((src, dst), Fraction(0)) + v
    return AggregatedTM(
        invar=dict(sorted(invar.items())),
        hp=dict(sorted(hp.items())),
        self_hp=dict(sorted(self_hp.items())),
        aggregates=dict(sorted(aggregates.items())),
    )

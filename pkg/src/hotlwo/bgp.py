"""Best-route dump parsing and prefix classification.

A dump holds, for one consistent snapshot, the best route each router uses
toward each prefix.  Attribute comparison (local preference, AS path, origin,
MED) is assumed already applied by the dumping routers, so a prefix seen with
one (egress, peering) everywhere is pinned by those criteria, while a prefix
seen with two or more distinct (egress, peering) pairs is decided by the
eBGP-over-iBGP / hot-potato / tie-break stages: each surviving route shows up
at its own border router, so the distinct pairs in the dump enumerate the
candidate egress set exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class RouteRecord:
    router: str
    prefix: str
    egress: str
    peering: str


@dataclass(frozen=True)
class PrefixClassification:
    """Partition of prefixes: single-egress (fixed exit) vs hot-potato
    (exit chosen by IGP distance; egress set has >= 2 distinct peerings)."""

    single_egress: Mapping[str, tuple[str, str]]
    hot_potato: Mapping[str, frozenset[tuple[str, str]]]

    @property
    def prefixes(self) -> set[str]:
        return set(self.single_egress) | set(self.hot_potato)


def parse_route_dump(
    text: str,
    source: str = "<routes>",
    known_routers: set[str] | None = None,
    known_peerings: Mapping[str, str] | None = None,
) -> list[RouteRecord]:
    """One record per `route <router> <prefix> <egress> <peering>` line.

    Duplicate (router, prefix) pairs are rejected: a snapshot carries one best
    route per router per prefix.  `known_peerings` maps peering id to its
    egress router; when given, records must name declared peerings hanging
    off the claimed egress.
    """
    records: list[RouteRecord] = []
    seen: set[tuple[str, str]] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] != "route" or len(fields) != 5:
            raise ParseError(source, line_no, "expected: route <router> <prefix> <egress> <peering>")
        _, router, prefix, egress, peering = fields
        if known_routers is not None and router not in known_routers:
            raise ParseError(source, line_no, f"unknown router {router!r}")
        if known_routers is not None and egress not in known_routers:
            raise ParseError(source, line_no, f"unknown egress router {egress!r}")
        if known_peerings is not None:
            owner = known_peerings.get(peering)
            if owner is None:
                raise ParseError(source, line_no, f"unknown peering {peering!r}")
            if owner != egress:
                raise ParseError(
                    source, line_no, f"peering {peering!r} hangs off {owner!r}, not {egress!r}"
                )
        if (router, prefix) in seen:
            raise ParseError(source, line_no, f"duplicate best route for ({router}, {prefix})")
        seen.add((router, prefix))
        records.append(RouteRecord(router, prefix, egress, peering))
    return records


def classify_prefixes(records: Iterable[RouteRecord]) -> PrefixClassification:
    """Split prefixes by the number of distinct (egress, peering) pairs seen.

    Order-independent: prefixes keyed on the set of observed pairs only.
    """
    by_prefix: dict[str, set[tuple[str, str]]] = {}
    for r in records:
        by_prefix.setdefault(r.prefix, set()).add((r.egress, r.peering))
    single: dict[str, tuple[str, str]] = {}
    hot: dict[str, frozenset[tuple[str, str]]] = {}
    for prefix in sorted(by_prefix):
        pairs = by_prefix[prefix]
        if not pairs:
            raise ValidationError(f"prefix {prefix!r} has no records")
        if len(pairs) == 1:
            single[prefix] = next(iter(pairs))
        else:
            hot[prefix] = frozenset(pairs)
    return PrefixClassification(single_egress=single, hot_potato=hot)


def classification_to_records(cls: PrefixClassification) -> list[RouteRecord]:
    """Minimal record set that reproduces `cls` (used for the idempotence
    round-trip): each candidate pair observed at its own border router."""
    records = []
    for prefix, (egress, peering) in sorted(cls.single_egress.items()):
        records.append(RouteRecord(egress, prefix, egress, peering))
    for prefix, pairs in sorted(cls.hot_potato.items()):
        for egress, peering in sorted(pairs):
            records.append(RouteRecord(egress, prefix, egress, peering))
    return records


# serialization: `single <prefix> <egress> <peering>` and
# `hot <prefix> <egress>:<peering>[,...]` lines, sorted by prefix.


def format_classification(cls: PrefixClassification, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for prefix, (egress, peering) in sorted(cls.single_egress.items()):
        lines.append(f"single {prefix} {egress} {peering}")
    for prefix, pairs in sorted(cls.hot_potato.items()):
        body = ",".join(f"{e}:{p}" for e, p in sorted(pairs))
        lines.append(f"hot {prefix} {body}")
    return "\n".join(lines) + "\n"


def parse_classification(text: str, source: str = "<classification>") -> PrefixClassification:
    single: dict[str, tuple[str, str]] = {}
    hot: dict[str, frozenset[tuple[str, str]]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "single" and len(fields) == 4:
            single[fields[1]] = (fields[2], fields[3])
        elif fields[0] == "hot" and len(fields) == 3:
            pairs = set()
            for part in fields[2].split(","):
                e, sep, p = part.partition(":")
                if not sep:
                    raise ParseError(source, line_no, f"bad egress pair {part!r}")
                pairs.add((e, p))
            if len(pairs) < 2:
                raise ParseError(source, line_no, "hot-potato egress set needs >= 2 pairs")
            hot[fields[1]] = frozenset(pairs)
        else:
            raise ParseError(source, line_no, "expected a single/hot classification line")
    overlap = set(single) & set(hot)
    if overlap:
        raise ParseError(source, 0, f"prefixes in both classes: {sorted(overlap)}")
    return PrefixClassification(single_egress=single, hot_potato=hot)

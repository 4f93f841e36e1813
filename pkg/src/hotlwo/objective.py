"""Network-wide cost: piecewise-linear convex per-link cost, summed over
intradomain links plus `alpha` times the interdomain links.

The per-link cost integrates a step function of utilization: on the segment
where u lies in [t_i, t_{i+1}) the marginal cost per unit of *load* is
slope_i.  Thresholds are on utilization, cost is denominated in load units,
i.e. phi(load) = capacity * integral_0^{load/capacity} slope(t) dt.  Loads
above capacity are legal and sit on the steepest segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .model import INTER, INTRA
from .routing import LoadMap, Net

# Classic congestion-cost breakpoints: cheap until a third of capacity, then
# increasingly punishing, with overload (u >= 1) effectively forbidden.
DEFAULT_BREAKPOINTS: tuple[tuple[Fraction, Fraction], ...] = (
    (Fraction(0), Fraction(1)),
    (Fraction(1, 3), Fraction(3)),
    (Fraction(2, 3), Fraction(10)),
    (Fraction(9, 10), Fraction(70)),
    (Fraction(1), Fraction(500)),
    (Fraction(11, 10), Fraction(5000)),
)


@dataclass(frozen=True)
class CostParams:
    """Breakpoints (utilization threshold, slope) and the interdomain weight
    alpha.  Slopes and thresholds must be strictly increasing (convexity),
    with the first threshold at 0."""

    breakpoints: tuple[tuple[Fraction, Fraction], ...] = DEFAULT_BREAKPOINTS
    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.breakpoints or self.breakpoints[0][0] != 0:
            raise ValidationError("first breakpoint threshold must be 0")
        ts = [t for t, _ in self.breakpoints]
        ss = [s for _, s in self.breakpoints]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("breakpoint thresholds must be strictly increasing")
        if any(b <= a for a, b in zip(ss, ss[1:])):
            raise ValidationError("breakpoint slopes must be strictly increasing (convexity)")
        if self.alpha < 0:
            raise ValidationError("alpha must be non-negative")

    def describe(self) -> str:
        return ",".join(f"{t}:{s}" for t, s in self.breakpoints)


def parse_breakpoints(text: str) -> tuple[tuple[Fraction, Fraction], ...]:
    """Parse 't:slope,t:slope,...' with fractions or decimals."""
    out = []
    for part in text.split(","):
        t, _, s = part.partition(":")
        try:
            out.append((Fraction(t), Fraction(s)))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"bad breakpoint {part!r}") from None
    return tuple(out)


def phi_link(load: Fraction, capacity: Fraction, params: CostParams) -> Fraction:
    """Cost of one link: continuous, convex, nondecreasing, phi(0) = 0."""
    if capacity <= 0:
        raise ValidationError("phi_link needs a positive capacity")
    u = Fraction(load) / capacity
    cost = Fraction(0)
    bps = params.breakpoints
    for i, (t, slope) in enumerate(bps):
        if u <= t:
            break
        upper = bps[i + 1][0] if i + 1 < len(bps) else None
        top = u if upper is None or u < upper else upper
        cost += slope * (top - t)
    return capacity * cost


def phi_total(loads: LoadMap, net: Net, params: CostParams) -> Fraction:
    """Sum of intra link costs plus alpha times inter link costs; virtual
    arcs never contribute."""
    intra = Fraction(0)
    inter = Fraction(0)
    for aid, arc in net.arcs.items():
        if arc.capacity is None:
            continue
        if arc.kind == INTRA:
            intra += phi_link(loads.get(aid, Fraction(0)), arc.capacity, params)
        elif arc.kind == INTER and params.alpha:
            inter += phi_link(loads.get(aid, Fraction(0)), arc.capacity, params)
    return intra + params.alpha * inter

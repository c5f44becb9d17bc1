"""Die, package and substrate geometry prediction from gate counts.

The area chain works in three steps applied per die:

1. gate area: explicit_area if given, else gate_count * beta * lambda^2
   (for M3D, each of the two sequential tiers takes half the equivalent
   2D area instead);
2. integration overheads: TSV blocks sized from the signal count (F2F)
   or a Rent's-rule estimate of inter-die connections (F2B), plus an IO
   driver strip for micro-bump and 2.5D dies;
3. BEOL layer count from the average-wire-length estimate; when the
   estimate exceeds the node's layer cap the die area is grown until the
   wiring fits in exactly max_beol_layers.

All functions are pure and operate on immutable inputs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NonPositiveArea, RatioMismatch, UnsupportedConfiguration
from .params import (
    DesignSpec,
    DieSpec,
    Facing,
    Integration,
    PackagingProfile,
    TechnologyProfile,
    WiringParameters,
)

# Relative slack for integer ceilings so that a value computed to be an
# exact integer does not round up on the last ulp.
_CEIL_EPS = 1e-12


def _ceil_count(raw: float) -> int:
    return math.ceil(raw * (1.0 - _CEIL_EPS))


@dataclass(frozen=True)
class DieGeometry:
    """Per-die area breakdown; total_area is exactly the component sum."""

    gate_area: float
    tsv_area: float = 0.0
    io_area: float = 0.0
    beol_layers: int = 0        # 0 while unset; filled by stack_geometry
    tsv_count: int = 0

    @property
    def total_area(self) -> float:
        return self.gate_area + self.tsv_area + self.io_area


@dataclass(frozen=True)
class StackGeometry:
    dies: tuple[DieGeometry, ...]
    package_area: float
    substrate_area: float       # 0 unless InFO / silicon interposer
    equivalent_2d_area: float   # sum of gate areas (active logic footprint)


def area_2d(gate_count: float, tech: TechnologyProfile) -> float:
    """2D die area in cm^2: gate_count * beta * lambda^2."""
    return gate_count * tech.gate_area_scaling * tech.feature_size_cm**2


def gates_from_area(area: float, tech: TechnologyProfile) -> float:
    return area / (tech.gate_area_scaling * tech.feature_size_cm**2)


def partition_gate_area(a_2d: float, n: int, ratios: Sequence[float] | None = None) -> list[float]:
    """Split a 2D-equivalent area over n dies; the parts sum to a_2d exactly.

    Defaults to an even split; with ratios the split is proportional.  The
    last share absorbs the floating-point remainder.
    """
    if n < 1:
        raise RatioMismatch(f"need at least 1 die, got {n}")
    if ratios is None:
        weights = [1.0] * n
    else:
        if len(ratios) != n:
            raise RatioMismatch(f"got {len(ratios)} ratios for {n} dies")
        if any(r <= 0 for r in ratios):
            raise RatioMismatch("ratios must be > 0")
        weights = [float(r) for r in ratios]
    total = sum(weights)
    parts = [a_2d * w / total for w in weights[:-1]]
    parts.append(_conserving_remainder(a_2d, parts))
    return parts


def _step(x: float, ulps: int) -> float:
    towards = math.copysign(math.inf, ulps)
    for _ in range(abs(ulps)):
        x = math.nextafter(x, towards)
    return x


def _conserving_remainder(target: float, head: list[float]) -> float:
    """Remainder share such that the float sum of head + [r] is target.

    A plain target - sum(head) can miss by one ulp on round-to-even ties,
    and a one-ulp fix to a single share can vanish in the running-sum
    rounding; scanning a few ulp offsets over remainder and head shares
    lands the sum bit-exactly.  head is adjusted in place.
    """

    def remainder_for(shares: list[float]) -> float | None:
        partial = sum(shares)
        r = target - partial
        for _ in range(4):
            if partial + r == target:
                return r
            r = math.nextafter(r, math.copysign(math.inf, target - (partial + r)))
        return None

    r = remainder_for(head)
    if r is not None:
        return r
    for j in range(len(head)):
        for ulps in (1, -1, 2, -2):
            candidate = head.copy()
            candidate[j] = _step(candidate[j], ulps)
            r = remainder_for(candidate)
            if r is not None:
                head[j] = candidate[j]
                return r
    return target - sum(head)  # representability limit: off by <= 1 ulp


def rent_terminals(gate_count: float, wiring: WiringParameters) -> float:
    """External connections of a block per Rent's rule: a*k*N*(1 - N^(p-1))."""
    return wiring.rent_alpha * wiring.rent_k * gate_count * (1.0 - gate_count ** (wiring.rent_p - 1.0))


def tsv_count_f2b(ng_i: float, ng_j: float, wiring: WiringParameters) -> int:
    """Inter-die connection TSVs between two adjacent F2B dies.

    Rent's-rule estimate: terminals of the merged block minus the
    terminals each die would expose alone.  Degenerate blocks (<= 1 gate,
    where Rent statistics are meaningless) and negative intermediate
    values clamp to zero; the result rounds up.
    """
    if ng_i <= 1 or ng_j <= 1:
        return 0
    raw = (
        rent_terminals(ng_i + ng_j, wiring)
        - rent_terminals(ng_i, wiring)
        - rent_terminals(ng_j, wiring)
    )
    if raw <= 0:
        return 0
    return _ceil_count(raw)


def average_wire_length(rent_p: float, gate_count: float) -> float:
    """Average interconnect length in gate pitches (Rent-based estimate).

    L = 2/9 * (1-4^(p-1))/(1-N^(p-1))
        * ( (7*N^(p-0.5)-1)/(4^(p-0.5)-1) - (1-N^(p-1.5))/(1-4^(p-1.5)) )

    Singular at p = 1 and meaningless below 2 gates; returns 0 for N <= 1.
    """
    p, n = rent_p, gate_count
    if n <= 1.0:
        return 0.0
    scale = (1.0 - 4.0 ** (p - 1.0)) / (1.0 - n ** (p - 1.0))
    term1 = (7.0 * n ** (p - 0.5) - 1.0) / (4.0 ** (p - 0.5) - 1.0)
    term2 = (1.0 - n ** (p - 1.5)) / (1.0 - 4.0 ** (p - 1.5))
    return (2.0 / 9.0) * scale * (term1 - term2)


def _die_gate_count(die: DieSpec, area: float) -> float:
    if die.gate_count is not None:
        return die.gate_count
    return gates_from_area(area, die.technology)


def beol_layers(die: DieSpec, area: float) -> tuple[int, float]:
    """Estimate the BEOL layer count for a die of the given area.

    Returns (layers, area): the wiring demand is fanout * Ng * Labs * omega
    with Labs the average wire length converted to cm via the gate pitch
    sqrt(beta)*lambda; layers = ceil(demand / (eta * area)).  If that
    exceeds the node's max_beol_layers, the area is grown to the smallest
    value that fits the cap and (max_layers, grown_area) is returned.
    An explicit_beol override bypasses the estimate entirely.
    """
    if area <= 0:
        raise NonPositiveArea(f"die area must be > 0, got {area}")
    if die.explicit_beol is not None:
        return die.explicit_beol, area
    tech, wiring = die.technology, die.wiring
    ng = _die_gate_count(die, area)
    gate_pitch = math.sqrt(tech.gate_area_scaling) * tech.feature_size_cm
    l_abs = average_wire_length(wiring.rent_p, ng) * gate_pitch
    demand = wiring.fanout * ng * l_abs * wiring.wire_pitch_cm   # cm^2 of wiring
    raw = demand / (wiring.utilization * area)
    layers = max(1, _ceil_count(raw))
    if layers > tech.max_beol_layers:
        adjusted = demand / (wiring.utilization * tech.max_beol_layers)
        return tech.max_beol_layers, adjusted
    return layers, area


def _base_gate_areas(spec: DesignSpec) -> list[float]:
    areas = []
    for die in spec.dies:
        if die.explicit_area is not None:
            areas.append(die.explicit_area)
        else:
            areas.append(area_2d(die.gate_count, die.technology))
    return areas


def die_areas(spec: DesignSpec) -> list[DieGeometry]:
    """Per-die area breakdown before BEOL estimation (beol_layers unset).

    Overheads by integration:
      micro 3D F2F:  IO strip on both dies; signal TSVs in the bottom die
      micro 3D F2B:  IO strip everywhere; Rent TSVs in dies 1..N-1
      hybrid 3D:     same TSV rules, no IO strip
      M3D:           two tiers of half the equivalent 2D area, no overhead
      2.5D flavors:  IO strip for inter-chiplet links, no TSVs
      mono 2D:       bare gate area
    """
    integ = spec.integration
    bases = _base_gate_areas(spec)
    n = len(spec.dies)

    if integ is Integration.M3D:
        if n != 2:
            raise UnsupportedConfiguration(f"m3d supports exactly 2 tiers, got {n}")
        a_2d = sum(bases)
        return [
            DieGeometry(gate_area=die.explicit_area if die.explicit_area is not None else a_2d / 2.0)
            for die in spec.dies
        ]

    micro = integ is Integration.MICRO_3D
    hybrid = integ is Integration.HYBRID_3D
    geoms: list[DieGeometry] = []
    for i, die in enumerate(spec.dies):
        gate = bases[i]
        tsv_area = 0.0
        tsv_count = 0
        io_area = 0.0
        if micro or integ.is_25d:
            io_area = die.technology.io_overhead_ratio * gate
        if micro or hybrid:
            pitch = die.technology.tsv_pitch_cm
            if spec.facing is Facing.F2F:
                if i == n - 1:  # bottom die carries the package-bound signal TSVs
                    tsv_count = spec.signal_count_f2f
                    tsv_area = tsv_count * pitch**2
            else:  # F2B: dies 1..N-1 carry the inter-die TSVs of interface i
                if i < n - 1:
                    ng_i = _die_gate_count(die, gate)
                    ng_j = _die_gate_count(spec.dies[i + 1], bases[i + 1])
                    tsv_count = tsv_count_f2b(ng_i, ng_j, die.wiring)
                    tsv_area = tsv_count * pitch**2
        geoms.append(DieGeometry(gate_area=gate, tsv_area=tsv_area, io_area=io_area, tsv_count=tsv_count))
    return geoms


def package_area(spec: DesignSpec, die_geoms: Sequence[DieGeometry], packaging: PackagingProfile) -> float:
    """Package area: 3D scales the largest stacked die, 2.5D/2D the total."""
    areas = [g.total_area for g in die_geoms]
    if spec.integration.is_3d:
        return packaging.s_package_3d * max(areas)
    return packaging.s_package_25d * sum(areas)


def substrate_area(spec: DesignSpec, die_geoms: Sequence[DieGeometry], packaging: PackagingProfile) -> float:
    """Unifying-substrate area (RDL or interposer); 0 when not applicable."""
    if spec.integration in (
        Integration.INFO_CHIP_FIRST,
        Integration.INFO_CHIP_LAST,
        Integration.SI_INTERPOSER,
    ):
        return packaging.s_substrate_25d * sum(g.total_area for g in die_geoms)
    return 0.0


def stack_geometry(spec: DesignSpec, packaging: PackagingProfile) -> StackGeometry:
    """Full geometry pipeline: areas, BEOL counts (with area growth), package."""
    geoms = die_areas(spec)
    resolved: list[DieGeometry] = []
    for die, geom in zip(spec.dies, geoms):
        layers, adjusted = beol_layers(die, geom.total_area)
        if adjusted > geom.total_area:
            # grow the gate region so the wiring fits in max_beol_layers
            geom = dataclasses.replace(geom, gate_area=adjusted - geom.tsv_area - geom.io_area)
        resolved.append(dataclasses.replace(geom, beol_layers=layers))
    return StackGeometry(
        dies=tuple(resolved),
        package_area=package_area(spec, resolved, packaging),
        substrate_area=substrate_area(spec, resolved, packaging),
        equivalent_2d_area=sum(g.gate_area for g in resolved),
    )

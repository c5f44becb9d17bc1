"""Design-space exploration: sweeps, 2D switching points, gamma trade-offs.

A sweep is the cartesian product of one or more axes, each axis being a
parameter path plus an ordered value list.  Every row is an independent
full-pipeline evaluation; rows are emitted in fixed axis order so results
are deterministic regardless of how they were computed.

Supported parameter paths (the ``design.`` prefix is optional):

  gamma                          embodied/operational weighting
  technology                     node name, applied to every die (also
                                 resets wiring to the node's fixture defaults)
  dies[*].gate_count             any DieSpec field, broadcast or dies[i]
  dies[*].wiring.rent_p          per-die wiring overrides
  signal_count_f2f
  usage.t_app_hours              any UsageProfile field
  environment.ci_fab             any FabEnvironment field
  bonding.bond_yield             any BondingProfile field
  packaging.cpa_packaging        any PackagingProfile field
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import re
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .carbon import CarbonBreakdown, evaluate
from .errors import CapExceeded, CarbonModelWarning, UnresolvablePath
from .geometry import area_2d
from .params import (
    BondingProfile,
    DesignSpec,
    DieSpec,
    FabEnvironment,
    Facing,
    FixtureRegistry,
    Integration,
    PackagingProfile,
    Scenario,
    Stacking,
    TechnologyProfile,
    UsageProfile,
    WiringParameters,
    validate_design,
)

PRESCAN_POINTS = 17
DEFAULT_ROW_CAP = 1_000_000


@dataclass(frozen=True)
class SweepAxis:
    parameter_path: str
    values: tuple

    def __init__(self, parameter_path: str, values: Sequence):
        object.__setattr__(self, "parameter_path", parameter_path)
        object.__setattr__(self, "values", tuple(values))
        if not self.values:
            raise UnresolvablePath(f"axis {parameter_path!r} has no values")


@dataclass(frozen=True)
class SweepRow:
    values: tuple
    scenario: Scenario
    breakdown: CarbonBreakdown


@dataclass(frozen=True)
class SweepResult:
    axes: tuple[SweepAxis, ...]
    rows: tuple[SweepRow, ...]
    baseline: tuple[CarbonBreakdown, ...] | None = None
    switching_points: tuple[tuple[float, str], ...] = ()


# ---------------------------------------------------------------------------
# Parameter-path application
# ---------------------------------------------------------------------------

_DIE_PATH = re.compile(r"^dies\[(\*|\d+)\]\.(\w+)(?:\.(\w+))?$")

_USAGE_FIELDS = {f.name for f in dataclasses.fields(UsageProfile)}
_ENV_FIELDS = {f.name for f in dataclasses.fields(FabEnvironment)}
_BOND_FIELDS = {f.name for f in dataclasses.fields(BondingProfile)}
_PKG_FIELDS = {f.name for f in dataclasses.fields(PackagingProfile)}
_WIRING_FIELDS = {f.name for f in dataclasses.fields(WiringParameters)}
_DIE_FIELDS = {"gate_count", "explicit_area", "explicit_beol"}


def _num_value(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnresolvablePath(f"{path}: expected a numeric value, got {value!r}")
    return float(value)


def _set_die(die: DieSpec, field_name: str, sub: str | None, value, registry: FixtureRegistry) -> DieSpec:
    if field_name == "technology":
        node = str(value)
        return dataclasses.replace(
            die, technology=registry.technology(node), wiring=registry.default_wiring(node)
        )
    if field_name == "wiring":
        if sub not in _WIRING_FIELDS:
            raise UnresolvablePath(f"unknown wiring field {sub!r}")
        wiring = dataclasses.replace(die.wiring, **{sub: _num_value(sub, value)})
        return dataclasses.replace(die, wiring=wiring)
    if field_name not in _DIE_FIELDS:
        raise UnresolvablePath(f"unknown die field {field_name!r}")
    if field_name == "explicit_beol":
        return dataclasses.replace(die, explicit_beol=int(value))
    return dataclasses.replace(die, **{field_name: _num_value(field_name, value)})


def apply_parameter(scenario: Scenario, path: str, value, registry: FixtureRegistry | None = None) -> Scenario:
    """Return a copy of the scenario with one parameter path set to value."""
    registry = registry or FixtureRegistry.bundled()
    p = path.strip()
    if p.startswith("design."):
        p = p[len("design."):]

    if p == "gamma":
        return dataclasses.replace(scenario, gamma=_num_value(p, value))
    if p == "technology":
        dies = tuple(_set_die(d, "technology", None, value, registry) for d in scenario.design.dies)
        return dataclasses.replace(scenario, design=dataclasses.replace(scenario.design, dies=dies))
    if p == "signal_count_f2f":
        return dataclasses.replace(
            scenario, design=dataclasses.replace(scenario.design, signal_count_f2f=int(value))
        )

    head, _, rest = p.partition(".")
    if head == "usage" and rest in _USAGE_FIELDS:
        usage = dataclasses.replace(scenario.design.usage, **{rest: _num_value(rest, value)})
        return dataclasses.replace(scenario, design=dataclasses.replace(scenario.design, usage=usage))
    if head == "environment" and rest in _ENV_FIELDS:
        env = dataclasses.replace(scenario.environment, **{rest: _num_value(rest, value)})
        return dataclasses.replace(scenario, environment=env)
    if head == "bonding" and rest in _BOND_FIELDS:
        bonding = dataclasses.replace(scenario.profiles.bonding, **{rest: _num_value(rest, value)})
        return dataclasses.replace(
            scenario, profiles=dataclasses.replace(scenario.profiles, bonding=bonding)
        )
    if head == "packaging" and rest in _PKG_FIELDS:
        packaging = dataclasses.replace(scenario.profiles.packaging, **{rest: _num_value(rest, value)})
        return dataclasses.replace(
            scenario, profiles=dataclasses.replace(scenario.profiles, packaging=packaging)
        )

    m = _DIE_PATH.match(p)
    if m:
        index, field_name, sub = m.groups()
        dies = list(scenario.design.dies)
        targets = range(len(dies)) if index == "*" else [int(index)]
        for i in targets:
            if not 0 <= i < len(dies):
                raise UnresolvablePath(f"{path}: die index {i} out of range (have {len(dies)})")
            dies[i] = _set_die(dies[i], field_name, sub, value, registry)
        return dataclasses.replace(
            scenario, design=dataclasses.replace(scenario.design, dies=tuple(dies))
        )
    raise UnresolvablePath(f"cannot resolve parameter path {path!r}")


def mono2d_equivalent(design: DesignSpec, registry: FixtureRegistry | None = None) -> DesignSpec:
    """The single-die 2D design with the same total gate count / area."""
    dies = design.dies
    nodes = {d.technology.node_name for d in dies}
    if len(nodes) > 1:
        warnings.warn(
            "heterogeneous-node design; the 2D baseline uses die 1's node",
            CarbonModelWarning,
            stacklevel=2,
        )
    if all(d.gate_count is not None for d in dies):
        merged = DieSpec(
            technology=dies[0].technology,
            wiring=dies[0].wiring,
            gate_count=sum(d.gate_count for d in dies),
        )
    else:
        total_area = sum(
            d.explicit_area if d.explicit_area is not None else area_2d(d.gate_count, d.technology)
            for d in dies
        )
        merged = DieSpec(technology=dies[0].technology, wiring=dies[0].wiring, explicit_area=total_area)
    return DesignSpec(
        integration=Integration.MONO_2D,
        facing=Facing.NA,
        stacking=Stacking.NA,
        dies=(merged,),
        usage=design.usage,
        signal_count_f2f=0,
    )


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def sweep(
    scenario: Scenario,
    axes: Sequence[SweepAxis],
    registry: FixtureRegistry | None = None,
    cap: int = DEFAULT_ROW_CAP,
    baseline: bool = False,
) -> SweepResult:
    """Evaluate the cartesian product of the axes over a template scenario.

    With ``baseline=True`` every row is also evaluated as its mono-2D
    equivalent, and for single-axis numeric sweeps the embodied-carbon
    sign changes against that baseline are annotated as switching points
    (linearly interpolated between adjacent rows).
    """
    axes = tuple(a if isinstance(a, SweepAxis) else SweepAxis(*a) for a in axes)
    total = math.prod(len(a.values) for a in axes) if axes else 1
    if total > cap:
        raise CapExceeded(f"sweep would evaluate {total} rows, cap is {cap}")
    registry = registry or FixtureRegistry.bundled()

    rows: list[SweepRow] = []
    baselines: list[CarbonBreakdown] = []
    for combo in itertools.product(*(a.values for a in axes)):
        row_scn = scenario
        for axis, value in zip(axes, combo):
            row_scn = apply_parameter(row_scn, axis.parameter_path, value, registry)
        validate_design(row_scn.design)
        rows.append(SweepRow(values=tuple(combo), scenario=row_scn, breakdown=evaluate(row_scn)))
        if baseline:
            base_design = mono2d_equivalent(row_scn.design, registry)
            baselines.append(evaluate(dataclasses.replace(row_scn, design=base_design)))

    points: list[tuple[float, str]] = []
    if baseline and len(axes) == 1 and all(isinstance(v, (int, float)) for v in axes[0].values):
        integ = scenario.design.integration.value
        for (row_a, base_a), (row_b, base_b) in zip(
            zip(rows, baselines), zip(rows[1:], baselines[1:])
        ):
            fa = row_a.breakdown.c_embodied_overall - base_a.c_embodied_overall
            fb = row_b.breakdown.c_embodied_overall - base_b.c_embodied_overall
            if fa > 0 >= fb:
                xa, xb = float(row_a.values[0]), float(row_b.values[0])
                cross = xa if fa == fb else xa + (xb - xa) * fa / (fa - fb)
                points.append((cross, integ))

    return SweepResult(
        axes=axes,
        rows=tuple(rows),
        baseline=tuple(baselines) if baseline else None,
        switching_points=tuple(points),
    )


# ---------------------------------------------------------------------------
# Switching-point search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingResult:
    """Smallest sign change of f on [lo, hi].

    status is one of "crossing" (value = abscissa of the change),
    "always_below" (f < 0 everywhere; value = 0, the Table-III "0" case)
    or "never_below" (f > 0 everywhere; value = inf).
    """

    status: str
    value: float
    evaluations: int = 0


def find_crossing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-3,
    prescan_points: int = PRESCAN_POINTS,
) -> CrossingResult:
    """Bracket-scan then bisect the smallest sign change of f on [lo, hi].

    The pre-scan uses a log-spaced grid (the abscissa is a gate count).
    Multiple sign changes trigger a warning; the smallest is refined.
    """
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    n = max(3, prescan_points)
    ratio = (hi / lo) ** (1.0 / (n - 1))
    grid = [lo * ratio**i for i in range(n - 1)] + [hi]
    values = [f(x) for x in grid]
    evals = len(grid)

    for x, fx in zip(grid, values):
        if fx == 0.0:
            return CrossingResult(status="crossing", value=x, evaluations=evals)

    brackets = [
        i for i in range(len(grid) - 1) if (values[i] > 0) != (values[i + 1] > 0)
    ]
    if not brackets:
        if values[0] < 0:
            return CrossingResult(status="always_below", value=0.0, evaluations=evals)
        return CrossingResult(status="never_below", value=math.inf, evaluations=evals)
    if len(brackets) > 1:
        warnings.warn(
            f"{len(brackets)} sign changes detected on the search range; returning the smallest",
            CarbonModelWarning,
            stacklevel=2,
        )

    a, b = grid[brackets[0]], grid[brackets[0] + 1]
    fa = values[brackets[0]]
    for _ in range(200):
        mid = 0.5 * (a + b)
        if (b - a) <= rel_tol * mid:
            return CrossingResult(status="crossing", value=mid, evaluations=evals)
        fm = f(mid)
        evals += 1
        if fm == 0.0:
            return CrossingResult(status="crossing", value=mid, evaluations=evals)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return CrossingResult(status="crossing", value=0.5 * (a + b), evaluations=evals)


def build_design(
    integration: Integration,
    technology: TechnologyProfile,
    wiring: WiringParameters,
    n_dies: int,
    gate_count_2d: float,
    usage: UsageProfile,
    stacking: Stacking = Stacking.D2W,
    signal_count_f2f: int = 0,
) -> DesignSpec:
    """Equal-split parametric design used by the DSE drivers.

    2-die stacked 3D uses F2F, deeper stacks F2B; mono-2D collapses to a
    single die regardless of n_dies.
    """
    if integration is Integration.MONO_2D:
        n_dies = 1
    dies = tuple(
        DieSpec(technology=technology, wiring=wiring, gate_count=gate_count_2d / n_dies)
        for _ in range(n_dies)
    )
    if integration in (Integration.MICRO_3D, Integration.HYBRID_3D):
        facing = Facing.F2F if n_dies == 2 else Facing.F2B
    elif integration is Integration.M3D:
        facing, stacking = Facing.F2B, Stacking.NA
    else:
        facing, stacking = Facing.NA, Stacking.NA
    design = DesignSpec(
        integration=integration,
        facing=facing,
        stacking=stacking,
        dies=dies,
        usage=usage,
        signal_count_f2f=signal_count_f2f,
    )
    validate_design(design)
    return design


@dataclass(frozen=True)
class SwitchingPoint:
    integration: str
    node: str
    n_dies: int
    status: str             # crossing | always_below | never_below
    gate_count: float       # 0, the crossing, or inf
    area_cm2: float         # 2D-equivalent area of the crossing


def switching_point(
    base: Scenario,
    integration: Integration,
    node: str,
    n_dies: int,
    gate_lo: float,
    gate_hi: float,
    registry: FixtureRegistry | None = None,
    stacking: Stacking = Stacking.D2W,
    rel_tol: float = 1e-3,
) -> SwitchingPoint:
    """2D-vs-integration embodied-carbon switching point over gate count.

    Bisects f(g) = C_embodied(integration, g) - C_embodied(2D, g) to the
    given relative tolerance; reports 0 when the integration is already
    cheaper across the whole range and inf when it never is.
    """
    registry = registry or FixtureRegistry.bundled()
    tech = registry.technology(node)
    wiring = registry.default_wiring(node)
    usage = base.design.usage

    def embodied(integ: Integration, g: float) -> float:
        design = build_design(integ, tech, wiring, n_dies, g, usage, stacking=stacking)
        return evaluate(dataclasses.replace(base, design=design)).c_embodied_overall

    def f(g: float) -> float:
        return embodied(integration, g) - embodied(Integration.MONO_2D, g)

    result = find_crossing(f, gate_lo, gate_hi, rel_tol=rel_tol)
    area = area_2d(result.value, tech) if math.isfinite(result.value) else math.inf
    return SwitchingPoint(
        integration=integration.value,
        node=node,
        n_dies=n_dies,
        status=result.status,
        gate_count=result.value,
        area_cm2=area,
    )


# ---------------------------------------------------------------------------
# Gamma sweep (Pareto/tCDP curves)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParetoResult:
    gammas: tuple[float, ...]
    series: Mapping[str, tuple[float, ...]]     # design name -> normalized tCDP
    reference_name: str
    reference_tcdp: float


def gamma_pareto(
    base: Scenario,
    designs: Sequence[tuple[str, DesignSpec]],
    gammas: Sequence[float],
    reference: DesignSpec | None = None,
) -> ParetoResult:
    """Normalized tCDP curves over a gamma grid.

    Every (design, gamma) point is tCDP(design, gamma) divided by the
    reference design's tCDP at gamma = 1; the reference defaults to the
    base scenario's own design.
    """
    ref_design = reference if reference is not None else base.design
    ref = evaluate(dataclasses.replace(base, design=ref_design, gamma=1.0))
    ref_tcdp = ref.metrics.tcdp
    series: dict[str, tuple[float, ...]] = {}
    for name, design in designs:
        points = []
        for g in gammas:
            result = evaluate(dataclasses.replace(base, design=design, gamma=float(g)))
            points.append(result.metrics.tcdp / ref_tcdp)
        series[name] = tuple(points)
    return ParetoResult(
        gammas=tuple(float(g) for g in gammas),
        series=series,
        reference_name="reference",
        reference_tcdp=ref_tcdp,
    )

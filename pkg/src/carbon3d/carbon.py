"""Embodied/operational carbon accounting and the CDP/CEP/tCDP metrics.

Accounting structure (all kg CO2e per packaged device):

  die        sum_i  wafer_carbon_i / (DPW_i * Y_die_i)
  bonding    3D:    sum of per-interface bond-wafer shares / Y_bond
             InFO:  chip-last RDL bonding per area (chip-first has none)
             Si:    interposer D2W bond wafer share, once per die attach
  packaging  CPA_packaging * package area
  substrate  InFO RDL build-up per area, or the interposer's own die cost
  overall    die + bonding + packaging + substrate
  amortized  overall * t_app / t_exe
  total      operational + gamma * amortized

M3D is the one integration without a per-die wafer pass: both sequential
tiers share a single wafer, so fab energy for FEOL+MOL is charged per
tier, the BEOL stack and the per-wafer gas/material footprints are
charged once, and there is no bonding term.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

from .errors import (
    CardinalityMismatch,
    CarbonModelWarning,
    DieLargerThanWafer,
    LayerCountExceedsProfile,
    NonPositiveArea,
)
from .geometry import StackGeometry, stack_geometry
from .params import (
    BondingProfile,
    DesignSpec,
    FabEnvironment,
    Integration,
    ProcessProfiles,
    Scenario,
    Stacking,
    TechnologyProfile,
    UsageProfile,
)
from .yieldmodel import YieldContext, yield_context


@dataclass(frozen=True)
class Metrics:
    cdp: float      # kg*s, overall embodied carbon x delay
    cep: float      # kg*kWh, overall embodied carbon x operational energy
    tcdp: float     # kg*s, total carbon x delay


@dataclass(frozen=True)
class WaferCost:
    epa_total: float        # kWh/cm^2, FEOL + MOL + used BEOL layers
    c_wafer: float          # kg CO2 per wafer
    wafer_area: float       # cm^2
    dpw: int = 0            # gross dies per wafer; 0 when no die area given


@dataclass(frozen=True)
class CarbonBreakdown:
    c_die_per_die: tuple[float, ...]
    c_bonding: float
    c_packaging: float
    c_substrate: float
    gamma: float = 1.0
    c_operational: float = 0.0
    c_embodied_amortized: float = 0.0
    c_total: float = 0.0
    operational_energy_kwh: float = 0.0
    metrics: Metrics | None = None

    @property
    def c_die(self) -> float:
        return sum(self.c_die_per_die)

    @property
    def c_embodied_overall(self) -> float:
        return self.c_die + self.c_bonding + self.c_packaging + self.c_substrate


def dies_per_wafer(wafer_diameter: float, die_area: float) -> int:
    """Gross die-per-wafer: pi*(d/2)^2/A - pi*d/sqrt(2A), floored.

    Clamps to 1 (with a warning) when the edge-loss term dominates a die
    that still fits on the wafer.
    """
    if die_area <= 0:
        raise NonPositiveArea(f"die area must be > 0, got {die_area}")
    wafer_area = math.pi * (wafer_diameter / 2.0) ** 2
    if die_area >= wafer_area:
        raise DieLargerThanWafer(
            f"die of {die_area:g} cm^2 cannot be cut from a {wafer_area:g} cm^2 wafer"
        )
    raw = wafer_area / die_area - math.pi * wafer_diameter / math.sqrt(2.0 * die_area)
    count = math.floor(raw)
    if count < 1:
        warnings.warn(
            f"die-per-wafer formula gave {raw:.2f} for a {die_area:g} cm^2 die; clamping to 1",
            CarbonModelWarning,
            stacklevel=2,
        )
        return 1
    return count


def wafer_carbon(
    tech: TechnologyProfile,
    beol_layers: int,
    env: FabEnvironment,
    die_area: float | None = None,
) -> WaferCost:
    """Per-wafer fab carbon: (CI_fab*EPA + GPA + MPA) * wafer area.

    EPA sums FEOL, MOL and the first ``beol_layers`` per-layer BEOL
    energies.  When ``die_area`` is given the gross die-per-wafer count is
    filled in as well.
    """
    if beol_layers > tech.max_beol_layers:
        raise LayerCountExceedsProfile(
            f"{beol_layers} BEOL layers exceeds {tech.node_name}'s max of {tech.max_beol_layers}"
        )
    epa = tech.epa_feol + tech.epa_mol + sum(tech.epa_beol_per_layer[:beol_layers])
    wafer_area = env.wafer_area
    c = (env.ci_fab * epa + tech.gpa + tech.mpa) * wafer_area
    dpw = dies_per_wafer(env.wafer_diameter_cm, die_area) if die_area is not None else 0
    return WaferCost(epa_total=epa, c_wafer=c, wafer_area=wafer_area, dpw=dpw)


def bonding_wafer_carbon(
    stacking: Stacking,
    bonding: BondingProfile,
    env: FabEnvironment,
    wafer_area: float,
) -> float:
    """Per-wafer bonding carbon: CI_bonding * EPA_{D2W|W2W} * wafer area."""
    epa = bonding.epa_w2w if stacking is Stacking.W2W else bonding.epa_d2w
    return env.ci_bonding * epa * wafer_area


def _m3d_die_carbon(
    spec: DesignSpec,
    geom: StackGeometry,
    yields: YieldContext,
    env: FabEnvironment,
) -> list[float]:
    # One wafer, two device passes: FEOL+MOL per tier, BEOL stack and
    # GPA/MPA once (charged with the top tier, index 0).
    tech = spec.dies[0].technology
    out = []
    for i, g in enumerate(geom.dies):
        if i == 0:
            epa = tech.epa_feol + tech.epa_mol + sum(tech.epa_beol_per_layer[: g.beol_layers])
            per_wafer = (env.ci_fab * epa + tech.gpa + tech.mpa) * env.wafer_area
        else:
            per_wafer = env.ci_fab * (tech.epa_feol + tech.epa_mol) * env.wafer_area
        dpw = dies_per_wafer(env.wafer_diameter_cm, g.total_area)
        out.append(per_wafer / dpw / yields.effective_die_y[i])
    return out


def embodied_breakdown(
    spec: DesignSpec,
    geom: StackGeometry,
    yields: YieldContext,
    env: FabEnvironment,
    profiles: ProcessProfiles,
) -> CarbonBreakdown:
    """Embodied carbon decomposition for one packaged device."""
    n = len(spec.dies)
    if len(geom.dies) != n or len(yields.effective_die_y) != n:
        raise CardinalityMismatch("design, geometry and yields disagree on the die count")
    integ = spec.integration
    bonding = profiles.bonding

    if integ is Integration.M3D:
        c_die = _m3d_die_carbon(spec, geom, yields, env)
        c_bond = 0.0
    else:
        c_die = []
        for die, g, y in zip(spec.dies, geom.dies, yields.effective_die_y):
            wc = wafer_carbon(die.technology, g.beol_layers, env, die_area=g.total_area)
            c_die.append(wc.c_wafer / wc.dpw / y)

        if integ.is_stacked_3d:
            c_bond = 0.0
            for i in range(n - 1):
                # interface i binds die i and i+1; charged at die i+1's wafer share
                lower = geom.dies[i + 1]
                dpw = dies_per_wafer(env.wafer_diameter_cm, lower.total_area)
                per_wafer = bonding_wafer_carbon(spec.stacking, bonding, env, env.wafer_area)
                c_bond += per_wafer / dpw / yields.effective_bond_y[i]
        elif integ is Integration.INFO_CHIP_LAST:
            c_bond = bonding.cpa_bonding * geom.substrate_area / yields.effective_bond_y[0]
        elif integ is Integration.SI_INTERPOSER:
            per_wafer = env.ci_bonding * bonding.epa_d2w * env.wafer_area  # D2W micro-bump attach
            dpw = dies_per_wafer(env.wafer_diameter_cm, geom.substrate_area)
            c_bond = per_wafer / dpw * sum(1.0 / y for y in yields.effective_bond_y)
        else:  # mono 2D, MCM, chip-first InFO
            c_bond = 0.0

    if integ in (Integration.INFO_CHIP_FIRST, Integration.INFO_CHIP_LAST):
        c_sub = bonding.cpa_rdl * geom.substrate_area / yields.substrate_y
    elif integ is Integration.SI_INTERPOSER:
        tech = profiles.interposer_technology
        wc = wafer_carbon(tech, profiles.interposer_beol_layers, env, die_area=geom.substrate_area)
        c_sub = wc.c_wafer / wc.dpw / yields.substrate_y
    else:
        c_sub = 0.0

    c_pack = profiles.packaging.cpa_packaging * geom.package_area
    return CarbonBreakdown(
        c_die_per_die=tuple(c_die),
        c_bonding=c_bond,
        c_packaging=c_pack,
        c_substrate=c_sub,
    )


def operational_energy_kwh(usage: UsageProfile, active_area: float) -> float:
    """Lifetime-application energy: override, or density*area*t_app / 1000."""
    if usage.energy_override_kwh is not None:
        return usage.energy_override_kwh
    return usage.power_density * active_area * usage.t_app_hours / 1000.0


def operational_carbon(usage: UsageProfile, active_area: float, env: FabEnvironment) -> float:
    return env.ci_use * operational_energy_kwh(usage, active_area)


def amortize_and_total(
    breakdown: CarbonBreakdown,
    usage: UsageProfile,
    gamma: float,
    use_overall: bool = False,
) -> CarbonBreakdown:
    """Fill amortized embodied carbon and the gamma-weighted total.

    ``use_overall`` weights the un-amortized embodied carbon instead of
    the t_app/t_exe share.
    """
    amortized = breakdown.c_embodied_overall * usage.t_app_hours / usage.t_exe_hours
    weighted = breakdown.c_embodied_overall if use_overall else amortized
    return dataclasses.replace(
        breakdown,
        gamma=gamma,
        c_embodied_amortized=amortized,
        c_total=breakdown.c_operational + gamma * weighted,
    )


def metrics(c_embodied: float, c_total: float, delay: float, energy: float) -> Metrics:
    """CDP/CEP/tCDP trade-off metrics."""
    return Metrics(cdp=c_embodied * delay, cep=c_embodied * energy, tcdp=c_total * delay)


def evaluate(scenario: Scenario, use_overall_gamma: bool = False) -> CarbonBreakdown:
    """Full pipeline: geometry -> yields -> embodied -> operational -> metrics."""
    design, profiles, env = scenario.design, scenario.profiles, scenario.environment
    geom = stack_geometry(design, profiles.packaging)
    yields = yield_context(design, geom, profiles)
    breakdown = embodied_breakdown(design, geom, yields, env, profiles)
    energy = operational_energy_kwh(design.usage, geom.equivalent_2d_area)
    breakdown = dataclasses.replace(
        breakdown, c_operational=env.ci_use * energy, operational_energy_kwh=energy
    )
    breakdown = amortize_and_total(breakdown, design.usage, scenario.gamma, use_overall_gamma)
    return dataclasses.replace(
        breakdown,
        metrics=metrics(breakdown.c_embodied_overall, breakdown.c_total, design.usage.delay_s, energy),
    )

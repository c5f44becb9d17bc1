"""Design/technology/environment configuration: types, fixtures, loading.

Canonical units everywhere: cm for length, cm^2 for area, kWh for energy,
kg CO2e for mass, hours for durations.  Config documents are UTF-8 JSON
with top-level keys ``design``, ``technology_overrides``, ``environment``
and ``usage``; the die list under ``design.dies`` is ordered top-of-stack
first (die 1 = farthest from the package substrate).

Bundled per-node fixtures live under ``fixtures/nodes/`` (one JSON file
per node) next to ``bonding.json``, ``packaging.json`` and
``environment.json``.  Their values are illustrative survey midpoints and
are meant to be user-replaceable, either via the ``CARBON3D_FIXTURES``
environment variable or per-document ``technology_overrides``.

All profile/spec types are immutable after construction and safe to share
across concurrent evaluators.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import (
    CarbonModelWarning,
    InvalidCombination,
    MissingField,
    OutOfRange,
    UnknownNode,
    ValidationError,
)

HOURS_PER_YEAR = 8766.0

# Survey bounds used for soft (warning-level) range checks.  Bundled
# fixtures must sit inside these; user overrides merely get a warning.
SURVEYED = {
    "epa_feol": (0.24, 0.56),
    "epa_mol": (0.08, 0.23),
    "epa_beol_layer": (0.6, 1.81),
    "gpa": (0.1, 0.5),
    "epa_bonding": (0.9, 2.75),
    "carbon_intensity": (0.030, 0.700),
    "tsv_pitch_cm": (4e-4, 20e-4),
    "t_exe_years": (1.0, 10.0),
}


class Integration(enum.Enum):
    MONO_2D = "mono_2d"
    MICRO_3D = "micro_3d"
    HYBRID_3D = "hybrid_3d"
    M3D = "m3d"
    MCM = "mcm"
    INFO_CHIP_FIRST = "info_chip_first"
    INFO_CHIP_LAST = "info_chip_last"
    SI_INTERPOSER = "si_interposer"

    @property
    def is_3d(self) -> bool:
        return self in (Integration.MICRO_3D, Integration.HYBRID_3D, Integration.M3D)

    @property
    def is_stacked_3d(self) -> bool:
        """Die-level stacking (micro-bump or hybrid bond), i.e. has bond interfaces."""
        return self in (Integration.MICRO_3D, Integration.HYBRID_3D)

    @property
    def is_25d(self) -> bool:
        return self in (
            Integration.MCM,
            Integration.INFO_CHIP_FIRST,
            Integration.INFO_CHIP_LAST,
            Integration.SI_INTERPOSER,
        )


class Facing(enum.Enum):
    F2F = "f2f"
    F2B = "f2b"
    NA = "na"


class Stacking(enum.Enum):
    D2W = "d2w"
    W2W = "w2w"
    NA = "na"


@dataclass(frozen=True)
class TechnologyProfile:
    """Per-node fab parameters (canonical units, see module docstring)."""

    node_name: str
    feature_size_cm: float          # lambda
    gate_area_scaling: float        # beta; beta * lambda^2 = average area per gate
    epa_feol: float                 # kWh/cm^2
    epa_mol: float                  # kWh/cm^2
    epa_beol_per_layer: tuple[float, ...]  # kWh/cm^2, index 0 = metal 1
    max_beol_layers: int
    gpa: float                      # kg CO2/cm^2 direct fab gases
    mpa: float                      # kg CO2/cm^2 material procurement
    defect_density_d0: float        # defects/cm^2
    cluster_alpha: float            # negative-binomial clustering, > 0
    tsv_pitch_cm: float             # via dimension
    io_overhead_ratio: float        # gamma_IO in [0, 1]


@dataclass(frozen=True)
class FabEnvironment:
    ci_fab: float                   # kg CO2/kWh
    ci_use: float
    ci_bonding: float
    wafer_diameter_cm: float

    @property
    def wafer_area(self) -> float:
        return math.pi * (self.wafer_diameter_cm / 2.0) ** 2


@dataclass(frozen=True)
class WiringParameters:
    """Rent's-rule and routing parameters used for TSV and BEOL estimation."""

    rent_k: float                   # terminals per gate coefficient
    rent_p: float                   # Rent exponent, in (0, 1)
    rent_alpha: float               # terminal-to-connection factor
    fanout: float                   # average fanout (f.o.)
    wire_pitch_cm: float            # omega
    utilization: float              # eta, in (0, 1]


@dataclass(frozen=True)
class BondingProfile:
    epa_d2w: float                  # kWh/cm^2 per bonding wafer pass
    epa_w2w: float
    cpa_bonding: float              # kg CO2/cm^2, chip-last InFO bonding
    cpa_rdl: float                  # kg CO2/cm^2, RDL substrate build-up
    bond_yield: float               # standalone per-interface yield
    rdl_yield: float
    interposer_yield: float | None = None   # None: derived from interposer area


@dataclass(frozen=True)
class PackagingProfile:
    cpa_packaging: float            # kg CO2/cm^2 (package technology specific)
    s_package_3d: float             # >= 1, times max stacked die area
    s_package_25d: float            # >= 1, times total die area
    s_substrate_25d: float          # >= 1, times total die area (RDL / interposer)


@dataclass(frozen=True)
class UsageProfile:
    t_app_hours: float              # application run-time
    t_exe_hours: float              # overall execution lifetime
    power_density: float | None = None      # W/cm^2 over active logic area
    energy_override_kwh: float | None = None
    delay_s: float = 1.0            # per-task delay for CDP/tCDP metrics


@dataclass(frozen=True)
class DieSpec:
    technology: TechnologyProfile
    wiring: WiringParameters
    gate_count: float | None = None
    explicit_area: float | None = None      # cm^2, overrides computed gate area
    explicit_beol: int | None = None        # bypasses BEOL estimation


@dataclass(frozen=True)
class DesignSpec:
    integration: Integration
    facing: Facing
    stacking: Stacking
    dies: tuple[DieSpec, ...]
    usage: UsageProfile
    signal_count_f2f: int = 0       # X_signal, package-bound signals for F2F


@dataclass(frozen=True)
class ProcessProfiles:
    """Bonding/packaging characterization plus the 2.5D interposer process."""

    bonding: BondingProfile
    packaging: PackagingProfile
    interposer_technology: TechnologyProfile | None = None
    interposer_beol_layers: int = 4


@dataclass(frozen=True)
class Scenario:
    """Everything one full-pipeline evaluation needs."""

    design: DesignSpec
    profiles: ProcessProfiles
    environment: FabEnvironment
    gamma: float = 1.0


# ---------------------------------------------------------------------------
# Fixture registry
# ---------------------------------------------------------------------------

FIXTURES_ENV_VAR = "CARBON3D_FIXTURES"
_BUNDLED_DIR = Path(__file__).resolve().parent / "fixtures"


class FixtureRegistry:
    """Filesystem-backed registry of per-node and shared fixture profiles."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        if not (self.root / "nodes").is_dir():
            raise FileNotFoundError(f"no 'nodes' directory under {self.root}")

    @classmethod
    def bundled(cls) -> "FixtureRegistry":
        """Bundled fixtures, or the directory named by $CARBON3D_FIXTURES."""
        override = os.environ.get(FIXTURES_ENV_VAR)
        return cls(override) if override else cls(_BUNDLED_DIR)

    def node_names(self) -> list[str]:
        names = [p.stem for p in sorted((self.root / "nodes").glob("*.json"))]
        # sort numerically where possible: 3nm before 28nm
        def key(n: str):
            digits = "".join(ch for ch in n if ch.isdigit())
            return (int(digits) if digits else 1 << 30, n)
        return sorted(names, key=key)

    def _node_doc(self, node_name: str) -> dict:
        path = self.root / "nodes" / f"{node_name}.json"
        if not path.is_file():
            raise UnknownNode(node_name, self.node_names())
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def technology(self, node_name: str) -> TechnologyProfile:
        doc = self._node_doc(node_name)
        prof = _technology_from_doc(node_name, doc, path=f"fixtures/nodes/{node_name}")
        validate_technology(prof, path=f"fixtures/nodes/{node_name}")
        return prof

    def default_wiring(self, node_name: str) -> WiringParameters:
        doc = self._node_doc(node_name)
        wiring = _wiring_from_doc(doc.get("wiring", {}), path=f"fixtures/nodes/{node_name}.wiring")
        validate_wiring(wiring, path=f"fixtures/nodes/{node_name}.wiring")
        return wiring

    def _shared(self, stem: str) -> dict:
        path = self.root / f"{stem}.json"
        if not path.is_file():
            raise MissingField(f"fixtures/{stem}.json", "fixture file not found")
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def bonding(self) -> BondingProfile:
        prof = _bonding_from_doc(self._shared("bonding"), path="fixtures/bonding")
        validate_bonding(prof, path="fixtures/bonding")
        return prof

    def packaging(self) -> PackagingProfile:
        prof = _packaging_from_doc(self._shared("packaging"), path="fixtures/packaging")
        validate_packaging(prof, path="fixtures/packaging")
        return prof

    def environment(self) -> FabEnvironment:
        env = _environment_from_doc(self._shared("environment"), path="fixtures/environment")
        validate_environment(env, path="fixtures/environment")
        return env


def resolve_technology(node_name: str, registry: FixtureRegistry | None = None) -> TechnologyProfile:
    """Look up a node profile in the fixture registry."""
    registry = registry or FixtureRegistry.bundled()
    return registry.technology(node_name)


# ---------------------------------------------------------------------------
# Document parsing helpers
# ---------------------------------------------------------------------------

def _require(doc: Mapping, key: str, path: str) -> Any:
    if not isinstance(doc, Mapping):
        raise MissingField(path, "expected an object")
    if key not in doc or doc[key] is None:
        raise MissingField(f"{path}.{key}" if path else key, "required field missing")
    return doc[key]


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise OutOfRange(path, f"expected a number, got {value!r}")
    return float(value)


def _opt_num(doc: Mapping, key: str, path: str, default: float | None = None) -> float | None:
    value = doc.get(key, default)
    return None if value is None else _num(value, f"{path}.{key}")


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise OutOfRange(path, f"expected an integer, got {value!r}")
    return value


def _enum(value: Any, enum_cls, path: str):
    if isinstance(value, enum_cls):
        return value
    text = str(value).strip().lower().replace("-", "_").replace(" ", "_")
    aliases = {
        "mono2d": "mono_2d", "2d": "mono_2d",
        "micro3d": "micro_3d", "micro": "micro_3d", "microbump": "micro_3d",
        "hybrid3d": "hybrid_3d", "hybrid": "hybrid_3d",
        "infochipfirst": "info_chip_first", "info_first": "info_chip_first",
        "infochiplast": "info_chip_last", "info_last": "info_chip_last",
        "siinterposer": "si_interposer", "interposer": "si_interposer",
        "n_a": "na", "none": "na",
    }
    text = aliases.get(text, text)
    try:
        return enum_cls(text)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise OutOfRange(path, f"{value!r} is not one of: {allowed}") from None


def _technology_from_doc(node_name: str, doc: Mapping, path: str) -> TechnologyProfile:
    layers = _require(doc, "epa_beol_per_layer", path)
    if not isinstance(layers, Sequence) or isinstance(layers, str):
        raise OutOfRange(f"{path}.epa_beol_per_layer", "expected a list of numbers")
    return TechnologyProfile(
        node_name=node_name,
        feature_size_cm=_num(_require(doc, "feature_size_cm", path), f"{path}.feature_size_cm"),
        gate_area_scaling=_num(_require(doc, "gate_area_scaling", path), f"{path}.gate_area_scaling"),
        epa_feol=_num(_require(doc, "epa_feol", path), f"{path}.epa_feol"),
        epa_mol=_num(_require(doc, "epa_mol", path), f"{path}.epa_mol"),
        epa_beol_per_layer=tuple(_num(v, f"{path}.epa_beol_per_layer[{i}]") for i, v in enumerate(layers)),
        max_beol_layers=_int(_require(doc, "max_beol_layers", path), f"{path}.max_beol_layers"),
        gpa=_num(_require(doc, "gpa", path), f"{path}.gpa"),
        mpa=_num(_require(doc, "mpa", path), f"{path}.mpa"),
        defect_density_d0=_num(_require(doc, "defect_density_d0", path), f"{path}.defect_density_d0"),
        cluster_alpha=_num(_require(doc, "cluster_alpha", path), f"{path}.cluster_alpha"),
        tsv_pitch_cm=_num(_require(doc, "tsv_pitch_cm", path), f"{path}.tsv_pitch_cm"),
        io_overhead_ratio=_num(doc.get("io_overhead_ratio", 0.1), f"{path}.io_overhead_ratio"),
    )


def _wiring_from_doc(doc: Mapping, path: str) -> WiringParameters:
    return WiringParameters(
        rent_k=_num(_require(doc, "rent_k", path), f"{path}.rent_k"),
        rent_p=_num(_require(doc, "rent_p", path), f"{path}.rent_p"),
        rent_alpha=_num(doc.get("rent_alpha", 1.0), f"{path}.rent_alpha"),
        fanout=_num(_require(doc, "fanout", path), f"{path}.fanout"),
        wire_pitch_cm=_num(_require(doc, "wire_pitch_cm", path), f"{path}.wire_pitch_cm"),
        utilization=_num(_require(doc, "utilization", path), f"{path}.utilization"),
    )


def _bonding_from_doc(doc: Mapping, path: str) -> BondingProfile:
    return BondingProfile(
        epa_d2w=_num(_require(doc, "epa_d2w", path), f"{path}.epa_d2w"),
        epa_w2w=_num(_require(doc, "epa_w2w", path), f"{path}.epa_w2w"),
        cpa_bonding=_num(_require(doc, "cpa_bonding", path), f"{path}.cpa_bonding"),
        cpa_rdl=_num(_require(doc, "cpa_rdl", path), f"{path}.cpa_rdl"),
        bond_yield=_num(_require(doc, "bond_yield", path), f"{path}.bond_yield"),
        rdl_yield=_num(_require(doc, "rdl_yield", path), f"{path}.rdl_yield"),
        interposer_yield=_opt_num(doc, "interposer_yield", path),
    )


def _packaging_from_doc(doc: Mapping, path: str) -> PackagingProfile:
    return PackagingProfile(
        cpa_packaging=_num(_require(doc, "cpa_packaging", path), f"{path}.cpa_packaging"),
        s_package_3d=_num(_require(doc, "s_package_3d", path), f"{path}.s_package_3d"),
        s_package_25d=_num(_require(doc, "s_package_25d", path), f"{path}.s_package_25d"),
        s_substrate_25d=_num(_require(doc, "s_substrate_25d", path), f"{path}.s_substrate_25d"),
    )


def _environment_from_doc(doc: Mapping, path: str) -> FabEnvironment:
    return FabEnvironment(
        ci_fab=_num(_require(doc, "ci_fab", path), f"{path}.ci_fab"),
        ci_use=_num(_require(doc, "ci_use", path), f"{path}.ci_use"),
        ci_bonding=_num(_require(doc, "ci_bonding", path), f"{path}.ci_bonding"),
        wafer_diameter_cm=_num(_require(doc, "wafer_diameter_cm", path), f"{path}.wafer_diameter_cm"),
    )


def _usage_from_doc(doc: Mapping, path: str) -> UsageProfile:
    return UsageProfile(
        t_app_hours=_num(_require(doc, "t_app_hours", path), f"{path}.t_app_hours"),
        t_exe_hours=_num(_require(doc, "t_exe_hours", path), f"{path}.t_exe_hours"),
        power_density=_opt_num(doc, "power_density", path),
        energy_override_kwh=_opt_num(doc, "energy_override_kwh", path),
        delay_s=_num(doc.get("delay_s", 1.0), f"{path}.delay_s"),
    )


# ---------------------------------------------------------------------------
# Validation (hard invariants raise; surveyed ranges warn)
# ---------------------------------------------------------------------------

def _check(cond: bool, path: str, message: str):
    if not cond:
        raise OutOfRange(path, message)


def _warn_range(value: float, bounds: tuple[float, float], path: str):
    lo, hi = bounds
    if not (lo <= value <= hi):
        warnings.warn(
            f"{path}={value:g} is outside the surveyed range [{lo:g}, {hi:g}]",
            CarbonModelWarning,
            stacklevel=3,
        )


def validate_technology(tech: TechnologyProfile, path: str = "technology"):
    _check(tech.feature_size_cm > 0, f"{path}.feature_size_cm", "must be > 0")
    _check(tech.gate_area_scaling > 0, f"{path}.gate_area_scaling", "must be > 0")
    _check(tech.epa_feol >= 0, f"{path}.epa_feol", "must be >= 0")
    _check(tech.epa_mol >= 0, f"{path}.epa_mol", "must be >= 0")
    _check(tech.max_beol_layers >= 1, f"{path}.max_beol_layers", "must be >= 1")
    _check(
        len(tech.epa_beol_per_layer) >= tech.max_beol_layers,
        f"{path}.epa_beol_per_layer",
        f"needs at least max_beol_layers={tech.max_beol_layers} entries",
    )
    _check(all(v >= 0 for v in tech.epa_beol_per_layer), f"{path}.epa_beol_per_layer", "entries must be >= 0")
    _check(tech.gpa >= 0, f"{path}.gpa", "must be >= 0")
    _check(tech.mpa >= 0, f"{path}.mpa", "must be >= 0")
    _check(tech.defect_density_d0 >= 0, f"{path}.defect_density_d0", "must be >= 0")
    _check(tech.cluster_alpha > 0, f"{path}.cluster_alpha", "must be > 0")
    _check(tech.tsv_pitch_cm > 0, f"{path}.tsv_pitch_cm", "must be > 0")
    _check(0 <= tech.io_overhead_ratio <= 1, f"{path}.io_overhead_ratio", "must be in [0, 1]")
    _warn_range(tech.epa_feol, SURVEYED["epa_feol"], f"{path}.epa_feol")
    _warn_range(tech.epa_mol, SURVEYED["epa_mol"], f"{path}.epa_mol")
    for i, v in enumerate(tech.epa_beol_per_layer[: tech.max_beol_layers]):
        _warn_range(v, SURVEYED["epa_beol_layer"], f"{path}.epa_beol_per_layer[{i}]")
    _warn_range(tech.gpa, SURVEYED["gpa"], f"{path}.gpa")
    _warn_range(tech.tsv_pitch_cm, SURVEYED["tsv_pitch_cm"], f"{path}.tsv_pitch_cm")


def validate_wiring(wiring: WiringParameters, path: str = "wiring"):
    _check(wiring.rent_k > 0, f"{path}.rent_k", "must be > 0")
    _check(0 < wiring.rent_p < 1, f"{path}.rent_p", "must be in (0, 1)")
    _check(wiring.rent_alpha > 0, f"{path}.rent_alpha", "must be > 0")
    _check(wiring.fanout > 0, f"{path}.fanout", "must be > 0")
    _check(wiring.wire_pitch_cm > 0, f"{path}.wire_pitch_cm", "must be > 0")
    _check(0 < wiring.utilization <= 1, f"{path}.utilization", "must be in (0, 1]")


def validate_bonding(bonding: BondingProfile, path: str = "bonding"):
    _check(bonding.epa_d2w >= 0, f"{path}.epa_d2w", "must be >= 0")
    _check(bonding.epa_w2w >= 0, f"{path}.epa_w2w", "must be >= 0")
    _check(bonding.cpa_bonding >= 0, f"{path}.cpa_bonding", "must be >= 0")
    _check(bonding.cpa_rdl >= 0, f"{path}.cpa_rdl", "must be >= 0")
    for name in ("bond_yield", "rdl_yield", "interposer_yield"):
        value = getattr(bonding, name)
        if value is not None:
            _check(0 < value <= 1, f"{path}.{name}", "must be in (0, 1]")
    _warn_range(bonding.epa_d2w, SURVEYED["epa_bonding"], f"{path}.epa_d2w")
    _warn_range(bonding.epa_w2w, SURVEYED["epa_bonding"], f"{path}.epa_w2w")


def validate_packaging(packaging: PackagingProfile, path: str = "packaging"):
    _check(packaging.cpa_packaging >= 0, f"{path}.cpa_packaging", "must be >= 0")
    _check(packaging.s_package_3d >= 1, f"{path}.s_package_3d", "must be >= 1")
    _check(packaging.s_package_25d >= 1, f"{path}.s_package_25d", "must be >= 1")
    _check(packaging.s_substrate_25d >= 1, f"{path}.s_substrate_25d", "must be >= 1")


def validate_environment(env: FabEnvironment, path: str = "environment"):
    for name in ("ci_fab", "ci_use", "ci_bonding"):
        value = getattr(env, name)
        _check(value >= 0, f"{path}.{name}", "must be >= 0")
        _warn_range(value, SURVEYED["carbon_intensity"], f"{path}.{name}")
    _check(env.wafer_diameter_cm > 0, f"{path}.wafer_diameter_cm", "must be > 0")


def validate_usage(usage: UsageProfile, path: str = "usage"):
    _check(usage.t_app_hours > 0, f"{path}.t_app_hours", "must be > 0")
    _check(usage.t_exe_hours >= usage.t_app_hours, f"{path}.t_exe_hours", "must be >= t_app_hours")
    _check(usage.delay_s > 0, f"{path}.delay_s", "must be > 0")
    if usage.power_density is None and usage.energy_override_kwh is None:
        raise MissingField(f"{path}.power_density", "one of power_density / energy_override_kwh is required")
    if usage.power_density is not None and usage.energy_override_kwh is not None:
        raise InvalidCombination(path, "give exactly one of power_density / energy_override_kwh")
    if usage.power_density is not None:
        _check(usage.power_density >= 0, f"{path}.power_density", "must be >= 0")
    if usage.energy_override_kwh is not None:
        _check(usage.energy_override_kwh >= 0, f"{path}.energy_override_kwh", "must be >= 0")
    _warn_range(usage.t_exe_hours / HOURS_PER_YEAR, SURVEYED["t_exe_years"], f"{path}.t_exe_hours (years)")


def validate_design(design: DesignSpec, path: str = "design"):
    """Enforce the integration/facing/stacking/die-count compatibility rules."""
    n = len(design.dies)
    integ = design.integration
    if integ is Integration.MONO_2D:
        if n != 1:
            raise InvalidCombination(f"{path}.dies", f"mono_2d requires exactly 1 die, got {n}")
    elif n < 2:
        raise InvalidCombination(f"{path}.dies", f"{integ.value} requires >= 2 dies, got {n}")

    if integ.is_stacked_3d:
        if design.facing is Facing.NA:
            raise InvalidCombination(f"{path}.facing", f"{integ.value} requires facing f2f or f2b")
        if design.stacking is Stacking.NA:
            raise InvalidCombination(f"{path}.stacking", f"{integ.value} requires stacking d2w or w2w")
        if design.facing is Facing.F2F and n != 2:
            raise InvalidCombination(f"{path}.facing", f"f2f stacking supports exactly 2 dies, got {n}")
    elif integ is Integration.M3D:
        if n != 2:
            raise InvalidCombination(f"{path}.dies", f"m3d supports exactly 2 tiers, got {n}")
        if design.facing is not Facing.F2B:
            raise InvalidCombination(f"{path}.facing", "m3d tiers are built face-to-back")
        if design.stacking is not Stacking.NA:
            raise InvalidCombination(f"{path}.stacking", "m3d is sequential, no bonding scheme applies")
        nodes = {d.technology.node_name for d in design.dies}
        if len(nodes) != 1:
            raise InvalidCombination(f"{path}.dies", "m3d tiers share one wafer and must use one node")
    else:  # mono 2D and all 2.5D flavors
        if design.facing is not Facing.NA:
            raise InvalidCombination(f"{path}.facing", f"facing does not apply to {integ.value}")
        if design.stacking is not Stacking.NA:
            raise InvalidCombination(f"{path}.stacking", f"stacking does not apply to {integ.value}")

    if design.signal_count_f2f < 0:
        raise OutOfRange(f"{path}.signal_count_f2f", "must be >= 0")

    for i, die in enumerate(design.dies):
        dpath = f"{path}.dies[{i}]"
        if die.gate_count is None and die.explicit_area is None:
            raise MissingField(f"{dpath}.gate_count", "need gate_count or explicit_area")
        if die.gate_count is not None:
            _check(die.gate_count > 0, f"{dpath}.gate_count", "must be > 0")
        if die.explicit_area is not None:
            _check(die.explicit_area > 0, f"{dpath}.explicit_area", "must be > 0")
        if die.explicit_beol is not None:
            _check(
                1 <= die.explicit_beol <= die.technology.max_beol_layers,
                f"{dpath}.explicit_beol",
                f"must be in [1, {die.technology.max_beol_layers}] for {die.technology.node_name}",
            )
        validate_technology(die.technology, f"{dpath}.technology")
        validate_wiring(die.wiring, f"{dpath}.wiring")
    validate_usage(design.usage, f"{path}.usage")


# ---------------------------------------------------------------------------
# Document loading
# ---------------------------------------------------------------------------

def _resolved_technology(node: str, overrides: Mapping, registry: FixtureRegistry, path: str) -> TechnologyProfile:
    base = registry.technology(node)
    patch = overrides.get(node)
    if not patch:
        return base
    if not isinstance(patch, Mapping):
        raise OutOfRange(f"technology_overrides.{node}", "expected an object of field overrides")
    fields = {f.name for f in dataclasses.fields(TechnologyProfile)}
    kwargs: dict[str, Any] = {}
    for key, value in patch.items():
        if key not in fields or key == "node_name":
            raise OutOfRange(f"technology_overrides.{node}.{key}", "unknown technology field")
        if key == "epa_beol_per_layer":
            kwargs[key] = tuple(_num(v, f"technology_overrides.{node}.{key}[{i}]") for i, v in enumerate(value))
        elif key == "max_beol_layers":
            kwargs[key] = _int(value, f"technology_overrides.{node}.{key}")
        else:
            kwargs[key] = _num(value, f"technology_overrides.{node}.{key}")
    prof = dataclasses.replace(base, **kwargs)
    validate_technology(prof, path)
    return prof


def _default_facing(integration: Integration, n_dies: int) -> Facing:
    if integration.is_stacked_3d:
        return Facing.F2F if n_dies == 2 else Facing.F2B
    if integration is Integration.M3D:
        return Facing.F2B
    return Facing.NA


def _expand_dies(design_doc: Mapping, path: str) -> list[dict]:
    """Normalize the two input styles to a per-die list of raw objects.

    Style A: explicit ``dies`` list.  Style B (early design): a total
    ``gate_count_2d`` with ``n_dies`` and one ``technology``, split evenly
    or by ``area_ratios``.
    """
    if "dies" in design_doc:
        dies = design_doc["dies"]
        if not isinstance(dies, Sequence) or isinstance(dies, str) or not dies:
            raise MissingField(f"{path}.dies", "expected a non-empty list of die objects")
        return [dict(d) if isinstance(d, Mapping) else _bad_die(i, path) for i, d in enumerate(dies)]

    total = _num(_require(design_doc, "gate_count_2d", path), f"{path}.gate_count_2d")
    n = _int(_require(design_doc, "n_dies", path), f"{path}.n_dies")
    if n < 1:
        raise OutOfRange(f"{path}.n_dies", "must be >= 1")
    node = _require(design_doc, "technology", path)
    ratios = design_doc.get("area_ratios")
    if ratios is None:
        ratios = [1.0] * n
    if len(ratios) != n:
        raise OutOfRange(f"{path}.area_ratios", f"expected {n} entries, got {len(ratios)}")
    weights = [_num(r, f"{path}.area_ratios[{i}]") for i, r in enumerate(ratios)]
    if any(w <= 0 for w in weights):
        raise OutOfRange(f"{path}.area_ratios", "ratios must be > 0")
    total_w = sum(weights)
    return [{"technology": node, "gate_count": total * w / total_w} for w in weights]


def _bad_die(i: int, path: str):
    raise OutOfRange(f"{path}.dies[{i}]", "expected an object")


def load_design(document: Mapping, registry: FixtureRegistry | None = None) -> DesignSpec:
    """Parse and validate a config document into a DesignSpec.

    Applies defaults (facing/stacking, X_signal=0, fixture wiring) and
    raises MissingField / InvalidCombination / OutOfRange with the
    offending document path on any violation.
    """
    registry = registry or FixtureRegistry.bundled()
    design_doc = _require(document, "design", "")
    if not isinstance(design_doc, Mapping):
        raise MissingField("design", "expected an object")
    overrides = document.get("technology_overrides", {}) or {}

    integration = _enum(_require(design_doc, "integration", "design"), Integration, "design.integration")
    raw_dies = _expand_dies(design_doc, "design")

    dies: list[DieSpec] = []
    for i, raw in enumerate(raw_dies):
        dpath = f"design.dies[{i}]"
        node = _require(raw, "technology", dpath)
        tech = _resolved_technology(str(node), overrides, registry, f"{dpath}.technology")
        wiring_doc = dict(raw.get("wiring") or {})
        base_wiring = registry.default_wiring(str(node))
        merged = {**dataclasses.asdict(base_wiring), **wiring_doc}
        wiring = _wiring_from_doc(merged, f"{dpath}.wiring")
        explicit_beol = raw.get("explicit_beol")
        dies.append(
            DieSpec(
                technology=tech,
                wiring=wiring,
                gate_count=_opt_num(raw, "gate_count", dpath),
                explicit_area=_opt_num(raw, "explicit_area", dpath),
                explicit_beol=None if explicit_beol is None else _int(explicit_beol, f"{dpath}.explicit_beol"),
            )
        )

    facing_raw = design_doc.get("facing")
    facing = (
        _default_facing(integration, len(dies))
        if facing_raw is None
        else _enum(facing_raw, Facing, "design.facing")
    )
    stacking_raw = design_doc.get("stacking")
    if stacking_raw is None:
        stacking = Stacking.D2W if integration.is_stacked_3d else Stacking.NA
    else:
        stacking = _enum(stacking_raw, Stacking, "design.stacking")

    usage = _usage_from_doc(_require(document, "usage", ""), "usage")
    signal = design_doc.get("signal_count_f2f", 0)

    design = DesignSpec(
        integration=integration,
        facing=facing,
        stacking=stacking,
        dies=tuple(dies),
        usage=usage,
        signal_count_f2f=_int(signal, "design.signal_count_f2f"),
    )
    validate_design(design)
    return design


def load_environment(document: Mapping, registry: FixtureRegistry | None = None) -> FabEnvironment:
    registry = registry or FixtureRegistry.bundled()
    base = registry.environment()
    env_doc = document.get("environment")
    if env_doc is None:
        return base
    if not isinstance(env_doc, Mapping):
        raise MissingField("environment", "expected an object")
    merged = {**dataclasses.asdict(base), **env_doc}
    env = _environment_from_doc(merged, "environment")
    validate_environment(env, "environment")
    return env


def load_profiles(document: Mapping, registry: FixtureRegistry | None = None) -> ProcessProfiles:
    registry = registry or FixtureRegistry.bundled()
    design_doc = document.get("design") or {}
    bonding_doc = {**dataclasses.asdict(registry.bonding()), **(design_doc.get("bonding") or {})}
    bonding = _bonding_from_doc(bonding_doc, "design.bonding")
    validate_bonding(bonding, "design.bonding")
    packaging_doc = {**dataclasses.asdict(registry.packaging()), **(design_doc.get("packaging") or {})}
    packaging = _packaging_from_doc(packaging_doc, "design.packaging")
    validate_packaging(packaging, "design.packaging")

    # always resolve an interposer process so DSE variants can switch to
    # si_interposer even when the base design uses another integration
    interposer_doc = design_doc.get("interposer") or {}
    node = str(interposer_doc.get("technology", "28nm"))
    overrides = document.get("technology_overrides", {}) or {}
    interposer_tech = _resolved_technology(node, overrides, registry, "design.interposer.technology")
    interposer_layers = _int(interposer_doc.get("beol_layers", 4), "design.interposer.beol_layers")
    if not 1 <= interposer_layers <= interposer_tech.max_beol_layers:
        raise OutOfRange(
            "design.interposer.beol_layers",
            f"must be in [1, {interposer_tech.max_beol_layers}] for {node}",
        )
    return ProcessProfiles(
        bonding=bonding,
        packaging=packaging,
        interposer_technology=interposer_tech,
        interposer_beol_layers=interposer_layers,
    )


def load_scenario(
    source: Mapping | str | Path,
    registry: FixtureRegistry | None = None,
    gamma: float = 1.0,
) -> Scenario:
    """Load a full evaluation scenario from a dict or a JSON file path."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as exc:
                raise ValidationError(str(source), f"not valid JSON: {exc}") from exc
    else:
        document = source
    if not isinstance(document, Mapping):
        raise MissingField("<root>", "config document must be a JSON object")
    registry = registry or FixtureRegistry.bundled()
    return Scenario(
        design=load_design(document, registry),
        profiles=load_profiles(document, registry),
        environment=load_environment(document, registry),
        gamma=gamma,
    )


def design_to_document(design: DesignSpec, profiles: ProcessProfiles, environment: FabEnvironment) -> dict:
    """Serialize a resolved scenario back into the config-document schema.

    Emits fully-resolved values (profiles inlined as technology_overrides)
    so that reloading reproduces a structurally identical scenario even if
    the fixture files change underneath.
    """
    overrides: dict[str, dict] = {}
    dies = []
    for die in design.dies:
        tech = die.technology
        fields = dataclasses.asdict(tech)
        fields.pop("node_name")
        fields["epa_beol_per_layer"] = list(tech.epa_beol_per_layer)
        overrides[tech.node_name] = fields
        entry: dict[str, Any] = {
            "technology": tech.node_name,
            "wiring": dataclasses.asdict(die.wiring),
        }
        if die.gate_count is not None:
            entry["gate_count"] = die.gate_count
        if die.explicit_area is not None:
            entry["explicit_area"] = die.explicit_area
        if die.explicit_beol is not None:
            entry["explicit_beol"] = die.explicit_beol
        dies.append(entry)

    design_doc: dict[str, Any] = {
        "integration": design.integration.value,
        "facing": design.facing.value,
        "stacking": design.stacking.value,
        "signal_count_f2f": design.signal_count_f2f,
        "dies": dies,
        "bonding": dataclasses.asdict(profiles.bonding),
        "packaging": dataclasses.asdict(profiles.packaging),
    }
    if profiles.interposer_technology is not None:
        tech = profiles.interposer_technology
        fields = dataclasses.asdict(tech)
        fields.pop("node_name")
        fields["epa_beol_per_layer"] = list(tech.epa_beol_per_layer)
        overrides[tech.node_name] = fields
        design_doc["interposer"] = {
            "technology": tech.node_name,
            "beol_layers": profiles.interposer_beol_layers,
        }
    usage = {k: v for k, v in dataclasses.asdict(design.usage).items() if v is not None}
    return {
        "design": design_doc,
        "technology_overrides": overrides,
        "environment": dataclasses.asdict(environment),
        "usage": usage,
    }

import json

import pytest

from carbon3d import (
    BondingProfile,
    DesignSpec,
    DieSpec,
    FabEnvironment,
    Facing,
    FixtureRegistry,
    Integration,
    PackagingProfile,
    ProcessProfiles,
    Scenario,
    Stacking,
    TechnologyProfile,
    UsageProfile,
    WiringParameters,
)


@pytest.fixture(scope="session")
def registry() -> FixtureRegistry:
    return FixtureRegistry.bundled()


@pytest.fixture(scope="session")
def usage() -> UsageProfile:
    return UsageProfile(t_app_hours=8766.0, t_exe_hours=26298.0, power_density=25.0, delay_s=1.0)


@pytest.fixture(scope="session")
def environment(registry) -> FabEnvironment:
    return registry.environment()


@pytest.fixture(scope="session")
def profiles(registry) -> ProcessProfiles:
    return ProcessProfiles(
        bonding=registry.bonding(),
        packaging=registry.packaging(),
        interposer_technology=registry.technology("28nm"),
        interposer_beol_layers=4,
    )


def make_tech(**overrides) -> TechnologyProfile:
    fields = dict(
        node_name="test",
        feature_size_cm=7e-7,
        gate_area_scaling=700.0,
        epa_feol=0.42,
        epa_mol=0.17,
        epa_beol_per_layer=tuple([1.1] * 14),
        max_beol_layers=14,
        gpa=0.30,
        mpa=0.50,
        defect_density_d0=0.12,
        cluster_alpha=3.0,
        tsv_pitch_cm=8e-4,
        io_overhead_ratio=0.1,
    )
    fields.update(overrides)
    return TechnologyProfile(**fields)


def make_wiring(**overrides) -> WiringParameters:
    fields = dict(rent_k=4.0, rent_p=0.6, rent_alpha=1.0, fanout=3.0,
                  wire_pitch_cm=14e-7, utilization=0.85)
    fields.update(overrides)
    return WiringParameters(**fields)


def make_design(
    integration=Integration.HYBRID_3D,
    n=2,
    gate_count=1e9,
    tech=None,
    wiring=None,
    usage=None,
    facing=None,
    stacking=None,
    signal_count_f2f=0,
    explicit_areas=None,
    explicit_beol=None,
) -> DesignSpec:
    tech = tech or make_tech()
    wiring = wiring or make_wiring()
    usage = usage or UsageProfile(t_app_hours=8766.0, t_exe_hours=26298.0, power_density=25.0)
    if integration is Integration.MONO_2D:
        n = 1
    dies = []
    for i in range(n):
        dies.append(
            DieSpec(
                technology=tech,
                wiring=wiring,
                gate_count=None if explicit_areas else gate_count / n,
                explicit_area=explicit_areas[i] if explicit_areas else None,
                explicit_beol=explicit_beol,
            )
        )
    if facing is None:
        if integration in (Integration.MICRO_3D, Integration.HYBRID_3D):
            facing = Facing.F2F if n == 2 else Facing.F2B
        elif integration is Integration.M3D:
            facing = Facing.F2B
        else:
            facing = Facing.NA
    if stacking is None:
        stacking = Stacking.D2W if integration in (Integration.MICRO_3D, Integration.HYBRID_3D) else Stacking.NA
    return DesignSpec(
        integration=integration,
        facing=facing,
        stacking=stacking,
        dies=tuple(dies),
        usage=usage,
        signal_count_f2f=signal_count_f2f,
    )


def make_profiles(**overrides) -> ProcessProfiles:
    bonding = BondingProfile(
        epa_d2w=1.83, epa_w2w=1.20, cpa_bonding=0.10, cpa_rdl=0.60,
        bond_yield=0.995, rdl_yield=0.85, interposer_yield=None,
    )
    packaging = PackagingProfile(cpa_packaging=0.10, s_package_3d=1.5,
                                 s_package_25d=1.3, s_substrate_25d=1.1)
    fields = dict(bonding=bonding, packaging=packaging,
                  interposer_technology=make_tech(node_name="interposer", defect_density_d0=0.05),
                  interposer_beol_layers=4)
    fields.update(overrides)
    return ProcessProfiles(**fields)


def make_env(**overrides) -> FabEnvironment:
    fields = dict(ci_fab=0.365, ci_use=0.365, ci_bonding=0.365, wafer_diameter_cm=30.0)
    fields.update(overrides)
    return FabEnvironment(**fields)


def make_scenario(design=None, gamma=1.0, **design_kw) -> Scenario:
    return Scenario(
        design=design or make_design(**design_kw),
        profiles=make_profiles(),
        environment=make_env(),
        gamma=gamma,
    )


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return path


def basic_document(**design_overrides):
    design = {
        "integration": "hybrid_3d",
        "facing": "f2f",
        "stacking": "d2w",
        "dies": [
            {"technology": "7nm", "gate_count": 5e8},
            {"technology": "7nm", "gate_count": 5e8},
        ],
    }
    design.update(design_overrides)
    return {
        "design": design,
        "usage": {"t_app_hours": 8766, "t_exe_hours": 26298, "power_density": 25.0, "delay_s": 1.0},
    }

import dataclasses
import warnings

import pytest

from carbon3d import (
    Facing,
    FixtureRegistry,
    Integration,
    Stacking,
    design_to_document,
    load_design,
    load_environment,
    load_profiles,
    load_scenario,
    resolve_technology,
)
from carbon3d.errors import (
    CarbonModelWarning,
    InvalidCombination,
    MissingField,
    OutOfRange,
    UnknownNode,
    ValidationError,
)
from carbon3d.params import SURVEYED, validate_design, validate_technology, validate_wiring

from conftest import basic_document, make_design, write_config


class TestLoadDesign:
    def test_minimal_hybrid_f2f(self):
        design = load_design(basic_document())
        assert design.integration is Integration.HYBRID_3D
        assert design.facing is Facing.F2F
        assert design.stacking is Stacking.D2W
        assert len(design.dies) == 2
        assert design.signal_count_f2f == 0

    def test_f2f_with_three_dies_rejected(self):
        doc = basic_document(dies=[{"technology": "7nm", "gate_count": 1e8}] * 3)
        with pytest.raises(InvalidCombination) as exc:
            load_design(doc)
        assert "facing" in str(exc.value)

    def test_die_without_size_information(self):
        doc = basic_document(dies=[{"technology": "7nm"}, {"technology": "7nm", "gate_count": 1e8}])
        with pytest.raises(MissingField) as exc:
            load_design(doc)
        assert "dies[0]" in str(exc.value)

    def test_defaults_applied(self):
        doc = basic_document()
        del doc["design"]["facing"], doc["design"]["stacking"]
        design = load_design(doc)
        assert design.facing is Facing.F2F       # 2 dies
        assert design.stacking is Stacking.D2W

    def test_f2b_default_for_deeper_stacks(self):
        doc = basic_document(dies=[{"technology": "7nm", "gate_count": 1e8}] * 3)
        del doc["design"]["facing"]
        design = load_design(doc)
        assert design.facing is Facing.F2B

    def test_facing_rejected_for_25d(self):
        doc = basic_document(integration="mcm")
        with pytest.raises(InvalidCombination):
            load_design(doc)

    def test_mono2d_wants_one_die(self):
        doc = basic_document(integration="mono_2d", facing=None, stacking=None)
        with pytest.raises(InvalidCombination):
            load_design(doc)

    def test_m3d_mixed_nodes_rejected(self):
        doc = basic_document(
            integration="m3d", facing="f2b", stacking=None,
            dies=[{"technology": "7nm", "gate_count": 5e8},
                  {"technology": "5nm", "gate_count": 5e8}],
        )
        with pytest.raises(InvalidCombination):
            load_design(doc)

    def test_gate_count_2d_expansion(self):
        doc = basic_document()
        doc["design"].pop("dies")
        doc["design"].update({"gate_count_2d": 1e9, "n_dies": 2, "technology": "7nm"})
        design = load_design(doc)
        assert [d.gate_count for d in design.dies] == [5e8, 5e8]

    def test_gate_count_2d_with_ratios(self):
        doc = basic_document()
        doc["design"].pop("dies")
        doc["design"].update({"gate_count_2d": 1e9, "n_dies": 2, "technology": "7nm",
                              "area_ratios": [3, 1]})
        design = load_design(doc)
        assert design.dies[0].gate_count == pytest.approx(7.5e8)
        assert design.dies[1].gate_count == pytest.approx(2.5e8)

    def test_unknown_integration_names_value(self):
        doc = basic_document(integration="origami")
        with pytest.raises(OutOfRange) as exc:
            load_design(doc)
        assert "origami" in str(exc.value)

    def test_explicit_beol_above_cap(self):
        doc = basic_document()
        doc["design"]["dies"][0]["explicit_beol"] = 99
        with pytest.raises(OutOfRange) as exc:
            load_design(doc)
        assert "explicit_beol" in str(exc.value)

    def test_usage_requires_exactly_one_energy_source(self):
        doc = basic_document()
        doc["usage"]["energy_override_kwh"] = 10.0
        with pytest.raises(InvalidCombination):
            load_design(doc)
        del doc["usage"]["energy_override_kwh"], doc["usage"]["power_density"]
        with pytest.raises(MissingField):
            load_design(doc)

    def test_t_app_bounded_by_t_exe(self):
        doc = basic_document()
        doc["usage"]["t_app_hours"] = 1e6
        with pytest.raises(OutOfRange):
            load_design(doc)

    def test_malformed_value_is_typed_error(self):
        doc = basic_document()
        doc["design"]["dies"][0]["gate_count"] = "many"
        with pytest.raises(ValidationError) as exc:
            load_design(doc)
        assert "dies[0]" in str(exc.value)

    def test_technology_override_applies(self):
        doc = basic_document()
        doc["technology_overrides"] = {"7nm": {"defect_density_d0": 0.42}}
        design = load_design(doc)
        assert design.dies[0].technology.defect_density_d0 == 0.42

    def test_surveyed_range_violation_warns_not_raises(self):
        doc = basic_document()
        doc["environment"] = {"ci_fab": 5.0}
        with pytest.warns(CarbonModelWarning):
            load_environment(doc)


class TestRegistry:
    def test_known_node_in_surveyed_range(self, registry):
        tech = resolve_technology("7nm", registry)
        lo, hi = SURVEYED["epa_feol"]
        assert lo <= tech.epa_feol <= hi

    def test_upper_bound_node(self, registry):
        assert resolve_technology("28nm", registry).node_name == "28nm"

    def test_unknown_node(self, registry):
        with pytest.raises(UnknownNode):
            resolve_technology("90nm", registry)

    def test_every_fixture_passes_invariants_silently(self, registry):
        with warnings.catch_warnings():
            warnings.simplefilter("error", CarbonModelWarning)
            for name in registry.node_names():
                validate_technology(registry.technology(name))
                validate_wiring(registry.default_wiring(name))
            registry.bonding()
            registry.packaging()
            registry.environment()

    def test_env_var_override(self, registry, tmp_path, monkeypatch):
        (tmp_path / "nodes").mkdir()
        (tmp_path / "nodes" / "7nm.json").write_text(
            (registry.root / "nodes" / "7nm.json").read_text()
        )
        monkeypatch.setenv("CARBON3D_FIXTURES", str(tmp_path))
        assert FixtureRegistry.bundled().node_names() == ["7nm"]


class TestRoundTrip:
    @pytest.mark.parametrize("integration", [
        "mono_2d", "micro_3d", "hybrid_3d", "m3d", "mcm",
        "info_chip_first", "info_chip_last", "si_interposer",
    ])
    def test_serialize_reload_identical(self, integration, registry):
        doc = basic_document()
        if integration == "mono_2d":
            doc["design"].update(integration=integration, facing=None, stacking=None,
                                 dies=[{"technology": "7nm", "gate_count": 1e9}])
        elif integration == "m3d":
            doc["design"].update(integration=integration, facing="f2b", stacking=None)
        elif integration in ("micro_3d", "hybrid_3d"):
            doc["design"].update(integration=integration)
        else:
            doc["design"].update(integration=integration, facing=None, stacking=None)
        design = load_design(doc, registry)
        profiles = load_profiles(doc, registry)
        env = load_environment(doc, registry)

        serialized = design_to_document(design, profiles, env)
        assert load_design(serialized, registry) == design
        assert load_profiles(serialized, registry) == profiles
        assert load_environment(serialized, registry) == env

    def test_round_trip_preserves_overrides(self, registry):
        doc = basic_document()
        doc["technology_overrides"] = {"7nm": {"gpa": 0.19}}
        doc["design"]["dies"][0]["explicit_beol"] = 5
        design = load_design(doc, registry)
        serialized = design_to_document(design, load_profiles(doc, registry), load_environment(doc, registry))
        assert load_design(serialized, registry) == design


class TestScenario:
    def test_load_scenario_from_file(self, tmp_path, registry):
        path = write_config(tmp_path, basic_document())
        scenario = load_scenario(path, registry, gamma=0.5)
        assert scenario.gamma == 0.5
        assert scenario.design.integration is Integration.HYBRID_3D

    def test_interposer_profile_defaults(self, registry):
        doc = basic_document(integration="si_interposer", facing=None, stacking=None)
        profiles = load_profiles(doc, registry)
        assert profiles.interposer_technology.node_name == "28nm"
        assert profiles.interposer_beol_layers == 4

    def test_validate_design_is_reusable(self):
        design = make_design()
        validate_design(design)
        bad = dataclasses.replace(design, dies=design.dies * 2)  # 4 dies but F2F
        with pytest.raises(InvalidCombination):
            validate_design(bad)


class TestValidationTotality:
    """Every malformed document must yield a typed error, never a partial spec."""

    def _mutations(self):
        def mut(fn):
            doc = basic_document()
            fn(doc)
            return doc

        return [
            {},
            {"design": None, "usage": {}},
            mut(lambda d: d["design"].update(integration="origami")),
            mut(lambda d: d["design"].update(integration=5)),
            mut(lambda d: d["design"].update(dies=[])),
            mut(lambda d: d["design"].update(dies="two please")),
            mut(lambda d: d["design"]["dies"][0].update(gate_count=-1)),
            mut(lambda d: d["design"]["dies"][0].update(gate_count="many")),
            mut(lambda d: d["design"]["dies"][0].update(technology=None)),
            mut(lambda d: d["design"]["dies"][0].update(explicit_beol=0)),
            mut(lambda d: d["design"].update(stacking="glue")),
            mut(lambda d: d["design"].update(signal_count_f2f=-5)),
            mut(lambda d: d["design"].update(signal_count_f2f=2.5)),
            mut(lambda d: d["usage"].update(delay_s=-1)),
            mut(lambda d: d["usage"].update(t_app_hours="soon")),
            mut(lambda d: d["usage"].update(t_app_hours=0)),
            mut(lambda d: d.update(usage=[1, 2, 3])),
            mut(lambda d: d.update(environment={"wafer_diameter_cm": 0})),
            mut(lambda d: d["design"].update(bonding={"bond_yield": 1.5})),
            mut(lambda d: d["design"].update(packaging={"s_package_3d": 0.5})),
            mut(lambda d: d["design"].update(interposer={"beol_layers": 99})),
            mut(lambda d: d.update(technology_overrides={"7nm": {"lambda": 1e-7}})),
            mut(lambda d: d.update(technology_overrides={"7nm": {"feature_size_cm": -1}})),
            mut(lambda d: d.update(technology_overrides={"7nm": {"max_beol_layers": 99}})),
            mut(lambda d: d["design"]["dies"][0].update(wiring={"rent_p": 1.5})),
        ]

    def test_every_mutation_is_a_typed_error(self, registry):
        from carbon3d.errors import CarbonModelError

        for i, doc in enumerate(self._mutations()):
            with pytest.raises(CarbonModelError):
                load_scenario(doc, registry)

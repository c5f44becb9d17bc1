import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbon3d import (
    Integration,
    Stacking,
    compose_25d,
    compose_3d,
    die_yield_negbin,
    stack_geometry,
    yield_context,
)
from carbon3d.errors import CardinalityMismatch

from conftest import make_design, make_profiles


class TestNegbin:
    def test_reference_point(self):
        # (1 + 0.1/3)^-3, frozen via tools/rederive_oracles.py
        assert die_yield_negbin(1.0, 0.1, 3.0) == pytest.approx(0.9063140, abs=5e-5)

    def test_defect_free(self):
        assert die_yield_negbin(1.0, 0.0, 3.0) == 1.0

    def test_zero_area(self):
        assert die_yield_negbin(0.0, 0.1, 3.0) == 1.0

    def test_poisson_limit(self):
        for ad in (0.05, 0.3, 1.0):
            assert die_yield_negbin(1.0, ad, 1e6) == pytest.approx(math.exp(-ad), abs=1e-4)

    @given(
        area=st.floats(min_value=0, max_value=20),
        d0=st.floats(min_value=0, max_value=1),
        alpha=st.floats(min_value=0.1, max_value=100),
    )
    def test_bounds(self, area, d0, alpha):
        y = die_yield_negbin(area, d0, alpha)
        assert 0.0 < y <= 1.0

    def test_monotonicity_in_alpha(self):
        # clustering helps: (1+x/a)^-a falls toward the Poisson limit as a grows
        ys = [die_yield_negbin(1.0, 0.2, a) for a in (0.5, 1, 3, 10, 100)]
        assert ys == sorted(ys, reverse=True)
        assert ys[-1] > math.exp(-0.2)

    def test_monotonicity_in_area_and_d0(self):
        ys = [die_yield_negbin(a, 0.2, 3.0) for a in (0.1, 0.5, 1, 2, 5)]
        assert ys == sorted(ys, reverse=True)
        ys = [die_yield_negbin(1.0, d, 3.0) for d in (0.01, 0.05, 0.2, 0.5)]
        assert ys == sorted(ys, reverse=True)


class TestCompose3d:
    def test_d2w_reference(self):
        design = make_design(Integration.HYBRID_3D, n=2, stacking=Stacking.D2W)
        ctx = compose_3d(design, [0.9, 0.9], [0.95])
        assert list(ctx.effective_die_y) == pytest.approx([0.855, 0.855], rel=1e-12)
        assert list(ctx.effective_bond_y) == pytest.approx([0.95], rel=1e-12)

    def test_w2w_reference(self):
        design = make_design(Integration.HYBRID_3D, n=2, stacking=Stacking.W2W)
        ctx = compose_3d(design, [0.9, 0.9], [0.95])
        expected = 0.9 * 0.9 * 0.95
        assert list(ctx.effective_die_y) == pytest.approx([expected] * 2, rel=1e-12)
        assert list(ctx.effective_bond_y) == pytest.approx([expected], rel=1e-12)

    def test_perfect_yield_fixed_point(self):
        for stacking in (Stacking.D2W, Stacking.W2W):
            design = make_design(Integration.HYBRID_3D, n=2, stacking=stacking)
            ctx = compose_3d(design, [1.0, 1.0], [1.0])
            assert all(y == 1.0 for y in ctx.effective_die_y + ctx.effective_bond_y)

    def test_bond_list_cardinality(self):
        design = make_design(Integration.HYBRID_3D, n=2)
        with pytest.raises(CardinalityMismatch):
            compose_3d(design, [0.9, 0.9], [0.95, 0.95])

    def test_w2w_never_beats_d2w(self):
        rng = random.Random(11)
        for _ in range(300):
            n = rng.randint(2, 5)
            d2w_design = make_design(Integration.HYBRID_3D, n=n, stacking=Stacking.D2W)
            w2w_design = make_design(Integration.HYBRID_3D, n=n, stacking=Stacking.W2W)
            die_y = [rng.uniform(0.5, 1.0) for _ in range(n)]
            bond_y = [rng.uniform(0.8, 1.0) for _ in range(n - 1)]
            d2w = compose_3d(d2w_design, die_y, bond_y)
            w2w = compose_3d(w2w_design, die_y, bond_y)
            for yw, yd in zip(w2w.effective_die_y, d2w.effective_die_y):
                assert yw <= yd * (1 + 1e-15)

    def test_effective_never_exceeds_standalone(self):
        design = make_design(Integration.HYBRID_3D, n=3, facing=None)
        ctx = compose_3d(design, [0.9, 0.8, 0.7], [0.95, 0.99])
        for eff, alone in zip(ctx.effective_die_y, ctx.standalone_die_y):
            assert eff <= alone


class TestCompose25d:
    def test_chip_first_reference(self):
        design = make_design(Integration.INFO_CHIP_FIRST, n=2)
        ctx = compose_25d(design, [0.9, 0.9], [], substrate_y=0.98)
        assert list(ctx.effective_die_y) == pytest.approx([0.882, 0.882], rel=1e-12)
        assert ctx.substrate_y == pytest.approx(0.98, rel=1e-12)

    def test_chip_last_reference(self):
        design = make_design(Integration.INFO_CHIP_LAST, n=2)
        ctx = compose_25d(design, [0.9, 0.9], [0.99, 0.99], substrate_y=0.95)
        assert list(ctx.effective_die_y) == pytest.approx([0.9 * 0.9801] * 2, rel=1e-12)
        assert ctx.substrate_y == pytest.approx(0.95 * 0.9801, rel=1e-12)
        assert list(ctx.effective_bond_y) == pytest.approx([0.9801] * 2, rel=1e-12)

    def test_mcm_identity(self):
        design = make_design(Integration.MCM, n=2)
        ctx = compose_25d(design, [0.9, 0.8], [])
        assert list(ctx.effective_die_y) == [0.9, 0.8]
        assert ctx.substrate_y == 1.0

    def test_chip_last_needs_one_bond_per_die(self):
        design = make_design(Integration.INFO_CHIP_LAST, n=2)
        with pytest.raises(CardinalityMismatch):
            compose_25d(design, [0.9, 0.9], [0.99], substrate_y=0.95)

    def test_chip_first_takes_no_bonds(self):
        design = make_design(Integration.INFO_CHIP_FIRST, n=2)
        with pytest.raises(CardinalityMismatch):
            compose_25d(design, [0.9, 0.9], [0.99], substrate_y=0.95)


class TestYieldContext:
    def test_m3d_single_die_of_combined_area(self):
        design = make_design(Integration.M3D, n=2, gate_count=2e9)
        profiles = make_profiles()
        geom = stack_geometry(design, profiles.packaging)
        ctx = yield_context(design, geom, profiles)
        tech = design.dies[0].technology
        combined = sum(g.total_area for g in geom.dies)
        expected = die_yield_negbin(combined, tech.defect_density_d0, tech.cluster_alpha)
        assert list(ctx.effective_die_y) == [expected, expected]
        assert ctx.standalone_bond_y == ()

    def test_interposer_yield_derived_from_area(self):
        design = make_design(Integration.SI_INTERPOSER, n=2, gate_count=2e9)
        profiles = make_profiles()
        geom = stack_geometry(design, profiles.packaging)
        ctx = yield_context(design, geom, profiles)
        itech = profiles.interposer_technology
        alone = die_yield_negbin(geom.substrate_area, itech.defect_density_d0, itech.cluster_alpha)
        bond_product = profiles.bonding.bond_yield ** 2
        assert ctx.substrate_y == pytest.approx(alone * bond_product, rel=1e-12)

    def test_mono2d_passthrough(self):
        design = make_design(Integration.MONO_2D, gate_count=1e9)
        profiles = make_profiles()
        geom = stack_geometry(design, profiles.packaging)
        ctx = yield_context(design, geom, profiles)
        assert ctx.effective_die_y == ctx.standalone_die_y
        assert ctx.substrate_y == 1.0

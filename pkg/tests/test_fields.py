from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dglab.errors import GeometryError, ParameterError
from dglab.fields import (
    Cylinder,
    GridField,
    GridSpec,
    build_coefficients,
    build_field,
    energy_integrals,
    masked_gradient,
    measure_level_set,
    oscillation,
    truncate,
)

SPEC = GridSpec.uniform(1, 1 / 16)
Q1 = Cylinder.standard(1.0)
QBAR1 = Cylinder.q_bar_1()


def _field_at(u: GridField, t: float, x: float) -> float:
    i = u.spec.time_index(t)
    j = int(np.argmin(abs(u.spec.x_centers() - x)))
    return float(u.values[i, j])


class TestLevelSets:
    def test_constant_one(self):
        u = build_field(SPEC, "constant", c=1.0)
        assert measure_level_set(u, Q1, "below", 0.0) == 0.0
        assert measure_level_set(u, Q1, "above", 0.5) == pytest.approx(2.0, abs=1e-12)

    def test_jump_on_q_bar(self):
        f = build_field(SPEC, "jump_counterexample")
        assert measure_level_set(f, QBAR1, "above", 1.0) == pytest.approx(2.0, abs=1e-12)
        assert measure_level_set(f, Q1, "above", 1.0) == 0.0

    def test_between_needs_ordered_levels(self):
        with pytest.raises(ParameterError):
            measure_level_set(build_field(SPEC, "constant"), Q1, "between", 0.5, 0.5)

    @settings(max_examples=40, deadline=None)
    @given(hnp.arrays(np.float64, SPEC.shape, elements=st.floats(-2, 2)), st.floats(-2, 2), st.floats(0.01, 2))
    def test_partition(self, vals, k, gap):
        u = GridField(SPEC, vals)
        l = k + gap
        total = sum(measure_level_set(u, Q1, kind, k, l) for kind in ("below", "between", "above"))
        cells = np.count_nonzero(SPEC.cylinder_mask(Q1))
        assert total == cells * SPEC.cell_volume

    @settings(max_examples=40, deadline=None)
    @given(hnp.arrays(np.float64, SPEC.shape, elements=st.floats(-2, 2)), st.floats(-2, 2), st.floats(-2, 2))
    def test_monotone_in_level(self, vals, a, b):
        u = GridField(SPEC, vals)
        lo, hi = sorted((a, b))
        assert measure_level_set(u, Q1, "below", lo) <= measure_level_set(u, Q1, "below", hi)
        assert measure_level_set(u, Q1, "above", lo) >= measure_level_set(u, Q1, "above", hi)


@pytest.mark.parametrize("value, expected", [(0.3, 0.3), (-1.0, 0.0), (7.0, 0.5)])
def test_truncate_branches(value, expected):
    u = build_field(SPEC, "constant", c=value)
    assert np.all(truncate(u, 0.0, 0.5).values == expected)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, SPEC.shape, elements=st.floats(-3, 3)), st.floats(-1, 1), st.floats(0.01, 2))
def test_truncation_contracts_gradient(vals, k, gap):
    u = GridField(SPEC, vals)
    w = truncate(u, k, k + gap).values
    assert w.min() >= 0 and w.max() <= gap + 1e-15
    mask = np.ones(SPEC.nx, dtype=bool)
    (gu,) = masked_gradient(u.values, mask, SPEC.dx)
    (gw,) = masked_gradient(w, mask, SPEC.dx)
    # forward differences contract exactly; centered averages inherit it
    assert np.all(np.abs(gw) <= np.abs(gu) + 1e-12)


class TestEnergyIntegrals:
    def test_constant_above_level(self):
        u = build_field(SPEC, "constant", c=0.75)
        l2, gr, lp = energy_integrals(u, Q1, 0.25, 1.0)
        vol = np.count_nonzero(SPEC.cylinder_mask(Q1)) * SPEC.cell_volume
        assert l2 == pytest.approx(0.25 * vol)
        assert gr == 0.0 and lp == pytest.approx(0.5 * vol)

    def test_at_level_all_zero(self):
        u = build_field(SPEC, "constant", c=0.4)
        assert energy_integrals(u, Q1, 0.4, 2.0) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("h", [1 / 32, 1 / 64, 1 / 128])
    def test_linear_profile_converges(self, h):
        spec = GridSpec.uniform(1, h)
        u = build_field(spec, "linear_x")
        l2, gr, _ = energy_integrals(u, Q1, 0.0, 1.0)
        assert l2 == pytest.approx(1 / 3, abs=2 * h)
        assert gr == pytest.approx(1.0, abs=2 * h)

    def test_additive_in_time(self):
        u = build_field(SPEC, "smooth_bump")
        whole = energy_integrals(u, Q1, 0.1, 1.5)
        a = energy_integrals(u, Cylinder(-1.0, -0.5, (0.0,), 1.0), 0.1, 1.5)
        b = energy_integrals(u, Cylinder(-0.5, 0.0, (0.0,), 1.0), 0.1, 1.5)
        assert whole[0] == pytest.approx(a[0] + b[0], rel=1e-12)
        assert whole[1] == pytest.approx(a[1] + b[1], rel=1e-12)

    def test_rejects_small_p(self):
        with pytest.raises(ParameterError):
            energy_integrals(build_field(SPEC, "constant"), Q1, 0.0, 0.5)


class TestOscillation:
    def test_constant(self):
        assert oscillation(build_field(SPEC, "constant", c=3.0), Q1) == 0.0

    @pytest.mark.parametrize("h", [1 / 16, 1 / 64])
    def test_linear(self, h):
        spec = GridSpec.uniform(1, h)
        assert oscillation(build_field(spec, "linear_x"), Q1) == pytest.approx(2.0, abs=2 * h)

    def test_jump(self):
        assert oscillation(build_field(SPEC, "jump_counterexample"), SPEC.domain) == 1.0

    def test_empty_cylinder(self):
        with pytest.raises(GeometryError):
            oscillation(build_field(SPEC, "constant"), Cylinder(-0.01, 0.0, (0.0,), 0.01))


class TestBuilders:
    @pytest.mark.parametrize("t, x, expected", [(-1.5, 0.0, 1.0), (-0.5, 0.0, 0.0)])
    def test_jump_values(self, t, x, expected):
        assert _field_at(build_field(SPEC, "jump_counterexample"), t, x) == expected

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            build_field(SPEC, "nonsense")

    def test_degenerate_checkerboard(self):
        c = build_coefficients(SPEC, "checkerboard", lam=1.5, Lam=1.5, seed=3)
        assert np.all(c.A == 1.5)

    def test_checkerboard_is_seeded(self):
        a = build_coefficients(SPEC, "checkerboard", lam=1, Lam=2, seed=11)
        b = build_coefficients(SPEC, "checkerboard", lam=1, Lam=2, seed=11)
        c = build_coefficients(SPEC, "checkerboard", lam=1, Lam=2, seed=12)
        assert np.array_equal(a.A, b.A)
        assert not np.array_equal(a.A, c.A)
        assert set(np.unique(a.A)) == {1.0, 2.0}

    def test_checkerboard_needs_seed(self):
        with pytest.raises(ParameterError):
            build_coefficients(SPEC, "checkerboard", lam=1, Lam=2)

    def test_smooth_within_bounds(self):
        c = build_coefficients(SPEC, "smooth", lam=0.5, Lam=3.0)
        assert c.A.min() >= 0.5 - 1e-12 and c.A.max() <= 3.0 + 1e-12

    def test_ellipticity_enforced(self):
        A = np.full(SPEC.shape + (1, 1), 5.0)
        from dglab.fields import CoefficientField

        with pytest.raises(ParameterError):
            CoefficientField(SPEC, A, np.zeros(SPEC.shape + (1,)), np.zeros(SPEC.shape), lam=1.0, Lam=2.0)

    def test_two_dimensional_grid(self):
        spec = GridSpec.uniform(2, 1 / 4, 1 / 4)
        u = build_field(spec, "linear_x")
        assert u.values.shape == (16, 16, 16)
        assert measure_level_set(u, Cylinder.standard(1.0, d=2), "above", 2.0) == 0.0


def test_values_are_read_only():
    u = build_field(SPEC, "constant", c=1.0)
    with pytest.raises(ValueError):
        u.values[0, 0] = 2.0


def test_non_finite_rejected():
    vals = np.zeros(SPEC.shape)
    vals[0, 0] = np.nan
    with pytest.raises(ParameterError):
        GridField(SPEC, vals)

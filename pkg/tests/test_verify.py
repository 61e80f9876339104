from __future__ import annotations

import math

import numpy as np
import pytest

from dglab.constants import DgParams, dg_constants_from_pde, full_chain
from dglab.corpus import CORPUS_PDE, JUMP_DG
from dglab.errors import ParameterError, PreconditionError
from dglab.fields import Cylinder, GridSpec, build_coefficients, build_field, slice_from_profile
from dglab.io import dumps_json
from dglab.solver import SolveConfig, corpus_field, sine_modes, solve
from dglab.verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    SKIPPED,
    IvlOrientation,
    check_close_times,
    check_dg_membership,
    check_first_lemma_iteration,
    check_ivl_h1,
    check_ivl_parabolic,
    estimate_holder,
    holder_center,
    lowering_inputs,
    run_lowering_max,
)

SPEC = GridSpec.uniform(1, 1 / 32)
DG = DgParams(1.0, 1.0, 1.0, 1.0)
CHAIN = full_chain(1, DG)
CORPUS_DG = dg_constants_from_pde(CORPUS_PDE)
CORPUS_CHAIN = full_chain(1, CORPUS_DG)


@pytest.fixture(scope="module")
def solver_field():
    return corpus_field(2024, h=1 / 32)


class TestDgMembership:
    def test_zero_field(self):
        r = check_dg_membership(build_field(SPEC, "constant"), DG, n_samples=50)
        assert r.verdict == PASS and r.min_margin >= 0

    def test_downward_jump_after_the_drop(self):
        f = build_field(SPEC, "jump_counterexample")
        samples = [{"k": 0.5, "s": s, "t": t, "r": 0.5, "R": 1.0, "x0": 0.0}
                   for s in (-0.9, -0.6) for t in (-0.5, -0.1)]
        r = check_dg_membership(f, JUMP_DG, samples=samples)
        assert r.verdict == PASS
        assert all(s.lhs == 0.0 for s in r.samples)

    @pytest.mark.parametrize("h", [1 / 32, 1 / 64])
    def test_upward_jump_fails(self, h):
        spec = GridSpec.uniform(1, h)
        f = build_field(spec, "jump_counterexample")
        samples = [{"k": -0.5, "s": -1.5, "t": -1.0 + spec.dt / 2, "r": 0.5, "R": 1.0, "x0": 0.0}]
        r = check_dg_membership(-f, JUMP_DG, samples=samples)
        assert r.verdict == FAIL and r.min_margin < -r.tolerance

    def test_solver_field_passes(self, solver_field):
        r = check_dg_membership(solver_field, CORPUS_DG, n_samples=100, seed=3)
        assert r.verdict == PASS
        assert r.tolerance == pytest.approx(10 * (2 / 32) * max(abs(s.lhs) for s in r.samples))

    def test_minus_sign(self, solver_field):
        assert check_dg_membership(solver_field, CORPUS_DG, n_samples=50, sign="-").verdict == PASS

    def test_reproducible(self, solver_field):
        a = check_dg_membership(solver_field, CORPUS_DG, n_samples=30, seed=9)
        b = check_dg_membership(solver_field, CORPUS_DG, n_samples=30, seed=9)
        assert dumps_json(a.to_dict()) == dumps_json(b.to_dict())
        assert a.to_csv() == b.to_csv()

    def test_bad_sign(self):
        with pytest.raises(ParameterError):
            check_dg_membership(build_field(SPEC, "constant"), DG, sign="*")

    def test_two_dimensional(self):
        spec = GridSpec.uniform(2, 1 / 8)
        u = solve(SolveConfig(build_coefficients(spec), initial=sine_modes(spec, [1.0]), boundary=0.0))
        dg = dg_constants_from_pde(type(CORPUS_PDE)(1.0, 1.0, 4.0, 0.0, d=2))
        assert check_dg_membership(u, dg, n_samples=20, seed=1).verdict == PASS


class TestFirstLemma:
    def test_zero(self):
        r = check_first_lemma_iteration(build_field(SPEC, "constant"), CHAIN)
        assert r.verdict == PASS and r.details["U"] == [0.0] * 21

    def test_large_constant_is_skipped(self):
        r = check_first_lemma_iteration(build_field(SPEC, "constant", c=0.6), CHAIN)
        assert r.verdict == SKIPPED
        q1_vol = np.count_nonzero(SPEC.cylinder_mask(Cylinder.standard(1.0))) * SPEC.cell_volume
        assert r.details["U"][0] == pytest.approx(0.36 * q1_vol)

    def test_tiny_amplitude_solution(self):
        eps = 1e-25
        u = solve(SolveConfig(build_coefficients(SPEC), initial=sine_modes(SPEC, [eps]), boundary=0.0))
        r = check_first_lemma_iteration(u, CHAIN)
        assert r.details["U"][0] <= CHAIN.delta
        assert r.verdict == PASS
        assert u.max_on(Cylinder.standard(0.5)) <= 0.5

    def test_energies_nonincreasing(self, solver_field):
        U = check_first_lemma_iteration(solver_field, CORPUS_CHAIN).details["U"]
        assert all(b <= a for a, b in zip(U, U[1:]))


class TestIvlH1:
    def test_linear(self):
        spec = GridSpec.uniform(1, 1 / 64)
        r = check_ivl_h1(slice_from_profile(spec, spec.x_centers()), -0.5, 0.5, 1.0)
        s = r.samples[0]
        assert s.lhs == pytest.approx(0.25, abs=4 * spec.h)
        # |B_1| = 2, |{-1/2<x<1/2}| = 1, and grad (x+1/2)_+ = 1 on (-1/2, 1) so its L2 norm is sqrt(3/2)
        assert s.rhs == pytest.approx(2 * math.sqrt(1.5), abs=4 * spec.h)
        assert r.verdict == PASS

    def test_constant(self):
        r = check_ivl_h1(slice_from_profile(SPEC, np.full(SPEC.nx, 0.3)), 0.0, 0.5)
        assert r.samples[0].lhs == 0.0 and r.verdict == PASS

    def test_sharp_step_has_no_intermediate_cells(self):
        x = SPEC.x_centers()
        r = check_ivl_h1(slice_from_profile(SPEC, (x > 0).astype(float)), 0.1, 0.9)
        assert r.details["mid"] == 0.0 and r.verdict == FAIL

    @pytest.mark.parametrize("h", [1 / 32, 1 / 64, 1 / 128])
    def test_resolved_step(self, h):
        spec = GridSpec.uniform(1, h)
        x = spec.x_centers()
        ramp = np.clip(x / (2 * h) + 0.5, 0.0, 1.0)
        r = check_ivl_h1(slice_from_profile(spec, ramp), 0.1, 0.9)
        assert r.verdict == PASS
        assert r.details["mid"] == pytest.approx(2 * h)

    def test_ball_must_fit(self):
        with pytest.raises(ParameterError):
            check_ivl_h1(slice_from_profile(SPEC, SPEC.x_centers()), 0.0, 0.5, R=1.5, center=(1.0,))


class TestCloseTimes:
    def test_constant(self):
        r = check_close_times(build_field(SPEC, "constant", c=0.2), DG, 0.0, 0.5, (-1.5, -1.0, -0.5))
        assert r.samples[0].lhs == 0.0 and r.verdict == PASS

    def test_jump(self):
        f = build_field(SPEC, "jump_counterexample")
        r = check_close_times(f, JUMP_DG, 0.0, 1.0, [(-1.5, -0.9, -0.2), (-1.9, -0.5, -0.1)])
        assert all(s.lhs == 0.0 for s in r.samples) and r.verdict == PASS

    def test_solver_field(self, solver_field):
        r = check_close_times(solver_field, CORPUS_DG, 0.0, 0.5, [(-1.9, -1.0, -0.1), (-1.2, -1.0, -0.8)])
        assert r.verdict == PASS

    @pytest.mark.parametrize("times", [(-1.0, -1.5, -0.5), (-2.5, -1.0, -0.5)])
    def test_order_enforced(self, times):
        with pytest.raises(ParameterError):
            check_close_times(build_field(SPEC, "constant"), DG, 0.0, 0.5, times)

    def test_requires_bounded(self):
        with pytest.raises(PreconditionError):
            check_close_times(build_field(SPEC, "constant", c=2.0), DG, 0.0, 0.5, (-1.5, -1.0, -0.5))


class TestIvlParabolic:
    @pytest.mark.parametrize("h", [1 / 32, 1 / 64, 1 / 128])
    def test_jump_orientations(self, h):
        f = build_field(GridSpec.uniform(1, h), "jump_counterexample")
        can = check_ivl_parabolic(f, JUMP_DG, 0.0, 1.0, IvlOrientation.canonical())
        swp = check_ivl_parabolic(f, JUMP_DG, 0.0, 1.0, IvlOrientation.as_printed())
        assert can.samples[0].lhs == 0.0 and can.verdict == PASS
        assert (swp.samples[0].lhs, swp.samples[0].rhs) == (4.0, 0.0)
        assert swp.verdict == FAIL and swp.tolerance == 0.0 and swp.details["definitive_violation"]

    @pytest.mark.parametrize("name", ["canonical", "as-printed"])
    def test_half_constant(self, name):
        u = build_field(SPEC, "constant", c=0.5)
        r = check_ivl_parabolic(u, DG, 0.0, 1.0, IvlOrientation.named(name))
        assert r.samples[0].lhs == 0.0 and r.verdict == PASS

    def test_solver_field_with_trace(self, solver_field):
        r = check_ivl_parabolic(solver_field, CORPUS_DG, 0.0, 0.5, chain=CORPUS_CHAIN, trace=True)
        assert r.verdict == PASS
        tr = r.details["pigeonhole"]
        assert tr["n"] == math.floor(2 / tr["m"] ** (CORPUS_DG.p / (4 * CORPUS_DG.p + 2))) + 1
        if tr["p"] is not None:
            assert tr["const1_holds"] and tr["const2_holds"]

    def test_levels_validated(self):
        with pytest.raises(ParameterError):
            check_ivl_parabolic(build_field(SPEC, "constant"), DG, 0.5, 0.5)


class TestLoweringMax:
    def test_zero(self):
        k, bound, r = run_lowering_max(build_field(SPEC, "constant"), DG, CHAIN)
        assert (k, bound, r.verdict) == (0, 0.5, PASS)

    def test_one_fails_hypothesis(self):
        with pytest.raises(PreconditionError):
            run_lowering_max(build_field(SPEC, "constant", c=1.0), DG, CHAIN)

    def test_solver_field(self, solver_field):
        v = lowering_inputs(solver_field)
        k, bound, r = run_lowering_max(v, CORPUS_DG, CORPUS_CHAIN)
        assert k is not None and r.verdict == PASS
        assert v.max_on(Cylinder.standard(0.5)) <= bound + r.tolerance


class TestHolder:
    def test_constant(self):
        theta, alpha, r = estimate_holder(build_field(SPEC, "constant", c=0.3), (0.0, 0.0), 4, CHAIN)
        assert alpha == math.inf and r.verdict == PASS

    def test_linear(self):
        spec = GridSpec.uniform(1, 1 / 256, 1 / 64)
        theta, alpha, r = estimate_holder(build_field(spec, "linear_x"), (0.0, 0.0), 3, CHAIN)
        assert theta == pytest.approx(0.5, abs=0.02)
        assert alpha == pytest.approx(1.0, abs=0.06)
        assert r.verdict == PASS

    def test_heat_solution(self):
        u = build_field(GridSpec.uniform(1, 1 / 64), "smooth_bump")
        _, alpha, r = estimate_holder(u, holder_center(u), 4, CHAIN)
        assert r.verdict == PASS and alpha > 0

    def test_noise_only_is_inconclusive(self):
        u = build_field(SPEC, "linear_x", slope=1e-3)
        assert estimate_holder(u, (0.0, 0.0), 4, CHAIN)[2].verdict == INCONCLUSIVE

    def test_solver_field(self, solver_field):
        _, _, r = estimate_holder(solver_field, holder_center(solver_field), 4, CORPUS_CHAIN)
        assert r.verdict == PASS

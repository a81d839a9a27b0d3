from fractions import Fraction

import numpy as np
import pytest

from orbisol import (
    DataError,
    DiagonalTensor,
    InitialData,
    abelian_skeleton,
    build_Lm,
    build_Lm_model,
    build_Ltilde,
    check_initial_conditions,
    compute_D,
    jet_residual,
    kernel_basis,
    planted_root_skeleton,
    solve_series,
    sphere_skeleton,
    stiefel_codim2_counts_skeleton,
)
from orbisol.recursion import finite_difference_Lm

from conftest import make_data
from oracles import cigar_profiles, sine_cone_profiles


class TestOperators:
    def test_Ltilde_values(self):
        # direct substitutions of the closed formula
        assert build_Ltilde(1, 0) == pytest.approx(1.5)
        assert build_Ltilde(2, 0) == pytest.approx(2.0)
        assert build_Ltilde(5, 3) == pytest.approx(8.0)
        assert build_Ltilde(5, 3, exact=True) == Fraction(8)

    def test_Ltilde_positive_grid(self):
        for k in range(1, 51):
            for m in range(0, 101):
                assert build_Ltilde(k, m) > 0.0

    def test_model_plus_trace_free_annihilated_at_zero(self):
        spec = stiefel_codim2_counts_skeleton()
        L0 = build_Lm_model(spec, 0).matrix
        xi = np.array([1.0, -1.0, 0.0, 0.0])  # trace-free plus direction
        assert np.allclose(L0 @ xi, 0.0, atol=1e-12)

    def test_model_plus_eigenvalue_grid(self):
        # trace-free plus eigenvalue m(1 + (k+1)/(m+2)); zero iff m = 0
        spec = stiefel_codim2_counts_skeleton()
        k = spec.k
        xi = np.array([1.0, -1.0, 0.0, 0.0])
        for m in range(0, 9):
            got = build_Lm_model(spec, m).matrix @ xi
            lam = m * (1 + (k + 1) / (m + 2))
            assert np.allclose(got, lam * xi, atol=1e-12)
            assert (lam == 0) == (m == 0)

    def test_minus_eigenvalue_formula(self):
        # lambda_C = (m+1+k)(m+2) makes the minus row vanish
        k, m = 2, 3
        lam = (m + 1 + k) * (m + 2)
        spec = planted_root_skeleton(k, lam)
        L = build_Lm(spec, m).matrix
        xi = np.array([0.0, 1.0])
        assert np.allclose((L @ xi)[1], 0.0, atol=1e-12)

    def test_minus_eigenvalue_zero_casimir(self):
        # k=2, m=2, lambda=0: eigenvalue m+1+k = 5
        spec = planted_root_skeleton(2, 0.0)
        L = build_Lm(spec, 2).matrix
        assert L[1, 1] == pytest.approx(5.0)

    def test_fd_cross_validation(self, circle, sphere2, sphere3, stiefel4):
        for spec in (circle, sphere2, sphere3, stiefel4):
            for m in range(0, 7):
                closed = build_Lm(spec, m).matrix
                fd = finite_difference_Lm(spec, m).matrix
                assert np.max(np.abs(closed - fd)) < 1e-6

    def test_model_equals_exact_on_scalar_geometries(self, circle, sphere3):
        # single plus summand, no minus: the closed scalar model is exact
        for spec in (circle, sphere3):
            for m in range(0, 5):
                assert np.allclose(
                    build_Lm(spec, m).matrix, build_Lm_model(spec, m).matrix,
                    atol=1e-11,
                )


class TestKernelBasis:
    def test_large_m_empty(self, stiefel4):
        for m in range(3, 12):
            assert kernel_basis(stiefel4, m) == []

    def test_single_plus_summand_empty(self, sphere3):
        assert kernel_basis(sphere3, 0) == []

    def test_two_plus_summands_relative_direction(self):
        spec = stiefel_codim2_counts_skeleton()
        vecs = kernel_basis(spec, 0)
        assert len(vecs) == 2
        v0 = vecs[0].values  # pure plus vector sorts first
        assert np.allclose(v0[2:], 0.0, atol=1e-12)
        assert abs(v0[0] + v0[1]) < 1e-12  # relative trace-free
        # weighted orthonormality
        d = spec.dims.astype(float)
        for a in vecs:
            assert np.isclose(np.sum(d * a.values * a.values), 1.0)
        assert abs(np.sum(d * vecs[0].values * vecs[1].values)) < 1e-12

    def test_stiefel_exact_kernel_is_minus_direction(self, stiefel4):
        vecs = kernel_basis(stiefel4, 0)
        assert len(vecs) == 1
        v = vecs[0].values
        assert np.allclose(v[:2], 0.0, atol=1e-12)
        assert v[2] == pytest.approx(v[3])
        assert v[4] == pytest.approx(-2 * v[2])


class TestInitialData:
    def test_trace_free_enforced(self, stiefel4):
        bad = DiagonalTensor(np.array([0, 0, 0.1, 0.1, 0.1]), stiefel4)
        with pytest.raises(DataError, match="minimal"):
            InitialData(epsilon=0.0, L1=bad, u2=-1.0)

    def test_plus_support_rejected(self, stiefel4):
        bad = DiagonalTensor(np.array([0.1, -0.1, 0, 0, 0]), stiefel4)
        with pytest.raises(DataError):
            InitialData(epsilon=0.0, L1=bad, u2=-1.0)

    def test_trace_free_minus_ok(self, stiefel4):
        ok = DiagonalTensor(np.array([0, 0, 0.1, 0.1, -0.2]), stiefel4)
        InitialData(epsilon=0.0, L1=ok, u2=-1.0)


class TestInitialConditions:
    def test_bryant(self, sphere3, bryant_data):
        rep = check_initial_conditions(sphere3, bryant_data)
        assert rep.passed
        assert rep.a_at_identity < 1e-12

    def test_scalar_potential_condition_any_u2(self, sphere2):
        for u2 in (-3.0, 0.5, 2.0):
            data = make_data(sphere2, 1.0, u2)
            rep = check_initial_conditions(sphere2, data)
            assert rep.da_tilde_plus_B_tilde < 1e-10

    def test_stiefel_shape_operator_admissibility(self, stiefel4):
        from orbisol import InitialConditionViolated

        # the compatible trace-free direction is the one on which the
        # endomorphism Casimir acts with eigenvalue k: (1, -1) across the
        # standard-representation pair
        good = DiagonalTensor(np.array([0, 0, 0.05, -0.05, 0.0]), stiefel4)
        rep = check_initial_conditions(
            stiefel4, InitialData(epsilon=0.5, L1=good, u2=-0.3, order=6)
        )
        assert rep.passed
        # the (1, 1, -2) direction has eigenvalue 2(k+1) != k and cannot come
        # from first-order equivariant data; the check must reject it
        bad = DiagonalTensor(np.array([0, 0, 0.05, 0.05, -0.1]), stiefel4)
        with pytest.raises(InitialConditionViolated):
            check_initial_conditions(
                stiefel4, InitialData(epsilon=0.5, L1=bad, u2=-0.3, order=6)
            )


class TestComputeD:
    def test_gaussian_zero(self, sphere3):
        data = make_data(sphere3, 2.0, -1.0, order=8)
        sol = solve_series(sphere3, data)
        for m in range(0, 5):
            D, Dt = compute_D(sphere3, data, sol, m)
            assert D.norm() < 1e-12
            assert abs(Dt) < 1e-12

    def test_cigar_u3_zero(self, circle, cigar_data):
        sol = solve_series(circle, cigar_data)
        _, Dt0 = compute_D(circle, cigar_data, sol, 0)
        assert abs(Dt0) < 1e-14  # reproduces u_3 = 0

    def test_normalization_against_operators(self, circle, cigar_data):
        # L_m x_{m+2} = D_m and Ltilde_m u_{m+3} = Dt_m in jet normalization
        sol = solve_series(circle, cigar_data)
        for m in range(0, 6):
            D, Dt = compute_D(circle, cigar_data, sol, m)
            L = build_Lm(circle, m).matrix
            lhs = L @ sol.x_jet[m + 2].values.astype(float)
            assert np.allclose(lhs, D.values.astype(float), atol=1e-10)
            lt = build_Ltilde(circle.k, m)
            assert np.isclose(lt * float(sol.u_jet[m + 3]), float(Dt), atol=1e-10)


class TestSolveSeries:
    def test_gaussian_flat_exact(self):
        for k in (1, 2, 3):
            spec = sphere_skeleton(k)
            for eps in (-2.0, 2.0):
                data = make_data(spec, eps, -eps / 2.0, order=10)
                sol = solve_series(spec, data)
                for m in range(1, 11):
                    assert sol.x_jet[m].norm() == 0.0
                # u = -eps t^2 / 4 exactly
                assert float(sol.u_raw[2]) == pytest.approx(-eps / 4.0)
                assert all(float(u) == 0.0 for u in sol.u_raw[3:])

    def test_cigar_matches_oracle(self, circle, cigar_data):
        x_orc, u_orc = cigar_profiles(10)
        sol = solve_series(circle, cigar_data)
        for m in range(11):
            assert float(sol.x_raw[m].values[0]) == pytest.approx(
                float(x_orc[m]), abs=1e-12
            )
            assert float(sol.u_raw[m]) == pytest.approx(float(u_orc[m]), abs=1e-12)

    def test_cigar_exact_mode(self, circle):
        data = make_data(circle, 0, -2, order=10, exact=True)
        x_orc, u_orc = cigar_profiles(10)
        sol = solve_series(circle, data)
        for m in range(11):
            assert sol.x_raw[m].values[0] == x_orc[m]
            assert sol.u_raw[m] == u_orc[m]

    def test_sine_cone(self, sphere2, sphere3):
        for n, spec in ((2, sphere2), (3, sphere3)):
            x_orc = sine_cone_profiles(n, 10)
            data = make_data(spec, -2.0 * n, 0.0, order=10)
            sol = solve_series(spec, data)
            assert all(float(u) == 0.0 for u in sol.u_raw)
            for m in range(11):
                assert float(sol.x_raw[m].values[0]) == pytest.approx(
                    float(x_orc[m]), abs=1e-9
                )

    def test_deterministic(self, sphere3, bryant_data):
        a = solve_series(sphere3, bryant_data)
        b = solve_series(sphere3, bryant_data)
        for xa, xb in zip(a.x_raw, b.x_raw):
            assert np.array_equal(xa.values, xb.values)
        assert a.u_raw == b.u_raw

    def test_jet_contact(self, sphere3, stiefel4, bryant_data):
        cases = [
            (sphere3, bryant_data),
            (stiefel4, make_data(stiefel4, 0.0, -1.0)),
        ]
        for spec, data in cases:
            sol = solve_series(spec, data)
            rx, ru = jet_residual(spec, data, sol)
            scale = max(1.0, sol.x_series().max_abs())
            assert rx.max_abs() < 1e-9 * scale
            assert ru.max_abs() < 1e-9 * scale

    def test_odd_u_snapped(self, sphere3, bryant_data):
        sol = solve_series(sphere3, bryant_data)
        assert all(float(sol.u_raw[m]) == 0.0 for m in range(3, 13, 2))
        assert max(sol.parity_residuals.values()) < 1e-9

    def test_consistency_residuals_tiny(self, stiefel4):
        data = make_data(stiefel4, 0.0, -1.0)
        sol = solve_series(stiefel4, data)
        assert sol.max_consistency_residual() < 1e-12

    def test_kernel_injection_linearity(self, stiefel4):
        base = make_data(stiefel4, 0.0, -1.0)
        d1 = make_data(stiefel4, 0.0, -1.0, kernel_params={0: [0.2]})
        d2 = make_data(stiefel4, 0.0, -1.0, kernel_params={0: [0.5]})
        s0, s1, s2 = (solve_series(stiefel4, d) for d in (base, d1, d2))
        vec = kernel_basis(stiefel4, 0)[0].values
        assert np.allclose(s1.x_raw[2].values - s0.x_raw[2].values, 0.2 * vec)
        assert np.allclose(s2.x_raw[2].values - s1.x_raw[2].values, 0.3 * vec)
        # the difference of jets at the injection order is exactly the kernel
        # combination; higher orders respond nonlinearly but stay consistent
        assert s1.max_consistency_residual() < 1e-10
        assert s2.max_consistency_residual() < 1e-10

    def test_dependency_masking(self, circle, cigar_data):
        # the potential step at order m must not read metric coefficients
        # beyond order m+2: validity horizons enforce this structurally, so a
        # jet truncated right at the audit boundary still solves
        data = make_data(circle, 0.0, -2.0, order=4)
        sol = solve_series(circle, data)
        assert len(sol.x_raw) == 5
        assert len(sol.u_raw) == 6

    def test_too_many_kernel_coefficients(self, stiefel4):
        data = make_data(stiefel4, 0.0, -1.0, kernel_params={0: [0.1, 0.2]})
        with pytest.raises(DataError):
            solve_series(stiefel4, data)


class TestAbelianFlat:
    def test_gaussian_on_abelian_circle(self):
        # k = 1 abelian skeleton carries the flat expanding/shrinking family
        spec = abelian_skeleton(1)
        data = make_data(spec, 2.0, -1.0, order=8)
        sol = solve_series(spec, data)
        assert all(x.norm() == 0.0 for x in sol.x_raw[1:])
        _, Dt = compute_D(spec, data, sol, 0)
        assert abs(Dt) < 1e-14

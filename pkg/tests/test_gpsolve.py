import numpy as np
import pytest

from ptbands import (GridError, NewtonError, PTSymmetryError, RealLineGrid,
                     assemble, assemble_adjoint, build_ansatz, constant,
                     convergence_study, extract_effective_model, fix_pt_phase,
                     from_parts, gp_residual, grid_for_envelope, hs_norm,
                     make_mode, newton_solve, sech_envelope, solve)
from ptbands.gpsolve import _PTReduction
from conftest import gentle_parts

FREE = constant(0.0)
TWO_PI = 2 * np.pi


def soliton_grid(M=8):
    return RealLineGrid(half_length=TWO_PI * M, n_points=64 * M)


class TestRealLineGrid:
    def test_rejects_incommensurate_length(self):
        with pytest.raises(GridError):
            RealLineGrid(half_length=10.0, n_points=256)

    def test_rejects_coarse_spacing(self):
        with pytest.raises(GridError):
            RealLineGrid(half_length=TWO_PI * 4, n_points=128)

    def test_geometry(self):
        g = soliton_grid(4)
        assert g.cells == 8
        assert g.x[g.n_points // 2] == 0.0
        assert g.spacing == pytest.approx(TWO_PI / 32)


class TestHsNorm:
    def test_s_zero_is_l2(self, rng):
        g = soliton_grid(4)
        u = rng.normal(size=g.n_points) + 1j * rng.normal(size=g.n_points)
        assert hs_norm(u, 0.0, g) == pytest.approx(g.l2_norm(u), rel=1e-13)

    def test_single_mode_weight(self):
        g = soliton_grid(4)
        # one discrete Fourier mode: weight is exactly (1 + xi^2)^s
        j = 12
        xi = g.frequencies[j]
        u = np.exp(1j * xi * g.x)
        for s in (0.5, 1.0, 2.0):
            expected = (1 + xi**2) ** (s / 2) * hs_norm(u, 0.0, g)
            assert hs_norm(u, s, g) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_h1_matches_analytic(self):
        g = RealLineGrid(TWO_PI * 4, 64 * 4)
        sig = 1.3
        u = np.exp(-g.x**2 / (2 * sig**2))
        # ||u||^2 = sig sqrt(pi), ||u'||^2 = sqrt(pi)/(2 sig)
        analytic = np.sqrt(sig * np.sqrt(np.pi) + np.sqrt(np.pi) / (2 * sig))
        assert hs_norm(u, 1.0, g) == pytest.approx(analytic, abs=1e-6)

    def test_s_range_validated(self):
        g = soliton_grid(2)
        with pytest.raises(ValueError):
            hs_norm(np.zeros(g.n_points), 3.0, g)


class TestGpResidual:
    def test_zero_field(self):
        g = soliton_grid(2)
        r = gp_residual(np.zeros(g.n_points, dtype=complex), 1.0, FREE, FREE, g)
        assert np.abs(r).max() == 0

    def test_plane_wave_eigenfunction(self):
        g = soliton_grid(2)
        xi = g.frequencies[5]
        u = np.exp(1j * xi * g.x)
        r = gp_residual(u, xi**2, FREE, constant(0.0), g)
        assert np.abs(r).max() <= 1e-12 * max(1.0, xi**2)

    def test_nls_soliton_identity(self):
        g = soliton_grid(8)    # L = 16 pi
        u = np.sqrt(2) / np.cosh(g.x) + 0j
        r = gp_residual(u, -1.0, FREE, constant(-1.0), g)
        assert np.abs(r).max() <= 1e-8


class TestPTReduction:
    def test_embed_is_exactly_pt(self, rng):
        g = soliton_grid(2)
        red = _PTReduction(g)
        z = rng.normal(size=g.n_points)
        u = red.embed(z)
        assert np.abs(np.conj(u[g.mirror]) - u).max() == 0.0

    def test_reduce_embed_roundtrip(self, rng):
        g = soliton_grid(2)
        red = _PTReduction(g)
        z = rng.normal(size=g.n_points)
        assert np.array_equal(red.reduce(red.embed(z)), z)


class TestNewtonSolve:
    def test_exact_linear_eigenfunction_converges_immediately(self):
        p = from_parts(gentle_parts())
        J = 20
        spec = solve(assemble(p, 0.0, J))
        mode = fix_pt_phase(make_mode(spec, 0, assemble_adjoint(p, 0.0, J)))
        g = soliton_grid(2)
        u0 = mode.g_values(g.x)
        state = newton_solve(u0, float(mode.omega.real), p, constant(0.0), g,
                             tol=1e-9)
        assert state.newton_iters <= 1
        assert np.abs(state.values - u0).max() <= 1e-10

    def test_nls_soliton_from_perturbed_guess(self):
        g = soliton_grid(8)
        exact = np.sqrt(2) / np.cosh(g.x) + 0j
        state = newton_solve(1.1 * exact, -1.0, FREE, constant(-1.0), g)
        assert np.abs(state.values - exact).max() <= 1e-8
        assert state.residual_norm <= 1e-10

    def test_pt_closure_and_residual_invariants(self):
        V = from_parts(gentle_parts())
        sigma = constant(-1.0)
        model, mode = extract_effective_model(V, sigma, 1, "a", J=16)
        env = sech_envelope(model)
        eps = 0.1
        grid = grid_for_envelope(eps, env.width)
        ansatz = build_ansatz(env, mode, eps, grid)
        state = newton_solve(ansatz.values, ansatz.omega, V, sigma, grid)
        assert state.pt_defect() == 0.0            # exact by construction
        assert state.residual_norm <= 1e-9
        # the refined state stays closer to the ansatz than the ansatz norm
        e = hs_norm(state.values - ansatz.values, 1.0, grid)
        assert e < hs_norm(ansatz.values, 1.0, grid)

    def test_quadratic_convergence_ratio(self):
        V = from_parts(gentle_parts())
        sigma = constant(-1.0)
        model, mode = extract_effective_model(V, sigma, 1, "a", J=16)
        env = sech_envelope(model)
        grid = grid_for_envelope(0.2, env.width)
        ansatz = build_ansatz(env, mode, 0.2, grid)
        state = newton_solve(ansatz.values, ansatz.omega, V, sigma, grid, tol=1e-12)
        hist = state.residual_history
        assert len(hist) >= 3
        # contraction is quadratic (r_{k+1} <= C r_k^2) for the last step whose
        # square sits above the roundoff floor
        pairs = [(hist[i], hist[i + 1]) for i in range(len(hist) - 1)
                 if hist[i] >= 1e-6]
        assert pairs
        r_prev, r_next = pairs[-1]
        assert r_next <= 1e5 * r_prev**2

    def test_deep_lattice_band_edge_state(self):
        # full two-harmonic PT lattice: refined state stays within the
        # ansatz's own size at eps = 0.1
        from conftest import two_harmonic_parts
        V = from_parts(two_harmonic_parts(1.0))
        sigma = constant(-1.0)
        model, mode = extract_effective_model(V, sigma, 1, "a", J=24)
        env = sech_envelope(model)
        grid = grid_for_envelope(0.1, env.width)
        ansatz = build_ansatz(env, mode, 0.1, grid)
        state = newton_solve(ansatz.values, ansatz.omega, V, sigma, grid)
        e = hs_norm(state.values - ansatz.values, 1.0, grid)
        assert state.residual_norm <= 1e-9
        assert e < hs_norm(ansatz.values, 1.0, grid)

    def test_rejects_non_pt_guess(self):
        g = soliton_grid(2)
        u0 = np.exp(1j * g.x)   # conj(u(-x)) = u(x) holds... use asymmetric real part
        u0 = 1.0 / np.cosh(g.x - 1.0) + 0j
        with pytest.raises(PTSymmetryError):
            newton_solve(u0, -1.0, FREE, constant(-1.0), g)

    def test_divergence_reported(self):
        g = soliton_grid(8)
        exact = np.sqrt(2) / np.cosh(g.x) + 0j
        with pytest.raises(NewtonError) as err:
            newton_solve(3.0 * exact, -1.0, FREE, constant(-1.0), g, max_iter=2)
        assert err.value.last_residual is not None


class TestConvergenceStudy:
    def test_gentle_lattice_scaling(self):
        V = from_parts(gentle_parts())
        study = convergence_study(V, constant(-1.0), 1, "a",
                                  eps_list=(0.2, 0.1, 0.05), J=16)
        errs = [r.hs_error for r in study.rows]
        assert errs == sorted(errs, reverse=True)
        assert study.slope >= 1.0
        assert study.rel_slope >= 0.5
        assert all(r.residual <= 1e-9 for r in study.rows)

    def test_upper_edge_study_through_zone_boundary(self):
        # k0 = 1/2 edge with focusing sigma: the quasiperiodic frame twist
        # must survive the whole ansatz -> Newton -> error pipeline
        V = from_parts(gentle_parts())
        study = convergence_study(V, constant(1.0), 1, "b",
                                  eps_list=(0.1, 0.05), J=16)
        assert study.model.k0 == 0.5 and study.model.Omega == 1
        errs = [r.hs_error for r in study.rows]
        assert errs == sorted(errs, reverse=True)
        assert study.slope >= 1.0
        assert all(r.residual <= 1e-9 for r in study.rows)

    def test_domain_truncation_insensitivity(self):
        V = from_parts(gentle_parts())
        sigma = constant(-1.0)
        model, mode = extract_effective_model(V, sigma, 1, "a", J=16)
        env = sech_envelope(model)
        eps = 0.1
        errs = []
        for factor in (1, 2):
            grid = grid_for_envelope(eps, env.width * factor)  # doubles L via width
            ansatz = build_ansatz(env, mode, eps, grid)
            state = newton_solve(ansatz.values, ansatz.omega, V, sigma, grid)
            errs.append(hs_norm(state.values - ansatz.values, 1.0, grid))
        assert abs(errs[1] - errs[0]) / errs[0] < 0.01

    def test_single_eps_gives_no_slope(self):
        V = from_parts(gentle_parts())
        study = convergence_study(V, constant(-1.0), 1, "a", eps_list=(0.1,), J=16)
        assert study.slope is None and study.rel_slope is None

    def test_newton_failure_carries_eps(self):
        V = from_parts(gentle_parts())
        with pytest.raises(NewtonError) as err:
            convergence_study(V, constant(-1.0), 1, "a", eps_list=(0.2,),
                              J=16, max_iter=1)
        assert err.value.eps == 0.2

"""Newton solver for stationary Gross-Pitaevskii bound states in the PT subspace.

The stationary equation  -u'' + V u + sigma |u|^2 u = omega u  is solved on
a periodic truncation of the line with Fourier differentiation.  Newton
runs in the PT-symmetric subspace, parameterized by (even part of Re u,
odd part of Im u) on the half grid: this is a real square system of the
full grid size, every iterate is PT-symmetric exactly by construction,
and the phase/translation kernel directions (i*u and u') are projected
out, so the Jacobian is invertible near a band-edge bound state.

The nonlinearity is not complex differentiable; the Jacobian is the
analytic derivative in the real variables (Re u, Im u).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import effective as effective_mod
from .errors import NewtonError, PTSymmetryError
from .grid import RealLineGrid, grid_for_envelope
from .potential import PeriodicPotential
from .util import parallel_map


@dataclass(frozen=True)
class BoundState:
    """A complex field on a RealLineGrid with solve diagnostics.

    residual_norm is the L2 norm of the GP residual (None for a bare
    ansatz that has not been solved); residual_history holds the Newton
    residuals including the final one.
    """

    values: np.ndarray
    eps: float
    omega: float
    grid: RealLineGrid
    residual_norm: float = None
    hs_error_vs_ansatz: float = None
    newton_iters: int = None
    residual_history: tuple = ()

    def pt_defect(self):
        """max |conj(u(-x)) - u(x)| over the grid."""
        u = self.values
        return float(np.abs(np.conj(u[self.grid.mirror]) - u).max())


@dataclass(frozen=True)
class ConvergenceRow:
    eps: float
    half_length: float
    n_points: int
    newton_iters: int
    residual: float
    hs_error: float
    hs_error_rel: float


@dataclass(frozen=True)
class ConvergenceStudy:
    """Error-vs-eps table with fitted log-log slopes.

    slope / rel_slope are least-squares slopes of log(error) against
    log(eps); the stderr fields are the 1-sigma uncertainties of the fit
    (None when fewer than two or three points)."""

    rows: tuple
    s: float
    slope: float
    slope_stderr: float
    rel_slope: float
    rel_slope_stderr: float
    model: "effective_mod.EffectiveModel"


def hs_norm(u, s: float, grid: RealLineGrid) -> float:
    """Discrete H^s(R) norm: (sum (1+xi^2)^s |u_hat(xi)|^2 dxi)^(1/2).

    Exactly the grid L2 norm at s = 0.
    """
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"s = {s} outside [0, 2]")
    c = np.fft.fft(u) / grid.n_points
    weight = (1.0 + grid.frequencies**2) ** s
    return float(np.sqrt(np.sum(weight * np.abs(c) ** 2) * 2 * grid.half_length))


def gp_residual(u, omega: float, V: PeriodicPotential, sigma: PeriodicPotential,
                grid: RealLineGrid):
    """Pointwise residual -u'' + V u + sigma |u|^2 u - omega u."""
    upp = grid.second_derivative(u)
    return (-upp + V.eval(grid.x) * u + sigma.eval(grid.x) * np.abs(u) ** 2 * u
            - omega * u)


class _PTReduction:
    """Index bookkeeping for the (even Re, odd Im) half-grid variables."""

    def __init__(self, grid: RealLineGrid):
        N = grid.n_points
        self.N = N
        self.mirror = grid.mirror
        # x = -L (self-mirrored) plus x >= 0; Re u there determines the even part
        self.idx_e = np.concatenate(([0], np.arange(N // 2, N)))
        # x > 0; Im u there determines the odd part (zero at x = 0 and x = -L)
        self.idx_o = np.arange(N // 2 + 1, N)
        self.ne = len(self.idx_e)
        self.no = len(self.idx_o)
        self.self_mirrored = self.mirror[self.idx_e] == self.idx_e

    def reduce(self, u):
        """PT-project a field and return the reduced real unknowns."""
        re = 0.5 * (u.real + u.real[self.mirror])
        im = 0.5 * (u.imag - u.imag[self.mirror])
        return np.concatenate([re[self.idx_e], im[self.idx_o]])

    def embed(self, z):
        """Reconstruct the PT-symmetric complex field (exact by construction)."""
        re = np.zeros(self.N)
        im = np.zeros(self.N)
        re[self.idx_e] = z[: self.ne]
        re[self.mirror[self.idx_e]] = z[: self.ne]
        im[self.idx_o] = z[self.ne:]
        im[self.mirror[self.idx_o]] = -z[self.ne:]
        return re + 1j * im

    def project_residual(self, G):
        """Even part of Re G and odd part of Im G (the PT components)."""
        ge = 0.5 * (G.real[self.idx_e] + G.real[self.mirror[self.idx_e]])
        go = 0.5 * (G.imag[self.idx_o] - G.imag[self.mirror[self.idx_o]])
        return np.concatenate([ge, go])


def _second_derivative_matrix(grid: RealLineGrid):
    """Dense Fourier second-derivative matrix (real symmetric circulant)."""
    col = np.fft.ifft(-grid.frequencies**2).real
    return scipy.linalg.circulant(col)


def _reduced_jacobian(red, K, d_rr, d_rw, d_wr, d_ww):
    """Assemble the PT-reduced real Jacobian from the full-space blocks.

    The full Jacobian is [[-K + diag(d_rr), diag(d_rw)],
                          [diag(d_wr), -K + diag(d_ww)]]; columns are
    summed over the even/odd embeddings and rows averaged over the
    even/odd projections, so the result is exactly the derivative of the
    projected residual with respect to the reduced unknowns.
    """
    idx_e, idx_o, mir = red.idx_e, red.idx_o, red.mirror
    ne, no = red.ne, red.no

    KE_v = K[:, idx_e].copy()
    dup = ~red.self_mirrored
    KE_v[:, dup] += K[:, mir[idx_e][dup]]
    KE_w = K[:, idx_o] - K[:, mir[idx_o]]

    def diag_cols_even(d):
        C = np.zeros((red.N, ne))
        C[idx_e, np.arange(ne)] += d[idx_e]
        C[mir[idx_e], np.arange(ne)] += np.where(dup, d[mir[idx_e]], 0.0)
        return C

    def diag_cols_odd(d):
        C = np.zeros((red.N, no))
        C[idx_o, np.arange(no)] += d[idx_o]
        C[mir[idx_o], np.arange(no)] -= d[mir[idx_o]]
        return C

    B_rr = -KE_v + diag_cols_even(d_rr)
    B_rw = diag_cols_odd(d_rw)
    B_wr = diag_cols_even(d_wr)
    B_ww = -KE_w + diag_cols_odd(d_ww)

    Jred = np.empty((ne + no, ne + no))
    Jred[:ne, :ne] = 0.5 * (B_rr[idx_e, :] + B_rr[mir[idx_e], :])
    Jred[:ne, ne:] = 0.5 * (B_rw[idx_e, :] + B_rw[mir[idx_e], :])
    Jred[ne:, :ne] = 0.5 * (B_wr[idx_o, :] - B_wr[mir[idx_o], :])
    Jred[ne:, ne:] = 0.5 * (B_ww[idx_o, :] - B_ww[mir[idx_o], :])
    return Jred


def newton_solve(u0, omega: float, V: PeriodicPotential, sigma: PeriodicPotential,
                 grid: RealLineGrid, max_iter: int = 25, tol: float = 1e-10,
                 on_iterate=None) -> BoundState:
    """Newton iteration for the stationary GP equation in the PT subspace.

    u0 must be PT-symmetric to 1e-6.  Converges when the L2 residual falls
    below tol (an already-converged u0 returns in zero iterations).
    on_iterate(k, u, residual), when given, observes every iterate.
    Raises NewtonError on divergence or a singular Jacobian; the latter
    typically means eps is too large or the band assumption is violated.
    """
    u0 = np.asarray(u0, dtype=complex)
    if len(u0) != grid.n_points:
        raise ValueError("u0 does not match the grid")
    defect = np.abs(np.conj(u0[grid.mirror]) - u0).max()
    if defect > 1e-6:
        raise PTSymmetryError(f"initial guess not PT-symmetric (defect {defect:.3e})")

    red = _PTReduction(grid)
    z = red.reduce(u0)
    Vx = V.eval(grid.x)
    sx = sigma.eval(grid.x)
    Vr, Vi = Vx.real, Vx.imag
    sr, si = sx.real, sx.imag
    K = None
    history = []
    iters = 0
    for _ in range(max_iter + 1):
        u = red.embed(z)
        G = gp_residual(u, omega, V, sigma, grid)
        rnorm = grid.l2_norm(G)
        history.append(rnorm)
        if on_iterate is not None:
            on_iterate(iters, u, rnorm)
        if rnorm <= tol:
            return BoundState(values=u, eps=np.nan, omega=omega, grid=grid,
                              residual_norm=rnorm, newton_iters=iters,
                              residual_history=tuple(history))
        if iters >= max_iter:
            break
        if K is None:
            K = _second_derivative_matrix(grid)
        v, w = u.real, u.imag
        # real-variable derivative of V u + sigma |u|^2 u - omega u
        d_rr = Vr + sr * (3 * v**2 + w**2) - 2 * si * v * w - omega
        d_rw = -Vi + 2 * sr * v * w - si * (v**2 + 3 * w**2)
        d_wr = Vi + 2 * sr * v * w + si * (3 * v**2 + w**2)
        d_ww = Vr + sr * (v**2 + 3 * w**2) + 2 * si * v * w - omega
        Jred = _reduced_jacobian(red, K, d_rr, d_rw, d_wr, d_ww)
        rhs = red.project_residual(G)
        try:
            dz = scipy.linalg.solve(Jred, rhs)
        except scipy.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Jacobian at iteration {iters}: {exc}",
                              last_residual=rnorm) from exc
        z = z - dz
        iters += 1
    raise NewtonError(
        f"no convergence in {max_iter} iterations (last residual {history[-1]:.3e})",
        last_residual=history[-1],
    )


def convergence_study(V: PeriodicPotential, sigma: PeriodicPotential, m: int,
                      edge: str, eps_list, s: float = 1.0, J: int = 24,
                      N_k: int = 32, max_iter: int = 25, tol: float = 1e-10,
                      tail_decay: float = 20.0) -> ConvergenceStudy:
    """Error scaling of the envelope ansatz against Newton-refined states.

    For each eps: build u_form from the band-edge model, solve the GP
    equation from it, and record e(eps) = ||u - u_form||_{H^s}.  The grid
    half length grows like tail_decay*width/eps so the envelope tail at
    the seam stays below ~2e-9 for every eps.  Any Newton failure aborts
    the study with the failing eps attached to the error.
    """
    model, mode = effective_mod.extract_effective_model(V, sigma, m, edge, J, N_k)
    env = effective_mod.sech_envelope(model)     # raises ExistenceError if signs fail

    def run_one(eps):
        grid = grid_for_envelope(eps, env.width, tail_decay=tail_decay)
        ansatz = effective_mod.build_ansatz(env, mode, eps, grid)
        try:
            state = newton_solve(ansatz.values, ansatz.omega, V, sigma, grid,
                                 max_iter=max_iter, tol=tol)
        except NewtonError as exc:
            exc.eps = eps
            raise
        err = hs_norm(state.values - ansatz.values, s, grid)
        rel = err / hs_norm(ansatz.values, s, grid)
        return ConvergenceRow(
            eps=float(eps), half_length=grid.half_length, n_points=grid.n_points,
            newton_iters=state.newton_iters, residual=state.residual_norm,
            hs_error=err, hs_error_rel=rel,
        )

    rows = parallel_map(run_one, eps_list)

    def fit(errors):
        if len(rows) < 2:
            return None, None
        x = np.log([r.eps for r in rows])
        y = np.log(errors)
        (slope, _), res, *_ = np.polyfit(x, y, 1, full=True)
        if len(rows) > 2:
            sigma2 = res[0] / (len(rows) - 2) if res.size else 0.0
            stderr = float(np.sqrt(sigma2 / np.sum((x - x.mean()) ** 2)))
        else:
            stderr = None
        return float(slope), stderr

    slope, slope_err = fit([r.hs_error for r in rows])
    rel_slope, rel_err = fit([r.hs_error_rel for r in rows])
    return ConvergenceStudy(rows=tuple(rows), s=s, slope=slope, slope_stderr=slope_err,
                            rel_slope=rel_slope, rel_slope_stderr=rel_err, model=model)

"""Band structures over the Brillouin zone and the reality/isolation checks.

Bands are tracked across the k grid by maximal eigenvector overlap
(value proximity fails at avoided crossings); the tracking is a
permutation of the lowest-n eigenvalues at each k by construction.
Band indices m are 1-based in the public API.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import discretize, eigen
from .errors import AssumptionError, ComplexBandError, ConfigError
from .potential import PeriodicPotential
from .util import parallel_map

# reality tolerance: an omega counts as real when
# |Im omega| <= REALITY_TOL * max(1, |omega|)
REALITY_TOL = 1e-8

# a band is isolated when its complex-plane distance to every other
# computed eigenvalue over the k grid exceeds this
ISOLATION_THRESHOLD = 1e-3

OVERLAP_FLAG = 0.5


@dataclass(frozen=True)
class BandStructure:
    """Tracked eigenvalue curves omega_m(k) with their eigenvectors.

    omega has shape (n_bands, N_k); vectors (n_bands, N_k, 2J+1) holds the
    unit coefficient vectors; tracking_quality (n_bands, N_k) records the
    |<v(k_i), v(k_{i+1})>| overlap used to continue each band into column i
    (1.0 in the first column).  Values below OVERLAP_FLAG mark ambiguous
    continuations near crossings; they are recorded, not fatal.
    """

    k_grid: np.ndarray
    omega: np.ndarray
    vectors: np.ndarray
    tracking_quality: np.ndarray
    J: int

    @property
    def n_bands(self):
        return self.omega.shape[0]

    def column(self, k0):
        """Grid index of quasimomentum k0 (must be on the grid)."""
        i = int(np.argmin(np.abs(self.k_grid - k0)))
        if abs(self.k_grid[i] - k0) > 1e-12:
            raise ConfigError(f"k = {k0} is not a grid point")
        return i

    def band(self, m):
        """Values of band m (1-based) over the grid."""
        if not 1 <= m <= self.n_bands:
            raise ConfigError(f"band index {m} outside 1..{self.n_bands}")
        return self.omega[m - 1]


@dataclass(frozen=True)
class BandEdge:
    k0: float
    omega_star: float
    which: str          # "a" (lower edge) or "b" (upper edge)
    curvature: float
    curvature_err: float


@dataclass(frozen=True)
class BandEdgeReport:
    """Reality / isolation / simplicity diagnostics for one band."""

    m: int
    is_real: bool
    max_im: float
    max_im_k: float
    isolation_gap: float
    simplicity_margin: float
    edges: tuple
    extrema_at_high_symmetry: bool
    derivative_at_edges: tuple

    @property
    def assumption_ok(self):
        return (
            self.is_real
            and self.isolation_gap > ISOLATION_THRESHOLD
            and self.simplicity_margin > ISOLATION_THRESHOLD
            and self.extrema_at_high_symmetry
        )


def k_grid(N_k: int) -> np.ndarray:
    """Uniform grid on (-1/2, 1/2] containing both k = 0 and k = 1/2."""
    if N_k < 16 or N_k % 2:
        raise ConfigError("N_k must be even and >= 16 so the grid hits 0 and 1/2")
    return -0.5 + np.arange(1, N_k + 1) / N_k


def compute_bands(p: PeriodicPotential, J: int, N_k: int, n_bands: int) -> BandStructure:
    """Solve the Bloch eigenproblem on a k grid and track the lowest bands."""
    ks = k_grid(N_k)
    if not 1 <= n_bands <= 2 * J + 1:
        raise ConfigError(f"n_bands={n_bands} outside 1..{2 * J + 1}")

    def solve_at(k):
        return eigen.solve(discretize.assemble(p, k, J))

    spectra = parallel_map(solve_at, ks)

    n_dim = 2 * J + 1
    omega = np.zeros((n_bands, len(ks)), dtype=complex)
    vectors = np.zeros((n_bands, len(ks), n_dim), dtype=complex)
    quality = np.ones((n_bands, len(ks)))

    omega[:, 0] = spectra[0].eigenvalues[:n_bands]
    vectors[:, 0, :] = spectra[0].right_vectors[:, :n_bands].T
    for i in range(1, len(ks)):
        w = spectra[i].eigenvalues[:n_bands]
        vr = spectra[i].right_vectors[:, :n_bands]
        # overlap[a, b] = |<v_a(k_{i-1}), v_b(k_i)>|
        overlap = np.abs(vectors[:, i - 1, :].conj() @ vr)
        row, col = scipy.optimize.linear_sum_assignment(-overlap)
        perm = np.empty(n_bands, dtype=int)
        perm[row] = col
        omega[:, i] = w[perm]
        vectors[:, i, :] = vr[:, perm].T
        quality[:, i] = overlap[np.arange(n_bands), perm]

    return BandStructure(k_grid=ks, omega=omega, vectors=vectors,
                         tracking_quality=quality, J=J)


def _rank_in_column(bs: BandStructure, m: int, col: int):
    """0-based position of tracked band m in the (Re, Im)-sorted column."""
    vals = bs.omega[:, col]
    order = np.lexsort((vals.imag, vals.real))
    return int(np.nonzero(order == m - 1)[0][0])


def _edge_derivative(bs: BandStructure, m: int, k0: float):
    """Central difference of Re omega_m at k0 using grid neighbours.

    At k0 = 1/2 the right neighbour comes from 1-periodicity in k
    (the first grid point -1/2 + dk represents 1/2 + dk).
    """
    i = bs.column(k0)
    vals = bs.band(m).real
    N = len(bs.k_grid)
    dk = 1.0 / N
    right = vals[(i + 1) % N]
    left = vals[i - 1]
    return (right - left) / (2 * dk)


def check_assumption(bs: BandStructure, m: int, tol_real: float = REALITY_TOL,
                     p: PeriodicPotential = None) -> BandEdgeReport:
    """Reality, isolation and simplicity report for band m (1-based).

    isolation_gap is the complex-plane distance from band m (as a set over
    the grid) to every other computed eigenvalue at every grid k — the
    computed window stands in for "the rest of the spectrum", so n_bands
    must cover the neighbours of m.  simplicity_margin is the same
    distance restricted to equal k.  When the potential p is given,
    curvatures at the detected edges are computed by Richardson re-solves.
    """
    vals = bs.band(m)
    scale = np.maximum(1.0, np.abs(vals))
    ims = np.abs(vals.imag) / scale
    worst = int(np.argmax(ims))
    is_real = ims[worst] <= tol_real

    others = np.delete(bs.omega, m - 1, axis=0)
    if others.size:
        isolation = np.abs(vals[None, None, :] - others[:, :, None]).min()
        simplicity = np.abs(vals[None, :] - others[:, :]).min()
    else:
        isolation = simplicity = np.inf

    edges = ()
    derivs = ()
    extrema_ok = False
    if is_real:
        re = vals.real
        i_min, i_max = int(np.argmin(re)), int(np.argmax(re))
        hs_cols = {bs.column(0.0), bs.column(0.5)}
        # ties: an extremum counts as on a high-symmetry point when its value
        # is attained there to solver precision
        lo_ok = any(abs(re[c] - re[i_min]) <= 1e-9 * scale.max() for c in hs_cols)
        hi_ok = any(abs(re[c] - re[i_max]) <= 1e-9 * scale.max() for c in hs_cols)
        extrema_ok = lo_ok and hi_ok
        om0 = re[bs.column(0.0)]
        omh = re[bs.column(0.5)]
        (ka, oma), (kb, omb) = sorted([(0.0, om0), (0.5, omh)], key=lambda t: t[1])
        edge_list = []
        for k0, om_star, which in ((ka, oma, "a"), (kb, omb, "b")):
            if p is not None:
                rank = _rank_in_column(bs, m, bs.column(k0))
                curv, err = second_derivative(p, rank + 1, k0, bs.J, tol_real=tol_real)
            else:
                curv, err = np.nan, np.nan
            edge_list.append(BandEdge(k0, om_star, which, curv, err))
        edges = tuple(edge_list)
        derivs = tuple(_edge_derivative(bs, m, k0) for k0 in (0.0, 0.5))

    return BandEdgeReport(
        m=m,
        is_real=bool(is_real),
        max_im=float(np.abs(vals.imag)[worst]),
        max_im_k=float(bs.k_grid[worst]),
        isolation_gap=float(isolation),
        simplicity_margin=float(simplicity),
        edges=edges,
        extrema_at_high_symmetry=bool(extrema_ok),
        derivative_at_edges=derivs,
    )


def _band_value_near(p, k, J, ref_vector, tol_real):
    """Eigenvalue at quasimomentum k whose eigenvector best overlaps ref_vector.

    k may fall just outside (-1/2, 1/2]: the problem is solved at k -+ 1
    and the reference frame is shifted by the e^{+-ix} quasiperiodicity
    (coefficients roll by one slot) before matching.
    """
    shift = 0
    if k > 0.5:
        k, shift = k - 1.0, 1
    elif k <= -0.5:
        k, shift = k + 1.0, -1
    spec = eigen.solve(discretize.assemble(p, k, J))
    ref = ref_vector
    if shift:
        # p(x, k - 1) = e^{ix} p(x, k): frequency j + k in the old frame is
        # slot j + 1 in the new one; the dropped end slot carries ~1e-16 weight
        ref = np.zeros_like(ref_vector)
        if shift == 1:
            ref[1:] = ref_vector[:-1]
        else:
            ref[:-1] = ref_vector[1:]
    ov = np.abs(ref.conj() @ spec.right_vectors)
    i = int(np.argmax(ov))
    om = spec.eigenvalues[i]
    if abs(om.imag) > tol_real * max(1.0, abs(om)):
        raise ComplexBandError(
            f"band value at k={k} is complex ({om}); curvature refused"
        )
    return om.real


def _richardson_d2(p, om0, ref, k0, J, h, tol_real):
    diffs = []
    for step in (h, h / 2, h / 4):
        plus = _band_value_near(p, k0 + step, J, ref, tol_real)
        minus = _band_value_near(p, k0 - step, J, ref, tol_real)
        diffs.append((plus - 2.0 * om0 + minus) / step**2)
    d1, d2, d3 = diffs
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d3 - d2) / 3
    return (16 * r2 - r1) / 15, abs(r2 - r1) / 15


def second_derivative(p: PeriodicPotential, m: int, k0: float, J: int,
                      h: float = 0.04, tol_real: float = REALITY_TOL):
    """omega_m''(k0) at k0 in {0, 1/2} by Richardson-extrapolated differences.

    m is the 1-based position in the (Re, Im)-sorted spectrum at k0.
    Central second differences D(h) = (omega(k0+h) - 2 omega(k0) +
    omega(k0-h)) / h^2 at steps h, h/2, h/4 feed two Richardson levels;
    samples beyond the zone edge k0 = 1/2 use the 1-periodicity of the
    band with the matching frame shifted accordingly.  Band continuation
    is by eigenvector overlap against the k0 eigenvector.  The step
    default balances the truncation of the extrapolant against
    eigensolver noise amplified by 1/h^2; when the error estimate comes
    out poor (sharp edges near avoided crossings), one retry at h/4 keeps
    whichever estimate is tighter.  Returns (value, error_estimate).
    """
    if k0 not in (0.0, 0.5):
        raise ConfigError("band-edge curvature is defined at k0 in {0, 1/2}")
    spec0 = eigen.solve(discretize.assemble(p, k0, J))
    om0 = spec0.eigenvalues[m - 1]
    if abs(om0.imag) > tol_real * max(1.0, abs(om0)):
        raise ComplexBandError(f"omega_{m}({k0}) = {om0} is not real")
    ref = spec0.right_vectors[:, m - 1]

    value, err = _richardson_d2(p, om0.real, ref, k0, J, h, tol_real)
    if err > 1e-6 * max(1.0, abs(value)):
        value2, err2 = _richardson_d2(p, om0.real, ref, k0, J, h / 4, tol_real)
        if err2 < err:
            value, err = value2, err2
    return float(value), float(err)


def curvature_from_fit(p: PeriodicPotential, m: int, k0: float, J: int,
                       half_width: float = 0.05, n_samples: int = 11,
                       tol_real: float = REALITY_TOL):
    """Independent curvature estimate: even quartic fit of omega_m near k0.

    Fits omega = a0 + a2 d^2 + a4 d^4 on |d| <= half_width (d measured into
    the zone) and returns 2*a2.  Serves as the second estimator guarding
    the difference-based second_derivative against tracking errors.
    """
    if k0 not in (0.0, 0.5):
        raise ConfigError("band-edge curvature is defined at k0 in {0, 1/2}")
    spec0 = eigen.solve(discretize.assemble(p, k0, J))
    om0 = spec0.eigenvalues[m - 1]
    ref = spec0.right_vectors[:, m - 1]
    s = 1.0 if k0 == 0.0 else -1.0
    ds = np.linspace(half_width / n_samples, half_width, n_samples)
    oms = [_band_value_near(p, k0 + s * d, J, ref, tol_real) for d in ds]
    A = np.vstack([np.ones_like(ds), ds**2, ds**4]).T
    coef, *_ = np.linalg.lstsq(A, np.asarray(oms) - om0.real, rcond=None)
    return float(2 * coef[1])


def require_assumption(report: BandEdgeReport):
    """Raise AssumptionError with the failing clause when the check fails."""
    if report.assumption_ok:
        return
    reasons = []
    if not report.is_real:
        reasons.append(f"band not real (max|Im| = {report.max_im:.3e} at k = {report.max_im_k})")
    if report.isolation_gap <= ISOLATION_THRESHOLD:
        reasons.append(f"band not isolated (gap = {report.isolation_gap:.3e})")
    if report.simplicity_margin <= ISOLATION_THRESHOLD:
        reasons.append(f"eigenvalue not simple (margin = {report.simplicity_margin:.3e})")
    if report.is_real and not report.extrema_at_high_symmetry:
        reasons.append("band extrema not at k in {0, 1/2}")
    raise AssumptionError(f"band {report.m}: " + "; ".join(reasons))

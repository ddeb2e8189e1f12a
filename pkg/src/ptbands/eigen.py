"""Dense non-Hermitian eigensolves and biorthonormalized Bloch modes.

Conventions used throughout:

* a mode's Fourier coefficients pi_j represent p(x) = sum_j pi_j e^{ijx}
  with the cell normalization ||p||_{L2(0,2pi)} = 1, i.e.
  2*pi*sum|pi_j|^2 = 1;
* the cell inner product is <u, v> = int_0^{2pi} u conj(v) dx
  = 2*pi*sum_j u_j conj(v_j)  (linear in the first argument);
* the adjoint mode p* (eigenvector of the adjoint matrix at conj(omega))
  is scaled so that <p, p*> = 1, which makes <., p*> p the spectral
  projection onto the mode.  Near an exceptional point this pairing
  degenerates and the construction refuses.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .discretize import BlochOperatorMatrix
from .errors import ClassificationError, ComplexBandError, DegenerateEigenvalueError, PTBandsError

TWO_PI = 2.0 * np.pi

# entries with |Im| below this are treated as exactly real so the real
# (dgeev) path is taken and conjugate pairs come out exact
_REAL_ENTRY_TOL = 1e-14


@dataclass(frozen=True)
class Spectrum:
    """All eigenpairs of one Bloch operator matrix.

    eigenvalues are sorted ascending by real part (ties by imaginary
    part); right_vectors[:, i] is the unit-2-norm eigenvector of
    eigenvalues[i] in the e^{ijx} coefficient basis, j = -J..J.
    """

    k: float
    J: int
    eigenvalues: np.ndarray
    right_vectors: np.ndarray

    def gap(self, index):
        """Distance from eigenvalues[index] to the nearest other eigenvalue."""
        d = np.abs(self.eigenvalues - self.eigenvalues[index])
        d[index] = np.inf
        return d.min()


@dataclass(frozen=True)
class SpectrumClasses:
    """classify() result: real values and conjugate pairs (plus-Im first)."""

    real_values: np.ndarray
    real_indices: np.ndarray
    pairs: tuple
    pair_indices: tuple


@dataclass(frozen=True)
class BlochMode:
    """One biorthonormalized eigenpair (omega, p, p*) at fixed k."""

    k: float
    omega: complex
    p_coeffs: np.ndarray
    pstar_coeffs: np.ndarray

    @property
    def J(self):
        return (len(self.p_coeffs) - 1) // 2

    def harmonics(self):
        return np.arange(-self.J, self.J + 1)

    def p_values(self, x):
        """p(x) on an array of points."""
        x = np.asarray(x, dtype=float)
        return np.exp(1j * np.outer(x, self.harmonics())) @ self.p_coeffs

    def pstar_values(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * np.outer(x, self.harmonics())) @ self.pstar_coeffs

    def g_values(self, x):
        """Bloch wave g(x) = e^{ikx} p(x); PT-symmetric when the phase is fixed."""
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.k * x) * self.p_values(x)


def inner(u_coeffs, v_coeffs):
    """Cell inner product <u, v> = int_0^{2pi} u conj(v) dx in coefficients."""
    return TWO_PI * np.sum(u_coeffs * np.conj(v_coeffs))


def solve(M: BlochOperatorMatrix) -> Spectrum:
    """Full eigendecomposition of a Bloch operator matrix.

    Real-entried matrices (every PT-symmetric potential) go through the
    real LAPACK path, which returns exactly conjugate complex pairs.
    """
    A = M.entries
    if np.abs(A.imag).max(initial=0.0) <= _REAL_ENTRY_TOL * max(1.0, np.abs(A.real).max()):
        A = A.real
    try:
        w, vr = scipy.linalg.eig(A)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise PTBandsError(f"eigensolver failed at k={M.k}, J={M.J}: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    return Spectrum(k=M.k, J=M.J, eigenvalues=w[order], right_vectors=vr[:, order])


def classify(spec: Spectrum, tol_real: float) -> SpectrumClasses:
    """Partition a spectrum into real eigenvalues and conjugate pairs.

    An eigenvalue counts as real when |Im omega| <= tol_real * max(1, |omega|).
    Complex ones are matched greedily by conjugate distance; an unpaired
    complex eigenvalue signals broken PT structure (or a tolerance that
    is too tight) and raises ClassificationError.
    """
    w = spec.eigenvalues
    scale = np.maximum(1.0, np.abs(w))
    is_real = np.abs(w.imag) <= tol_real * scale
    real_idx = np.nonzero(is_real)[0]
    cplx_idx = list(np.nonzero(~is_real)[0])

    pairs, pair_indices = [], []
    while cplx_idx:
        i = cplx_idx.pop(0)
        target = np.conj(w[i])
        if not cplx_idx:
            raise ClassificationError(f"unpaired complex eigenvalue {w[i]}")
        dists = [abs(w[j] - target) for j in cplx_idx]
        jbest = int(np.argmin(dists))
        if dists[jbest] > tol_real * max(1.0, abs(w[i])):
            raise ClassificationError(
                f"eigenvalue {w[i]} has no conjugate partner within "
                f"{tol_real * max(1.0, abs(w[i])):.3e} (closest at {dists[jbest]:.3e})"
            )
        j = cplx_idx.pop(jbest)
        plus, minus = (i, j) if w[i].imag >= w[j].imag else (j, i)
        pairs.append((w[plus], w[minus]))
        pair_indices.append((plus, minus))
    return SpectrumClasses(
        real_values=w[real_idx].real,
        real_indices=real_idx,
        pairs=tuple(pairs),
        pair_indices=tuple(pair_indices),
    )


def _deterministic_phase(v):
    """Rotate so the largest-|.| coefficient is real positive."""
    jstar = int(np.argmax(np.abs(v)))
    phase = np.exp(-1j * np.angle(v[jstar]))
    return v * phase


def make_mode(spec: Spectrum, index: int, M_adj: BlochOperatorMatrix) -> BlochMode:
    """Biorthonormalized Bloch mode for spec.eigenvalues[index].

    The adjoint eigenvector is taken from the adjoint matrix at conj(omega)
    and rescaled so <p, p*> = 1; the reflection identity
    p*(x, k) = p(-x, -k) is *not* used in the construction (it serves as an
    independent cross-check in the test suite).  Refuses near-degenerate
    eigenvalues: there the pairing <p, p*> tends to zero and the
    normalization is unstable.
    """
    omega = spec.eigenvalues[index]
    scale = M_adj.norm()
    if spec.gap(index) <= 1e-6 * scale:
        raise DegenerateEigenvalueError(
            f"eigenvalue {omega} within {1e-6 * scale:.3e} of another; "
            "mode construction refused"
        )
    v = spec.right_vectors[:, index].copy()
    v = v / (np.sqrt(TWO_PI) * np.linalg.norm(v))
    v = _deterministic_phase(v)

    adj = solve(M_adj)
    j = int(np.argmin(np.abs(adj.eigenvalues - np.conj(omega))))
    if abs(adj.eigenvalues[j] - np.conj(omega)) > 1e-8 * max(1.0, scale):
        raise PTBandsError(
            f"adjoint spectrum has no eigenvalue near conj({omega}); "
            "operator pair inconsistent"
        )
    w = adj.right_vectors[:, j].copy()
    s = inner(v, w)
    if abs(s) < 1e-8:
        raise DegenerateEigenvalueError(
            f"biorthogonal pairing <p, p*> = {s:.3e} at omega={omega}; "
            "too close to an exceptional point"
        )
    w = w / np.conj(s)
    return BlochMode(k=spec.k, omega=omega, p_coeffs=v, pstar_coeffs=w)


def fix_pt_phase(mode: BlochMode, tol_real: float = 1e-8, tol_im: float = 1e-8) -> BlochMode:
    """Rotate a real-eigenvalue mode onto its PT-symmetric phase.

    The rotation angle is -arg(pi_{j*}) with j* the largest-|.| coefficient
    (deterministic and well conditioned).  After the rotation all
    coefficients of a genuinely PT-symmetric mode are real; a residual
    imaginary part above tol_im means the eigenvalue is not simple-real
    and raises.  p* is rotated by the same phase, which preserves
    <p, p*> = 1.
    """
    if abs(mode.omega.imag) > tol_real * max(1.0, abs(mode.omega)):
        raise ComplexBandError(
            f"cannot PT-fix a mode with Im(omega) = {mode.omega.imag:.3e}"
        )
    jstar = int(np.argmax(np.abs(mode.p_coeffs)))
    phase = np.exp(-1j * np.angle(mode.p_coeffs[jstar]))
    p = mode.p_coeffs * phase
    resid = np.abs(p.imag).max()
    if resid > tol_im:
        raise ComplexBandError(
            f"PT phase fix leaves max|Im pi_j| = {resid:.3e} > {tol_im:.1e}"
        )
    return replace(mode, p_coeffs=p, pstar_coeffs=mode.pstar_coeffs * phase)

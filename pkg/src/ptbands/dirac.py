"""Dirac points of real even potentials and their splitting under i*gamma*W.

A Dirac point is a double eigenvalue mu of L(k0), k0 in {0, 1/2}, where
two band functions intersect.  Its two-dimensional eigenspace carries a
parity structure: a basis (phi_+, phi_-) exists with phi_+ e^{i k0 x}
real even and phi_- e^{i k0 x} real odd.  In the e^{ijx} coefficient
basis, parity is the reflection j -> -j at k0 = 0 and the twisted
reflection j -> -j-1 at k0 = 1/2.

Under the PT perturbation i*gamma*W (W odd, real) the point splits at
leading order into mu +- i*gamma*|<W phi_+, phi_->|; with an even
background U present the two leading eigenvalues are
mu +- sqrt(A^2 - gamma^2 B^2), where (A, B) are the (cosine, sine)
Fourier coefficients of (U, W) at the coupling harmonic of the point
(the harmonic q with c_q connecting the two resonant basis modes).
"""

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import discretize, eigen
from .bands import BandStructure
from .errors import ClassificationError, ConfigError
from .eigen import TWO_PI
from .potential import Convention, PeriodicPotential, PotentialParts, from_parts


@dataclass(frozen=True)
class DiracPoint:
    """Double eigenvalue mu at k0 with its parity-split eigenbasis."""

    k0: float
    mu: float
    band_pair: tuple
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    @property
    def J(self):
        return (len(self.phi_plus) - 1) // 2


class Regime(Enum):
    DEGENERATE_PAIR = "degenerate-pair"  # prediction mu +- i gamma |<W phi+, phi->|
    TWO_MODE = "two-mode"              # prediction mu +- sqrt(A^2 - gamma^2 B^2)
    INCONCLUSIVE = "inconclusive"  # coupling element vanishes


@dataclass(frozen=True)
class SplittingPrediction:
    """Leading-order split eigenvalues with, optionally, the measured pair.

    pred_im is the predicted |Im| of the split pair (the magnitude the
    relative gap is measured against: gamma*|<W phi+, phi->| in the
    degenerate-pair regime, |gamma*B| at the coupling harmonic in the
    two-mode regime).  relative_gap = | |Im omega_meas| - pred_im | / pred_im.
    """

    k0: float
    mu: float
    gamma: float
    regime: Regime
    leading_eigenvalues: tuple
    pred_im: float
    coupling_harmonic: int = 0
    measured: tuple = None
    relative_gap: float = None

    def with_measurement(self, pair):
        plus = pair[0]
        gap = None
        if self.pred_im > 0:
            gap = abs(abs(plus.imag) - self.pred_im) / self.pred_im
        return replace(self, measured=tuple(pair), relative_gap=gap)


def _parity_matrix(J, k0):
    """Coefficient-space parity: j -> -j (k0=0) or j -> -j-1 (k0=1/2).

    At k0 = 1/2 the image of j = J leaves the truncated range; that row
    stays zero, which only matters for modes with weight at the cutoff.
    """
    n = 2 * J + 1
    P = np.zeros((n, n))
    shift = int(round(2 * k0))
    for j in range(-J, J + 1):
        t = -j - shift
        if -J <= t <= J:
            P[t + J, j + J] = 1.0
    return P


def find_dirac_points(bs_gamma0: BandStructure, tol: float = 1e-8):
    """All double eigenvalues at k in {0, 1/2} among the tracked bands.

    The band structure must come from the gamma = 0 potential (real and
    even); the two eigenvectors of each crossing are orthonormalized and
    the parity operator is diagonalized on the span to produce the
    even/odd parity basis.  Crossings whose eigenspace is not two-dimensional in
    the tracked window are skipped.
    """
    points = []
    for k0 in (0.0, 0.5):
        col = bs_gamma0.column(k0)
        vals = bs_gamma0.omega[:, col]
        used = set()
        for i in range(len(vals)):
            if i in used:
                continue
            close = [j for j in range(len(vals)) if j != i
                     and abs(vals[j] - vals[i]) <= tol * max(1.0, abs(vals[i]))]
            if not close:
                continue
            if len(close) != 1:
                used.update({i, *close})
                warnings.warn(
                    f"eigenspace at (k0={k0}, omega~{vals[i].real:.6g}) has "
                    f"dimension {len(close) + 1}, not 2; crossing skipped",
                    stacklevel=2,
                )
                continue
            j = close[0]
            used.update({i, j})
            mu = float(np.mean([vals[i].real, vals[j].real]))
            S, _ = np.linalg.qr(np.column_stack([bs_gamma0.vectors[i, col],
                                                 bs_gamma0.vectors[j, col]]))
            P = _parity_matrix(bs_gamma0.J, k0)
            Psub = S.conj().T @ P @ S
            pvals, pvecs = np.linalg.eigh(0.5 * (Psub + Psub.conj().T))
            if np.abs(np.abs(pvals) - 1.0).max() > 1e-6:
                warnings.warn(
                    f"parity not resolved on the eigenspace at (k0={k0}, "
                    f"omega~{mu:.6g}); crossing skipped", stacklevel=2,
                )
                continue
            phi_minus = S @ pvecs[:, 0]   # parity -1: odd Bloch function
            phi_plus = S @ pvecs[:, 1]    # parity +1: even
            phi_plus = _parity_phase(phi_plus, want_imag=False)
            phi_minus = _parity_phase(phi_minus, want_imag=(k0 == 0.0))
            norm = np.sqrt(TWO_PI)
            # band_pair follows the real-part ordering at this k (the two
            # crossing band functions are adjacent in that ordering)
            rank = int(np.sum(vals.real < mu - tol * max(1.0, abs(mu))))
            points.append(DiracPoint(
                k0=k0, mu=mu, band_pair=(rank + 1, rank + 2),
                phi_plus=phi_plus / (norm * np.linalg.norm(phi_plus)),
                phi_minus=phi_minus / (norm * np.linalg.norm(phi_minus)),
            ))
    points.sort(key=lambda d: d.mu)
    return points


def _parity_phase(phi, want_imag):
    """Rotate so phi e^{i k0 x} is real: coefficients real for the even
    member; at k0 = 0 the odd member has purely imaginary coefficients."""
    jstar = int(np.argmax(np.abs(phi)))
    target = 0.5 * np.pi if want_imag else 0.0
    return phi * np.exp(1j * (target - np.angle(phi[jstar])))


def _w_exp_coeffs(W_parts: PotentialParts, J):
    """Exponential coefficients of W alone (odd, real): w_{+-j} = -+ i b_j fac/2."""
    if any(W_parts.cosine_coeffs):
        raise ConfigError("W must be odd: cosine part not allowed in mw_matrix")
    fac = 2.0 if W_parts.convention is Convention.PROP3_DOUBLED else 1.0
    w = {}
    for j, b in enumerate(W_parts.sine_coeffs, start=1):
        if b == 0:
            continue
        w[j] = -1j * fac * b / 2.0
        w[-j] = +1j * fac * b / 2.0
    return w


def _apply_potential(coeffs, phi, J):
    """(W phi)_j = sum_q w_q phi_{j-q} within the truncated range."""
    out = np.zeros(2 * J + 1, dtype=complex)
    for q, c in coeffs.items():
        lo, hi = max(-J, -J + q), min(J, J + q)
        if lo > hi:
            continue
        rows = np.arange(lo, hi + 1)
        out[rows + J] += c * phi[rows - q + J]
    return out


def mw_matrix(dp: DiracPoint, W_parts: PotentialParts) -> np.ndarray:
    """2x2 matrix of W-weighted inner products of the Dirac eigenbasis.

    Rows pair against (phi_+, phi_-):
        [[<W phi_+, phi_+>, <W phi_-, phi_+>],
         [<W phi_+, phi_->, <W phi_-, phi_->]]
    Hermitian for real W; anti-diagonal in the parity basis because W is
    odd and |phi_+-|^2 are even.
    """
    w = _w_exp_coeffs(W_parts, dp.J)
    Wp = _apply_potential(w, dp.phi_plus, dp.J)
    Wm = _apply_potential(w, dp.phi_minus, dp.J)
    return np.array([
        [eigen.inner(Wp, dp.phi_plus), eigen.inner(Wm, dp.phi_plus)],
        [eigen.inner(Wp, dp.phi_minus), eigen.inner(Wm, dp.phi_minus)],
    ])


def predict_splitting(dp: DiracPoint, W_parts: PotentialParts, gamma: float,
                      coupling_tol: float = 1e-10) -> SplittingPrediction:
    """Leading-order split pair mu +- i gamma |<W phi_+, phi_->|.

    A vanishing coupling element leaves the prediction inconclusive (the
    degenerate-perturbation hypothesis fails; higher orders decide).
    """
    if abs(gamma) > 0.5:
        raise ConfigError(f"perturbative prediction restricted to |gamma| <= 0.5, got {gamma}")
    coupling = abs(mw_matrix(dp, W_parts)[1, 0])
    if coupling <= coupling_tol:
        return SplittingPrediction(
            k0=dp.k0, mu=dp.mu, gamma=gamma, regime=Regime.INCONCLUSIVE,
            leading_eigenvalues=(complex(dp.mu), complex(dp.mu)), pred_im=0.0,
        )
    lam = gamma * coupling
    return SplittingPrediction(
        k0=dp.k0, mu=dp.mu, gamma=gamma, regime=Regime.DEGENERATE_PAIR,
        leading_eigenvalues=(dp.mu + 1j * lam, dp.mu - 1j * lam),
        pred_im=abs(lam),
    )


def measure_splitting(p: PeriodicPotential, k0: float, mu: float, J: int):
    """The two eigenvalues of L(k0) nearest mu, plus-Im first."""
    spec = eigen.solve(discretize.assemble(p, k0, J))
    d = np.abs(spec.eigenvalues - mu)
    close = np.nonzero(d < 1.0)[0]
    if len(close) < 2:
        raise ClassificationError(
            f"fewer than two eigenvalues within distance 1 of mu = {mu} at k0 = {k0}"
        )
    idx = close[np.argsort(d[close])[:2]]
    pair = sorted(spec.eigenvalues[idx], key=lambda z: -z.imag)
    return tuple(pair)


def splitting_slope(U_parts: PotentialParts, dp: DiracPoint, J: int,
                    gammas=(0.01, 0.02, 0.04)):
    """d(Im omega_+)/d gamma at gamma -> 0 by Richardson extrapolation.

    Measures Im omega_+(gamma)/gamma at three geometrically spaced gammas
    and removes the O(gamma^2) and O(gamma^4) bias (the splitting is even
    in gamma for PT potentials).  Comparable to |<W phi_+, phi_->|.
    """
    gammas = sorted(gammas)
    if len(gammas) != 3 or not np.allclose(np.diff(np.log(gammas)), np.log(2)):
        raise ConfigError("splitting_slope expects three gammas in ratio 1:2:4")
    s = []
    for g in gammas:
        V = from_parts(replace(U_parts, gamma=g))
        plus, _ = measure_splitting(V, dp.k0, dp.mu, J)
        s.append(abs(plus.imag) / g)
    r1a = (4 * s[0] - s[1]) / 3
    r1b = (4 * s[1] - s[2]) / 3
    return (16 * r1a - r1b) / 15


def prop3_scan(a_seq, b_seq, gamma: float, m_range, J: int):
    """Splitting of the high Dirac ladder for U + i gamma W in the doubled
    Fourier convention (U = 2 sum a_j cos jx, W = 2 sum b_j sin jx).

    For each m in m_range the scan targets the double point mu = m^2 at
    k0 = 0 (free modes e^{+-imx}).  The two resonant modes couple through
    the potential coefficients at harmonic q = 2m, so the leading
    eigenvalues are mu +- sqrt(a_q^2 - gamma^2 b_q^2) and the splitting
    magnitude is |gamma b_q| once b dominates.  One eigensolve at k0 = 0
    serves every m.
    """
    m_range = sorted(int(m) for m in m_range)
    if not m_range or m_range[0] < 1:
        raise ConfigError("m_range must contain positive integers")
    mmax = m_range[-1]
    if J < 2 * mmax + 16:
        raise ConfigError(f"J = {J} too small for m up to {mmax}; need J >= {2 * mmax + 16}")
    a_seq = np.asarray(a_seq, dtype=float)
    b_seq = np.asarray(b_seq, dtype=float)
    if len(a_seq) < 2 * mmax or len(b_seq) < 2 * mmax:
        raise ConfigError(
            f"coefficient sequences must reach the coupling harmonic {2 * mmax}"
        )
    parts = PotentialParts(tuple(a_seq), tuple(b_seq), gamma, Convention.PROP3_DOUBLED)
    V = from_parts(parts)
    spec = eigen.solve(discretize.assemble(V, 0.0, J))

    records = []
    for m in m_range:
        mu = float(m * m)
        q = 2 * m
        A, B = a_seq[q - 1], b_seq[q - 1]
        disc = A**2 - gamma**2 * B**2
        root = np.sqrt(complex(disc))
        pred = (mu + root, mu - root)
        pred_im = abs(gamma * B)
        regime = Regime.TWO_MODE
        rec = SplittingPrediction(
            k0=0.0, mu=mu, gamma=gamma, regime=regime,
            leading_eigenvalues=pred, pred_im=pred_im, coupling_harmonic=q,
        )
        d = np.abs(spec.eigenvalues - mu)
        idx = np.argsort(d)[:2]
        pair = sorted(spec.eigenvalues[idx], key=lambda z: -z.imag)
        records.append(rec.with_measurement(tuple(pair)))
    return records

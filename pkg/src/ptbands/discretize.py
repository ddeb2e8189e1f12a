"""Fourier-Galerkin matrices of the Bloch operator L(k) = -(d/dx + ik)^2 + V.

In the basis e^{ijx}, j = -J..J (this ordering is fixed; all eigenvector
post-processing depends on it), the operator is the dense matrix

    M[j, l] = (j + k)^2 delta_{jl} + c_{j-l},

exact for trigonometric potentials and spectrally convergent otherwise.
For PT-symmetric potentials every entry is real, so the spectrum is
closed under complex conjugation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .potential import PeriodicPotential


@dataclass(frozen=True)
class BlochOperatorMatrix:
    """Dense Galerkin matrix of L(k) (or its adjoint) at quasimomentum k."""

    k: float
    J: int
    entries: np.ndarray

    @property
    def size(self):
        return 2 * self.J + 1

    def norm(self):
        """Infinity norm, used as the scale in simplicity thresholds."""
        return np.linalg.norm(self.entries, np.inf)


def _check_args(p: PeriodicPotential, k: float, J: int):
    if abs(k) > 0.5 + 1e-12:
        raise ConfigError(f"quasimomentum k={k} outside [-1/2, 1/2]")
    # accuracy wants J comfortably above the potential bandwidth; truncating
    # potential harmonics outright is an error
    if J < max(1, p.max_harmonic):
        raise ConfigError(
            f"truncation J={J} drops potential harmonics (max harmonic "
            f"{p.max_harmonic})"
        )


def assemble(p: PeriodicPotential, k: float, J: int) -> BlochOperatorMatrix:
    """Galerkin matrix of L(k) with basis e^{ijx}, |j| <= J."""
    _check_args(p, k, J)
    n = 2 * J + 1
    js = np.arange(-J, J + 1)
    M = np.zeros((n, n), dtype=complex)
    M[np.diag_indices(n)] = (js + k) ** 2
    for q, c in p.coeffs.items():
        # entry (j, l) gets c_q whenever j - l = q
        lo, hi = max(-J, -J + q), min(J, J + q)
        if lo > hi:
            continue
        rows = np.arange(lo, hi + 1) + J
        M[rows, rows - q] += c
    return BlochOperatorMatrix(k=float(k), J=int(J), entries=M)


def assemble_adjoint(p: PeriodicPotential, k: float, J: int) -> BlochOperatorMatrix:
    """Galerkin matrix of the adjoint L*(k) = -(d/dx + ik)^2 + conj(V).

    Equals the conjugate transpose of assemble(p, k, J): the kinetic part
    is self-adjoint and multiplication by V conjugates.
    """
    M = assemble(p, k, J)
    return BlochOperatorMatrix(k=M.k, J=M.J, entries=M.entries.conj().T.copy())

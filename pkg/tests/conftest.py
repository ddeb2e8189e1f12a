import numpy as np
import pytest

from ptbands import PotentialParts, from_parts


def two_harmonic_parts(gamma):
    """V = 2cos x + cos 2x + i*gamma*sin 2x."""
    return PotentialParts(cosine_coeffs=(2.0, 1.0), sine_coeffs=(0.0, 1.0), gamma=gamma)


def two_harmonic_potential(gamma):
    return from_parts(two_harmonic_parts(gamma))


def gentle_parts(gamma=0.5):
    """V = cos x + i*gamma*sin x: a shallow PT lattice with a clean lowest band."""
    return PotentialParts(cosine_coeffs=(1.0,), sine_coeffs=(1.0,), gamma=gamma)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)

"""Random Gaussian objects for tests."""

import numpy as np

from ffamp.gaussian import GaussianState, SymplecticOp, apply, thermal


def random_passive(n, rng):
    """Random passive (orthogonal symplectic) matrix in xpxp ordering."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    S = np.zeros((2 * n, 2 * n))
    S[0::2, 0::2] = u.real
    S[0::2, 1::2] = -u.imag
    S[1::2, 0::2] = u.imag
    S[1::2, 1::2] = u.real
    return S


def random_symplectic(n, rng, max_squeeze=1.0):
    squeeze = rng.uniform(0, max_squeeze, size=n)
    D = np.diag(np.exp(np.column_stack([-squeeze, squeeze]).reshape(-1)))
    return random_passive(n, rng) @ D @ random_passive(n, rng)


def random_state(n, rng, max_squeeze=1.0, max_thermal=3.0):
    """Random physical Gaussian state: thermal spectrum >= 1, random symplectic, random mean."""
    nu = rng.uniform(1.0, max_thermal, size=n)
    base = thermal(nu)
    state = apply(base, SymplecticOp(random_symplectic(n, rng, max_squeeze)))
    return GaussianState(rng.normal(scale=2.0, size=2 * n), state.cov)

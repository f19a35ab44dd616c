"""Multimode Gaussian states in the quadrature representation.

Conventions used throughout the package:

* quadratures ``x = a + a^dag`` and ``p = -i (a - a^dag)``, so the vacuum has
  unit variance in every quadrature (shot-noise units, 0 dB reference);
* interleaved ordering ``(x_1, p_1, x_2, p_2, ...)``;
* symplectic form ``Omega = diag([[0, 1], [-1, 0]], ...)``.

All objects are immutable; every operation returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidParameter, InvalidState

SYMMETRY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _rows(mode: int) -> slice:
    return slice(2 * mode, 2 * mode + 2)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second moments of an ``n``-mode Gaussian state.

    ``mean`` has length ``2n`` and ``cov`` is the symmetrised ``2n x 2n``
    covariance matrix, both in shot-noise units. Shape and symmetry are
    enforced on construction; physicality is reported by
    :func:`check_physical` so that formal input/output correlation matrices
    can still be carried in this type.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean).reshape(-1)
        cov = _frozen(self.cov)
        if mean.size == 0 or mean.size % 2:
            raise InvalidState(f"mean must have even nonzero length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidState(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise InvalidState("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _frozen(0.5 * (cov + cov.T)))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def mode_mean(self, mode: int) -> np.ndarray:
        _check_mode(self, mode)
        return self.mean[_rows(mode)]

    def mode_cov(self, mode: int) -> np.ndarray:
        _check_mode(self, mode)
        return self.cov[_rows(mode), _rows(mode)]

    def allclose(self, other: "GaussianState", atol: float = 1e-10) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        return f"GaussianState(n_modes={self.n_modes}, mean={self.mean.tolist()})"


def _check_mode(state: GaussianState, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < state.n_modes:
        raise InvalidParameter(
            f"mode index {mode!r} out of range for {state.n_modes}-mode state"
        )


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    """Affine Gaussian unitary ``r -> S r + d`` on ``M`` modes.

    ``S`` must satisfy ``S Omega S^T = Omega``.
    """

    S: np.ndarray
    d: Optional[np.ndarray] = None

    def __post_init__(self):
        S = _frozen(self.S)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise InvalidParameter(f"S must be square with even size, got {S.shape}")
        d = np.zeros(S.shape[0]) if self.d is None else np.asarray(self.d, float)
        if d.shape != (S.shape[0],):
            raise InvalidParameter("displacement length does not match S")
        omega = symplectic_form(S.shape[0] // 2)
        err = np.max(np.abs(S @ omega @ S.T - omega))
        if err > SYMPLECTIC_TOL * max(1.0, float(np.max(np.abs(S))) ** 2):
            raise InvalidParameter(f"matrix is not symplectic (error {err:.3g})")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    def __matmul__(self, other: "SymplecticOp") -> "SymplecticOp":
        """``(A @ B)`` applies ``B`` first, then ``A``."""
        if other.n_modes != self.n_modes:
            raise InvalidParameter("cannot compose ops of different arity")
        return SymplecticOp(self.S @ other.S, self.S @ other.d + self.d)

    def embed(self, n_modes: int, modes: Sequence[int]) -> "SymplecticOp":
        """Lift this op to act on ``modes`` of an ``n_modes`` system."""
        modes = list(modes)
        if len(modes) != self.n_modes or len(set(modes)) != len(modes):
            raise InvalidParameter(f"need {self.n_modes} distinct modes, got {modes}")
        if any(not 0 <= m < n_modes for m in modes):
            raise InvalidParameter(f"modes {modes} out of range for {n_modes} modes")
        idx = np.array([[2 * m, 2 * m + 1] for m in modes]).reshape(-1)
        S = np.eye(2 * n_modes)
        S[np.ix_(idx, idx)] = self.S
        d = np.zeros(2 * n_modes)
        d[idx] = self.d
        return SymplecticOp(S, d)


def apply(
    state: GaussianState, op: SymplecticOp, modes: Optional[Sequence[int]] = None
) -> GaussianState:
    """Apply ``op`` to ``state``, on ``modes`` if given, else on all modes."""
    if modes is not None:
        op = op.embed(state.n_modes, modes)
    elif op.n_modes != state.n_modes:
        raise InvalidParameter(
            f"{op.n_modes}-mode op applied to {state.n_modes}-mode state"
        )
    return GaussianState(op.S @ state.mean + op.d, op.S @ state.cov @ op.S.T)


def tensor(*states: GaussianState) -> GaussianState:
    """Product state of the given states, modes concatenated in order."""
    if not states:
        raise InvalidParameter("tensor() needs at least one state")
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((mean.size, mean.size))
    i = 0
    for s in states:
        k = s.mean.size
        cov[i : i + k, i : i + k] = s.cov
        i += k
    return GaussianState(mean, cov)


# -- states ------------------------------------------------------------------


def vacuum(n: int) -> GaussianState:
    if int(n) != n or n < 1:
        raise InvalidParameter(f"mode count must be a positive integer, got {n!r}")
    return GaussianState(np.zeros(2 * int(n)), np.eye(2 * int(n)))


def thermal(var: float | Sequence[float]) -> GaussianState:
    """Thermal state(s) with quadrature variance ``var`` (``var = 2 n_th + 1``).

    No check that ``var >= 1`` is made; use :func:`check_physical`.
    """
    var = np.atleast_1d(np.asarray(var, dtype=float))
    return GaussianState(np.zeros(2 * var.size), np.diag(np.repeat(var, 2)))


def coherent(alphas: complex | Iterable[complex]) -> GaussianState:
    """Product of coherent states with amplitudes ``alphas``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    if alphas.size == 0:
        raise InvalidParameter("coherent() needs at least one amplitude")
    mean = np.column_stack([2 * alphas.real, 2 * alphas.imag]).reshape(-1)
    return GaussianState(mean, np.eye(mean.size))


def squeezed(r: float, phi: float = 0.0) -> GaussianState:
    """Single-mode squeezed vacuum; ``phi = 0`` squeezes ``x``."""
    return apply(vacuum(1), squeezer(r, phi))


def two_mode_squeezed(r: float) -> GaussianState:
    """Two-mode squeezed vacuum with correlated ``x`` and anticorrelated ``p``."""
    if r < 0:
        raise InvalidParameter(f"squeezing must be non-negative, got {r}")
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    cov = np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])
    return GaussianState(np.zeros(4), cov)


# -- symplectic ops ------------------------------------------------------------


def beam_splitter(T: float) -> SymplecticOp:
    """Beam splitter of power transmission ``T`` on modes ``(a, v)``.

    Outputs are ``sqrt(T) a - sqrt(R) v`` (first port) and
    ``sqrt(R) a + sqrt(T) v`` (second port), ``R = 1 - T``.
    """
    if not 0.0 <= T <= 1.0:
        raise InvalidParameter(f"transmission must lie in [0, 1], got {T}")
    t, r = np.sqrt(T), np.sqrt(1.0 - T)
    return SymplecticOp(np.kron(np.array([[t, -r], [r, t]]), np.eye(2)))


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def phase_shift(theta: float) -> SymplecticOp:
    """Phase rotation ``a -> exp(i theta) a``."""
    return SymplecticOp(_rotation(theta))


def squeezer(r: float, phi: float = 0.0) -> SymplecticOp:
    """Single-mode squeezer: ``x`` scaled by ``exp(-r)`` along angle ``phi / 2``."""
    rot = _rotation(phi / 2)
    return SymplecticOp(rot @ np.diag([np.exp(-r), np.exp(r)]) @ rot.T)


def sum_gate(gain: float) -> SymplecticOp:
    """QND coupling on ``(control, target)``: ``x_t += g x_c``, ``p_c -= g p_t``."""
    S = np.eye(4)
    S[2, 0] = gain
    S[1, 3] = -gain
    return SymplecticOp(S)


def psum_gate(gain: float) -> SymplecticOp:
    """QND coupling on ``(control, target)``: ``p_t += g p_c``, ``x_c -= g x_t``."""
    S = np.eye(4)
    S[3, 1] = gain
    S[0, 2] = -gain
    return SymplecticOp(S)


# -- channels and bookkeeping -----------------------------------------------------


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    _check_mode(state, mode)
    mean = state.mean.copy()
    mean[_rows(mode)] += (dx, dp)
    return GaussianState(mean, state.cov)


def loss_channel(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel of power transmission ``eta`` on one mode."""
    _check_mode(state, mode)
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameter(f"efficiency must lie in [0, 1], got {eta}")
    scale = np.ones(state.mean.size)
    scale[_rows(mode)] = np.sqrt(eta)
    cov = state.cov * np.outer(scale, scale)
    cov[_rows(mode), _rows(mode)] += (1.0 - eta) * np.eye(2)
    return GaussianState(state.mean * scale, cov)


def add_noise(state: GaussianState, mode: int, var: float | Sequence[float]) -> GaussianState:
    """Add classical Gaussian noise of variance ``var`` (scalar or ``(vx, vp)``)."""
    _check_mode(state, mode)
    var = np.broadcast_to(np.asarray(var, dtype=float), (2,))
    if np.any(var < 0):
        raise InvalidParameter(f"noise variance must be non-negative, got {var}")
    cov = state.cov.copy()
    cov[_rows(mode), _rows(mode)] += np.diag(var)
    return GaussianState(state.mean, cov)


def partial_trace(state: GaussianState, keep: Iterable[int]) -> GaussianState:
    """Reduced state on ``keep`` (in the order given)."""
    keep = list(keep)
    if not keep:
        raise InvalidParameter("keep must name at least one mode")
    if len(set(keep)) != len(keep):
        raise InvalidParameter(f"duplicate modes in keep: {keep}")
    for m in keep:
        _check_mode(state, m)
    idx = np.array([[2 * m, 2 * m + 1] for m in keep]).reshape(-1)
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Sorted symplectic spectrum of a covariance matrix.

    For positive-definite ``cov`` the Hermitian form ``i V^1/2 Omega V^1/2`` is
    diagonalised, which stays accurate for strongly squeezed states.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    omega = symplectic_form(n)
    w, u = np.linalg.eigh(cov)
    if w.min() > 0:
        root = (u * np.sqrt(w)) @ u.T
        nu = np.linalg.eigvalsh(1j * root @ omega @ root)
        return np.sort(nu[n:])
    nu = np.abs(np.linalg.eigvals(omega @ cov))
    return np.sort(nu)[::2]


@dataclass(frozen=True)
class PhysicalityReport:
    min_symplectic_eigenvalue: float
    passed: bool


def check_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> PhysicalityReport:
    """Uncertainty-principle check: all symplectic eigenvalues ``>= 1 - tol``.

    A covariance that is not positive definite always fails; its smallest
    ordinary eigenvalue is reported instead.
    """
    w_min = float(np.linalg.eigvalsh(state.cov)[0])
    if w_min <= 0:
        return PhysicalityReport(w_min, False)
    nu_min = float(symplectic_eigenvalues(state.cov)[0])
    return PhysicalityReport(nu_min, bool(nu_min >= 1.0 - tol))


def channel_noise_margin(X: np.ndarray, Y: np.ndarray) -> float:
    """Smallest eigenvalue of ``Y + i(Omega - X Omega X^T)``.

    A Gaussian channel ``V -> X V X^T + Y`` is completely positive exactly
    when this is non-negative.
    """
    X = np.asarray(X, dtype=float)
    omega = symplectic_form(X.shape[0] // 2)
    omega_in = symplectic_form(X.shape[1] // 2)
    return float(np.linalg.eigvalsh(Y + 1j * (omega - X @ omega_in @ X.T))[0])

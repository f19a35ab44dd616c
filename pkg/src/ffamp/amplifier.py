"""Feedforward phase-insensitive amplifier built from linear optics.

The circuit: the signal meets a tap beam splitter of transmission ``T``; the
reflected beam passes an optional in-line loss (detector efficiency), is split
50/50 with the vacuum port ``v2`` and its ``x``/``p`` quadratures are measured.
The outcomes, scaled by the electronic gain, displace the transmitted beam.
With ``g = sqrt(2R/T)`` the output is ``a_in / sqrt(T) + sqrt(1/T - 1) v2^dag``.

Two backends share one circuit description:

* :func:`run_ensemble` replaces "measure then displace" by QND sum gates from
  the measured modes onto the signal followed by a partial trace, which gives
  the unconditional output moments exactly;
* :func:`run_trajectories` samples outcomes, conditions, and displaces, one
  independently seeded generator per trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidParameter
from .gaussian import (
    GaussianState,
    SymplecticOp,
    _check_mode,
    add_noise,
    apply,
    beam_splitter,
    partial_trace,
    psum_gate,
    sum_gate,
    tensor,
    two_mode_squeezed,
    vacuum,
)
from .measurement import MeasurementRecord, condition_on_row, make_rng

MAX_GAIN = 1e4


def electronic_gain(T: float, eta: float = 1.0) -> float:
    """Feedforward gain ``sqrt(2R/(eta T))`` restoring the mean gain ``1/sqrt(T)``.

    ``eta`` is the in-line detection efficiency; ``eta = 1`` gives the ideal
    ``sqrt(2(1-T)/T)``.
    """
    if not 0.0 < T <= 1.0:
        raise InvalidParameter(f"tap transmission must lie in (0, 1], got {T}")
    if not 0.0 < eta <= 1.0:
        raise InvalidParameter(f"in-line efficiency must lie in (0, 1], got {eta}")
    return math.sqrt(2.0 * (1.0 - T) / (eta * T))


@dataclass(frozen=True)
class AmplifierConfig:
    """Amplifier parameters.

    ``electronic_gain``, ``lambda_x`` and ``lambda_p`` default to ``None``,
    meaning the calibrated values: ``sqrt(2R/(eta_inline T))`` for the signal
    and ``(+sqrt(2/T), -sqrt(2/T))`` for the conjugate branch.
    """

    T: float
    electronic_gain: Optional[float] = None
    eta_inline: float = 1.0
    coupler_transmission: float = 1.0
    technical_noise: float = 0.0
    electronic_noise: float = 0.0
    ancilla_squeezing: float = 0.0
    lambda_x: Optional[float] = None
    lambda_p: Optional[float] = None

    def __post_init__(self):
        if not 1.0 / MAX_GAIN <= self.T <= 1.0:
            raise InvalidParameter(
                f"T must lie in [{1.0 / MAX_GAIN:g}, 1] (gain cap {MAX_GAIN:g}), got {self.T}"
            )
        for name in ("eta_inline", "coupler_transmission"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise InvalidParameter(f"{name} must lie in (0, 1], got {value}")
        for name in ("technical_noise", "electronic_noise", "ancilla_squeezing"):
            if getattr(self, name) < 0:
                raise InvalidParameter(f"{name} must be non-negative")

    @classmethod
    def from_gain(cls, G: float, **kwargs) -> "AmplifierConfig":
        if not 1.0 <= G <= MAX_GAIN:
            raise InvalidParameter(f"gain must lie in [1, {MAX_GAIN:g}], got {G}")
        return cls(T=1.0 / G, **kwargs)

    @property
    def R(self) -> float:
        return 1.0 - self.T

    @property
    def gain(self) -> float:
        return 1.0 / self.T

    @property
    def g(self) -> float:
        if self.electronic_gain is not None:
            return float(self.electronic_gain)
        return electronic_gain(self.T, self.eta_inline)

    @property
    def conjugate_gains(self) -> Tuple[float, float]:
        default = math.sqrt(2.0 / self.T)
        lx = default if self.lambda_x is None else float(self.lambda_x)
        lp = -default if self.lambda_p is None else float(self.lambda_p)
        return lx, lp


@dataclass(frozen=True)
class _Circuit:
    joint: GaussianState
    passive: SymplecticOp
    x_mode: int
    p_mode: int
    targets: Tuple[Tuple[int, float, float], ...]
    keep: Tuple[int, ...]
    signal: int
    v2: int
    electronic_noise: float
    technical_noise: float

    @property
    def feedforward(self) -> SymplecticOp:
        n = self.joint.n_modes
        op = SymplecticOp(np.eye(2 * n))
        for mode, gx, gp in self.targets:
            op = sum_gate(gx).embed(n, [self.x_mode, mode]) @ op
            op = psum_gate(gp).embed(n, [self.p_mode, mode]) @ op
        return op

    @property
    def signal_out(self) -> int:
        """Index of the signal within the kept modes."""
        return self.keep.index(self.signal)


def _build(
    config: AmplifierConfig,
    state: GaussianState,
    signal_mode: int,
    dark_port: Optional[GaussianState],
    extra_targets: Sequence[Tuple[int, float, float]] = (),
) -> _Circuit:
    _check_mode(state, signal_mode)
    dark = vacuum(1) if dark_port is None else dark_port
    n_in, n_dark = state.n_modes, dark.n_modes
    s, v1 = signal_mode, n_in
    v2 = n_in + n_dark
    env_detector, env_coupler = v2 + 1, v2 + 2
    joint = tensor(state, dark, vacuum(3))
    n = joint.n_modes

    passive = beam_splitter(config.T).embed(n, [s, v1])
    passive = beam_splitter(config.eta_inline).embed(n, [v1, env_detector]) @ passive
    # after the split, x is read on the v2 port and p on the v1 port
    passive = beam_splitter(0.5).embed(n, [v1, v2]) @ passive
    passive = beam_splitter(config.coupler_transmission).embed(n, [s, env_coupler]) @ passive

    targets = [(s, config.g, config.g)]
    targets += [(n_in + k, gx, gp) for k, gx, gp in extra_targets]
    keep = tuple(range(n_in)) + tuple(range(n_in + 1, n_in + n_dark))
    return _Circuit(
        joint=joint,
        passive=passive,
        x_mode=v2,
        p_mode=v1,
        targets=tuple(targets),
        keep=keep,
        signal=s,
        v2=v2,
        electronic_noise=config.electronic_noise,
        technical_noise=config.technical_noise,
    )


def _measured_state(circ: _Circuit) -> GaussianState:
    state = apply(circ.joint, circ.passive)
    if circ.electronic_noise:
        state = add_noise(state, circ.x_mode, (circ.electronic_noise, 0.0))
        state = add_noise(state, circ.p_mode, (0.0, circ.electronic_noise))
    return state


def _ensemble(circ: _Circuit, track_v2: bool) -> GaussianState:
    out = partial_trace(apply(_measured_state(circ), circ.feedforward), circ.keep)
    if circ.technical_noise:
        out = add_noise(out, circ.signal_out, circ.technical_noise)
    if not track_v2:
        return out
    # Formal joint moments of the outputs with the *input* v2 quadratures.
    total = circ.feedforward.S @ circ.passive.S
    rows = np.array([[2 * m, 2 * m + 1] for m in circ.keep]).reshape(-1)
    v2_rows = [2 * circ.v2, 2 * circ.v2 + 1]
    cross = (total @ circ.joint.cov)[np.ix_(rows, v2_rows)]
    cov = np.block([[out.cov, cross], [cross.T, circ.joint.cov[np.ix_(v2_rows, v2_rows)]]])
    return GaussianState(np.concatenate([out.mean, circ.joint.mean[v2_rows]]), cov)


def run_ensemble(
    config: AmplifierConfig,
    state: GaussianState,
    track_v2: bool = False,
    signal_mode: int = 0,
    dark_port: Optional[GaussianState] = None,
) -> GaussianState:
    """Unconditional output state of the amplifier.

    Modes other than ``signal_mode`` pass through (they may be correlated
    with the signal). ``dark_port`` replaces the vacuum at the tap's empty
    port; if it has several modes, its first mode enters the port and the
    others are carried along and returned after the input modes.

    With ``track_v2`` the input quadratures of the ``v2`` port are appended as
    a last mode, so that input/output correlations can be read off. That
    block pairs operators at different times and is therefore not required to
    pass :func:`~ffamp.gaussian.check_physical`.
    """
    return _ensemble(_build(config, state, signal_mode, dark_port), track_v2)


def amplifier_channel(config: AmplifierConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Single-mode Gaussian channel ``V -> X V X^T + Y`` realised by the circuit.

    Assumes vacuum at the tap's dark port.
    """
    circ = _build(config, vacuum(1), 0, None)
    total = circ.feedforward.S @ circ.passive.S
    rows = [0, 1]
    X = total[np.ix_(rows, rows)]
    env = total[rows, 2:]
    Y = env @ env.T
    if circ.electronic_noise:
        gain = circ.feedforward.S[np.ix_(rows, [2 * circ.x_mode, 2 * circ.p_mode + 1])]
        Y = Y + circ.electronic_noise * gain @ gain.T
    Y = Y + circ.technical_noise * np.eye(2)
    return X, Y


def ideal_amplifier_op(G: float) -> SymplecticOp:
    """Two-mode map of the ideal amplifier on ``(a_in, v2)``.

    First output: ``sqrt(G) a_in + sqrt(G-1) v2^dag`` (amplified signal).
    Second output: ``sqrt(G-1) a_in^dag + sqrt(G) v2`` (phase-conjugate idler).
    """
    if G < 1:
        raise InvalidParameter(f"gain must be >= 1, got {G}")
    a, b = math.sqrt(G), math.sqrt(G - 1.0)
    z = np.diag([1.0, -1.0])
    return SymplecticOp(np.block([[a * np.eye(2), b * z], [b * z, a * np.eye(2)]]))


# -- Monte Carlo backend ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Sampled feedforward runs.

    ``outcomes[i]`` holds ``(x_m, p_m)`` of trajectory ``i`` and
    ``output_means[i]`` the mean vector of its conditional, displaced output.
    Every trajectory shares ``conditional_cov`` (outcome-independent).
    """

    outcomes: np.ndarray
    output_means: np.ndarray
    conditional_cov: np.ndarray
    master_seed: int
    measured_modes: Tuple[int, int] = (0, 0)
    sample_mean: np.ndarray = field(init=False)
    sample_cov: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("outcomes", "output_means", "conditional_cov"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        mean, cov = self.summary()
        object.__setattr__(self, "sample_mean", mean)
        object.__setattr__(self, "sample_cov", cov)

    @property
    def n_traj(self) -> int:
        return self.outcomes.shape[0]

    def summary(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ensemble mean and covariance (conditional cov + spread of the means)."""
        means = self.output_means
        mean = means.mean(axis=0)
        centred = means - mean
        return mean, self.conditional_cov + centred.T @ centred / self.n_traj

    def state(self) -> GaussianState:
        return GaussianState(self.sample_mean, self.sample_cov)

    def record(self, i: int) -> MeasurementRecord:
        return MeasurementRecord(
            measured_modes=self.measured_modes,
            outcomes=tuple(float(v) for v in self.outcomes[i]),
            angles=(0.0, math.pi / 2),
            seed=(self.master_seed, i),
        )

    def records(self) -> List[MeasurementRecord]:
        return [self.record(i) for i in range(self.n_traj)]


def trajectory_normals(master_seed: int, n_traj: int) -> np.ndarray:
    """Standard normal pairs, row ``i`` from generator ``(master_seed, i)``."""
    z = np.empty((n_traj, 2))
    for i in range(n_traj):
        z[i] = make_rng(master_seed, i).standard_normal(2)
    return z


def _trajectories(circ: _Circuit, n_traj: int, master_seed: int) -> TrajectoryEnsemble:
    state = _measured_state(circ)
    n = state.n_modes
    z = trajectory_normals(master_seed, n_traj)

    # x_m first: every trajectory starts from the same mean
    row_x = 2 * circ.x_mode
    x_m = state.mean[row_x] + math.sqrt(max(state.cov[row_x, row_x], 0.0)) * z[:, 0]
    means = np.broadcast_to(state.mean, (n_traj, 2 * n))
    means, cov = condition_on_row(
        means, state.cov, row_x, x_m, [row_x, row_x + 1]
    )
    remaining = [m for m in range(n) if m != circ.x_mode]

    p_idx = remaining.index(circ.p_mode)
    row_p = 2 * p_idx + 1
    p_m = means[:, row_p] + math.sqrt(max(cov[row_p, row_p], 0.0)) * z[:, 1]
    means, cov = condition_on_row(means, cov, row_p, p_m, [row_p - 1, row_p])
    remaining.remove(circ.p_mode)

    means = means.copy()
    for mode, gx, gp in circ.targets:
        k = remaining.index(mode)
        means[:, 2 * k] += gx * x_m
        means[:, 2 * k + 1] += gp * p_m

    pos = [remaining.index(m) for m in circ.keep]
    rows = np.array([[2 * k, 2 * k + 1] for k in pos]).reshape(-1)
    means = means[:, rows]
    cov = cov[np.ix_(rows, rows)]
    if circ.technical_noise:
        so = 2 * circ.signal_out
        cov = cov.copy()
        cov[so : so + 2, so : so + 2] += circ.technical_noise * np.eye(2)
    return TrajectoryEnsemble(
        outcomes=np.column_stack([x_m, p_m]),
        output_means=means,
        conditional_cov=cov,
        master_seed=master_seed,
        measured_modes=(circ.x_mode, circ.p_mode),
    )


def run_trajectories(
    config: AmplifierConfig,
    state: GaussianState,
    n_traj: int,
    master_seed: int,
    signal_mode: int = 0,
    dark_port: Optional[GaussianState] = None,
) -> TrajectoryEnsemble:
    """Monte Carlo realisation of the amplifier, ``n_traj`` runs.

    Trajectory ``i`` draws ``x_m`` then ``p_m`` from generator
    ``make_rng(master_seed, i)``, so results do not depend on evaluation order.
    """
    if n_traj < 1:
        raise InvalidParameter(f"n_traj must be >= 1, got {n_traj}")
    return _trajectories(_build(config, state, signal_mode, dark_port), int(n_traj), master_seed)


# -- extensions ---------------------------------------------------------------------------


def entangled_ancilla(r: float) -> GaussianState:
    """Two-mode squeezed ancilla with anticorrelated ``x`` and correlated ``p``.

    This is :func:`two_mode_squeezed` with a pi phase shift on the second
    half, the orientation for which the conjugate-branch gains
    ``(+sqrt(2/T), -sqrt(2/T))`` cancel the ancilla noise.
    """
    flip = SymplecticOp(-np.eye(2))  # exact pi rotation
    return apply(two_mode_squeezed(r), flip, [1])


def run_phase_conjugate(
    config: AmplifierConfig, state: GaussianState, signal_mode: int = 0
) -> GaussianState:
    """Amplifier with an entangled ancilla, returning signal and conjugate outputs.

    Half 1 of the ancilla enters the tap's dark port; half 2 is displaced by
    ``(lambda_x x_m, lambda_p p_m)``. The result holds the input modes (signal
    amplified in place) followed by the conjugate output mode.
    """
    lx, lp = config.conjugate_gains
    ancilla = entangled_ancilla(config.ancilla_squeezing)
    circ = _build(config, state, signal_mode, ancilla, extra_targets=[(1, lx, lp)])
    return _ensemble(circ, track_v2=False)


def predict_phase_conjugate(
    config: AmplifierConfig, state: GaussianState, signal_mode: int = 0
) -> GaussianState:
    """Infinite-squeezing prediction: ``(signal out, conjugate out)`` moments."""
    _check_mode(state, signal_mode)
    joint = tensor(state, vacuum(1))
    out = apply(joint, ideal_amplifier_op(config.gain), [signal_mode, state.n_modes])
    if config.technical_noise:
        out = add_noise(out, signal_mode, config.technical_noise)
    return out


def phase_sensitive_amp(G: float, state: GaussianState, mode: int = 0) -> GaussianState:
    """Noiseless degenerate amplifier: ``x -> x / sqrt(G)``, ``p -> sqrt(G) p``."""
    if G <= 0:
        raise InvalidParameter(f"gain must be positive, got {G}")
    op = SymplecticOp(np.diag([1.0 / math.sqrt(G), math.sqrt(G)]))
    return apply(state, op, [mode])

"""Homodyne and dual-homodyne measurements on Gaussian states.

Measurements are ideal projective quadrature measurements; detector
inefficiency belongs upstream as a loss channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from .errors import InvalidParameter
from .gaussian import (
    GaussianState,
    _check_mode,
    add_noise,
    apply,
    beam_splitter,
    phase_shift,
    tensor,
    vacuum,
)

# Below this measured-quadrature variance the outcome is treated as deterministic.
DEGENERATE_VAR = 1e-12


def make_rng(master_seed: int, index: Optional[int] = None) -> np.random.Generator:
    """Portable counter-based generator (Philox) for ``(master_seed, index)``.

    Streams depend only on the two integers, never on call order, so
    trajectories can be generated in any order or in parallel.
    """
    spawn_key = () if index is None else (int(index),)
    seq = np.random.SeedSequence(int(master_seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class MeasurementRecord:
    measured_modes: Tuple[int, ...]
    outcomes: Tuple[float, ...]
    angles: Tuple[float, ...]
    seed: Any = None

    def __post_init__(self):
        if len(self.outcomes) != len(self.angles):
            raise InvalidParameter("one outcome is required per measured quadrature")


def condition_on_row(mean, cov, row, outcome, drop):
    """Gaussian conditioning on quadrature ``row`` taking value ``outcome``.

    ``mean`` may carry leading batch dimensions, with ``outcome`` matching
    them; ``cov`` is shared because the conditional covariance does not depend
    on the outcome. Rows in ``drop`` are removed from the result.

    Returns ``(mean, cov)`` of the remaining rows.
    """
    mean = np.asarray(mean, dtype=float)
    keep = np.setdiff1d(np.arange(cov.shape[0]), drop)
    var = cov[row, row]
    cross = cov[keep, row]
    gain = np.zeros_like(cross) if var < DEGENERATE_VAR else cross / var
    innovation = np.asarray(outcome, dtype=float) - mean[..., row]
    new_mean = mean[..., keep] + innovation[..., None] * gain
    new_cov = cov[np.ix_(keep, keep)] - np.outer(gain, cross)
    return new_mean, 0.5 * (new_cov + new_cov.T)


def _mode_rows(mode: int) -> list:
    return [2 * mode, 2 * mode + 1]


def _sample_row(
    state: GaussianState, mode: int, row: int, rng: np.random.Generator
) -> Tuple[float, Optional[GaussianState]]:
    mu, var = state.mean[row], state.cov[row, row]
    outcome = float(mu + np.sqrt(max(var, 0.0)) * rng.standard_normal())
    if state.n_modes == 1:
        return outcome, None
    mean, cov = condition_on_row(state.mean, state.cov, row, outcome, _mode_rows(mode))
    return outcome, GaussianState(mean, cov)


def homodyne_stats(state: GaussianState, mode: int, angle: float = 0.0) -> Tuple[float, float]:
    """Mean and variance of ``cos(angle) x + sin(angle) p`` on ``mode``."""
    _check_mode(state, mode)
    v = np.array([np.cos(angle), np.sin(angle)])
    return float(v @ state.mode_mean(mode)), float(v @ state.mode_cov(mode) @ v)


def homodyne_sample(
    state: GaussianState, mode: int, angle: float, rng: np.random.Generator
) -> Tuple[float, Optional[GaussianState]]:
    """Measure the rotated quadrature of ``mode`` and condition the rest.

    Returns the outcome and the conditional state of the other modes (``None``
    when nothing remains). Uses one standard normal draw from ``rng``.
    """
    _check_mode(state, mode)
    if angle != 0.0:
        state = apply(state, phase_shift(-angle), [mode])
    return _sample_row(state, mode, 2 * mode, rng)


def dual_homodyne_network(
    state: GaussianState, mode: int, v2_mode: Optional[int] = None
) -> Tuple[GaussianState, int, int]:
    """Split ``mode`` on a 50/50 beam splitter with the auxiliary port ``v2_mode``.

    If ``v2_mode`` is None a vacuum mode is appended to serve as the auxiliary
    port. Returns ``(joint_state, x_mode, p_mode)``: the ``x`` quadrature of
    ``x_mode`` carries ``(x + x_v2)/sqrt(2)`` and the ``p`` quadrature of
    ``p_mode`` carries ``(p - p_v2)/sqrt(2)``.
    """
    _check_mode(state, mode)
    if v2_mode is None:
        state = tensor(state, vacuum(1))
        v2_mode = state.n_modes - 1
    else:
        _check_mode(state, v2_mode)
        if v2_mode == mode:
            raise InvalidParameter("auxiliary port must differ from the measured mode")
    # first port: (b - v2)/sqrt2, second port: (b + v2)/sqrt2
    return apply(state, beam_splitter(0.5), [mode, v2_mode]), v2_mode, mode


def dual_homodyne_stats(
    state: GaussianState,
    mode: int,
    v2_mode: Optional[int] = None,
    electronic_noise: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean vector and 2x2 covariance of the outcome pair ``(x_m, p_m)``."""
    joint, xm, pm = dual_homodyne_network(state, mode, v2_mode)
    rows = [2 * xm, 2 * pm + 1]
    cov = joint.cov[np.ix_(rows, rows)] + electronic_noise * np.eye(2)
    return joint.mean[rows].copy(), cov


def dual_homodyne(
    state: GaussianState,
    mode: int,
    rng: np.random.Generator,
    v2_mode: Optional[int] = None,
    electronic_noise: float = 0.0,
) -> Tuple[float, float, Optional[GaussianState]]:
    """Simultaneous ``x``/``p`` measurement of ``mode`` via a 50/50 split.

    ``x_m`` is drawn first, then ``p_m`` conditioned on it. Both the measured
    mode and the auxiliary port are consumed; the returned conditional state
    holds the remaining modes in their original order (``None`` if none).
    """
    joint, xm, pm = dual_homodyne_network(state, mode, v2_mode)
    if electronic_noise:
        joint = add_noise(joint, xm, (electronic_noise, 0.0))
        joint = add_noise(joint, pm, (0.0, electronic_noise))
    x_m, rest = _sample_row(joint, xm, 2 * xm, rng)
    pm_after = pm - 1 if pm > xm else pm
    p_m, rest = _sample_row(rest, pm_after, 2 * pm_after + 1, rng)
    return x_m, p_m, rest

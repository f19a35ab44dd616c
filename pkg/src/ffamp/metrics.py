"""Gain, added noise and noise figure of single-mode input/output pairs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidParameter, UnphysicalState
from .gaussian import GaussianState

# Quadrature means smaller than this count as zero when estimating gains.
ZERO_MEAN_TOL = 1e-12


def to_db(value: Optional[float]) -> Optional[float]:
    """``10 log10(value)``, passing ``None`` through."""
    if value is None:
        return None
    return 10.0 * math.log10(value)


def nf_ideal(G: float) -> float:
    """Quantum-limited noise figure ``G / (2G - 1)`` for coherent inputs."""
    return nf_technical(G, 0.0)


def nf_technical(G: float, dN_cl: float) -> float:
    """Noise figure ``G / (2G - 1 + dN_cl)`` with classical excess noise ``dN_cl``."""
    if G < 1:
        raise InvalidParameter(f"gain must be >= 1, got {G}")
    if dN_cl < 0:
        raise InvalidParameter(f"excess noise must be non-negative, got {dN_cl}")
    return G / (2.0 * G - 1.0 + dN_cl)


def nf_detector(G: float, eta: float) -> float:
    """Noise figure ``eta G / (2G - 2 + eta)`` with in-line detection efficiency ``eta``."""
    if G < 1:
        raise InvalidParameter(f"gain must be >= 1, got {G}")
    if not 0.0 < eta <= 1.0:
        raise InvalidParameter(f"efficiency must lie in (0, 1], got {eta}")
    return eta * G / (2.0 * G - 2.0 + eta)


def correct_variance(var, eta_hd: float):
    """Undo a verification-detector loss: ``(var - (1 - eta)) / eta``."""
    if not 0.0 < eta_hd <= 1.0:
        raise InvalidParameter(f"eta_hd must lie in (0, 1], got {eta_hd}")
    corrected = (np.asarray(var, dtype=float) - (1.0 - eta_hd)) / eta_hd
    if np.any(corrected <= 0):
        raise UnphysicalState(
            f"loss correction with eta_hd={eta_hd} gives non-positive variance"
        )
    return corrected


def _moments(state: GaussianState, mode: int, eta_hd: float) -> Tuple[np.ndarray, np.ndarray]:
    mean = np.array(state.mode_mean(mode))
    var = np.diag(state.mode_cov(mode)).copy()
    if eta_hd < 1.0:
        mean = mean / math.sqrt(eta_hd)
        var = correct_variance(var, eta_hd)
    return mean, var


def _gains(mean_in, mean_out, assume_phase_insensitive):
    gains = [
        None if abs(m_in) < ZERO_MEAN_TOL else float((m_out / m_in) ** 2)
        for m_in, m_out in zip(mean_in, mean_out)
    ]
    if assume_phase_insensitive:
        if gains[0] is None:
            gains[0] = gains[1]
        if gains[1] is None:
            gains[1] = gains[0]
    return tuple(gains)


def estimate_gain(
    input: GaussianState,
    output: GaussianState,
    input_mode: int = 0,
    output_mode: int = 0,
    assume_phase_insensitive: bool = False,
) -> Tuple[Optional[float], Optional[float]]:
    """Power gains ``(<q>_out / <q>_in)^2`` for ``q = x, p``.

    A quadrature with zero input mean has no estimable gain and is reported
    as ``None``, unless ``assume_phase_insensitive`` lets it borrow the other
    quadrature's value.
    """
    return _gains(
        input.mode_mean(input_mode),
        output.mode_mean(output_mode),
        assume_phase_insensitive,
    )


def added_noise(
    output: GaussianState,
    G: Union[float, Sequence[float]],
    input: GaussianState,
    input_mode: int = 0,
    output_mode: int = 0,
) -> Tuple[float, float]:
    """Noise beyond amplified input noise, ``Var_out - G Var_in``, per quadrature."""
    G = np.broadcast_to(np.asarray(G, dtype=float), (2,))
    var_in = np.diag(input.mode_cov(input_mode))
    var_out = np.diag(output.mode_cov(output_mode))
    a = var_out - G * var_in
    return float(a[0]), float(a[1])


@dataclass(frozen=True)
class NoiseFigureReport:
    G_x: Optional[float]
    G_p: Optional[float]
    added_noise_x: Optional[float]
    added_noise_p: Optional[float]
    NF_x: Optional[float]
    NF_p: Optional[float]
    loss_corrected: bool = False
    eta_hd: float = 1.0
    G_x_db: Optional[float] = field(init=False)
    G_p_db: Optional[float] = field(init=False)
    NF_x_db: Optional[float] = field(init=False)
    NF_p_db: Optional[float] = field(init=False)

    def __post_init__(self):
        for name in ("G_x", "G_p", "NF_x", "NF_p"):
            object.__setattr__(self, name + "_db", to_db(getattr(self, name)))

    def to_dict(self) -> dict:
        return asdict(self)


def noise_figure(
    input: GaussianState,
    output: GaussianState,
    eta_hd: float = 1.0,
    input_mode: int = 0,
    output_mode: int = 0,
    assume_phase_insensitive: bool = False,
) -> NoiseFigureReport:
    """Per-quadrature ``NF = SNR_out / SNR_in`` with ``SNR = <q>^2 / Var(q)``.

    A quadrature with zero input mean gets no gain and no NF unless
    ``assume_phase_insensitive`` is set, in which case the other quadrature's
    gain is used and ``NF = G Var_in / Var_out``.

    With ``eta_hd < 1`` both states are taken as seen through a verification
    detector of that efficiency, and their moments are corrected back first.

    Raises:
        UnphysicalState: if the loss correction yields a non-positive variance.
    """
    m_in, v_in = _moments(input, input_mode, eta_hd)
    m_out, v_out = _moments(output, output_mode, eta_hd)
    gains = _gains(m_in, m_out, assume_phase_insensitive)
    nfs, noises = [], []
    for q in range(2):
        if gains[q] is None:
            nfs.append(None)
            noises.append(None)
            continue
        # equals (m_out^2 / v_out) / (m_in^2 / v_in) whenever m_in != 0
        nfs.append(float(gains[q] * v_in[q] / v_out[q]))
        noises.append(float(v_out[q] - gains[q] * v_in[q]))
    return NoiseFigureReport(
        G_x=gains[0],
        G_p=gains[1],
        added_noise_x=noises[0],
        added_noise_p=noises[1],
        NF_x=nfs[0],
        NF_p=nfs[1],
        loss_corrected=eta_hd < 1.0,
        eta_hd=float(eta_hd),
    )

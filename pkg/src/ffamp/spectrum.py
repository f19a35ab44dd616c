"""Spectrum-analyser style views of a quadrature at an RF sideband.

A quadrature record ``q(t) = <q> cos(2 pi f_c t) + sqrt(Var q) xi(t)`` is
synthesised and analysed with a Hann-windowed Welch periodogram. The Hann
window has an equivalent noise bandwidth of 1.5 bins, so the bin spacing is
``rbw / 1.5``. Video filtering is emulated by power-averaging all segments
within a record of length ``1 / vbw``. Powers are normalised so that a
vacuum quadrature reads 0 dB; a carrier of amplitude ``<q>`` on a bin centre
then reads ``10 log10(<q>^2 C + Var q)`` with ``C = fs / (4 rbw)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import signal

from .amplifier import AmplifierConfig, run_ensemble
from .errors import InvalidParameter
from .gaussian import GaussianState, coherent
from .measurement import homodyne_stats, make_rng

HANN_ENBW_BINS = 1.5
GUARD_RBW = 3.0

# Analyser settings of the reference measurement.
SIDEBAND_FREQ = 14.3e6
SPAN = 100e3
RBW = 10e3
VBW = 30.0


@dataclass(frozen=True)
class SamplingPlan:
    sample_rate: float
    nperseg: int
    n_samples: int

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.nperseg


def sampling_plan(
    center_freq: float, span: float, rbw: float, vbw: float, duration: Optional[float] = None
) -> SamplingPlan:
    if span <= 0 or rbw <= 0 or vbw <= 0:
        raise InvalidParameter("span, rbw and vbw must be positive")
    if rbw > span:
        raise InvalidParameter(f"rbw {rbw:g} Hz is larger than the span {span:g} Hz")
    if center_freq - span / 2 <= 0:
        raise InvalidParameter("span must lie above 0 Hz")
    df = rbw / HANN_ENBW_BINS
    nperseg = math.ceil(2.2 * (center_freq + span / 2) / df)
    nperseg += nperseg % 2
    fs = nperseg * df
    duration = 1.0 / vbw if duration is None else duration
    return SamplingPlan(fs, nperseg, max(nperseg, math.ceil(duration * fs)))


def calibration_constant(plan: SamplingPlan, rbw: float) -> float:
    """Normalised peak power per unit squared carrier amplitude."""
    return plan.sample_rate / (4.0 * rbw)


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    frequency: np.ndarray
    power_db: np.ndarray
    rbw: float
    vbw: float
    center_freq: float
    sample_rate: float

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        p = np.asarray(self.power_db, dtype=float)
        if f.shape != p.shape:
            raise InvalidParameter("frequency and power grids differ in length")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise InvalidParameter("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(p)):
            raise InvalidParameter("power values must be finite")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "power_db", p)


def _record(mean, var, plan, center_freq, rng):
    t = np.arange(plan.n_samples) / plan.sample_rate
    return mean * np.cos(2 * np.pi * center_freq * t) + math.sqrt(var) * rng.standard_normal(
        plan.n_samples
    )


def synthesize_spectrum(
    state: GaussianState,
    mode: int = 0,
    angle: float = 0.0,
    center_freq: float = SIDEBAND_FREQ,
    span: float = SPAN,
    rbw: float = RBW,
    vbw: float = VBW,
    rng: Optional[np.random.Generator] = None,
    duration: Optional[float] = None,
) -> PowerSpectrum:
    """Power spectrum of quadrature ``angle`` of ``mode`` around ``center_freq``.

    ``duration`` overrides the default record length ``1 / vbw``.
    """
    plan = sampling_plan(center_freq, span, rbw, vbw, duration)
    rng = make_rng(0) if rng is None else rng
    mean, var = homodyne_stats(state, mode, angle)
    q = _record(mean, var, plan, center_freq, rng)
    f, psd = signal.welch(
        q,
        fs=plan.sample_rate,
        window="hann",
        nperseg=plan.nperseg,
        noverlap=plan.nperseg // 2,
        detrend=False,
        scaling="density",
    )
    power = psd * plan.sample_rate / 2.0  # white unit-variance noise -> 1
    sel = np.abs(f - center_freq) <= span / 2 + 1e-9 * span
    return PowerSpectrum(
        frequency=f[sel],
        power_db=10.0 * np.log10(power[sel]),
        rbw=rbw,
        vbw=vbw,
        center_freq=center_freq,
        sample_rate=plan.sample_rate,
    )


def peak_floor_report(spectrum: PowerSpectrum) -> Tuple[float, float]:
    """Peak (max bin) and floor (median outside ``+-3 rbw`` of the carrier), in dB."""
    if spectrum.power_db.size == 0:
        raise InvalidParameter("empty spectrum")
    outside = np.abs(spectrum.frequency - spectrum.center_freq) > GUARD_RBW * spectrum.rbw
    if not outside.any():
        raise InvalidParameter("no bins outside the carrier guard band; widen the span")
    return float(spectrum.power_db.max()), float(np.median(spectrum.power_db[outside]))


def zero_span(
    state: GaussianState,
    mode: int = 0,
    angle: float = 0.0,
    center_freq: float = SIDEBAND_FREQ,
    rbw: float = RBW,
    duration: float = 2.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, float]:
    """Power at ``center_freq`` with the modulation on and off, in dB.

    Both records share one noise realisation; only the carrier is toggled.
    """
    plan = sampling_plan(center_freq, 2 * GUARD_RBW * rbw, rbw, 1.0 / duration, duration)
    rng = make_rng(0) if rng is None else rng
    mean, var = homodyne_stats(state, mode, angle)
    n_seg = plan.n_samples // plan.nperseg
    window = signal.get_window("hann", plan.nperseg)
    t = np.arange(plan.nperseg) / plan.sample_rate
    probe = window * np.exp(-2j * np.pi * center_freq * t)
    noise = math.sqrt(var) * rng.standard_normal((n_seg, plan.nperseg))
    carrier = mean * np.cos(
        2 * np.pi * center_freq * (t + (np.arange(n_seg) * plan.nperseg / plan.sample_rate)[:, None])
    )
    norm = np.sum(window**2)

    def level(q):
        return 10.0 * math.log10(np.mean(np.abs(q @ probe) ** 2) / norm)

    return level(noise + carrier), level(noise)


def demo_input(peak_db: float, plan: SamplingPlan, rbw: float) -> GaussianState:
    """Coherent input ``a (1 + i)`` whose x and p peaks sit ``peak_db`` above shot noise."""
    mean = math.sqrt(10.0 ** (peak_db / 10.0) / calibration_constant(plan, rbw))
    return coherent(mean / 2 * (1 + 1j))


def amplifier_spectra(
    config: AmplifierConfig,
    input: Optional[GaussianState] = None,
    peak_db: float = 20.0,
    master_seed: int = 0,
    center_freq: float = SIDEBAND_FREQ,
    span: float = SPAN,
    rbw: float = RBW,
    vbw: float = VBW,
    duration: Optional[float] = None,
) -> Tuple[Dict[str, PowerSpectrum], Dict[str, float]]:
    """Input and output spectra of both quadratures plus a peak/floor summary.

    Input and output spectra of a quadrature reuse the same noise stream, so
    their differences reflect the states rather than sampling noise.
    """
    plan = sampling_plan(center_freq, span, rbw, vbw, duration)
    if input is None:
        input = demo_input(peak_db, plan, rbw)
    output = run_ensemble(config, input)
    kw = dict(center_freq=center_freq, span=span, rbw=rbw, vbw=vbw, duration=duration)
    spectra, summary = {}, {}
    for k, (quad, angle) in enumerate((("x", 0.0), ("p", math.pi / 2))):
        for label, st in (("input", input), ("output", output)):
            spec = synthesize_spectrum(st, 0, angle, rng=make_rng(master_seed, k), **kw)
            spectra[f"{label}_{quad}"] = spec
            peak, floor = peak_floor_report(spec)
            summary[f"peak_{label}_{quad}_db"] = peak
            summary[f"floor_{label}_{quad}_db"] = floor
        summary[f"peak_gain_{quad}_db"] = (
            summary[f"peak_output_{quad}_db"] - summary[f"peak_input_{quad}_db"]
        )
        summary[f"floor_rise_{quad}_db"] = (
            summary[f"floor_output_{quad}_db"] - summary[f"floor_input_{quad}_db"]
        )
    return spectra, summary

"""Acceptance criteria 1-10, each printing one PASS/FAIL line (run with ``-s``
to see them inline; they are also collected in the terminal summary)."""

import math
import time

import numpy as np
import pytest
import test_properties as props

from ffamp.amplifier import (
    AmplifierConfig,
    phase_sensitive_amp,
    run_ensemble,
    run_phase_conjugate,
    run_trajectories,
)
from ffamp.gaussian import coherent, thermal
from ffamp.metrics import nf_detector, nf_ideal, nf_technical, noise_figure
from ffamp.spectrum import amplifier_spectra

GRID = [1, 1.25, 1.5, 2, 3, 5, 10, 100]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def random_coherent(rng, n):
    return [coherent(complex(*rng.normal(scale=1.5, size=2))) for _ in range(n)]


def test_c01_output_moments_exact(criterion, rng):
    with criterion(1, "output moments equal sqrt(1/T) mean, cov/T + (1/T - 1) I within 1e-10"):
        with Timer() as t:
            for T in (0.99, 0.9, 2 / 3, 0.5, 0.25, 0.1):
                for s in random_coherent(rng, 10):
                    out = run_ensemble(AmplifierConfig(T=T), s)
                    assert np.max(np.abs(out.mean - s.mean / math.sqrt(T))) < 1e-10
                    expected = s.cov / T + (1 / T - 1) * np.eye(2)
                    assert np.max(np.abs(out.cov - expected)) < 1e-10
        assert t.elapsed < 1.0


def test_c02_spectrum_demo(criterion):
    with criterion(2, "G=1.5 spectra: peak gain 1.76 dB, floor rise 3.01 dB within 0.2 dB"):
        G = 1.5
        with Timer() as t:
            _, summary = amplifier_spectra(AmplifierConfig.from_gain(G), peak_db=20.0)
        # analytic: peak = 10 log10(<q>^2 C + Var), with <q>^2 C = 100 at the input
        signal = 10.0**2
        peak_gain = 10 * math.log10((G * signal + (2 * G - 1)) / (signal + 1))
        floor_rise = 10 * math.log10(2 * G - 1)
        for q in "xp":
            measured_gain = summary[f"peak_gain_{q}_db"]
            assert measured_gain == pytest.approx(peak_gain, abs=0.2)
            assert measured_gain == pytest.approx(10 * math.log10(G), abs=0.2)
            assert summary[f"floor_rise_{q}_db"] == pytest.approx(floor_rise, abs=0.2)
        assert round(10 * math.log10(G), 2) == 1.76 and round(floor_rise, 2) == 3.01
        assert t.elapsed < 30.0


def simulated_nf(G, **kw):
    s = coherent(1 + 1j)
    return noise_figure(s, run_ensemble(AmplifierConfig.from_gain(G, **kw), s))


def test_c03_ideal_noise_figure(criterion):
    with criterion(3, "simulated ideal NF equals G/(2G-1) within 1e-10; 0.75 at G=1.5"):
        with Timer() as t:
            for G in GRID:
                rep = simulated_nf(G)
                ideal = G / (2 * G - 1)
                assert abs(rep.NF_x - ideal) < 1e-10 and abs(rep.NF_p - ideal) < 1e-10
                assert abs(nf_ideal(G) - ideal) < 1e-15
            assert simulated_nf(1.5).NF_x == pytest.approx(0.75, abs=1e-10)
            # hardware value 0.7 sits between the ideal and the lossy-detector limit
            assert nf_ideal(1.5) >= 0.7 >= nf_detector(1e12, 0.93)
        assert t.elapsed < 1.0


def test_c04_detector_noise_figure(criterion):
    with criterion(4, "eta=0.93 NF equals eta G/(2G-2+eta) within 1e-10; G=100 within 1% of 0.465"):
        eta = 0.93
        with Timer() as t:
            for G in GRID:
                rep = simulated_nf(G, eta_inline=eta)
                expected = eta * G / (2 * G - 2 + eta)
                assert abs(rep.NF_x - expected) < 1e-10 and abs(rep.NF_p - expected) < 1e-10
            nf100 = simulated_nf(100, eta_inline=eta).NF_x
            assert abs(nf100 / 0.465 - 1) < 0.01
        assert t.elapsed < 1.0


def test_c05_technical_noise_figure(criterion):
    with criterion(5, "nf_technical(G, 2) = G/(2G+1); 1/3 at G=1"):
        with Timer() as t:
            for G in GRID:
                expected = G / (2 * G - 1 + 2)
                assert nf_technical(G, 2) == pytest.approx(expected, rel=1e-14)
                assert simulated_nf(G, technical_noise=2.0).NF_x == pytest.approx(expected, abs=1e-10)
            assert nf_technical(1, 2) == pytest.approx(1 / 3, abs=1e-15)
            assert nf_technical(1, 2) < nf_ideal(1)
        assert t.elapsed < 1.0


def test_c06_dark_port_cancellation(criterion, rng):
    with criterion(6, "thermal noise up to 101 units at the tap dark port changes outputs < 1e-9"):
        with Timer() as t:
            for T in (0.9, 0.5, 0.1):
                cfg = AmplifierConfig(T=T)
                for s in random_coherent(rng, 3):
                    ref = run_ensemble(cfg, s)
                    for var in (1.0, 3.0, 21.0, 51.0, 101.0):
                        out = run_ensemble(cfg, s, dark_port=thermal(var))
                        assert np.max(np.abs(out.mean - ref.mean)) < 1e-9
                        assert np.max(np.abs(out.cov - ref.cov)) < 1e-9
        assert t.elapsed < 1.0


def test_c07_phase_conjugation(criterion, rng):
    with criterion(7, "conjugate output at r=5 matches predictions within 1e-3; excess ~ e^{-2r}"):
        T = 0.5
        R = 1 - T
        with Timer() as t:
            for s in random_coherent(rng, 5):
                out = run_phase_conjugate(AmplifierConfig(T=T, ancilla_squeezing=5.0), s)
                conj = np.array([1.0, -1.0]) * s.mean  # a -> a^dagger flips p
                assert np.max(np.abs(out.mode_mean(1) - math.sqrt(R / T) * conj)) < 1e-3
                assert np.max(np.abs(out.mode_cov(1) - (R + 1) / T * np.eye(2))) < 1e-3
            ratios = []
            for r in (2.0, 3.0, 4.0, 5.0):
                out = run_phase_conjugate(AmplifierConfig(T=T, ancilla_squeezing=r), coherent(1))
                dev = np.max(np.abs(out.mode_cov(1) - (R + 1) / T * np.eye(2)))
                ratios.append(dev / math.exp(-2 * r))
            assert np.ptp(ratios) < 1e-6 * np.mean(ratios)
        assert t.elapsed < 1.0


def test_c08_backend_equivalence(criterion):
    with criterion(8, "1e5 trajectories at G=2 within 5 SE of analytic; fixed seed byte-identical"):
        cfg, s, n = AmplifierConfig.from_gain(2.0), coherent(1), 100_000
        with Timer() as t:
            ens = run_trajectories(cfg, s, n, master_seed=2026)
            again = run_trajectories(cfg, s, n, master_seed=2026)
        ref = run_ensemble(cfg, s)
        se_mean = np.sqrt(np.diag(ref.cov) / n)
        assert np.all(np.abs(ens.sample_mean - ref.mean) < 5 * se_mean)
        d = np.diag(ref.cov)
        se_cov = np.sqrt((np.outer(d, d) + ref.cov**2) / n)
        assert np.all(np.abs(ens.sample_cov - ref.cov) < 5 * se_cov)
        for name in ("outcomes", "output_means", "conditional_cov", "sample_mean", "sample_cov"):
            assert getattr(ens, name).tobytes() == getattr(again, name).tobytes()
        assert t.elapsed < 60.0


def test_c09_property_suite(criterion):
    with criterion(9, f"property suite, {props.N_CASES} randomised cases per invariant"):
        with Timer() as t:
            props.test_symplectic_form_preserved()
            props.test_physicality_preserved_by_unitaries()
            props.test_physicality_preserved_by_channels()
            props.test_loss_composition()
            props.test_conditional_covariance_monotone()
            props.test_phase_insensitive_amplifier()
        assert props.N_CASES >= 100
        assert t.elapsed < 60.0


def test_c10_phase_sensitive_reference(criterion):
    with criterion(10, "phase-sensitive amplifier NF = 1 within 1e-12 at G in {1, 2, 4, 10}"):
        s = coherent(0.8 + 1.3j)
        for G in (1, 2, 4, 10):
            rep = noise_figure(s, phase_sensitive_amp(G, s))
            assert rep.G_p == pytest.approx(G, rel=1e-12)
            assert abs(rep.NF_p - 1.0) < 1e-12

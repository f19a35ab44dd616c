"""Command-line front end.

Subcommands ``run-amp``, ``sweep-nf``, ``spectrum`` and ``phase-conjugate``
read a flat ``key = value`` config file (keys are :class:`RunConfig` fields)
and apply per-flag overrides on top.

Exit status: 0 on success, 2 for invalid input or config, 3 when a state
or loss correction turns out unphysical. Nothing is written on failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .amplifier import (
    AmplifierConfig,
    predict_phase_conjugate,
    run_ensemble,
    run_phase_conjugate,
    run_trajectories,
)
from .errors import FFAmpError, InvalidParameter, UnphysicalState
from .gaussian import (
    GaussianState,
    apply,
    check_physical,
    displace,
    loss_channel,
    squeezer,
    thermal,
    vacuum,
)
from .metrics import nf_detector, nf_ideal, nf_technical, noise_figure, to_db
from .spectrum import RBW, SIDEBAND_FREQ, SPAN, VBW, amplifier_spectra

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNPHYSICAL = 3

COMMANDS = ("run-amp", "sweep-nf", "spectrum", "phase-conjugate")
CSV_VERSION = 1
DEFAULT_GAINS = (1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0)


@dataclass(frozen=True)
class RunConfig:
    command: str = "run-amp"
    # amplifier
    T: float = 0.5
    electronic_gain: Optional[float] = None
    eta_inline: float = 1.0
    coupler_transmission: float = 1.0
    technical_noise: float = 0.0
    electronic_noise: float = 0.0
    ancilla_squeezing: float = 0.0
    lambda_x: Optional[float] = None
    lambda_p: Optional[float] = None
    # input state: (squeezed | thermal | coherent vacuum) displaced by alpha
    input_kind: str = "coherent"
    alpha_re: float = 1.0
    alpha_im: float = 0.0
    squeezing_r: float = 0.0
    squeezing_phi: float = 0.0
    thermal_var: float = 1.0
    # run control
    backend: str = "ensemble"
    n_traj: int = 10000
    master_seed: int = 0
    eta_hd: float = 1.0
    gains: Tuple[float, ...] = DEFAULT_GAINS
    # spectrum
    center_freq: float = SIDEBAND_FREQ
    span: float = SPAN
    rbw: float = RBW
    vbw: float = VBW
    peak_db: Optional[float] = 20.0
    duration: Optional[float] = None
    # output
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidParameter(f"unknown command {self.command!r}")
        if self.input_kind not in ("coherent", "squeezed", "thermal"):
            raise InvalidParameter(f"unknown input_kind {self.input_kind!r}")
        if self.backend not in ("ensemble", "trajectories"):
            raise InvalidParameter(f"unknown backend {self.backend!r}")
        if self.format not in ("csv", "json"):
            raise InvalidParameter(f"unknown format {self.format!r}")
        if self.n_traj < 1:
            raise InvalidParameter("n_traj must be >= 1")
        if not self.gains or any(g < 1 for g in self.gains):
            raise InvalidParameter("gains must be a non-empty list of values >= 1")

    def amplifier(self, **overrides) -> AmplifierConfig:
        names = {f.name for f in fields(AmplifierConfig)}
        kwargs = {k: getattr(self, k) for k in names}
        kwargs.update(overrides)
        return AmplifierConfig(**kwargs)

    def input_state(self) -> GaussianState:
        if self.input_kind == "squeezed":
            base = apply(vacuum(1), squeezer(self.squeezing_r, self.squeezing_phi))
        elif self.input_kind == "thermal":
            base = thermal(self.thermal_var)
        else:
            base = vacuum(1)
        return displace(base, 0, 2 * self.alpha_re, 2 * self.alpha_im)

    def to_text(self) -> str:
        lines = [f"{f.name} = {_dump(getattr(self, f.name))}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: Optional["RunConfig"] = None) -> "RunConfig":
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameter(f"line {n}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return (base or cls()).with_values(values)

    def with_values(self, values: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidParameter(f"unknown config keys: {', '.join(unknown)}")
        parsed = {k: _PARSERS[k](v) if isinstance(v, str) else v for k, v in values.items()}
        return dataclasses.replace(self, **parsed)


def _parse_float(text: str) -> float:
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidParameter(f"not a number: {text!r}") from None


def _parse_optional(text: str) -> Optional[float]:
    return None if text.lower() in ("none", "auto") else _parse_float(text)


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InvalidParameter(f"not an integer: {text!r}") from None


def _parse_gains(text: str) -> Tuple[float, ...]:
    return tuple(_parse_float(t.strip()) for t in text.split(",") if t.strip())


def _dump(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_FIELD_KINDS = {
    "command": str,
    "input_kind": str,
    "backend": str,
    "format": str,
    "out": lambda s: None if s.lower() == "none" else s,
    "n_traj": _parse_int,
    "master_seed": _parse_int,
    "gains": _parse_gains,
    "electronic_gain": _parse_optional,
    "lambda_x": _parse_optional,
    "lambda_p": _parse_optional,
    "peak_db": _parse_optional,
    "duration": _parse_optional,
}
_PARSERS = {f.name: _FIELD_KINDS.get(f.name, _parse_float) for f in fields(RunConfig)}


# -- formatting ------------------------------------------------------------------------


def fmt(value) -> str:
    """CSV number formatting: 12 significant digits, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    return f"{float(value):.12g}"


def _csv(header: Sequence[str], rows: Sequence[Sequence], preamble: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json(payload: dict) -> str:
    return json.dumps(_plain(payload), indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _state_dict(state: GaussianState) -> dict:
    return {"mean": state.mean, "cov": state.cov}


def _require_physical(state: GaussianState, what: str) -> None:
    report = check_physical(state)
    if not report.passed:
        raise UnphysicalState(
            f"{what} is unphysical: min symplectic eigenvalue "
            f"{report.min_symplectic_eigenvalue:.6g} < 1"
        )


# -- commands ----------------------------------------------------------------------------


def cmd_run_amp(cfg: RunConfig) -> str:
    amp = cfg.amplifier()
    state_in = cfg.input_state()
    _require_physical(state_in, "input state")
    payload = {"format": "run-amp/1", "backend": cfg.backend}
    if cfg.backend == "trajectories":
        ens = run_trajectories(amp, state_in, cfg.n_traj, cfg.master_seed)
        state_out = ens.state()
        payload["ensemble"] = {
            "n_traj": ens.n_traj,
            "master_seed": cfg.master_seed,
            "sample_mean": ens.sample_mean,
            "sample_cov": ens.sample_cov,
            "conditional_cov": ens.conditional_cov,
        }
    else:
        state_out = run_ensemble(amp, state_in)
    _require_physical(state_out, "output state")
    report = noise_figure(state_in, state_out, assume_phase_insensitive=True)
    payload["report"] = report.to_dict()
    if cfg.eta_hd < 1.0:
        seen_in = loss_channel(state_in, 0, cfg.eta_hd)
        seen_out = loss_channel(state_out, 0, cfg.eta_hd)
        payload["uncorrected_report"] = noise_figure(
            seen_in, seen_out, assume_phase_insensitive=True
        ).to_dict()
        payload["corrected_report"] = noise_figure(
            seen_in, seen_out, eta_hd=cfg.eta_hd, assume_phase_insensitive=True
        ).to_dict()
    payload["output"] = _state_dict(state_out)
    if cfg.format == "csv":
        rep = payload["report"]
        return _csv(list(rep), [list(rep.values())], [f"format: run-amp/{CSV_VERSION}"])
    return _json(payload)


SWEEP_HEADER = [
    "G",
    "NF_ideal",
    "NF_detector",
    "NF_technical",
    "NF_simulated_x",
    "NF_simulated_p",
    "NF_ideal_dB",
    "NF_detector_dB",
    "NF_technical_dB",
    "NF_simulated_x_dB",
    "NF_simulated_p_dB",
]


def sweep_rows(cfg: RunConfig) -> List[list]:
    state_in = cfg.input_state()
    rows = []
    for G in cfg.gains:
        out = run_ensemble(cfg.amplifier(T=1.0 / G), state_in)
        report = noise_figure(state_in, out, assume_phase_insensitive=True)
        lin = [
            nf_ideal(G),
            nf_detector(G, cfg.eta_inline),
            nf_technical(G, cfg.technical_noise),
            report.NF_x,
            report.NF_p,
        ]
        rows.append([G] + lin + [to_db(v) for v in lin])
    return rows


def cmd_sweep_nf(cfg: RunConfig) -> str:
    rows = sweep_rows(cfg)
    if cfg.format == "json":
        return _json({"format": "sweep-nf/1", "rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]})
    preamble = [
        f"format: sweep-nf/{CSV_VERSION}",
        f"eta_inline={fmt(cfg.eta_inline)} technical_noise={fmt(cfg.technical_noise)}",
    ]
    return _csv(SWEEP_HEADER, rows, preamble)


SPECTRUM_HEADER = ["frequency_hz", "input_x_db", "output_x_db", "input_p_db", "output_p_db"]


def cmd_spectrum(cfg: RunConfig) -> str:
    state_in = None if cfg.peak_db is not None else cfg.input_state()
    spectra, summary = amplifier_spectra(
        cfg.amplifier(),
        input=state_in,
        peak_db=cfg.peak_db if cfg.peak_db is not None else 20.0,
        master_seed=cfg.master_seed,
        center_freq=cfg.center_freq,
        span=cfg.span,
        rbw=cfg.rbw,
        vbw=cfg.vbw,
        duration=cfg.duration,
    )
    freq = spectra["input_x"].frequency
    columns = [spectra[k].power_db for k in ("input_x", "output_x", "input_p", "output_p")]
    if cfg.format == "json":
        return _json(
            {
                "format": "spectrum/1",
                "summary": summary,
                "frequency_hz": freq,
                **{k: s.power_db for k, s in spectra.items()},
            }
        )
    preamble = [f"format: spectrum/{CSV_VERSION}"]
    preamble += [f"summary {k}={fmt(v)}" for k, v in summary.items()]
    rows = [[f] + [c[i] for c in columns] for i, f in enumerate(freq)]
    return _csv(SPECTRUM_HEADER, rows, preamble)


def phase_conjugate_report(cfg: RunConfig) -> dict:
    amp = cfg.amplifier()
    state_in = cfg.input_state()
    _require_physical(state_in, "input state")
    sim = run_phase_conjugate(amp, state_in)
    _require_physical(sim, "output state")
    pred = predict_phase_conjugate(amp, state_in)
    out = {}
    for mode, name in ((0, "signal"), (1, "conjugate")):
        s_mean, p_mean = sim.mode_mean(mode), pred.mode_mean(mode)
        s_cov, p_cov = sim.mode_cov(mode), pred.mode_cov(mode)
        out[name] = {
            "mean": s_mean,
            "cov": s_cov,
            "predicted_mean": p_mean,
            "predicted_cov": p_cov,
            "mean_deviation": float(np.max(np.abs(s_mean - p_mean))),
            "cov_deviation": float(np.max(np.abs(s_cov - p_cov))),
        }
    return {"format": "phase-conjugate/1", "r": amp.ancilla_squeezing, "T": amp.T, **out}


def cmd_phase_conjugate(cfg: RunConfig) -> str:
    report = phase_conjugate_report(cfg)
    if cfg.format == "json":
        return _json(report)
    rows = []
    for name in ("signal", "conjugate"):
        r = report[name]
        for q, i in (("x", 0), ("p", 1)):
            rows.append([name, f"mean_{q}", r["mean"][i], r["predicted_mean"][i]])
            rows.append([name, f"var_{q}", r["cov"][i, i], r["predicted_cov"][i, i]])
    rows = [row + [row[2] - row[3]] for row in rows]
    return _csv(
        ["mode", "quantity", "simulated", "predicted", "deviation"],
        rows,
        [f"format: phase-conjugate/{CSV_VERSION}", f"r={fmt(report['r'])} T={fmt(report['T'])}"],
    )


_RUNNERS = {
    "run-amp": cmd_run_amp,
    "sweep-nf": cmd_sweep_nf,
    "spectrum": cmd_spectrum,
    "phase-conjugate": cmd_phase_conjugate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffamp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", dest="master_seed", help="master seed (u64)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--T", help="tap transmission, e.g. 0.5 or 2/3")
        p.add_argument("--eta", dest="eta_inline", help="in-line detection efficiency")
        p.add_argument("--ncl", dest="technical_noise", help="technical noise (shot units)")
        p.add_argument("--r", dest="ancilla_squeezing", help="ancilla squeezing")
        p.add_argument("--ntraj", dest="n_traj", help="number of trajectories")
        p.add_argument("--backend", choices=("ensemble", "trajectories"))
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override any config key (repeatable)",
        )
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        with open(args.config) as fh:
            cfg = RunConfig.from_text(fh.read(), base=cfg)
        cfg = dataclasses.replace(cfg, command=args.command)
    overrides = {}
    for key in ("master_seed", "out", "format", "T", "eta_inline", "technical_noise",
                "ancilla_squeezing", "n_traj", "backend"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = str(value)
    for item in args.set:
        if "=" not in item:
            raise InvalidParameter(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return cfg.with_values(overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        text = _RUNNERS[cfg.command](cfg)
    except UnphysicalState as exc:
        print(f"ffamp: error: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except (FFAmpError, OSError) as exc:
        print(f"ffamp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

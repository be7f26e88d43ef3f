"""Command-line front end.

Configuration comes from a ``key=value`` file (``#`` starts a comment) and/or
``--key value`` flags; flags win. All rates and frequencies are angular
frequencies in one common unit (s^-1 in the examples).

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import composite, single, validation
from .bath import ModeSet, coefficients_abcd, rates_from_coefficients
from .errors import CavityLeakError, ConfigError, NoStationaryStateError, NumericalError
from .master import build_composite_generator, build_single_generator, emission_rate, integrate_samples
from .operators import FockSpace
from .params import CompositeParams, SingleParams

MODES = ("single", "composite", "validate", "sweep", "integrate")
SINGLE_KEYS = ("gamma_a", "gamma_b", "gamma_c", "omega")
COMPOSITE_KEYS = ("omega_c", "omega_0", "kappa", "Gamma", "N", "g_c")

# key: (kind, default, help); default None means "no default"
KEYS = {
    "mode": ("str", None, "one of " + ", ".join(MODES)),
    "gamma_a": ("float", None, "decay rate gamma_A (single system)"),
    "gamma_b": ("float", 0.0, "counter-rotating rate gamma_B"),
    "gamma_c": ("float", 0.0, "squeezing-channel rate gamma_C"),
    "omega": ("float", 0.0, "shifted frequency of the single system"),
    "modeset": ("str", None, "mode table; fills gamma_a, gamma_b from the bath coefficients"),
    "bath_omega": ("float", None, "system frequency used with modeset"),
    "bath_dt": ("float", None, "coarse-graining time used with modeset"),
    "omega_c": ("float", None, "shifted cavity frequency"),
    "omega_0": ("float", None, "shifted atomic frequency"),
    "kappa": ("float", None, "cavity decay rate"),
    "Gamma": ("float", None, "single-atom decay rate"),
    "N": ("float", None, "number of atoms"),
    "g_c": ("float", None, "atom-cavity coupling"),
    "system": ("str", None, "single or composite (integrate mode; inferred if absent)"),
    "cutoff_cavity": ("int", 6, "Fock cutoff of the cavity / single mode"),
    "cutoff_atom": ("int", None, "Fock cutoff of the collective atomic mode (default: cutoff_cavity)"),
    "sweep": ("str", None, "variable:start:stop:points:linear|log"),
    "output": ("str", "-", "output path, '-' for stdout"),
    "t_final": ("float", 10.0, "integration time"),
    "dt": ("float", None, "time step (default min(0.05/omega_max, 0.05/total rate))"),
    "samples": ("int", 20, "number of output rows in integrate mode"),
    "workers": ("int", 1, "parallel workers in sweep mode"),
    "regime_threshold": ("float", 1e-2, "regime ratio threshold"),
    "tol_agreement": ("float", 1e-2, "closed form vs moment solve, relative"),
    "tol_dm": ("float", 1e-5, "density matrix vs moment solve, relative"),
    "headline_fixture": ("str", None, "fixture file for the optional headline-rate check"),
}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    scale: str

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class RunConfig:
    mode: str
    single: SingleParams | None = None
    composite: CompositeParams | None = None
    cutoffs: tuple[int, int] = (6, 6)
    sweep: SweepSpec | None = None
    output: str = "-"
    system: str | None = None
    t_final: float = 10.0
    dt: float | None = None
    samples: int = 20
    workers: int = 1
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _convert(key, text, where):
    kind = KEYS[key][0]
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
    except ValueError:
        raise ConfigError(f"{where}{key}: expected {kind}, got {text!r}") from None
    return text.strip()


def parse_text(text: str) -> dict:
    """Parse ``key=value`` lines into converted values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip()
        where = f"line {lineno}: "
        if not sep:
            raise ConfigError(f"{where}expected key=value, got {body!r}")
        if key not in KEYS:
            raise ConfigError(f"{where}{key}: unknown key")
        values[key] = _convert(key, value.strip(), where)
    return values


def parse_sweep(text: str) -> SweepSpec:
    parts = text.split(":")
    if len(parts) != 5:
        raise ConfigError(f"sweep: expected variable:start:stop:points:scale, got {text!r}")
    var, start, stop, points, scale = parts
    if var not in SINGLE_KEYS + COMPOSITE_KEYS:
        raise ConfigError(f"sweep: cannot sweep {var!r}")
    try:
        start_f, stop_f, n = float(start), float(stop), float(points)
    except ValueError:
        raise ConfigError(f"sweep: non-numeric field in {text!r}") from None
    if n != int(n) or n < 2:
        raise ConfigError("sweep: points must be an integer >= 2")
    if scale not in ("linear", "log"):
        raise ConfigError(f"sweep: scale must be linear or log, got {scale!r}")
    if scale == "log" and (start_f <= 0 or stop_f <= 0):
        raise ConfigError("sweep: log scale needs positive endpoints")
    return SweepSpec(var, start_f, stop_f, int(n), scale)


def _single_params(v: dict, mode: str) -> SingleParams:
    if "modeset" in v:
        for k in ("bath_omega", "bath_dt"):
            if k not in v:
                raise ConfigError(f"{k}: required with modeset")
        coef = coefficients_abcd(ModeSet.from_file(v["modeset"]), v["bath_omega"], v["bath_dt"])
        ga, gb = rates_from_coefficients(coef)
        v = {**v, "gamma_a": v.get("gamma_a", ga), "gamma_b": v.get("gamma_b", gb)}
    if "gamma_a" not in v:
        raise ConfigError(f"gamma_a: required for mode={mode}")
    return SingleParams(v["gamma_a"], v.get("gamma_b", 0.0), v.get("gamma_c", 0.0), v.get("omega", 0.0))


def _composite_params(v: dict, mode: str) -> CompositeParams:
    for k in COMPOSITE_KEYS:
        if k not in v:
            raise ConfigError(f"{k}: required for mode={mode}")
    n = v["N"]
    if n != int(n):
        raise ConfigError(f"N: must be an integer, got {n}")
    return CompositeParams(v["omega_c"], v["omega_0"], v["kappa"], v["Gamma"], int(n), v["g_c"])


def parse_config(text: str | None = None, flags: dict | None = None) -> RunConfig:
    """Merge file text and flag overrides into a validated ``RunConfig``."""
    values = parse_text(text or "")
    for key, raw in (flags or {}).items():
        if raw is None:
            continue
        if key not in KEYS:
            raise ConfigError(f"{key}: unknown key")
        values[key] = _convert(key, str(raw), "flag --")
    mode = values.get("mode")
    if mode is None:
        raise ConfigError("mode: required")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")

    for key in ("cutoff_cavity", "cutoff_atom"):
        if key in values and values[key] < 2:
            raise ConfigError(f"{key}: must be >= 2")
    for key in ("regime_threshold", "tol_agreement", "tol_dm", "t_final", "dt"):
        if key in values and not values[key] > 0:
            raise ConfigError(f"{key}: must be > 0")
    for key in ("samples", "workers"):
        if key in values and values[key] < 1:
            raise ConfigError(f"{key}: must be >= 1")

    cfg = RunConfig(mode=mode, raw=dict(values))
    cav = values.get("cutoff_cavity", KEYS["cutoff_cavity"][1])
    cfg.cutoffs = (cav, values.get("cutoff_atom", cav))
    cfg.output = values.get("output", "-")
    cfg.t_final = values.get("t_final", KEYS["t_final"][1])
    cfg.dt = values.get("dt")
    cfg.samples = values.get("samples", KEYS["samples"][1])
    cfg.workers = values.get("workers", KEYS["workers"][1])
    cfg.tolerances = {k: values.get(k, KEYS[k][1]) for k in ("regime_threshold", "tol_agreement", "tol_dm")}

    try:
        if mode == "single":
            cfg.single = _single_params(values, mode)
        elif mode == "composite":
            cfg.composite = _composite_params(values, mode)
        elif mode == "sweep":
            if "sweep" not in values:
                raise ConfigError("sweep: required for mode=sweep")
            cfg.sweep = parse_sweep(values["sweep"])
            base = dict(values)
            base[cfg.sweep.variable] = cfg.sweep.start
            if cfg.sweep.variable in SINGLE_KEYS:
                cfg.single = _single_params(base, mode)
            else:
                cfg.composite = _composite_params(base, mode)
        elif mode == "integrate":
            system = values.get("system")
            if system is None:
                system = "composite" if any(k in values for k in COMPOSITE_KEYS) else "single"
            if system not in ("single", "composite"):
                raise ConfigError(f"system: expected single or composite, got {system!r}")
            cfg.system = system
            if system == "single":
                cfg.single = _single_params(values, mode)
            else:
                cfg.composite = _composite_params(values, mode)
    except CavityLeakError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return cfg


def fmt(x) -> str:
    """Fixed CSV number format: 12 significant digits, scientific."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.11e}"


def _write_csv(cfg: RunConfig, header, rows, out) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    text = buf.getvalue()
    if cfg.output == "-":
        out.write(text)
    else:
        Path(cfg.output).write_text(text, encoding="utf-8", newline="")


COMPOSITE_SWEEP_HEADER = (
    "N", "omega_c", "omega_0", "kappa", "Gamma", "g_c",
    "I_kappa_closed", "I_kappa_moment", "rel_dev", "regime_ratio", "regime_pass",
)
SINGLE_SWEEP_HEADER = ("gamma_a", "gamma_b", "gamma_c", "omega", "I_gamma_closed", "I_gamma_moment", "rel_dev")


def composite_row(p: CompositeParams, threshold: float) -> tuple:
    closed = composite.cavity_rate_closed_form(p)
    try:
        moment = composite.cavity_rate_moments(p)
    except NoStationaryStateError:
        moment = float("nan")
    dev = abs(closed - moment) / abs(moment) if moment != 0 else abs(closed)
    reg = composite.regime_check(p, threshold)
    return (p.n_atoms, p.omega_c, p.omega_0, p.kappa, p.gamma, p.g_c, closed, moment, dev, reg.max_ratio, reg.passed)


def single_row(p: SingleParams) -> tuple:
    closed = single.stationary_rate_closed_form(p)
    moment = single.emission_functional(single.stationary_moments(p), p)
    dev = abs(closed - moment) / abs(moment) if moment != 0 else abs(closed)
    return (p.gamma_a, p.gamma_b, p.gamma_c, p.omega, closed, moment, dev)


def _sweep_point(args):
    kind, params, threshold = args
    if kind == "single":
        return single_row(SingleParams(**params))
    return composite_row(CompositeParams(**params), threshold)


def sweep_points(cfg: RunConfig) -> list[tuple]:
    spec = cfg.sweep
    tasks = []
    if cfg.single is not None:
        names = dict(zip(SINGLE_KEYS, ("gamma_a", "gamma_b", "gamma_c", "omega")))
        base = cfg.single.__dict__
        kind = "single"
    else:
        names = dict(zip(COMPOSITE_KEYS, ("omega_c", "omega_0", "kappa", "gamma", "n_atoms", "g_c")))
        base = cfg.composite.__dict__
        kind = "composite"
    for value in spec.values():
        params = dict(base)
        field_name = names[spec.variable]
        params[field_name] = int(round(value)) if field_name == "n_atoms" else float(value)
        tasks.append((kind, params, cfg.tolerances["regime_threshold"]))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    return [_sweep_point(t) for t in tasks]


def default_dt(frequencies, rates) -> float:
    w = max((abs(f) for f in frequencies), default=0.0)
    r = sum(abs(x) for x in rates)
    bounds = [0.05 / x for x in (w, r) if x > 0]
    return min(bounds) if bounds else 0.05


def run_integrate(cfg: RunConfig, out) -> None:
    if cfg.system == "single":
        p = cfg.single
        gen = build_single_generator(p, FockSpace(cfg.cutoffs[0]))
        obs = single.single_observables(gen.ops["s_minus"])
        names = ("mu1", "xi1", "xi2")
        dt = cfg.dt or default_dt([p.omega], [p.gamma_a, p.gamma_b, abs(p.gamma_c)])
    else:
        p = cfg.composite
        gen = build_composite_generator(p, FockSpace(cfg.cutoffs[0]), FockSpace(cfg.cutoffs[1]))
        obs = composite.composite_observables(gen.ops["c"], gen.ops["S"])
        names = composite.MOMENT_NAMES
        dt = cfg.dt or default_dt([p.omega_c, p.omega_0, p.collective_coupling], [p.zeta])
    rho0 = np.zeros((gen.dim, gen.dim), dtype=complex)
    rho0[0, 0] = 1.0
    times, states = integrate_samples(gen, rho0, cfg.t_final, cfg.samples, dt)
    rows = [(0.0, *(np.trace(o @ rho0).real for o in obs), 1.0, emission_rate(rho0, gen).total)]
    for t, rho in zip(times, states):
        rows.append((t, *(np.trace(o @ rho).real for o in obs), np.trace(rho).real, emission_rate(rho, gen).total))
    _write_csv(cfg, ("t", *names, "trace", "emission_rate"), rows, out)


def run(cfg: RunConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    if cfg.mode == "single":
        p = cfg.single
        m = single.stationary_moments(p)
        rate = single.stationary_rate_closed_form(p)
        if rate < 0:
            print(f"warning: stationary rate {rate:.6e} is negative (gamma_c dominates)", file=sys.stderr)
        out.write(f"I_gamma (closed form) = {rate:.12e}\n")
        out.write(f"I_gamma (moments)     = {single.emission_functional(m, p):.12e}\n")
        out.write(f"mu1 = {m.mu1:.12e}\nxi1 = {m.xi1:.12e}\nxi2 = {m.xi2:.12e}\n")
        return 0
    if cfg.mode == "composite":
        p = cfg.composite
        row = composite_row(p, cfg.tolerances["regime_threshold"])
        reg = composite.regime_check(p, cfg.tolerances["regime_threshold"])
        out.write(f"I_kappa (closed form) = {row[6]:.12e}\n")
        out.write(f"I_kappa (moment solve) = {row[7]:.12e}\n")
        out.write(f"relative deviation = {row[8]:.3e} (tolerance {cfg.tolerances['tol_agreement']:.1e})\n")
        out.write(
            f"regime ratios: N*Gamma {reg.decay_ratio:.3e}, sqrt(N)*g_c {reg.coupling_ratio:.3e}, "
            f"kappa {reg.cavity_ratio:.3e}; {'pass' if reg.passed else 'FAIL'} at {reg.threshold:.1e}\n"
        )
        if not reg.passed:
            print("warning: parameters outside the closed-form regime", file=sys.stderr)
        return 0
    if cfg.mode == "sweep":
        rows = sweep_points(cfg)
        header = SINGLE_SWEEP_HEADER if cfg.single is not None else COMPOSITE_SWEEP_HEADER
        if cfg.composite is not None and not all(r[-1] for r in rows):
            print("warning: some sweep points fail the regime check", file=sys.stderr)
        if any(np.isnan(r[-4 if cfg.composite is not None else -2]) for r in rows):
            print("warning: no stationary state at some sweep points (moment columns are nan)", file=sys.stderr)
        _write_csv(cfg, header, rows, out)
        return 0
    if cfg.mode == "integrate":
        run_integrate(cfg, out)
        return 0
    if cfg.mode == "validate":
        checks = validation.run_all(cfg.raw.get("headline_fixture"))
        for c in checks:
            out.write(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail} ({c.seconds:.2f} s)\n")
        return 0 if all(c.passed for c in checks) else 3
    raise ConfigError(f"mode: {cfg.mode!r} not handled")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityleak",
        description="Stationary photon emission beyond the rotating-wave approximation.",
        epilog="Every key may also appear as key=value in the config file; flags override the file.",
    )
    parser.add_argument("config", nargs="?", help="key=value configuration file")
    for key, (_, default, help_text) in KEYS.items():
        names = [f"--{key}"]
        if "_" in key:
            names.append(f"--{key.replace('_', '-')}")
        suffix = f" (default {default})" if default is not None else ""
        parser.add_argument(*names, dest=key, default=None, help=help_text + suffix)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, flags)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _show_warning
        try:
            return run(cfg)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        except (NumericalError, CavityLeakError, np.linalg.LinAlgError) as exc:
            print(f"numerical error: {exc}", file=sys.stderr)
            return 2


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning ({category.__name__}): {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

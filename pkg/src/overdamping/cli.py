"""Command-line front end.

Every subcommand reads its parameters from flags, optionally from a JSON file
given with ``--config`` (keys mirror the flag names, dashes or underscores);
flags win on conflict. Exit status: 0 success, 2 usage or invalid parameter,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .bath import BathSpec, ThermalState
from .damped_spin import (BlochVector, SpinModel, classify, evolve,
                          modes, spin_boson_highT, spin_boson_kappa_c, spin_boson_limit_rates)
from .diffusion_loop import (DephasingBath, LoopModel, build_sector, diffusive_eigenvalue,
                             full_spectrum_by_sectors, sector_spectrum)
from .errors import BranchAbsent, DomainError, NumericalError, OverdampingError
from .io import dump_json, provenance, write_csv
from .qbm import (OscillatorMeanState, QbmModel, amplitude_dot, exact_rates, finite_bath_oracle,
                  kappa_critical, markov_rates as qbm_markov_rates, mean_displacement, transition_kappa)
from .qbm import amplitude as qbm_amplitude
from .spin_gorm import (GoeSample, GormModel, MicrocanonicalWindow, compare_exact_redfield, eta_critical,
                        exact_evolve, gorm_rates, sample_goe)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

FIG2_INITIAL = BlochVector(math.sqrt(8.0) / 3.0, 0.0, 1.0 / 3.0)
FIG2_ETAS = (0.08, 0.14, 0.20)
DEFAULT_SEED = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parser construction


def _add(p: argparse.ArgumentParser, flag: str, typ, default, help: str) -> None:
    dest = flag.lstrip("-").replace("-", "_")
    p.add_argument(flag, dest=dest, type=typ, default=None,
                   help=f"{help} (default: {default})")
    p.get_default("_defaults")[dest] = default


def _leaf(sub, name: str, handler: Callable, help: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help)
    p.set_defaults(_handler=handler, _defaults={}, _command=None)
    p.add_argument("--config", type=Path, default=None, help="JSON file with parameter values")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from provenance")
    return p


def _time_grid(p, t_max_help: str) -> None:
    _add(p, "--t-max", float, None, t_max_help)
    _add(p, "--n-t", int, 201, "number of time points")


def _spin_common(p) -> None:
    _add(p, "--omega0", float, 1.0, "spin splitting")
    _add(p, "--kappa", float, 1e-3, "coupling strength (action units)")
    _add(p, "--beta", float, 0.01, "inverse temperature")
    _add(p, "--alpha", float, None, "bath cutoff; omitted means the omega0/alpha -> 0 limit")
    _add(p, "--hbar", float, 1.0, "reduced Planck constant")


def _bloch(p) -> None:
    _add(p, "--x0", float, FIG2_INITIAL.x, "initial Bloch x")
    _add(p, "--y0", float, FIG2_INITIAL.y, "initial Bloch y")
    _add(p, "--z0", float, FIG2_INITIAL.z, "initial Bloch z")


def _gorm_common(p) -> None:
    _add(p, "--eta", float, 0.2, "coupling eta")
    _add(p, "--omega0", float, 0.01, "spin splitting")
    _add(p, "--eps", float, 0.0, "shell energy")
    _add(p, "--delta-eps", float, 0.025, "shell width")
    _add(p, "--n", int, 1500, "total Hilbert-space dimension N")
    _add(p, "--seed", int, DEFAULT_SEED, "GOE seed")
    _add(p, "--hbar", float, 1.0, "reduced Planck constant")


def _loop_common(p) -> None:
    _add(p, "--n-sites", int, 16, "ring length N")
    _add(p, "--hop", float, 1.0, "hopping A")
    _add(p, "--q-strength", float, 1.0, "dephasing strength Q")
    _add(p, "--hbar", float, 1.0, "reduced Planck constant")


def _qbm_common(p) -> None:
    _add(p, "--omega0", float, 1.0, "oscillator frequency")
    _add(p, "--kappa", float, 1.0, "coupling strength (frequency units)")
    _add(p, "--alpha", float, 100.0, "bath cutoff")
    _add(p, "--beta", float, math.inf, "inverse temperature")
    _add(p, "--hbar", float, 1.0, "reduced Planck constant")


def _sweep(p, param_default: str, start: float, stop: float) -> None:
    _add(p, "--param", str, param_default, "swept parameter")
    _add(p, "--start", float, start, "first value")
    _add(p, "--stop", float, stop, "last value")
    _add(p, "--num", int, 50, "number of points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="overdamping", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    models = parser.add_subparsers(dest="model", required=True)

    sb = models.add_parser("spin-boson", help="spin coupled to an Ullersma bath").add_subparsers(
        dest="action", required=True)
    p = _leaf(sb, "rates", cmd_sb_rates, "Markovian rates")
    _spin_common(p)
    p = _leaf(sb, "evolve", cmd_sb_evolve, "Bloch trajectory, CSV t,x,y,z")
    _spin_common(p)
    _bloch(p)
    _time_grid(p, "final time (default 3/Gamma)")
    p = _leaf(sb, "sweep", cmd_sb_sweep, "rates against kappa")
    _spin_common(p)
    _sweep(p, "kappa", 1e-4, 1e-2)

    sg = models.add_parser("spin-gorm", help="spin in a random-matrix environment").add_subparsers(
        dest="action", required=True)
    p = _leaf(sg, "rates", cmd_sg_rates, "Redfield rates and eta_c")
    _gorm_common(p)
    p = _leaf(sg, "eta-c", cmd_sg_eta_c, "critical coupling")
    _add(p, "--omega0", float, 0.01, "spin splitting")
    _add(p, "--eps", float, 0.0, "shell energy")
    _add(p, "--eta-max", float, None, "largest coupling considered")
    _add(p, "--hbar", float, 1.0, "reduced Planck constant")
    p = _leaf(sg, "evolve", cmd_sg_evolve, "Redfield trajectory, CSV t,x,y,z")
    _gorm_common(p)
    _bloch(p)
    _time_grid(p, "final time (default 3/Gamma)")
    p = _leaf(sg, "compare", cmd_sg_compare, "exact against Redfield trajectories")
    _gorm_common(p)
    _bloch(p)
    _time_grid(p, "final time (default 3/Gamma)")

    lp = models.add_parser("loop", help="dephasing ring").add_subparsers(dest="action", required=True)
    p = _leaf(lp, "spectrum", cmd_loop_spectrum, "all sector eigenvalues")
    _loop_common(p)
    p = _leaf(lp, "diffusive", cmd_loop_diffusive, "diffusive eigenvalue of one sector")
    _loop_common(p)
    _add(p, "--sector", int, 1, "sector index n, q = 2 pi n / N")
    p = _leaf(lp, "sweep", cmd_loop_sweep, "diffusive eigenvalues against Q")
    _loop_common(p)
    _sweep(p, "q_strength", 0.1, 3.0)

    qb = models.add_parser("qbm", help="quantum Brownian motion").add_subparsers(
        dest="action", required=True)
    p = _leaf(qb, "rates", cmd_qbm_rates, "exact (or Markovian) rates")
    _qbm_common(p)
    p.add_argument("--markov", action="store_true", help="Markovian closed forms instead of the cubic")
    p = _leaf(qb, "amplitude", cmd_qbm_amplitude, "CSV t,A,Adot,q_mean")
    _qbm_common(p)
    _add(p, "--q0", float, 1.0, "initial mean position")
    _add(p, "--p0", float, 0.0, "initial mean momentum")
    _time_grid(p, "final time (default 5/Gamma)")
    p = _leaf(qb, "oracle", cmd_qbm_oracle, "finite-bath integration against the closed form")
    _qbm_common(p)
    _add(p, "--q0", float, 1.0, "initial mean position")
    _add(p, "--p0", float, 0.0, "initial mean momentum")
    _add(p, "--n-osc", int, 2000, "number of bath oscillators")
    _add(p, "--omega-max", float, None, "bath cutoff frequency (default 20 alpha)")
    _time_grid(p, "final time (default 5/Gamma)")
    p = _leaf(qb, "sweep", cmd_qbm_sweep, "rates against kappa")
    _qbm_common(p)
    _sweep(p, "kappa", 0.1, 4.0)

    fg = models.add_parser("figures", help="figure datasets").add_subparsers(dest="action", required=True)
    p = _leaf(fg, "fig1", cmd_fig1, "Gamma^2 and Omega^2+Gamma^2 against omega0")
    _add(p, "--out-dir", str, ".", "output directory")
    _add(p, "--eta", float, 0.2, "coupling eta")
    _add(p, "--num", int, 200, "number of omega0 points")
    p = _leaf(fg, "fig1b", cmd_fig1b, "|Re s3|, |Re s4| against eta")
    _add(p, "--out-dir", str, ".", "output directory")
    _add(p, "--omega0", float, 0.01, "spin splitting")
    _add(p, "--num", int, 201, "number of eta points")
    p = _leaf(fg, "fig2", cmd_fig2, "exact and Redfield trajectories across the transition")
    _add(p, "--out-dir", str, ".", "output directory")
    _add(p, "--n", int, 1500, "total Hilbert-space dimension N (3000 for the larger run)")
    _add(p, "--seed", int, DEFAULT_SEED, "GOE seed")
    _add(p, "--n-t", int, 301, "number of time points")
    return parser


# ---------------------------------------------------------------------------
# Parameter resolution


def _resolve(args: argparse.Namespace) -> dict:
    defaults = args._defaults
    config = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key not in defaults:
                raise UsageError(f"unknown config field {k!r} for this command")
            config[key] = v
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key)
        out[key] = flag if flag is not None else config.get(key, default)
    return out


def _grid(params: dict, t_default: float) -> np.ndarray:
    n_t = params["n_t"]
    t_max = params["t_max"] if params["t_max"] is not None else t_default
    if n_t is None or n_t < 1:
        raise UsageError(f"n_t must be >= 1, got {n_t}")
    if not (t_max >= 0 and math.isfinite(t_max)):
        raise UsageError(f"t_max must be finite and >= 0, got {t_max}")
    return np.linspace(0.0, t_max, n_t)


def _sweep_values(params: dict) -> np.ndarray:
    start, stop, num = params["start"], params["stop"], params["num"]
    if start == stop:
        return np.array([float(start)])
    if num < 1:
        raise UsageError(f"num must be >= 1, got {num}")
    return np.linspace(start, stop, num)


class _Ctx:
    def __init__(self, args, params, stdout):
        self.args, self.params, self.stdout = args, params, stdout
        self.command = f"{args.model} {args.action}"

    def header(self, seed=None) -> dict:
        return provenance(self.command, self.params, seed, timestamp=False if self.args.no_timestamp else None)

    def target(self):
        return self.args.out if self.args.out else self.stdout

    def csv(self, columns, rows, seed=None, target=None):
        write_csv(target if target is not None else self.target(), self.header(seed), columns, rows)

    def json(self, record, seed=None):
        dump_json(self.target(), self.header(seed), record)


# ---------------------------------------------------------------------------
# spin-boson


def _sb_rates(p: dict):
    spin = SpinModel(p["omega0"], p["hbar"])
    temp = ThermalState(p["beta"])
    if p["alpha"] is None:
        return spin, spin_boson_limit_rates(spin, p["kappa"], temp)
    return spin, spin_boson_highT(spin, BathSpec(p["kappa"], p["alpha"], p["hbar"]), temp)


def cmd_sb_rates(ctx: _Ctx) -> None:
    p = ctx.params
    spin, r = _sb_rates(p)
    ctx.json({"omega0": p["omega0"], "kappa": p["kappa"], "beta": p["beta"], "gamma": r.gamma,
              "omega2": r.omega2, "z_inf": r.z_inf, "regime": classify(r).value,
              "kappa_c": spin_boson_kappa_c(spin, ThermalState(p["beta"]))})


def cmd_sb_evolve(ctx: _Ctx) -> None:
    p = ctx.params
    spin, r = _sb_rates(p)
    b0 = BlochVector(p["x0"], p["y0"], p["z0"])
    ts = _grid(p, 3.0 / r.gamma if r.gamma > 0 else 10.0 / spin.omega0)
    tr = evolve(r, spin, b0, ts)
    ctx.csv(["t", "x", "y", "z"], zip(tr.t, tr.x, tr.y, tr.z))


def cmd_sb_sweep(ctx: _Ctx) -> None:
    p = ctx.params
    if p["param"] != "kappa":
        raise UsageError(f"param must be 'kappa' for spin-boson sweeps, got {p['param']!r}")
    rows = []
    for k in _sweep_values(p):
        _, r = _sb_rates({**p, "kappa": float(k)})
        rows.append([float(k), r.gamma, r.omega2, r.z_inf, classify(r).value])
    ctx.csv(["kappa", "gamma", "omega2", "z_inf", "regime"], rows)


# ---------------------------------------------------------------------------
# spin-gorm


def _gorm(p: dict):
    model = GormModel(p["n"], p["eta"], p["omega0"], p["hbar"])
    window = MicrocanonicalWindow(p["eps"], p["delta_eps"])
    return model, window, gorm_rates(model, p["eps"])


def _gorm_sample(model: GormModel, seed: int) -> GoeSample:
    # one draw at unit coupling, rescaled, so that every eta sees the same matrices
    base = sample_goe(model.with_eta(1.0), seed)
    return GoeSample(base.hb, model.eta * base.bmat, seed)


def cmd_sg_rates(ctx: _Ctx) -> None:
    p = ctx.params
    _, _, r = _gorm(p)
    ec = eta_critical(p["omega0"], p["eps"], p["hbar"])
    ctx.json({"N": p["n"], "eta": p["eta"], "eps": p["eps"], "delta_eps": p["delta_eps"], "seed": p["seed"],
              "gamma": r.gamma, "omega2": r.omega2, "z_inf": r.z_inf, "eta_c": ec.eta_c})


def cmd_sg_eta_c(ctx: _Ctx) -> None:
    p = ctx.params
    ec = eta_critical(p["omega0"], p["eps"], p["hbar"], p["eta_max"])
    rec = {"omega0": p["omega0"], "eps": p["eps"], "eta_c": ec.eta_c}
    if not ec:
        rec["reason"] = ec.reason
    ctx.json(rec)


def cmd_sg_evolve(ctx: _Ctx) -> None:
    p = ctx.params
    model, _, r = _gorm(p)
    ts = _grid(p, 3.0 / r.gamma if r.gamma > 0 else 10.0 / model.omega0)
    tr = evolve(r.as_markov(), model.spin, BlochVector(p["x0"], p["y0"], p["z0"]), ts)
    ctx.csv(["t", "x", "y", "z"], zip(tr.t, tr.x, tr.y, tr.z), seed=p["seed"])


def _compare_rows(model, window, rates, b0, ts, seed):
    ex = exact_evolve(model, _gorm_sample(model, seed), window, b0, ts)
    rf = evolve(rates.as_markov(), model.spin, b0, ts)
    rows = zip(ts, ex.x, ex.y, ex.z, rf.x, rf.y, rf.z)
    return list(rows), compare_exact_redfield(ex, rf)


COMPARE_COLUMNS = ["t", "x_exact", "y_exact", "z_exact", "x_redfield", "y_redfield", "z_redfield"]


def cmd_sg_compare(ctx: _Ctx) -> None:
    p = ctx.params
    model, window, r = _gorm(p)
    ts = _grid(p, 3.0 / r.gamma if r.gamma > 0 else 10.0 / model.omega0)
    rows, report = _compare_rows(model, window, r, BlochVector(p["x0"], p["y0"], p["z0"]), ts, p["seed"])
    ctx.params = {**p, "sup_deviation": report.sup}
    ctx.csv(COMPARE_COLUMNS, rows, seed=p["seed"])


# ---------------------------------------------------------------------------
# loop


def _loop(p: dict):
    return LoopModel(p["n_sites"], p["hop"], hbar=p["hbar"]), DephasingBath(p["q_strength"])


def cmd_loop_spectrum(ctx: _Ctx) -> None:
    model, bath = _loop(ctx.params)
    rows = []
    for n, spec in enumerate(full_spectrum_by_sectors(model, bath), start=1):
        tagged = False
        for ev in spec.eigenvalues:
            is_diff = (not tagged and spec.diffusive is not None and ev.real == spec.diffusive
                       and abs(ev.imag) <= 1e-9 * max(1.0, abs(ev)))
            tagged = tagged or is_diff
            rows.append([n, spec.bloch_q, float(ev.real), float(ev.imag), is_diff])
    ctx.csv(["n", "q", "re", "im", "is_diffusive"], rows)


def cmd_loop_diffusive(ctx: _Ctx) -> None:
    p = ctx.params
    model, bath = _loop(p)
    sector = build_sector(model, bath, p["sector"])
    spec = sector_spectrum(sector)
    try:
        closed = diffusive_eigenvalue(model, bath, sector.bloch_q)
    except BranchAbsent:
        closed = None
    ctx.json({"N": p["n_sites"], "sector": p["sector"], "q": sector.bloch_q, "q_strength": p["q_strength"],
              "diffusive_numeric": spec.diffusive, "diffusive_closed_form": closed})


def cmd_loop_sweep(ctx: _Ctx) -> None:
    p = ctx.params
    if p["param"] != "q_strength":
        raise UsageError(f"param must be 'q_strength' for loop sweeps, got {p['param']!r}")
    rows = []
    for qv in _sweep_values(p):
        model, bath = _loop({**p, "q_strength": float(qv)})
        for n in range(1, model.n_sites + 1):
            spec = sector_spectrum(build_sector(model, bath, n))
            rows.append([float(qv), n, spec.bloch_q, spec.diffusive])
    ctx.csv(["q_strength", "n", "q", "diffusive"], rows)


# ---------------------------------------------------------------------------
# qbm


def _qbm(p: dict) -> QbmModel:
    return QbmModel(p["omega0"], p["kappa"], p["alpha"], p["beta"], p["hbar"])


def cmd_qbm_rates(ctx: _Ctx) -> None:
    p = ctx.params
    m = _qbm(p)
    r = qbm_markov_rates(m) if ctx.args.markov else exact_rates(m)
    ctx.json({"omega0": m.omega0, "kappa": m.kappa, "alpha": m.alpha, "beta": m.beta, "gamma": r.gamma,
              "omega2": r.omega2, "lambda": r.lam, "regime": r.regime.value,
              "kappa_c": kappa_critical(m), "kappa_transition": transition_kappa(m)})


def _qbm_times(ctx: _Ctx, m: QbmModel, r):
    return _grid(ctx.params, 5.0 / r.gamma if r.gamma > 0 else 10.0 / m.omega0)


def cmd_qbm_amplitude(ctx: _Ctx) -> None:
    p = ctx.params
    m = _qbm(p)
    r = exact_rates(m)
    ts = _qbm_times(ctx, m, r)
    a = qbm_amplitude(m, r, ts)
    ad = amplitude_dot(m, r, ts)
    q = ad * p["q0"] + a * p["p0"]
    ctx.csv(["t", "A", "Adot", "q_mean"], zip(ts, a, ad, q))


def cmd_qbm_oracle(ctx: _Ctx) -> None:
    p = ctx.params
    m = _qbm(p)
    r = exact_rates(m)
    ts = _qbm_times(ctx, m, r)
    init = OscillatorMeanState(p["q0"], p["p0"])
    w_max = p["omega_max"] if p["omega_max"] is not None else 20.0 * m.alpha
    q_or = finite_bath_oracle(m, p["n_osc"], w_max, init, ts)
    q_ex = mean_displacement(m, r, init, ts)
    ctx.csv(["t", "q_oracle", "q_mean"], zip(ts, q_or, q_ex))


def cmd_qbm_sweep(ctx: _Ctx) -> None:
    p = ctx.params
    if p["param"] != "kappa":
        raise UsageError(f"param must be 'kappa' for qbm sweeps, got {p['param']!r}")
    rows = []
    for k in _sweep_values(p):
        m = _qbm({**p, "kappa": float(k)})
        mk = qbm_markov_rates(m)
        try:
            r = exact_rates(m)
            ex = [r.gamma, r.omega2, r.lam, r.regime.value]
        except BranchAbsent:
            ex = [None, None, None, "merged"]
        rows.append([float(k), *ex, mk.gamma, mk.omega2, mk.regime.value])
    ctx.csv(["kappa", "gamma", "omega2", "lambda", "regime", "gamma_markov", "omega2_markov", "regime_markov"],
            rows)


# ---------------------------------------------------------------------------
# figures


def _out_path(ctx: _Ctx, name: str) -> Path:
    d = Path(ctx.params["out_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def fig1_rows(eta: float, num: int) -> list[list]:
    rows = []
    for w0 in np.geomspace(1e-3, 0.6, num):
        r = gorm_rates(GormModel(4, eta, float(w0)), 0.0)
        rows.append([float(w0), r.gamma ** 2, r.omega2 + r.gamma ** 2])
    return rows


def fig1b_rows(omega0: float, num: int) -> list[list]:
    rows = []
    for eta in np.linspace(0.0, 0.3, num)[1:]:
        r = gorm_rates(GormModel(4, float(eta), omega0), 0.0)
        ms = modes(r.as_markov())
        rows.append([float(eta), abs(ms.s3.real), abs(ms.s4.real), classify(r.as_markov()).value])
    return rows


def cmd_fig1(ctx: _Ctx) -> None:
    p = ctx.params
    path = _out_path(ctx, "fig1.csv")
    ctx.csv(["omega0", "gamma2", "omega2_plus_gamma2"], fig1_rows(p["eta"], p["num"]), target=path)
    ctx.stdout.write(f"{path}\n")


def cmd_fig1b(ctx: _Ctx) -> None:
    p = ctx.params
    path = _out_path(ctx, "fig1b.csv")
    ctx.csv(["eta", "abs_re_s3", "abs_re_s4", "regime"], fig1b_rows(p["omega0"], p["num"]), target=path)
    ctx.stdout.write(f"{path}\n")


def cmd_fig2(ctx: _Ctx) -> None:
    p = ctx.params
    for eta in FIG2_ETAS:
        model = GormModel(p["n"], eta, 0.01)
        window = MicrocanonicalWindow(0.0, 0.025)
        r = gorm_rates(model, 0.0)
        ts = np.linspace(0.0, 3.0 / r.gamma, p["n_t"])
        rows, _ = _compare_rows(model, window, r, FIG2_INITIAL, ts, p["seed"])
        path = _out_path(ctx, f"fig2_eta{eta:.2f}.csv")
        ctx.csv(COMPARE_COLUMNS, rows, seed=p["seed"], target=path)
        ctx.stdout.write(f"{path}\n")


# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        params = _resolve(args)
        args._handler(_Ctx(args, params, stdout))
    except UsageError as exc:
        print(f"overdamping: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"overdamping: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError) as exc:
        print(f"overdamping: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OverdampingError as exc:
        print(f"overdamping: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

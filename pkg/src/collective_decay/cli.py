"""Command-line entry point: ``collective-decay <command> --preset NAME | --config FILE``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, propagator
from .config import MAX_QUBITS, PRESETS, RunConfig, load_config, parse_config, preset
from .dfs import (
    CouplingProfile,
    SectorState,
    dfs_dimension,
    pair_family,
    subradiant_basis,
    subradiant_pair,
    superradiant_state,
    verify_dark,
)
from .entanglement import asymptotic_state, entanglement_report, find_tstar, ncr_star
from .errors import ConfigError, NumericalError
from .evolution import check_density_matrix, density_matrix, evolve, trajectory
from .oracle import DiscretizedBath, recommended_dt, solve_cplus_ode, solve_discretized_bath
from .propagator import BathSpec

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
_DENSE_CHECK_MAX_N = 5


class Table:
    """Column names, rows, and a metadata dict for the JSON envelope."""

    def __init__(self, columns, rows, summary=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.summary = summary or {}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.12g}"


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.12g}")


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def derived_constants(cfg: RunConfig) -> dict:
    p = cfg.params
    omega = p.omega
    out = {
        "gamma": p.gamma,
        "r": p.r,
        "R": p.R if p.gamma > 0 else None,
        "Omega_re": omega.real,
        "Omega_im": omega.imag,
        "Gamma_markov": p.markov_rate if p.gamma > 0 else None,
        "slow_rate": p.slow_rate if p.overdamped else None,
        "time_units": cfg.units,
        "time_unit_absolute": cfg.time_scale,
    }
    return out


def render_json(table: Table, cfg: RunConfig, command: str) -> str:
    doc = {
        "version": __version__,
        "command": command,
        "config_hash": cfg.digest(),
        "derived": derived_constants(cfg),
        "summary": table.summary,
        "columns": table.columns,
        "rows": [[_jsonable(v) if not isinstance(v, str) else v for v in row] for row in table.rows],
    }
    return json.dumps(_jsonable(doc), indent=1, sort_keys=False) + "\n"


# --- commands ---------------------------------------------------------------


def simulate(cfg: RunConfig) -> Table:
    """Closed-form trajectory with per-point entanglement columns (three qubits)."""
    n = cfg.n
    grid = cfg.time_grid()
    traj = trajectory(cfg.initial, cfg.profile, cfg.params, grid * cfg.time_scale)
    columns = ["t", "Phi", "Q"]
    for j in range(n):
        columns += [f"c{j + 1}_re", f"c{j + 1}_im"]
    columns += [f"N{j + 1}" for j in range(n)]
    columns += ["N3_geo", "Ncr_star", "Gamma_t", "biseparable"]

    rows = []
    for i, t in enumerate(grid):
        state = traj.state(i)
        if abs(state.norm - 1.0) > 1e-10:
            raise NumericalError(f"normalization violated at t={t:g}")
        if n <= _DENSE_CHECK_MAX_N:
            check_density_matrix(density_matrix(state))
        rep = entanglement_report(state)
        row = [t, traj.phi[i], traj.q[i]]
        for a in state.a:
            row += [a.real, a.imag]
        row += list(rep.negativities)
        row += [rep.n3, rep.n_star, traj.gamma_t[i] * cfg.time_scale, rep.biseparable]
        rows.append(row)
    return Table(columns, rows, {"upper_bound_note": "Ncr_star is an upper bound on the convex-roof tripartite negativity"})


def _sweep_points(cfg: RunConfig):
    res = cfg.sweep["resolution"]
    if cfg.sweep["diagonal"]:
        axis = np.linspace(0.0, 1.0 / math.sqrt(2.0), res)
        return [(x, x) for x in axis]
    axis = np.linspace(0.0, 1.0, res)
    return [(x, y) for x in axis for y in axis if x * x + y * y <= 1.0 + 1e-12]


def _asymptotic_bound(args):
    r1, r2, a = args
    r3 = math.sqrt(max(0.0, 1.0 - r1 * r1 - r2 * r2))
    profile = CouplingProfile([r1, r2, r3])
    final = asymptotic_state(SectorState(a), profile)
    return [r1, r2, r3, final.excited_weight, ncr_star(final)]


def sweep(cfg: RunConfig, threads: int = 1) -> Table:
    """Asymptotic bound over ``(r1, r2)`` with ``r3`` completing the unit norm."""
    if cfg.n != 3:
        raise ConfigError("sweep needs a three-qubit configuration")
    a = np.array(cfg.initial.a)
    jobs = [(r1, r2, a) for r1, r2 in _sweep_points(cfg)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_asymptotic_bound, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        rows = [_asymptotic_bound(job) for job in jobs]
    best = max(range(len(rows)), key=lambda i: (rows[i][4], -i))
    summary = {
        "argmax_r1": rows[best][0],
        "argmax_r2": rows[best][1],
        "argmax_r3": rows[best][2],
        "max_Ncr_star": rows[best][4],
        "grid_points": len(rows),
    }
    ref = cfg.sweep.get("reference_value")
    if ref is not None:
        summary["reference_value"] = ref
        summary["reference_minus_max"] = ref - rows[best][4]
    return Table(["r1", "r2", "r3", "Q_inf", "Ncr_star_inf"], rows, summary)


def _record(items) -> Table:
    items = list(items)
    return Table(["quantity", "value"], [[k, v] for k, v in items], dict(items))


def markov_report(cfg: RunConfig) -> Table:
    p = cfg.params
    # Gamma(0) = 0 exactly, so the minimum is taken over t > 0
    grid = cfg.time_grid()[1:] * cfg.time_scale
    rates = propagator.decay_rate(grid, p) * cfg.time_scale
    finite = rates[np.isfinite(rates)]
    zero = propagator.first_phi_zero(p)
    return _record(
        [
            ("R", p.R if p.gamma > 0 else None),
            ("gamma", p.gamma),
            ("r", p.r),
            ("cp_divisible", propagator.is_cp_divisible(p)),
            ("gamma_t_min", float(finite.min()) if finite.size else None),
            ("gamma_t_poles", int(np.sum(~np.isfinite(rates)))),
            ("first_phi_zero", None if zero is None else zero / cfg.time_scale),
            ("markov_amplitude_rate", p.markov_rate * cfg.time_scale if p.gamma > 0 else None),
            ("slow_lindblad_rate", p.slow_rate * cfg.time_scale if p.overdamped else None),
        ]
    )


def tstar_report(cfg: RunConfig) -> Table:
    found = find_tstar(cfg.initial, cfg.profile, cfg.params, t_max=cfg.t_max * cfg.time_scale)
    if found is None:
        return _record([("t_star", None), ("qubit", None), ("phi_star", None)])
    n_star = ncr_star(found.state) if cfg.n == 3 else None
    return _record(
        [
            ("t_star", found.time / cfg.time_scale),
            ("t_star_absolute", found.time),
            ("qubit", found.qubit + 1),
            ("phi_star", found.phi_value),
            ("purity_defect", found.purity_defect),
            ("Ncr_star_at_t_star", n_star),
        ]
    )


def oracle_check(cfg: RunConfig) -> Table:
    o = cfg.oracle
    t_max = cfg.t_max * cfg.time_scale
    if o["method"] == "ode":
        dt = o["dt"] or recommended_dt(cfg.params)
        times, values = solve_cplus_ode(cfg.params, t_max, dt)
        stride = max(1, (len(times) - 1) // (cfg.steps - 1))
        idx = np.unique(np.r_[np.arange(0, len(times), stride), len(times) - 1])
        closed = propagator.phi(times[idx], cfg.params)
        err = np.abs(closed - values[idx])
        rows = [[t / cfg.time_scale, c, v, e] for t, c, v, e in zip(times[idx], closed, values[idx], err)]
        return Table(["t", "closed_form", "oracle", "abs_err"], rows, {"max_abs_err": float(err.max())})

    if cfg.lam is None:
        raise ConfigError("bath oracle needs a bath strength")
    bath = BathSpec(cfg.lam, cfg.params.gamma)
    disc = DiscretizedBath.lorentzian(bath, o["modes"], o["half_width"])
    dt = o["dt"] or 0.01 / max(1.0, o["half_width"] / 40.0)
    steps = int(round(t_max / dt))
    every = max(1, steps // (cfg.steps - 1))
    run = solve_discretized_bath(cfg.initial, cfg.profile, disc, steps * dt, dt, sample_every=every)
    r = cfg.profile.weights
    eta_plus = np.dot(r, cfg.initial.a)
    rows, worst = [], 0.0
    for t, amps in zip(run.times, run.amplitudes):
        closed = evolve(cfg.initial, cfg.profile, cfg.params, t).a
        err = float(np.max(np.abs(amps - closed)))
        worst = max(worst, err)
        c_plus = np.dot(r, amps) / eta_plus if eta_plus != 0 else np.nan
        rows.append([t / cfg.time_scale, propagator.phi(t, cfg.params), np.real(c_plus), err])
    summary = {"max_abs_err": worst, "norm_drift": run.norm_drift, "modes": disc.K, "recurrence_time": disc.recurrence_time}
    return Table(["t", "closed_form", "oracle", "abs_err"], rows, summary)


def nqubit_report(cfg: RunConfig) -> Table:
    """DFS audit plus the factorization time of qubit 2 for ``eta_+ psi_+ + eta_- psi_-^(12)``."""
    profile = cfg.profile
    n = profile.n
    if n > MAX_QUBITS:
        raise ConfigError(f"n={n} exceeds {MAX_QUBITS}")
    basis = subradiant_basis(profile)
    plus = superradiant_state(profile)
    dark = max(verify_dark(v, profile) for v in basis)
    overlap = float(np.max(np.abs(pair_family(profile) @ plus.a)))
    gram = np.array([v.a for v in basis])
    ortho = float(np.max(np.abs(gram @ gram.conj().T - np.eye(len(basis)))))
    items = [
        ("n", n),
        ("dfs_dimension", dfs_dimension(profile)),
        ("max_dark_residual", dark),
        ("superradiant_overlap_residual", overlap),
        ("basis_orthonormality_residual", ortho),
    ]
    eta_p, eta_m = cfg.nqubit["eta_plus"], cfg.nqubit["eta_minus"]
    r = profile.weights
    tstar = None
    if np.hypot(r[0], r[1]) > 0:
        # pair state on qubits 1 and 2: (r2|[1]> - r1|[2]>) / norm
        start = SectorState(eta_p * plus.a + eta_m * subradiant_pair(profile, 0, 1).a)
        tstar = find_tstar(start, profile, cfg.params, t_max=cfg.t_max * cfg.time_scale)
    if tstar is not None and tstar.qubit == 1:
        items += [
            ("t_star", tstar.time / cfg.time_scale),
            ("t_star_absolute", tstar.time),
            ("factorized_qubit", tstar.qubit + 1),
            ("phi_star", tstar.phi_value),
            ("purity_defect", tstar.purity_defect),
        ]
    else:
        items += [("t_star", None), ("factorized_qubit", None if tstar is None else tstar.qubit + 1)]
    return _record(items)


COMMANDS = {
    "simulate": simulate,
    "sweep": sweep,
    "tstar": tstar_report,
    "markov": markov_report,
    "oracle-check": oracle_check,
    "nqubit": nqubit_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="collective-decay", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON run configuration")
        src.add_argument("--preset", choices=sorted(PRESETS), help="named scenario")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (default: csv)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweep")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config(preset(args.preset))
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        fn = COMMANDS[args.command]
        table = fn(cfg, threads=args.threads) if fn is sweep else fn(cfg)
        fmt = args.format or cfg.output["format"]
        text = render_json(table, cfg, args.command) if fmt == "json" else render_csv(table)
        out = args.out or cfg.output["path"]
        if out:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        # CSV has no room for the sweep/oracle summary; it goes to stderr
        if fmt == "csv" and args.command in ("sweep", "oracle-check"):
            print(json.dumps(_jsonable(table.summary), sort_keys=True), file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())

"""Command-line front end.

Usage::

    dickestark <subcommand> [--config FILE] [--out DIR] [--format csv|json]
                            [--threads N] [--seed N] [--print-config]

Each subcommand reads an optional flat ``key = value`` file (see
:mod:`dickestark.config`); keys not given take the defaults printed by
``--print-config``. Model quantities are in units of the cavity frequency
(suffix ``_wc``); trapped-ion quantities in ``2 pi x kHz`` (suffix
``_2pi_khz``).

Data files are deterministic: no timestamps, ``#`` metadata lines only
above the header, floats written with ``repr``. Run metadata (time, argv,
versions, resolved configuration) goes to ``<subcommand>.meta.json``.

Exit status: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import dynamics, exact_diag, fluctuations, ion_map, meanfield
from .config import (
    Field,
    format_config,
    load_config,
    parse_config,
    parse_float,
    parse_float_list,
    parse_range,
)
from .errors import BogoliubovUnstable, ConfigError, DickeStarkError, DomainError, NumericalFailure
from .model import ModelParams, PhaseLabel, classify_phase, collapse_coupling, critical_rabi

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
THREADS_ENV = "DICKESTARK_THREADS"
TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# value parsers and tables


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    return parse


def _choice_list(*options):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ValueError("empty list")
        for t in items:
            if t not in options:
                raise ValueError(f"{t!r} not in {', '.join(options)}")
        return items

    return parse


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def _values(spec) -> np.ndarray:
    """Expand a parsed ``(start, stop, count)`` range or pass a list through."""
    if isinstance(spec, tuple):
        start, stop, count = spec
        return np.linspace(start, stop, count)
    return np.asarray(spec, dtype=float)


class Table:
    """Column names (with units) plus rows; serializes to CSV or JSON."""

    def __init__(self, name: str, columns, metadata=None):
        self.name = name
        self.columns = list(columns)
        self.rows: list[list] = []
        self.metadata = dict(metadata or {})

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, table {self.name} has {len(self.columns)}")
        self.rows.append(list(row))

    @staticmethod
    def _cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return str(v)

    @staticmethod
    def _json_value(v):
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return v if math.isfinite(v) else None
        if isinstance(v, (int, np.integer)):
            return int(v)
        return str(v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k} = {self._cell(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([self._cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "metadata": {k: self._json_value(v) for k, v in self.metadata.items()},
            "columns": self.columns,
            "rows": [[self._json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# schemas

MODEL_KEYS = {
    "omega_q_wc": Field(parse_float, 0.015, "qubit splitting"),
    "N": Field(_positive_int, 50, "number of qubits"),
}

SCHEMAS = {
    "phase-diagram": {
        **MODEL_KEYS,
        "U_wc": Field(parse_range, (0.0, 0.03, 26), "Stark coupling range start:stop:count"),
        "g_wc": Field(parse_range, (0.0, 0.6, 61), "coupling range start:stop:count"),
    },
    "order-parameter": {
        **MODEL_KEYS,
        "U_wc": Field(parse_float_list, [0.0, 0.0168, 0.03], "Stark couplings"),
        "g_wc": Field(parse_range, (0.0, 0.5, 101), "coupling range"),
        "method": Field(_choice("closed", "numeric"), "closed", "order-parameter solver"),
    },
    "landscape": {
        **MODEL_KEYS,
        "U_wc": Field(parse_float, 0.0168, "Stark coupling"),
        "g_wc": Field(parse_float_list, [0.2, 0.33, 0.4], "couplings, one curve each"),
        "beta": Field(parse_range, (0.0, 7.0, 141), "order-parameter grid"),
    },
    "squeezing": {
        **MODEL_KEYS,
        "U_wc": Field(parse_float_list, [0.0168], "Stark couplings"),
        "g_wc": Field(parse_range, (0.0, 0.45, 46), "coupling range"),
    },
    "ed": {
        "omega_q_wc": Field(parse_float, 0.015, "qubit splitting"),
        "N": Field(_positive_int, 8, "number of qubits"),
        "n_max": Field(_positive_int, 80, "Fock cutoff"),
        "U_wc": Field(parse_range, (0.0, 0.03, 16), "Stark coupling range"),
        "g_wc": Field(parse_range, (0.3, 0.3, 1), "coupling range"),
        "tol": Field(parse_float, 1e-9, "Lanczos residual tolerance"),
        "max_iter": Field(_positive_int, 20000, "Lanczos matrix-vector budget per parity sector"),
    },
    "ion": {
        "eta": Field(parse_float, 0.1, "Lamb-Dicke parameter"),
        "omega_trap_2pi_khz": Field(parse_float, 4980.0, "trap frequency"),
        "Omega_S_2pi_khz": Field(parse_float, 120.0, "carrier Rabi frequency"),
        "Omega_r_2pi_khz": Field(parse_float_list, [70.0, 200.0], "red sideband Rabi frequencies"),
        "N_ions": Field(_positive_int, 50, "number of ions"),
        "U_over_wc": Field(parse_float, 0.0168, "U / omega_c, fixes omega_c"),
        "omega_q_wc": Field(parse_float, 0.015, "target qubit splitting"),
        "n_bar": Field(parse_float, 0.0, "mean phonon number for the Lamb-Dicke check"),
    },
    "verify": {
        "drive_file": Field(str, None, "drive config written by the ion subcommand (overrides below)"),
        "eta": Field(parse_float, 0.1, "Lamb-Dicke parameter"),
        "omega_trap_2pi_khz": Field(parse_float, 4980.0, "trap frequency"),
        "Omega_S_2pi_khz": Field(parse_float, 120.0, "carrier Rabi frequency"),
        "Omega_r_2pi_khz": Field(parse_float, 200.0, "red sideband Rabi frequency"),
        "U_over_wc": Field(parse_float, 0.0168, "U / omega_c"),
        "omega_q_wc": Field(parse_float, 0.015, "target qubit splitting"),
        "n_max": Field(_positive_int, 20, "Fock cutoff"),
        "duration_periods": Field(parse_float, 1.0, "duration in units of 2 pi / (10 lam)"),
        "variants": Field(
            _choice_list("balanced", "approx", "exact"), ["balanced", "approx", "exact"],
            "effective models to compare",
        ),
        "fidelity_threshold": Field(parse_float, 0.99, "reported pass threshold"),
        "samples": Field(_positive_int, 101, "trajectory samples"),
    },
}


# ---------------------------------------------------------------------------
# subcommands; each returns a list of tables


def _model(cfg, U, g):
    return ModelParams(omega_q=cfg["omega_q_wc"], g=g, U=U, N=cfg["N"])


def _model_meta(cfg):
    return {"omega_q_wc": cfg["omega_q_wc"], "N": cfg["N"], "omega_c": 1.0}


def cmd_phase_diagram(cfg, ctx):
    U_values, g_values = _values(cfg["U_wc"]), _values(cfg["g_wc"])
    meta = _model_meta(cfg)
    grid = Table("phase_grid", ["U_wc", "g_wc", "label"], meta)
    bound = Table("phase_boundary", ["U_wc", "g_t_wc", "g_c_wc"], meta)
    for U in U_values:
        base = _model(cfg, U, 0.0)
        if not base.well_posed:
            bound.add(U, math.nan, math.nan)
            for g in g_values:
                grid.add(U, g, "IllPosed")
            continue
        bound.add(U, critical_rabi(base), collapse_coupling(base))
        for g in g_values:
            grid.add(U, g, classify_phase(base.replace(g=g)).value)
    return [grid, bound]


def cmd_order_parameter(cfg, ctx):
    table = Table(
        "order_parameter",
        ["U_wc", "g_wc", "phase", "beta", "beta_sq_over_N", "energy_wc"],
        {**_model_meta(cfg), "method": cfg["method"]},
    )
    for U in cfg["U_wc"]:
        for g in _values(cfg["g_wc"]):
            p = _model(cfg, U, g).require_well_posed()
            sol = meanfield.solve(p, cfg["method"])
            table.add(U, g, sol.phase.value, sol.beta, sol.beta**2 / p.N, sol.energy)
    return [table]


def cmd_landscape(cfg, ctx):
    table = Table(
        "landscape",
        ["U_wc", "g_wc", "beta", "energy_wc", "stable"],
        _model_meta(cfg),
    )
    betas = _values(cfg["beta"])
    for g in cfg["g_wc"]:
        p = _model(cfg, cfg["U_wc"], g).require_well_posed()
        for pt in meanfield.energy_landscape(p, betas):
            table.add(p.U, g, pt.beta, math.nan if pt.energy is None else pt.energy, pt.stable)
    return [table]


def cmd_squeezing(cfg, ctx):
    cols = [
        "U_wc", "g_wc", "phase", "squeeze_r", "excitation_energy_wc",
        "mean_Jx", "mean_Jz", "var_Jx", "var_Jy", "var_Jz",
        "ellipse_x", "ellipse_y", "alpha", "linear_residual_meanfield", "status",
    ]
    table = Table("squeezing", cols, _model_meta(cfg))
    nan = math.nan
    for U in cfg["U_wc"]:
        for g in _values(cfg["g_wc"]):
            p = _model(cfg, U, g).require_well_posed()
            phase = classify_phase(p)
            if phase is PhaseLabel.COLLAPSE:
                continue
            try:
                if phase is PhaseLabel.NORMAL:
                    form = fluctuations.np_effective(p)
                    alpha, resid, scale = 0.0, 0.0, 1.0
                else:
                    sp, form = fluctuations.sp_effective(p)
                    alpha, resid, scale = sp.alpha, sp.residual_meanfield, sp.energy_scale
                bog = fluctuations.bogoliubov_diagonalize(form)
                mom = fluctuations.spin_moments(p)
            except (BogoliubovUnstable, DomainError) as exc:
                # a sweep keeps going; the point is marked instead
                status = "unstable" if isinstance(exc, BogoliubovUnstable) else "no_alpha"
                table.add(U, g, phase.value, *([nan] * 12), status)
                continue
            ax, ay = mom.ellipse_axes
            table.add(
                U, g, phase.value, bog.squeeze_r, bog.excitation_energy * scale,
                mom.mean_Jx, mom.mean_Jz, mom.var_Jx, mom.var_Jy, mom.var_Jz,
                ax, ay, alpha, resid, "ok",
            )
    return [table]


def cmd_ed(cfg, ctx):
    U_values, g_values = _values(cfg["U_wc"]), _values(cfg["g_wc"])
    space = exact_diag.HilbertSpace(cfg["n_max"], cfg["N"])
    cols = [
        "U_wc", "g_wc", "energy_wc", "mean_n", "mean_Jz", "mean_Jx2",
        "var_Jx", "var_Jy", "parity_re", "residual", "meanfield_energy_wc",
    ]
    table = Table("ed", cols, {"omega_q_wc": cfg["omega_q_wc"], "N": cfg["N"], "n_max": cfg["n_max"]})
    points = [(U, g) for U in U_values for g in g_values]

    def run(point):
        U, g = point
        p = _model(cfg, U, g).require_well_posed()
        res = exact_diag.solve(p, space, tol=cfg["tol"], max_iter=cfg["max_iter"], seed=ctx["seed"])
        obs = exact_diag.observables(res, space)
        mf = meanfield.solve(p).energy
        return (U, g, res.energy, obs.mean_n, obs.mean_Jz, obs.mean_Jx2, obs.var_Jx, obs.var_Jy,
                obs.parity_expectation.real, res.residual, mf)

    if ctx["threads"] > 1:
        with ThreadPoolExecutor(ctx["threads"]) as pool:
            rows = list(pool.map(run, points))
    else:
        rows = [run(pt) for pt in points]
    for row in rows:
        table.add(*row)
    return [table]


def _drive_for(cfg, Omega_r_khz):
    """Drive realizing the configured model with the given red Rabi frequency."""
    eta = cfg["eta"]
    U = eta**2 * TWO_PI * cfg["Omega_S_2pi_khz"] / 2
    wc = U / cfg["U_over_wc"]
    eps = cfg["Omega_S_2pi_khz"] / cfg["omega_trap_2pi_khz"]
    lam = eta**2 * TWO_PI * Omega_r_khz / 8 * (1 - 2 * eps)
    n = cfg.get("N_ions", 1)
    target = ModelParams(omega_q=cfg["omega_q_wc"] * wc, g=n * lam, U=U, N=n, omega_c=wc)
    drive = ion_map.inverse_map(target, eta, TWO_PI * cfg["omega_trap_2pi_khz"])
    return target, drive


def cmd_ion(cfg, ctx):
    khz = 1 / TWO_PI
    fwd = Table(
        "ion_forward",
        [
            "Omega_r_2pi_khz", "Omega_b_2pi_khz", "Omega_S_2pi_khz", "Omega_2pi_khz",
            "delta_r_2pi_khz", "delta_b_2pi_khz", "omega_c_2pi_khz", "U_2pi_khz",
            "lambda_2pi_khz", "g_2pi_khz", "omega_q_wc", "U_wc", "g_wc", "epsilon_S",
            "roundtrip_rel_error",
        ],
        {"eta": cfg["eta"], "omega_trap_2pi_khz": cfg["omega_trap_2pi_khz"], "N_ions": cfg["N_ions"]},
    )
    diag = Table("ion_diagnostics", ["Omega_r_2pi_khz", "check", "value", "threshold", "status"])
    for Or in cfg["Omega_r_2pi_khz"]:
        target, drive = _drive_for(cfg, Or)
        mapped = ion_map.forward_map(drive, target.omega_c, n_bar=cfg["n_bar"])
        p = mapped.params
        err = max(
            abs(getattr(p, k) - getattr(target, k)) / max(abs(getattr(target, k)), 1e-300)
            for k in ("omega_c", "omega_q", "g", "U")
        )
        dim = mapped.dimensionless()
        fwd.add(
            drive.Omega_r * khz, drive.Omega_b * khz, drive.Omega_S * khz, drive.Omega_big * khz,
            drive.delta_r * khz, drive.delta_b * khz, p.omega_c * khz, p.U * khz,
            mapped.lam * khz, p.g * khz, dim.omega_q, dim.U, dim.g, mapped.epsilon_S, err,
        )
        for c in mapped.diagnostics:
            diag.add(Or, c.name, c.value, c.threshold, c.status)
        ctx["extra_files"][f"drive_Omega_r_{Or:g}.cfg"] = ion_map.drive_to_config(drive)
    return [fwd, diag]


def cmd_verify(cfg, ctx):
    if cfg["drive_file"]:
        try:
            drive = ion_map.drive_from_config(Path(cfg["drive_file"]).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read drive_file: {exc}") from None
    else:
        _, drive = _drive_for({**cfg, "N_ions": 1}, cfg["Omega_r_2pi_khz"])
    single = drive.replace(N_ions=1)
    lam = ion_map.forward_map(single).lam
    T = cfg["duration_periods"] * TWO_PI / (10 * lam)
    variants = [None if v == "balanced" else v for v in cfg["variants"]]
    reports = dynamics.compare_effective(
        single, cfg["n_max"], T=T, variants=variants, samples=cfg["samples"]
    )
    thr = cfg["fidelity_threshold"]
    rep = Table(
        "verify_report",
        ["variant", "fidelity", "threshold", "pass", "T_ms", "dt_ms", "steps", "norm_drift",
         "top_fock_population", "odd_population_effective"],
        {"n_max": cfg["n_max"], "lambda_2pi_khz": lam / TWO_PI},
    )
    for r in reports:
        rep.add(r.denominators, r.fidelity, thr, r.fidelity >= thr, r.T, r.dt, r.steps,
                r.norm_drift, r.top_population, r.odd_population_effective)
    traj = Table("trajectory", list(dynamics.TRAJECTORY_COLUMNS), {"frame": "lab interaction picture"})
    for row in dynamics.trajectory_rows(reports[0].trajectory, cfg["n_max"]):
        traj.add(*row)
    return [rep, traj]


COMMANDS = {
    "phase-diagram": (cmd_phase_diagram, "mean-field phase labels on a (U, g) grid and the boundaries"),
    "order-parameter": (cmd_order_parameter, "order parameter and ground energy versus g"),
    "landscape": (cmd_landscape, "mean-field energy versus the order parameter"),
    "squeezing": (cmd_squeezing, "fluctuation squeezing and collective-spin moments"),
    "ed": (cmd_ed, "exact-diagonalization observables over a (U, g) sweep"),
    "ion": (cmd_ion, "trapped-ion drive tables and validity diagnostics"),
    "verify": (cmd_verify, "full-drive versus effective-model fidelity"),
}


# ---------------------------------------------------------------------------
# driver


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for Lanczos start vectors")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration and exit")
    parser = argparse.ArgumentParser(prog="dickestark", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext, description=helptext)
    return parser


def _threads(flag):
    if flag is not None:
        if flag < 1:
            raise ConfigError("--threads must be >= 1")
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"${THREADS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"${THREADS_ENV} must be >= 1")
        return n
    return 1


def _config_text(values, schema):
    return format_config({k: values[k] for k in schema})


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    func, _ = COMMANDS[args.command]
    schema = SCHEMAS[args.command]
    try:
        cfg = load_config(args.config, schema) if args.config else parse_config("", schema)
        if args.print_config:
            sys.stdout.write(_config_text(cfg, schema))
            return EXIT_OK
        ctx = {"threads": _threads(args.threads), "seed": args.seed, "extra_files": {}}
        started = time.time()
        tables = func(cfg, ctx)
        elapsed = time.time() - started
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, DomainError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DickeStarkError as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t in tables:
        path = out / f"{t.name}.{args.format}"
        path.write_text(t.to_csv() if args.format == "csv" else t.to_json())
        written.append(path.name)
    for name, text in ctx["extra_files"].items():
        (out / name).write_text(text)
        written.append(name)
    meta = {
        "command": args.command,
        "argv": list(sys.argv if argv is None else argv),
        "started_unix": started,
        "elapsed_s": elapsed,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": ctx["threads"],
        "seed": args.seed,
        "config": _config_text(cfg, schema),
        "files": written,
    }
    (out / f"{args.command}.meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    for name in written:
        print(out / name)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

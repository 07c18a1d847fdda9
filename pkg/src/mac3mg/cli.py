"""Command line front end for the smoothing analysis and multigrid runs.

Commands
--------
smooth-opt   analytic optimal parameters next to the sampled smoothing factor
twogrid-lfa  predicted two-grid convergence factors rho(nu) for nu = 1..4
mg-run       measured two-grid and V-cycle convergence factors on a real grid
compare      mg-run plus LFA predictions plus a periodic cross-validation
selftest     fast internal consistency checks (exit 3 on mismatch)

Configuration may come from ``--config FILE`` holding ``key = value`` lines
(keys equal the long flag names: scheme, transfer, nu, n, bc, omega, alpha,
sigma, omega-j, resolution, seed, out, format; ``#`` starts a comment).
Flags override file values.  Environment variables are never consulted, and
no timestamps are emitted, so rerunning a command with the same configuration
reproduces the output byte for byte.

Output is CSV (one row per table cell, values rounded to three decimals,
configuration carried in columns) or JSON (raw values, full configuration
echo, and per-iteration residual histories for the measured runs).

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 selftest mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from . import analytic
from .multigrid import GridHierarchy, solve
from .stencils import RESTRICTIONS
from .symbols import SCHEMES, RelaxParams, reference_params, smoothing_factor
from .twogrid import TransferPair, two_grid_factor_table

RESTRICTION_NAMES = tuple(RESTRICTIONS)


class ConfigError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    scheme: str = "qibsr"
    transfer: str = "p25t"
    nus: tuple = (1, 2, 3, 4)
    n: int = 81
    bc: str = "dirichlet"
    omega: float | None = None
    alpha: float | None = None
    sigma: float | None = None
    omega_j: float | None = None
    resolution: int = 81
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.transfer not in RESTRICTION_NAMES:
            raise ConfigError(
                f"unknown transfer {self.transfer!r}, expected one of {RESTRICTION_NAMES}"
            )
        if self.bc not in ("dirichlet", "periodic"):
            raise ConfigError("bc must be 'dirichlet' or 'periodic'")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        if not self.nus or any(nu < 1 for nu in self.nus):
            raise ConfigError("nu list must contain positive integers")
        if self.n < 3:
            raise ConfigError("n must be at least 3")
        if self.resolution < 3:
            raise ConfigError("resolution must be at least 3")


def _parse_nus(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad nu list {text!r}: {exc}") from None


def load_config_file(path: str) -> dict:
    """Read the key = value configuration format."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_FLOAT_KEYS = ("omega", "alpha", "sigma", "omega_j")
_INT_KEYS = ("n", "resolution", "seed")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config file values, and flags (highest precedence)."""
    cfg = ExperimentConfig(command=args.command)
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in file_values.items():
        if key in ("scheme", "transfer", "bc", "out"):
            setattr(cfg, key, value)
        elif key == "format":
            cfg.fmt = value
        elif key == "nu":
            cfg.nus = _parse_nus(value)
        elif key in _INT_KEYS:
            try:
                setattr(cfg, key, int(value))
            except ValueError:
                raise ConfigError(f"config key {key} wants an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                setattr(cfg, key, float(value))
            except ValueError:
                raise ConfigError(f"config key {key} wants a number, got {value!r}") from None
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for key in ("scheme", "transfer", "bc", "out", "seed", "n", "resolution"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "format", None) is not None:
        cfg.fmt = args.format
    if getattr(args, "nu", None) is not None:
        cfg.nus = _parse_nus(args.nu)
    for key in _FLOAT_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def resolve_params(cfg: ExperimentConfig, purpose: str) -> RelaxParams:
    """Reference parameters for the scheme with any overrides applied."""
    base = reference_params(cfg.scheme, purpose)
    try:
        return RelaxParams(
            scheme=cfg.scheme,
            omega=base.omega if cfg.omega is None else cfg.omega,
            alpha=base.alpha if cfg.alpha is None else cfg.alpha,
            sigma=base.sigma if cfg.sigma is None else cfg.sigma,
            omega_j=base.omega_j if cfg.omega_j is None else cfg.omega_j,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _params_record(params: RelaxParams) -> dict:
    rec = {"omega": params.omega, "alpha": params.alpha}
    if params.sigma is not None:
        rec["sigma"] = params.sigma
    if params.omega_j is not None:
        rec["omega_j"] = params.omega_j
    return rec


def _emit(cfg: ExperimentConfig, rows: list, extras: dict | None = None) -> None:
    """Write rows as CSV or a full JSON report to cfg.out or stdout."""
    if cfg.fmt == "csv":
        buf = io.StringIO()
        fieldnames = list(rows[0].keys())
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            rendered = {}
            for key, value in row.items():
                if isinstance(value, float):
                    rendered[key] = "nan" if math.isnan(value) else f"{value:.3f}"
                else:
                    rendered[key] = value
            writer.writerow(rendered)
        text = buf.getvalue()
    else:
        report = {"config": _config_record(cfg), "rows": rows}
        if extras:
            report.update(extras)
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _config_record(cfg: ExperimentConfig) -> dict:
    rec = asdict(cfg)
    rec["nus"] = list(cfg.nus)
    return rec


def cmd_smooth_opt(cfg: ExperimentConfig) -> int:
    """Analytic optimum beside the sampled smoothing factor at the optimum."""
    optima = {
        "qdr": analytic.optimal_qdr,
        "qbsr": analytic.optimal_qbsr,
        "qibsr": analytic.optimal_qbsr,
        "quzawa": analytic.optimal_uzawa,
    }
    result = optima[cfg.scheme]()
    params = resolve_params(cfg, "lfa")
    sampled = smoothing_factor(params, n=cfg.resolution)
    row = {
        "scheme": cfg.scheme,
        "mu_analytic": result.mu_opt,
        "mu_sampled": sampled,
        "gap": abs(sampled - result.mu_opt),
        "ratio": None if result.ratio is None else float(result.ratio),
        "resolution": cfg.resolution,
        **_params_record(params),
    }
    _emit(cfg, [row], {"mu_rational": str(result.mu_rational), "under_root": result.under_root})
    return 0


def cmd_twogrid_lfa(cfg: ExperimentConfig) -> int:
    """Predicted two-grid factors rho(nu) for the configured transfer pair."""
    params = resolve_params(cfg, "lfa")
    pair = TransferPair(cfg.transfer)
    try:
        table = two_grid_factor_table(params, pair, nus=tuple(sorted(set(cfg.nus))),
                                      n=cfg.resolution, h=1.0 / cfg.resolution)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failure: {exc}") from None
    rows = []
    for nu in sorted(table):
        rows.append({
            "scheme": cfg.scheme,
            "transfer": cfg.transfer,
            "nu": nu,
            "rho_lfa": table[nu],
            "resolution": cfg.resolution,
            **_params_record(params),
        })
    _emit(cfg, rows)
    return 0


def _measured_rows(cfg: ExperimentConfig, cycles=("two", "v")):
    """Run the solver for every (cycle, nu) cell; divergence is per-cell."""
    params = resolve_params(cfg, "measured")
    pair = TransferPair(cfg.transfer)
    hier = GridHierarchy(cfg.n, cfg.bc, params, pair)
    lfa = two_grid_factor_table(params, pair, nus=tuple(sorted(set(cfg.nus))),
                                n=cfg.resolution, h=1.0 / cfg.resolution)
    rows, histories, failed = [], {}, False
    for cycle in cycles:
        for nu in sorted(set(cfg.nus)):
            report = solve(hier, nu, 0, cycle=cycle, seed=cfg.seed)
            status = "diverged" if report.diverged else (
                "converged" if report.converged else "maxiter")
            failed = failed or report.diverged
            rows.append({
                "scheme": cfg.scheme,
                "transfer": cfg.transfer,
                "cycle": cycle,
                "nu": nu,
                "rho_m": report.rho_m if not report.diverged else float("nan"),
                "rho_lfa": lfa[nu],
                "iterations": report.iterations,
                "status": status,
                "n": cfg.n,
                "bc": cfg.bc,
                "seed": cfg.seed,
                **_params_record(params),
            })
            histories[f"{cycle}-nu{nu}"] = list(report.residual_norms)
    return params, rows, histories, failed


def cmd_mg_run(cfg: ExperimentConfig) -> int:
    """Measured two-grid and V-cycle factors beside the LFA prediction."""
    _, rows, histories, failed = _measured_rows(cfg)
    _emit(cfg, rows, {"residual_histories": histories})
    return 2 if failed else 0


def cmd_compare(cfg: ExperimentConfig) -> int:
    """Measured versus predicted report plus a periodic cross-validation.

    The periodic check measures the asymptotic contraction on a small torus
    where boundary effects are absent, so the result must land on the LFA
    lattice prediction within 0.01.
    """
    from .multigrid import asymptotic_factor
    from .twogrid import periodic_lattice_factor

    params, rows, histories, failed = _measured_rows(cfg)
    n_per = min(cfg.n, 27)
    hier = GridHierarchy(n_per, "periodic", params, TransferPair(cfg.transfer))
    measured = asymptotic_factor(hier, 1, 0, cycle="two", seed=cfg.seed)
    rho_h = periodic_lattice_factor(params, TransferPair(cfg.transfer), 1, 0, n=n_per)
    gap = abs(measured - rho_h)
    ok = bool(math.isfinite(measured) and gap <= 0.01)
    periodic = {
        "n": n_per,
        "nu": 1,
        "rho_m": measured,
        "rho_lfa_lattice": rho_h,
        "gap": gap,
        "pass": ok,
    }
    if cfg.fmt == "csv":
        rows.append({
            "scheme": cfg.scheme,
            "transfer": cfg.transfer,
            "cycle": "two-periodic",
            "nu": 1,
            "rho_m": measured,
            "rho_lfa": rho_h,
            "iterations": 360,
            "status": "pass" if ok else "fail",
            "n": n_per,
            "bc": "periodic",
            "seed": cfg.seed,
            **_params_record(params),
        })
    _emit(cfg, rows, {"residual_histories": histories, "periodic_check": periodic})
    return 2 if (failed or not math.isfinite(measured)) else 0


def cmd_selftest(cfg: ExperimentConfig) -> int:
    """Fast consistency checks; exit 3 when any expectation fails."""
    from .multigrid import assemble_two_grid_matrix, projected_spectral_radius
    from .twogrid import periodic_lattice_factor

    checks = []

    def record(name: str, ok: bool, detail: str) -> None:
        checks.append({"check": name, "pass": bool(ok), "detail": detail})

    r = analytic.optimal_qdr()
    record("analytic-rationals",
           r.mu_rational == Fraction(17, 47) and r.ratio == Fraction(36, 47),
           f"mu={r.mu_rational} ratio={r.ratio}")
    record("uzawa-reference-point",
           analytic.uzawa_params_from_omega(1) == (Fraction(47, 36), Fraction(15, 32)),
           "omega=1 maps to (47/36, 15/32)")

    sampled = smoothing_factor(reference_params("qbsr", "lfa"), n=81)
    record("sampled-smoothing", abs(sampled - 17.0 / 47.0) <= 1e-3,
           f"sampled={sampled:.6f} analytic={17.0 / 47.0:.6f}")

    params = reference_params("qibsr", "measured")
    pair = TransferPair("p25t")
    mat = assemble_two_grid_matrix(9, params, pair, 1, 0, bc="periodic")
    rho = projected_spectral_radius(mat, 9, "periodic")
    lattice = periodic_lattice_factor(params, pair, 1, 0, n=9)
    record("periodic-equivalence", abs(rho - lattice) <= 1e-8,
           f"matrix={rho:.10f} lattice={lattice:.10f}")

    ratio = analytic.cost_ratio()
    record("cost-ratio", abs(ratio - 2.78) <= 0.01, f"ratio={ratio:.6f}")

    rows = [{"check": c["check"], "status": "pass" if c["pass"] else "FAIL",
             "detail": c["detail"]} for c in checks]
    _emit(cfg, rows, {"checks": checks})
    return 0 if all(c["pass"] for c in checks) else 3


COMMANDS = {
    "smooth-opt": cmd_smooth_opt,
    "twogrid-lfa": cmd_twogrid_lfa,
    "mg-run": cmd_mg_run,
    "compare": cmd_compare,
    "selftest": cmd_selftest,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mac3mg",
        description="Smoothing analysis and multigrid experiments for the "
        "staggered Stokes discretization with coarsening by three.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        p.add_argument("--scheme", choices=SCHEMES, default=None)
        p.add_argument("--transfer", choices=RESTRICTION_NAMES, default=None)
        p.add_argument("--nu", default=None, help="comma separated list, e.g. 1,2,3,4")
        p.add_argument("--n", type=int, default=None, help="finest grid cells per side")
        p.add_argument("--bc", choices=("dirichlet", "periodic"), default=None)
        p.add_argument("--omega", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--omega-j", dest="omega_j", type=float, default=None)
        p.add_argument("--resolution", type=int, default=None,
                       help="frequency samples per axis for LFA sweeps")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--config", default=None, help="key = value config file")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
        return 1 if code == 2 else code
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

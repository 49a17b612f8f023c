"""Command-line front end.

Subcommands: rate (one operating point), sweep (advantage grid to CSV),
constants (asymptotic constants with residuals), simulate (Monte Carlo
cross-check).  Exit codes: 0 success, 2 bad flags or domain validation,
3 numerical non-convergence, 4 simulation disagreement verdict.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from .model import (
    Depths,
    DomainError,
    ModulationScheme,
    Scenario,
    excess_noise_advantage,
    helstrom_error_probability,
)
from .montecarlo import SimConfig, estimate_key_rate_mc, mi_tolerance, simulate
from .optimize import (
    SweepTable,
    _row_from_result,
    optimal_rate,
    rate_at,
    sweep,
)
from .quadrature import DEFAULT_CONFIG, ConvergenceError
from .rates import (
    HELSTROM_ASYMPTOTIC_CONSTANT,
    HELSTROM_ASYMPTOTIC_DEPTH,
    _dd_bracket,
    chi_optimum,
    gamma_optimum,
)

_SCENARIO_NAMES = tuple(s.value for s in Scenario)
_CONSTANT_TOL = 1e-8  # optimizer tolerance used for the cached constants


def _g12(x):
    """Round-trip a float through 12 significant digits."""
    if x is None:
        return None
    return float(f"{x:.12g}")


def _json_doc(payload: dict | list) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _write_output(text: str, path: str | None) -> None:
    """Print to stdout, or write whole-file atomically when a path is given."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".okdrates-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel", "advantage directly, or physical parameters")
    g.add_argument("--advantage", type=float, default=None, help="eavesdropper advantage")
    g.add_argument("--tau-b", type=float, default=None, help="Bob's transmission fraction")
    g.add_argument("--tau-e", type=float, default=None, help="Eve's tapped fraction")
    g.add_argument("--n-bar", type=float, default=None, help="mean photon number per pulse")
    g.add_argument(
        "--excess",
        type=float,
        default=0.0,
        help="Bob's excess noise variance beyond shot noise (default 0)",
    )


def _add_common_flags(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument(
        "--format", choices=("json", "csv"), default=default_format, help="output format"
    )
    p.add_argument("--output", default=None, help="write here instead of stdout (atomic)")


def _resolve_advantage(args) -> float:
    channel = (args.tau_b, args.tau_e, args.n_bar)
    if args.advantage is not None:
        if any(v is not None for v in channel):
            raise DomainError("give either --advantage or channel parameters, not both")
        return float(args.advantage)
    if any(v is None for v in channel):
        raise DomainError("need --advantage, or all of --tau-b, --tau-e, --n-bar")
    return excess_noise_advantage(args.tau_b, args.tau_e, args.n_bar, args.excess)


def _resolve_modulation(args) -> ModulationScheme | None:
    if args.contrast == 0.0:
        return None
    n_bar = args.n_bar if args.n_bar is not None else 1e6
    return ModulationScheme.from_mean_and_contrast(n_bar, args.contrast)


def _point_result(args, scenario: Scenario, advantage: float, modulation):
    if args.optimize == (args.delta_b is not None):
        raise DomainError("give exactly one of --delta-b or --optimize")
    if args.optimize:
        return optimal_rate(
            scenario, advantage, modulation=modulation, tol=args.tol
        )
    return rate_at(scenario, args.delta_b, advantage, modulation=modulation)


def _kv_csv(pairs: list[tuple[str, object]]) -> str:
    """Two-line CSV: header row of names, one row of values."""
    header = ",".join(name for name, _ in pairs)
    cells = []
    for _, v in pairs:
        if isinstance(v, float):
            cells.append(f"{v:.12g}")
        elif v is None:
            cells.append("")
        else:
            cells.append(str(v))
    return header + "\n" + ",".join(cells) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def cmd_rate(args) -> int:
    scenario = Scenario(args.scenario)
    advantage = _resolve_advantage(args)
    modulation = _resolve_modulation(args)
    result = _point_result(args, scenario, advantage, modulation)
    if args.format == "csv":
        text = SweepTable(rows=(_row_from_result(result),)).to_csv()
    else:
        doc = {k: _g12(v) if isinstance(v, float) else v for k, v in result.to_dict().items()}
        text = _json_doc(doc)
    _write_output(text, args.output)
    return 0


def cmd_sweep(args) -> int:
    if args.all_scenarios:
        scenarios = list(Scenario)
    elif args.scenario:
        scenarios = [Scenario(s) for s in args.scenario]
    else:
        raise DomainError("need --scenario (repeatable) or --all-scenarios")
    if args.figures and args.output is None:
        raise DomainError("--figures needs --output to anchor the image paths")
    grid = np.geomspace(args.grid_min, args.grid_max, args.grid_points)
    if not np.all(np.isfinite(grid)) or grid[0] <= 0:
        raise DomainError("grid must be positive and finite")
    modulation = _resolve_modulation(args)
    table = sweep(
        scenarios,
        advantages=grid,
        modulation=modulation,
        tol=args.tol,
        threads=args.threads,
    )
    if args.format == "csv":
        text = table.to_csv()
    else:
        text = _json_doc(
            [
                {k: _g12(v) if isinstance(v, float) else v for k, v in d.items()}
                for d in table.to_dicts()
            ]
        )
    _write_output(text, args.output)
    if args.figures:
        from .plots import render_sweep_figures

        for p in render_sweep_figures(table, args.output):
            print(f"wrote {p}", file=sys.stderr)
    return 0 if any(r.error is None for r in table.rows) else 3


def cmd_constants(args) -> int:
    gamma = gamma_optimum()
    chi = chi_optimum()
    _, gamma_resid = _dd_bracket(gamma.argmax, DEFAULT_CONFIG)
    rows = [
        ("gamma", gamma.value, gamma.argmax, _CONSTANT_TOL, gamma_resid),
        ("chi", chi.value, chi.argmax, _CONSTANT_TOL, 0.0),
        (
            "helstrom",
            HELSTROM_ASYMPTOTIC_CONSTANT,
            HELSTROM_ASYMPTOTIC_DEPTH,
            0.0,
            0.0,
        ),
    ]
    if args.format == "csv":
        lines = ["name,value,depth,optimizer_residual,quadrature_residual"]
        for name, value, depth, otol, qres in rows:
            lines.append(f"{name},{value:.6g},{depth:.6g},{otol:.3g},{qres:.3g}")
        text = "\n".join(lines) + "\n"
    else:
        text = _json_doc(
            {
                name: {
                    "value": float(f"{value:.6g}"),
                    "depth": float(f"{depth:.6g}"),
                    "optimizer_residual": otol,
                    "quadrature_residual": qres,
                }
                for name, value, depth, otol, qres in rows
            }
        )
    _write_output(text, args.output)
    return 0


def _helstrom_error_report(cfg: SimConfig) -> dict:
    """Empirical discrimination error rate next to the closed form."""
    errors = 0
    for batch in simulate(cfg):
        errors += int(np.count_nonzero(batch.m_e != batch.a))
    empirical = errors / cfg.rounds
    exact = helstrom_error_probability(cfg.depths.delta_e_coh)
    rel = abs(empirical - exact) / exact if exact > 0 else 0.0
    return {
        "empirical_error_rate": _g12(empirical),
        "error_probability": _g12(exact),
        "error_rate_relative_gap": _g12(rel),
    }


def cmd_simulate(args) -> int:
    scenario = Scenario(args.scenario)
    if scenario is Scenario.HOLEVO:
        raise DomainError(
            "the Holevo scenario keeps Eve quantum; there is no classical "
            "record to simulate"
        )
    advantage = _resolve_advantage(args)
    modulation = _resolve_modulation(args)
    result = _point_result(args, scenario, advantage, modulation)
    coh = result.delta_e_coh if result.delta_e_coh is not None else result.delta_e
    depths = Depths(
        delta_b=result.delta_b,
        delta_e=result.delta_e,
        delta_e_coh=coh,
        advantage=advantage,
    )
    cfg = SimConfig(
        rounds=args.rounds,
        seed=args.seed,
        scenario=scenario,
        depths=depths,
        bins=args.bins,
        bootstrap_resamples=args.resamples,
    )
    mc, se = estimate_key_rate_mc(cfg)
    tolerance = mi_tolerance(se)
    gap = abs(mc - result.key_rate)
    verdict = "pass" if gap <= tolerance else "fail"
    doc = {
        "scenario": scenario.value,
        "advantage": _g12(advantage),
        "delta_b": _g12(depths.delta_b),
        "delta_e": _g12(depths.delta_e),
        "delta_e_coh": _g12(depths.delta_e_coh),
        "rounds": cfg.rounds,
        "seed": cfg.seed,
        "bins": cfg.bins,
        "bootstrap_resamples": cfg.bootstrap_resamples,
        "mc_key_rate": _g12(mc),
        "mc_std_error": _g12(se),
        "analytic_key_rate": _g12(result.key_rate),
        "gap": _g12(gap),
        "tolerance": _g12(tolerance),
        "verdict": verdict,
    }
    if scenario is Scenario.HELSTROM:
        doc.update(_helstrom_error_report(cfg))
    if args.format == "csv":
        text = _kv_csv(list(doc.items()))
    else:
        text = _json_doc(doc)
    _write_output(text, args.output)
    return 0 if verdict == "pass" else 4


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okdrates",
        description="Secret key rates for binary intensity-modulated optical links.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="key rate at one operating point")
    p.add_argument("--scenario", required=True, choices=_SCENARIO_NAMES)
    _add_channel_flags(p)
    p.add_argument("--delta-b", type=float, default=None, help="fixed Bob depth")
    p.add_argument("--optimize", action="store_true", help="optimize over Bob's depth")
    p.add_argument("--contrast", type=float, default=1e-3, help="pulse contrast dn/n (0 disables)")
    p.add_argument("--tol", type=float, default=1e-6, help="depth optimizer tolerance")
    _add_common_flags(p, "json")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", help="optimized rates over an advantage grid")
    p.add_argument(
        "--scenario", action="append", choices=_SCENARIO_NAMES, help="repeatable"
    )
    p.add_argument("--all-scenarios", action="store_true", help="all four, interleaved")
    p.add_argument("--grid-min", type=float, default=1.0)
    p.add_argument("--grid-max", type=float, default=1e3)
    p.add_argument("--grid-points", type=int, default=25)
    p.add_argument("--contrast", type=float, default=1e-3, help="pulse contrast dn/n (0 disables)")
    p.add_argument("--tol", type=float, default=1e-6, help="depth optimizer tolerance")
    p.add_argument("--threads", type=int, default=None, help="workers (env OKDRATES_THREADS)")
    p.add_argument(
        "--figures",
        action="store_true",
        help="also render rate/depth PNG panels next to --output",
    )
    p.add_argument("--n-bar", type=float, default=None, help="mean photon number per pulse")
    _add_common_flags(p, "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("constants", help="asymptotic constants with residuals")
    _add_common_flags(p, "json")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("simulate", help="Monte Carlo cross-check of one point")
    p.add_argument("--scenario", required=True, choices=_SCENARIO_NAMES)
    _add_channel_flags(p)
    p.add_argument("--delta-b", type=float, default=None, help="fixed Bob depth")
    p.add_argument("--optimize", action="store_true", help="optimize over Bob's depth")
    p.add_argument("--contrast", type=float, default=1e-3, help="pulse contrast dn/n (0 disables)")
    p.add_argument("--tol", type=float, default=1e-6, help="depth optimizer tolerance")
    p.add_argument("--rounds", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--resamples", type=int, default=20)
    _add_common_flags(p, "json")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

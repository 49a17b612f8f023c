"""Depth optimization and advantage sweeps.

Scalar maximization is two-stage: a 64-point log-spaced coarse scan
brackets the peak, then golden-section search refines the bracketing
cell.  A flat objective (spread below 10x the default absolute
quadrature tolerance across the coarse grid) short-circuits to the lower
bracket edge with a flag set, which the rate wrappers report as zero
rate.
"""

from __future__ import annotations

import concurrent.futures
import io
import math
import os
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import rates
from .model import DomainError, ModulationScheme, Scenario
from .quadrature import ConvergenceError, QuadratureConfig

__all__ = [
    "ScalarMax",
    "maximize_scalar",
    "optimal_rate",
    "sweep",
    "SweepRow",
    "SweepTable",
    "default_advantage_grid",
    "DEPTH_BRACKET",
    "THREADS_ENV_VAR",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0
_COARSE_POINTS = 64
_FLAT_SPREAD = 1e-9

# Bob-depth search window; generous on both ends for any advantage of interest
DEPTH_BRACKET = (1e-3, 12.0)
THREADS_ENV_VAR = "OKDRATES_THREADS"


class ScalarMax(NamedTuple):
    argmax: float
    value: float
    flat: bool


def maximize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6
) -> ScalarMax:
    """Maximize f on [lo, hi] (both positive) to argmax accuracy tol.

    Never returns a value below the best coarse-grid sample.
    """
    if not 0.0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")

    grid = np.geomspace(lo, hi, _COARSE_POINTS)
    vals = [f(x) for x in grid]
    best = int(np.argmax(vals))
    if max(vals) - min(vals) < _FLAT_SPREAD:
        return ScalarMax(argmax=lo, value=vals[0], flat=True)

    best_x, best_v = float(grid[best]), vals[best]
    a = float(grid[max(best - 1, 0)])
    b = float(grid[min(best + 1, _COARSE_POINTS - 1)])

    # golden-section: shrink [a, b] keeping two interior probes
    h = b - a
    c, d = a + _INV_PHI_SQ * h, a + _INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INV_PHI_SQ * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
        for x, v in ((c, fc), (d, fd)):
            if v > best_v:
                best_x, best_v = float(x), v
    return ScalarMax(argmax=best_x, value=best_v, flat=False)


def _rate_fn(
    scenario: Scenario,
    advantage: float,
    cfg: QuadratureConfig | None,
    modulation: ModulationScheme | None,
) -> Callable[[float], rates.RateResult]:
    """Rate as a function of Bob's depth, for any scenario."""
    ratio = modulation.coherent_depth_ratio() if modulation is not None else 1.0
    root_adv = math.sqrt(advantage)
    if scenario is Scenario.DIRECT_DETECTION:
        return lambda db: rates.key_rate_dd(db, advantage, cfg)
    if scenario is Scenario.COHERENT:
        return lambda db: rates.key_rate_coherent(db, advantage, modulation, cfg)
    if scenario is Scenario.HELSTROM:
        return lambda db: rates.key_rate_helstrom(
            ratio * root_adv * db, advantage, modulation, cfg
        )
    if scenario is Scenario.HOLEVO:
        return lambda db: rates.key_rate_holevo(db, advantage, cfg)
    raise DomainError(f"unknown scenario {scenario!r}")


def optimal_rate(
    scenario: Scenario,
    advantage: float,
    cfg: QuadratureConfig | None = None,
    modulation: ModulationScheme | None = None,
    bracket: tuple[float, float] = DEPTH_BRACKET,
    tol: float = 1e-6,
) -> rates.RateResult:
    """Best key rate over Bob's depth for one scenario and advantage."""
    fn = _rate_fn(scenario, advantage, cfg, modulation)
    res = maximize_scalar(lambda db: fn(db).key_rate, bracket[0], bracket[1], tol=tol)
    result = fn(res.argmax)
    if res.flat:
        result = replace(result, key_rate=0.0)
    return result


def rate_at(
    scenario: Scenario,
    delta_b: float,
    advantage: float,
    cfg: QuadratureConfig | None = None,
    modulation: ModulationScheme | None = None,
) -> rates.RateResult:
    """Key rate at a fixed Bob depth, same depth coupling as optimal_rate."""
    return _rate_fn(scenario, advantage, cfg, modulation)(delta_b)


def default_advantage_grid(
    lo: float = 1.0, hi: float = 1e3, points: int = 25
) -> np.ndarray:
    """Log-spaced advantage grid; defaults span [1, 10^3] with 25 points."""
    if not 0.0 < lo <= hi or points < 1:
        raise DomainError("need 0 < lo <= hi and at least one point")
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class SweepRow:
    advantage: float
    scenario: Scenario
    delta_b_opt: float
    delta_e_opt: float
    key_rate: float
    key_rate_asymptotic: float
    error: str | None = None


CSV_COLUMNS = (
    "advantage",
    "scenario",
    "delta_b_opt",
    "delta_e_opt",
    "key_rate",
    "key_rate_asymptotic",
    "error",
)


@dataclass(frozen=True)
class SweepTable:
    """Optimized rates over an advantage grid, scenarios interleaved per point."""

    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            cells = [
                f"{r.advantage:.12g}",
                r.scenario.value,
                f"{r.delta_b_opt:.12g}",
                f"{r.delta_e_opt:.12g}",
                f"{r.key_rate:.12g}",
                f"{r.key_rate_asymptotic:.12g}",
                r.error or "",
            ]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_dicts(self) -> list[dict]:
        out = []
        for r in self.rows:
            d = {
                "advantage": r.advantage,
                "scenario": r.scenario.value,
                "delta_b_opt": r.delta_b_opt,
                "delta_e_opt": r.delta_e_opt,
                "key_rate": r.key_rate,
                "key_rate_asymptotic": r.key_rate_asymptotic,
                "error": r.error,
            }
            out.append(d)
        return out

    def scenario_rows(self, scenario: Scenario) -> list[SweepRow]:
        return [r for r in self.rows if r.scenario is scenario]


def _row_from_result(result: rates.RateResult) -> SweepRow:
    # report Eve's operative depth: the coherent one where her measurement
    # is coherent, the intensity one otherwise
    if result.scenario in (Scenario.COHERENT, Scenario.HELSTROM):
        delta_e_opt = result.delta_e_coh
    else:
        delta_e_opt = result.delta_e
    return SweepRow(
        advantage=result.advantage,
        scenario=result.scenario,
        delta_b_opt=result.delta_b,
        delta_e_opt=delta_e_opt,
        key_rate=result.key_rate,
        key_rate_asymptotic=result.asymptotic_estimate,
        error=None,
    )


def _sweep_cell(
    scenario: Scenario,
    advantage: float,
    cfg: QuadratureConfig | None,
    modulation: ModulationScheme | None,
    tol: float,
) -> SweepRow:
    try:
        return _row_from_result(
            optimal_rate(scenario, advantage, cfg=cfg, modulation=modulation, tol=tol)
        )
    except ConvergenceError as exc:
        # keep the grid shape; the row carries its own failure note
        return SweepRow(
            advantage=advantage,
            scenario=scenario,
            delta_b_opt=math.nan,
            delta_e_opt=math.nan,
            key_rate=math.nan,
            key_rate_asymptotic=math.nan,
            error=str(exc).replace(",", ";"),
        )


def _worker_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def sweep(
    scenarios: Sequence[Scenario],
    advantages: Sequence[float] | None = None,
    cfg: QuadratureConfig | None = None,
    modulation: ModulationScheme | None = None,
    tol: float = 1e-6,
    threads: int | None = None,
) -> SweepTable:
    """Optimize every (advantage, scenario) cell of a grid.

    Rows come back grid-major with scenarios interleaved per grid point,
    in the order given.  Cell computations are independent; with threads
    > 1 they run concurrently and are reassembled in grid order, so the
    output is identical for any worker count.
    """
    if advantages is None:
        advantages = default_advantage_grid()
    if len(scenarios) == 0:
        raise DomainError("at least one scenario required")
    cells = [(adv, sc) for adv in advantages for sc in scenarios]
    workers = _worker_count(threads)
    if workers == 1:
        rows = [_sweep_cell(sc, float(adv), cfg, modulation, tol) for adv, sc in cells]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(
                    lambda cell: _sweep_cell(cell[1], float(cell[0]), cfg, modulation, tol),
                    cells,
                )
            )
    return SweepTable(rows=tuple(rows))

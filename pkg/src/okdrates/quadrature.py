"""Quadrature over truncated Gaussian supports.

All integrands in this package are Gaussian-weighted, so integration
domains are unions of windows [c - T, c + T] around the relevant means,
merged when they overlap.  One dimension uses adaptive 7/15-point
Gauss-Kronrod subdivision; two dimensions use a tensor-product
Gauss-Legendre rule per window pair with node-doubling refinement until
the requested tolerances are met.

Integrands must be vectorized: f receives ndarrays and returns an array
of the same shape (2-D integrands receive broadcastable column/row grids).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureConfig",
    "ConvergenceError",
    "NonFiniteIntegrandError",
    "integrate_1d",
    "integrate_2d",
    "merged_intervals",
    "log_cosh",
    "logistic",
]


class ConvergenceError(RuntimeError):
    """Tolerances could not be met within the node budget."""


class NonFiniteIntegrandError(ConvergenceError):
    """The integrand returned NaN or infinity."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets shared by every integral in a computation.

    abs_tol / rel_tol    accept when the error estimate drops below
                         max(abs_tol, rel_tol * |integral|)
    truncation_sigmas    half-width T of the window kept around each center
    max_nodes_1d         abort an adaptive 1-D integral beyond this many
                         function evaluations
    nodes_2d_per_axis    Gauss-Legendre points per axis window in 2-D
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    truncation_sigmas: float = 10.0
    max_nodes_1d: int = 2048
    nodes_2d_per_axis: int = 201

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.truncation_sigmas <= 0:
            raise ValueError("truncation_sigmas must be positive")
        if self.max_nodes_1d < 15 or self.nodes_2d_per_axis < 2:
            raise ValueError("node budgets too small")


DEFAULT_CONFIG = QuadratureConfig()

# 15-point Kronrod extension of 7-point Gauss on [-1, 1].  Gauss weights
# are zero at the Kronrod-only nodes so both rules share one evaluation.
_XK_HALF = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
]
_WK_HALF = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
]
_WG_HALF = [
    0.0,
    0.129484966168870,
    0.0,
    0.279705391489277,
    0.0,
    0.381830050505119,
    0.0,
]

_NODES = np.array([-x for x in _XK_HALF] + [0.0] + list(reversed(_XK_HALF)))
_WEIGHTS_K = np.array(_WK_HALF + [0.209482141084728] + list(reversed(_WK_HALF)))
_WEIGHTS_G = np.array(_WG_HALF + [0.417959183673469] + list(reversed(_WG_HALF)))


def merged_intervals(centers: Sequence[float], half_width: float) -> list[tuple[float, float]]:
    """Union of [c - half_width, c + half_width], overlaps merged, sorted."""
    if len(centers) == 0:
        raise ValueError("at least one center required")
    spans = sorted((float(c) - half_width, float(c) + half_width) for c in centers)
    out = [spans[0]]
    for lo, hi in spans[1:]:
        if lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def log_cosh(x):
    """log(cosh(x)) without overflow: |x| + log1p(exp(-2|x|)) - log 2."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = ax + np.log1p(np.exp(-2.0 * ax)) - np.log(2.0)
    return float(out) if out.ndim == 0 else out


def logistic(x):
    """1 / (1 + exp(-x)), evaluated without overflow on either tail."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if out.ndim == 0 else out


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrandError("integrand returned non-finite values")


def _gk_panels(f, lows: np.ndarray, highs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Kronrod value and |K - G| error estimate for each panel."""
    mid = 0.5 * (lows + highs)
    half = 0.5 * (highs - lows)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = f(x.ravel()).reshape(x.shape)
    _check_finite(y)
    vals_k = half * (y @ _WEIGHTS_K)
    vals_g = half * (y @ _WEIGHTS_G)
    return vals_k, np.abs(vals_k - vals_g)


def _integrate_1d(
    f: Callable, centers: Sequence[float], cfg: QuadratureConfig
) -> tuple[float, float, int]:
    """Adaptive panel subdivision; returns (value, error estimate, nodes used)."""
    panels = merged_intervals(centers, cfg.truncation_sigmas)
    lows = np.array([p[0] for p in panels])
    highs = np.array([p[1] for p in panels])
    vals, errs = _gk_panels(f, lows, highs)
    nodes = 15 * len(panels)

    # heap of (-error, lo, hi, value); worst panel splits first
    heap = [(-e, lo, hi, v) for e, lo, hi, v in zip(errs, lows, highs, vals)]
    heapq.heapify(heap)
    total = float(vals.sum())
    total_err = float(errs.sum())

    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if nodes + 30 > cfg.max_nodes_1d:
            raise ConvergenceError(
                f"1-D quadrature stalled at error {total_err:.3e} "
                f"with {nodes} nodes (budget {cfg.max_nodes_1d})"
            )
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        sub_vals, sub_errs = _gk_panels(f, np.array([lo, mid]), np.array([mid, hi]))
        nodes += 30
        total += float(sub_vals.sum()) - val
        total_err += float(sub_errs.sum()) + neg_err
        heapq.heappush(heap, (-sub_errs[0], lo, mid, sub_vals[0]))
        heapq.heappush(heap, (-sub_errs[1], mid, hi, sub_vals[1]))

    return total, total_err, nodes


def integrate_1d(f: Callable, centers: Sequence[float], cfg: QuadratureConfig | None = None) -> float:
    """Integrate f over the union of truncation windows around centers."""
    value, _, _ = _integrate_1d(f, centers, cfg or DEFAULT_CONFIG)
    return value


@lru_cache(maxsize=64)
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _axis_nodes(
    panels: list[tuple[float, float]], n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated mapped Gauss-Legendre nodes/weights, n per panel."""
    xs, ws = [], []
    ref_x, ref_w = _legendre_rule(n)
    for lo, hi in panels:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        xs.append(mid + half * ref_x)
        ws.append(half * ref_w)
    return np.concatenate(xs), np.concatenate(ws)


def _tensor_eval(f, panels_x, panels_y, n: int) -> float:
    x, wx = _axis_nodes(panels_x, n)
    y, wy = _axis_nodes(panels_y, n)
    vals = f(x[:, None], y[None, :])
    _check_finite(vals)
    return float(wx @ vals @ wy)


def _integrate_2d(
    f: Callable,
    centers_x: Sequence[float],
    centers_y: Sequence[float],
    cfg: QuadratureConfig,
) -> tuple[float, float]:
    """Tensor-product rule with node doubling; returns (value, error estimate)."""
    panels_x = merged_intervals(centers_x, cfg.truncation_sigmas)
    panels_y = merged_intervals(centers_y, cfg.truncation_sigmas)
    n = cfg.nodes_2d_per_axis
    ladder = [max(25, n // 2), n, 2 * n + 1, 4 * n + 3]
    prev = _tensor_eval(f, panels_x, panels_y, ladder[0])
    for level in ladder[1:]:
        cur = _tensor_eval(f, panels_x, panels_y, level)
        resid = abs(cur - prev)
        if resid <= max(cfg.abs_tol, cfg.rel_tol * abs(cur)):
            return cur, resid
        prev = cur
    raise ConvergenceError(
        f"2-D quadrature stalled at error {resid:.3e} with {ladder[-1]} nodes per axis"
    )


def integrate_2d(
    f: Callable,
    centers_x: Sequence[float],
    centers_y: Sequence[float],
    cfg: QuadratureConfig | None = None,
) -> float:
    """Integrate f(x, y) over the product of truncated axis domains."""
    value, _ = _integrate_2d(f, centers_x, centers_y, cfg or DEFAULT_CONFIG)
    return value

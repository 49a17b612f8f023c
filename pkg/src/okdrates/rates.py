"""Exact and asymptotic key rates for the four eavesdropper scenarios.

All quantities are in bits per raw key bit.  The sender's bit enters as a
balanced binary variable; Bob's standardized record is unit-variance
Gaussian at mean +-delta_b, Eve's at +-delta_e (intensity detection) or
+-delta_e_coh (coherent detection).  The distillable rate against each
eavesdropper is

    K = max(H(B|E) - H(B|A), 0) = max(I(B;A) - I(B;E), 0)

with the Holevo scenario replacing I(B;E) by the Holevo bound chi on
Eve's retained quantum states.  Strong-eavesdropping asymptotics all take
the form  const * log2(e) / (2 advantage); the three constants are the
maxima of per-scenario depth brackets exposed below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    DomainError,
    ModulationScheme,
    Scenario,
    coherent_mixture_entropy,
    helstrom_error_probability,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    _integrate_1d,
    _integrate_2d,
    log_cosh,
    logistic,
)

__all__ = [
    "RateResult",
    "LOG2E",
    "HALF_LOG2_2PIE",
    "HELSTROM_ASYMPTOTIC_CONSTANT",
    "HELSTROM_ASYMPTOTIC_DEPTH",
    "h_b_given_a",
    "h_b",
    "h_b_given_e_dd",
    "h_b_given_e_helstrom",
    "mutual_info_ab",
    "holevo_chi",
    "key_rate_dd",
    "key_rate_coherent",
    "key_rate_helstrom",
    "key_rate_holevo",
    "dd_asymptotic_bracket",
    "helstrom_asymptotic_bracket",
    "holevo_asymptotic_bracket",
    "gamma_constant",
    "gamma_optimum",
    "chi_constant",
    "chi_optimum",
    "key_rate_dd_asymptotic",
    "key_rate_helstrom_asymptotic",
    "key_rate_holevo_asymptotic",
    "bob_marginal_density",
    "dd_joint_density",
    "helstrom_mixture_density",
]

LOG2E = math.log2(math.e)
HALF_LOG2_2PIE = 0.5 * math.log2(2.0 * math.pi * math.e)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# The optimal Helstrom-limited depth bracket delta^2 exp(-delta^2) peaks
# at depth 1 with value 1/e; both are exact.
HELSTROM_ASYMPTOTIC_CONSTANT = math.exp(-1.0)
HELSTROM_ASYMPTOTIC_DEPTH = 1.0


def _validated(name: str, value: float, nonnegative: bool = True) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if nonnegative and value < 0.0:
        raise DomainError(f"{name} must be nonnegative, got {value}")
    return value


def _validated_advantage(advantage: float) -> float:
    advantage = float(advantage)
    if not math.isfinite(advantage) or advantage <= 0.0:
        raise DomainError(f"advantage must be positive and finite, got {advantage}")
    return advantage


@dataclass(frozen=True)
class RateResult:
    """One evaluated operating point.

    delta_e_coh is None for scenarios where no coherent-measurement depth
    is in play (direct detection, Holevo).  asymptotic_estimate is the
    scenario's optimized strong-eavesdropping rate at the same advantage,
    and quadrature_residual the largest error estimate among the
    integrals behind the exact numbers.
    """

    scenario: Scenario
    advantage: float
    delta_b: float
    delta_e: float
    delta_e_coh: float | None
    i_ab: float
    leak: float
    key_rate: float
    asymptotic_estimate: float
    quadrature_residual: float

    def to_dict(self) -> dict:
        d = {
            "scenario": self.scenario.value,
            "advantage": self.advantage,
            "delta_b": self.delta_b,
            "delta_e": self.delta_e,
            "delta_e_coh": self.delta_e_coh,
            "i_ab": self.i_ab,
            "leak": self.leak,
            "key_rate": self.key_rate,
            "asymptotic_estimate": self.asymptotic_estimate,
            "quadrature_residual": self.quadrature_residual,
        }
        return d


# ---------------------------------------------------------------------------
# densities

def bob_marginal_density(delta_b: float):
    """Balanced two-Gaussian mixture density of Bob's record."""
    delta_b = abs(float(delta_b))

    def density(y):
        return (
            np.exp(-0.5 * (y + delta_b) ** 2) + np.exp(-0.5 * (y - delta_b) ** 2)
        ) / math.sqrt(8.0 * math.pi)

    return density


def dd_joint_density(delta_b: float, delta_e: float):
    """Joint density of (Bob, Eve) intensity records, bit marginalized out."""
    delta_b = abs(float(delta_b))
    delta_e = abs(float(delta_e))

    def density(y_b, y_e):
        return (
            np.exp(-0.5 * ((y_b + delta_b) ** 2 + (y_e + delta_e) ** 2))
            + np.exp(-0.5 * ((y_b - delta_b) ** 2 + (y_e - delta_e) ** 2))
        ) / (4.0 * math.pi)

    return density


def helstrom_mixture_density(delta_b: float, p_err: float):
    """Bob's density conditioned on Eve's discrimination outcome 0."""
    delta_b = abs(float(delta_b))
    if not 0.0 <= p_err <= 0.5:
        raise DomainError(f"p_err must lie in [0, 1/2], got {p_err}")

    def density(y):
        return (
            (1.0 - p_err) * np.exp(-0.5 * (y + delta_b) ** 2)
            + p_err * np.exp(-0.5 * (y - delta_b) ** 2)
        ) / math.sqrt(2.0 * math.pi)

    return density


# ---------------------------------------------------------------------------
# entropies

def h_b_given_a() -> float:
    """Differential entropy of Bob's record given the sent bit: (1/2) log2(2 pi e)."""
    return HALF_LOG2_2PIE


def _h_b(delta_b: float, cfg: QuadratureConfig) -> tuple[float, float]:
    if delta_b == 0.0:
        return HALF_LOG2_2PIE, 0.0

    def integrand(y):
        lnq = (
            np.logaddexp(-0.5 * (y + delta_b) ** 2, -0.5 * (y - delta_b) ** 2)
            - _LN_SQRT_2PI
            - math.log(2.0)
        )
        return -np.exp(lnq) * lnq * LOG2E

    val, resid, _ = _integrate_1d(integrand, (-delta_b, delta_b), cfg)
    return val, resid


def h_b(delta_b: float, cfg: QuadratureConfig | None = None) -> float:
    """Differential entropy of Bob's unconditioned record, bits."""
    delta_b = abs(_validated("delta_b", float(delta_b), nonnegative=False))
    return _h_b(delta_b, cfg or DEFAULT_CONFIG)[0]


def _h_b_given_e_dd(
    delta_b: float, delta_e: float, cfg: QuadratureConfig
) -> tuple[float, float]:
    if delta_b == 0.0:
        # Eve's record is independent of Bob's; conditioning changes nothing
        return HALF_LOG2_2PIE, 0.0
    joint = dd_joint_density(delta_b, delta_e)

    def integrand(y_b, y_e):
        ref = delta_e * y_e
        g = (log_cosh(ref + delta_b * y_b) - log_cosh(ref)) * LOG2E
        return joint(y_b, y_e) * g

    val, resid = _integrate_2d(
        integrand, (-delta_b, delta_b), (-delta_e, delta_e), cfg
    )
    return HALF_LOG2_2PIE + delta_b * delta_b * LOG2E - val, resid


def h_b_given_e_dd(
    delta_b: float, delta_e: float, cfg: QuadratureConfig | None = None
) -> float:
    """Bob's entropy conditioned on Eve's intensity record, bits.

    Lies between the conditioning floor (1/2) log2(2 pi e) reached as Eve's
    record becomes decisive and the unconditioned ceiling reached as it
    becomes useless.
    """
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    delta_e = abs(_validated("delta_e", delta_e, nonnegative=False))
    return _h_b_given_e_dd(delta_b, delta_e, cfg or DEFAULT_CONFIG)[0]


def _h_b_given_e_helstrom(
    delta_b: float, delta_e_coh: float, cfg: QuadratureConfig
) -> tuple[float, float]:
    p_err = helstrom_error_probability(delta_e_coh)
    if delta_b == 0.0 or p_err == 0.0:
        # either nothing to condition on, or Eve resolves the bit exactly
        return HALF_LOG2_2PIE, 0.0
    lw_match = math.log1p(-p_err)
    lw_other = math.log(p_err)

    def integrand(y):
        lnq = (
            np.logaddexp(
                lw_match - 0.5 * (y + delta_b) ** 2,
                lw_other - 0.5 * (y - delta_b) ** 2,
            )
            - _LN_SQRT_2PI
        )
        return -np.exp(lnq) * lnq * LOG2E

    val, resid, _ = _integrate_1d(integrand, (-delta_b, delta_b), cfg)
    return val, resid


def h_b_given_e_helstrom(
    delta_b: float, delta_e_coh: float, cfg: QuadratureConfig | None = None
) -> float:
    """Bob's entropy given Eve's minimum-error discrimination outcome, bits.

    By symmetry of the two outcomes this is the entropy of the outcome-0
    mixture: weights (1 - p_err, p_err) on components at -+delta_b.
    """
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    delta_e_coh = abs(_validated("delta_e_coh", delta_e_coh, nonnegative=False))
    return _h_b_given_e_helstrom(delta_b, delta_e_coh, cfg or DEFAULT_CONFIG)[0]


def _mutual_info_ab(delta: float, cfg: QuadratureConfig) -> tuple[float, float]:
    if delta == 0.0:
        return 0.0, 0.0

    def integrand(t):
        w = np.exp(-0.5 * (t - delta) ** 2) / math.sqrt(2.0 * math.pi)
        return w * log_cosh(delta * t) * LOG2E

    val, resid, _ = _integrate_1d(integrand, (delta,), cfg)
    return delta * delta * LOG2E - val, resid


def mutual_info_ab(delta: float, cfg: QuadratureConfig | None = None) -> float:
    """Information in bits a unit-variance Gaussian record at depth delta
    carries about the balanced sent bit.  Ranges over [0, 1]."""
    delta = abs(_validated("delta", delta, nonnegative=False))
    return _mutual_info_ab(delta, cfg or DEFAULT_CONFIG)[0]


def _holevo_chi(
    delta_b: float, delta_e: float, cfg: QuadratureConfig
) -> tuple[float, float]:
    overlap = math.exp(-delta_e * delta_e)
    if delta_b == 0.0:
        # Bob's record says nothing about the bit, so conditioning on it
        # leaves Eve's state entropy unchanged
        return 0.0, 0.0
    s_prior = coherent_mixture_entropy(0.5, overlap)

    def integrand(y):
        lnp = (
            np.logaddexp(-0.5 * (y + delta_b) ** 2, -0.5 * (y - delta_b) ** 2)
            - _LN_SQRT_2PI
            - math.log(2.0)
        )
        weight_given_y = logistic(-2.0 * delta_b * np.asarray(y))
        return np.exp(lnp) * coherent_mixture_entropy(weight_given_y, overlap)

    val, resid, _ = _integrate_1d(integrand, (-delta_b, delta_b), cfg)
    return s_prior - val, resid


def holevo_chi(
    delta_b: float, delta_e: float, cfg: QuadratureConfig | None = None
) -> float:
    """Holevo bound in bits on what Eve's retained states reveal about
    Bob's record.  Dominates I(B;E) for every measurement Eve can make."""
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    delta_e = abs(_validated("delta_e", delta_e, nonnegative=False))
    return _holevo_chi(delta_b, delta_e, cfg or DEFAULT_CONFIG)[0]


# ---------------------------------------------------------------------------
# exact key rates

def key_rate_dd(
    delta_b: float, advantage: float, cfg: QuadratureConfig | None = None
) -> RateResult:
    """Key rate against an intensity-detecting eavesdropper."""
    cfg = cfg or DEFAULT_CONFIG
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    advantage = _validated_advantage(advantage)
    delta_e = math.sqrt(advantage) * delta_b
    hbe, r1 = _h_b_given_e_dd(delta_b, delta_e, cfg)
    hb, r2 = _h_b(delta_b, cfg)
    iab, r3 = _mutual_info_ab(delta_b, cfg)
    return RateResult(
        scenario=Scenario.DIRECT_DETECTION,
        advantage=advantage,
        delta_b=delta_b,
        delta_e=delta_e,
        delta_e_coh=None,
        i_ab=iab,
        leak=hb - hbe,
        key_rate=max(hbe - HALF_LOG2_2PIE, 0.0),
        asymptotic_estimate=key_rate_dd_asymptotic(advantage, cfg=cfg),
        quadrature_residual=max(r1, r2, r3),
    )


def key_rate_coherent(
    delta_b: float,
    advantage: float,
    modulation: ModulationScheme | None = None,
    cfg: QuadratureConfig | None = None,
) -> RateResult:
    """Key rate against a coherent-measurement (homodyne) eavesdropper.

    Identical pipeline to direct detection with Eve's depth promoted to
    the coherent one; without a modulation scheme the two depths are
    taken equal (the weak-modulation limit).
    """
    cfg = cfg or DEFAULT_CONFIG
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    advantage = _validated_advantage(advantage)
    ratio = modulation.coherent_depth_ratio() if modulation is not None else 1.0
    delta_e = math.sqrt(advantage) * delta_b
    delta_e_coh = ratio * delta_e
    hbe, r1 = _h_b_given_e_dd(delta_b, delta_e_coh, cfg)
    hb, r2 = _h_b(delta_b, cfg)
    iab, r3 = _mutual_info_ab(delta_b, cfg)
    return RateResult(
        scenario=Scenario.COHERENT,
        advantage=advantage,
        delta_b=delta_b,
        delta_e=delta_e,
        delta_e_coh=delta_e_coh,
        i_ab=iab,
        leak=hb - hbe,
        key_rate=max(hbe - HALF_LOG2_2PIE, 0.0),
        asymptotic_estimate=key_rate_dd_asymptotic(advantage, cfg=cfg),
        quadrature_residual=max(r1, r2, r3),
    )


def key_rate_helstrom(
    delta_e_coh: float,
    advantage: float,
    modulation: ModulationScheme | None = None,
    cfg: QuadratureConfig | None = None,
) -> RateResult:
    """Key rate against minimum-error state discrimination, parameterized
    by Eve's coherent depth."""
    cfg = cfg or DEFAULT_CONFIG
    delta_e_coh = abs(_validated("delta_e_coh", delta_e_coh, nonnegative=False))
    advantage = _validated_advantage(advantage)
    ratio = modulation.coherent_depth_ratio() if modulation is not None else 1.0
    delta_e = delta_e_coh / ratio
    delta_b = delta_e / math.sqrt(advantage)
    hbe, r1 = _h_b_given_e_helstrom(delta_b, delta_e_coh, cfg)
    hb, r2 = _h_b(delta_b, cfg)
    iab, r3 = _mutual_info_ab(delta_b, cfg)
    return RateResult(
        scenario=Scenario.HELSTROM,
        advantage=advantage,
        delta_b=delta_b,
        delta_e=delta_e,
        delta_e_coh=delta_e_coh,
        i_ab=iab,
        leak=hb - hbe,
        key_rate=max(hbe - HALF_LOG2_2PIE, 0.0),
        asymptotic_estimate=HELSTROM_ASYMPTOTIC_CONSTANT * LOG2E / (2.0 * advantage),
        quadrature_residual=max(r1, r2, r3),
    )


def key_rate_holevo(
    delta_b: float, advantage: float, cfg: QuadratureConfig | None = None
) -> RateResult:
    """Key rate against the collective-measurement (Holevo) bound."""
    cfg = cfg or DEFAULT_CONFIG
    delta_b = abs(_validated("delta_b", delta_b, nonnegative=False))
    advantage = _validated_advantage(advantage)
    delta_e = math.sqrt(advantage) * delta_b
    iab, r1 = _mutual_info_ab(delta_b, cfg)
    chi, r2 = _holevo_chi(delta_b, delta_e, cfg)
    return RateResult(
        scenario=Scenario.HOLEVO,
        advantage=advantage,
        delta_b=delta_b,
        delta_e=delta_e,
        delta_e_coh=None,
        i_ab=iab,
        leak=chi,
        key_rate=max(iab - chi, 0.0),
        asymptotic_estimate=key_rate_holevo_asymptotic(advantage),
        quadrature_residual=max(r1, r2),
    )


# ---------------------------------------------------------------------------
# strong-eavesdropping brackets and constants

def _dd_bracket(delta: float, cfg: QuadratureConfig) -> tuple[float, float]:
    if delta == 0.0:
        return 0.0, 0.0

    def integrand(t):
        w = np.exp(-0.5 * (t - delta) ** 2) / math.sqrt(2.0 * math.pi)
        th = np.tanh(delta * t)
        return w * (2.0 * th + (1.0 - th * th))

    val, resid, _ = _integrate_1d(integrand, (delta,), cfg)
    return delta * delta * (2.0 - val), resid


def dd_asymptotic_bracket(delta: float, cfg: QuadratureConfig | None = None) -> float:
    """Depth bracket whose maximum is the direct-detection constant:

        delta^2 (2 - E_{t ~ N(delta, 1)}[2 tanh(delta t) + sech(delta t)^2])
    """
    delta = abs(_validated("delta", delta, nonnegative=False))
    return _dd_bracket(delta, cfg or DEFAULT_CONFIG)[0]


def helstrom_asymptotic_bracket(delta: float) -> float:
    """delta^2 exp(-delta^2); maximum 1/e at depth 1."""
    delta = abs(_validated("delta", delta, nonnegative=False))
    return delta * delta * math.exp(-delta * delta)


def holevo_asymptotic_bracket(delta: float) -> float:
    """Depth bracket whose maximum is the Holevo constant:

        delta^2 (1 - 2 acoth(exp(delta^2 / 2)) sinh(delta^2 / 2))

    The removable limit at zero depth evaluates exactly to 0; expm1/log1p
    keep the acoth accurate at both ends.
    """
    delta = abs(_validated("delta", delta, nonnegative=False))
    if delta == 0.0:
        return 0.0
    u = 0.5 * delta * delta
    acoth = 0.5 * (math.log1p(math.exp(-u)) - math.log(-math.expm1(-u)))
    return delta * delta * (1.0 - 2.0 * acoth * math.sinh(u))


_CONSTANT_BRACKET = (0.05, 8.0)


@lru_cache(maxsize=8)
def _gamma_cached(cfg: QuadratureConfig):
    from .optimize import maximize_scalar  # deferred; optimize imports this module

    return maximize_scalar(
        lambda d: dd_asymptotic_bracket(d, cfg), *_CONSTANT_BRACKET, tol=1e-8
    )


@lru_cache(maxsize=1)
def _chi_cached():
    from .optimize import maximize_scalar

    return maximize_scalar(holevo_asymptotic_bracket, *_CONSTANT_BRACKET, tol=1e-8)


def gamma_optimum(cfg: QuadratureConfig | None = None):
    """Maximizer of the direct-detection bracket: (argmax, value, flat flag)."""
    return _gamma_cached(cfg or DEFAULT_CONFIG)


def gamma_constant(cfg: QuadratureConfig | None = None) -> float:
    """Direct-detection strong-eavesdropping constant, about 0.4795."""
    return gamma_optimum(cfg).value


def chi_optimum():
    """Maximizer of the Holevo bracket: (argmax, value, flat flag)."""
    return _chi_cached()


def chi_constant() -> float:
    """Holevo strong-eavesdropping constant, about 0.2683."""
    return chi_optimum().value


def key_rate_dd_asymptotic(
    advantage: float, cfg: QuadratureConfig | None = None
) -> float:
    """Optimized direct-detection rate in the strong-eavesdropping limit."""
    advantage = _validated_advantage(advantage)
    return gamma_constant(cfg) * LOG2E / (2.0 * advantage)


def key_rate_helstrom_asymptotic(delta_e_coh: float, advantage: float) -> float:
    """Depth-resolved Helstrom-limited asymptotic rate."""
    advantage = _validated_advantage(advantage)
    return helstrom_asymptotic_bracket(delta_e_coh) * LOG2E / (2.0 * advantage)


def key_rate_holevo_asymptotic(advantage: float) -> float:
    """Optimized Holevo-limited rate in the strong-eavesdropping limit."""
    advantage = _validated_advantage(advantage)
    return chi_constant() * LOG2E / (2.0 * advantage)

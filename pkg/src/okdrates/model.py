"""Physical parameter types for binary intensity-keyed optical links.

The sender keys a pulse between two energies n0 < n1.  Both the intended
receiver and the eavesdropper see Gaussian detection statistics, so each
party's view of the key bit reduces to a single number: the modulation
depth, i.e. half the mean separation of the two intensity records in units
of that party's noise standard deviation.  Everything downstream (exact
rates, asymptotics, simulation) consumes these depths plus the
eavesdropper advantage; this module maps raw link parameters onto them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "DomainError",
    "Scenario",
    "ChannelParams",
    "ModulationScheme",
    "Depths",
    "eavesdropper_advantage",
    "excess_noise_advantage",
    "modulation_depths",
    "helstrom_error_probability",
    "coherent_mixture_entropy",
    "binary_entropy",
]

# Relative slack for internal consistency checks between redundant fields.
_CONSISTENCY_RTOL = 1e-9


class DomainError(ValueError):
    """A parameter lies outside its physical domain."""


class Scenario(Enum):
    """Eavesdropper measurement capability."""

    DIRECT_DETECTION = "dd"
    COHERENT = "coherent"
    HELSTROM = "helstrom"
    HOLEVO = "holevo"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ChannelParams:
    """Link budget for one sender / receiver / eavesdropper triple.

    tau_b, tau_e   fractional transmissivities toward Bob and Eve, in (0, 1]
    sigma_b        Bob's total detection noise std dev (photon-number units)
    sigma_e        Eve's detection noise std dev
    n_bar          mean pulse energy at the sender (photons)
    sigma_b_excess_sq
                   Bob's excess noise variance beyond shot noise; only
                   meaningful when the instance was built in shot-noise
                   mode, kept for reporting
    """

    tau_b: float
    tau_e: float
    sigma_b: float
    sigma_e: float
    n_bar: float
    sigma_b_excess_sq: float = 0.0

    def __post_init__(self):
        for name in ("tau_b", "tau_e"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1], got {v}")
        for name in ("sigma_b", "sigma_e", "n_bar"):
            v = getattr(self, name)
            if not v > 0.0:
                raise DomainError(f"{name} must be positive, got {v}")
        if self.sigma_b_excess_sq < 0.0:
            raise DomainError(
                f"sigma_b_excess_sq must be nonnegative, got {self.sigma_b_excess_sq}"
            )

    @classmethod
    def shot_noise_limited(
        cls,
        tau_b: float,
        tau_e: float,
        n_bar: float,
        sigma_b_excess_sq: float = 0.0,
    ) -> "ChannelParams":
        """Build params with both detectors at the shot-noise floor.

        Eve's variance is tau_e * n_bar; Bob's is tau_b * n_bar plus any
        excess term.

        >>> ch = ChannelParams.shot_noise_limited(0.5, 0.25, 1e6)
        >>> round(eavesdropper_advantage(ch), 12)
        0.5
        """
        if not tau_b > 0 or not tau_e > 0 or not n_bar > 0:
            raise DomainError("tau_b, tau_e, n_bar must be positive")
        if sigma_b_excess_sq < 0:
            raise DomainError("sigma_b_excess_sq must be nonnegative")
        return cls(
            tau_b=tau_b,
            tau_e=tau_e,
            sigma_b=math.sqrt(tau_b * n_bar + sigma_b_excess_sq),
            sigma_e=math.sqrt(tau_e * n_bar),
            n_bar=n_bar,
            sigma_b_excess_sq=sigma_b_excess_sq,
        )


@dataclass(frozen=True)
class ModulationScheme:
    """The two pulse energies used to key a bit.

    n1 >= n0 > 0; equal energies are allowed and encode no modulation.
    """

    n0: float
    n1: float

    def __post_init__(self):
        if not self.n0 > 0.0:
            raise DomainError(f"n0 must be positive, got {self.n0}")
        if self.n1 < self.n0:
            raise DomainError(f"n1 must be >= n0, got n0={self.n0}, n1={self.n1}")

    @classmethod
    def from_mean_and_contrast(cls, n_bar: float, contrast: float) -> "ModulationScheme":
        """Build from a mean energy and the relative swing delta_n / n_bar."""
        if not n_bar > 0:
            raise DomainError("n_bar must be positive")
        if not 0.0 <= contrast < 2.0:
            raise DomainError(f"contrast must lie in [0, 2), got {contrast}")
        half = 0.5 * contrast * n_bar
        return cls(n0=n_bar - half, n1=n_bar + half)

    @property
    def n_bar(self) -> float:
        return 0.5 * (self.n0 + self.n1)

    @property
    def delta_n(self) -> float:
        return self.n1 - self.n0

    @property
    def contrast(self) -> float:
        return self.delta_n / self.n_bar

    def coherent_depth_ratio(self) -> float:
        """Ratio of the coherent-measurement depth to the intensity depth.

        Equals sqrt(2 (n0 + n1)) / (sqrt(n0) + sqrt(n1)) >= 1, approaching
        1 + contrast^2 / 32 for weak modulation.  Assumes the eavesdropper's
        intensity detector sits at the shot-noise floor.
        """
        return math.sqrt(2.0 * (self.n0 + self.n1)) / (
            math.sqrt(self.n0) + math.sqrt(self.n1)
        )

    def macroscopic_regime_ok(self, ch: ChannelParams) -> bool:
        """Advisory check that the weak-modulation, bright-pulse limit holds.

        Flags contrast above 0.2 or fewer than about 100 detected photons
        for either party.  Not enforced anywhere; callers may warn.
        """
        if self.contrast > 0.2:
            return False
        return min(ch.tau_b, ch.tau_e) * self.n_bar >= 100.0


@dataclass(frozen=True)
class Depths:
    """Standardized modulation depths for one operating point.

    delta_b      Bob's depth
    delta_e      Eve's intensity-detection depth
    delta_e_coh  Eve's depth under a shot-noise-limited coherent
                 (field-quadrature) measurement; never below delta_e
    advantage    (delta_e / delta_b)^2, Eve's SNR advantage
    """

    delta_b: float
    delta_e: float
    delta_e_coh: float
    advantage: float

    def __post_init__(self):
        for name in ("delta_b", "delta_e", "delta_e_coh"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be nonnegative")
        if not self.advantage > 0.0:
            raise DomainError(f"advantage must be positive, got {self.advantage}")
        expected_e = math.sqrt(self.advantage) * self.delta_b
        if abs(self.delta_e - expected_e) > _CONSISTENCY_RTOL * max(expected_e, 1.0):
            raise DomainError(
                f"delta_e={self.delta_e} inconsistent with "
                f"sqrt(advantage)*delta_b={expected_e}"
            )
        if self.delta_e_coh < self.delta_e * (1.0 - _CONSISTENCY_RTOL) - 1e-12:
            raise DomainError(
                "delta_e_coh below delta_e: coherent detection cannot be "
                "noisier than the shot-noise intensity record"
            )

    @classmethod
    def from_delta_b(
        cls, delta_b: float, advantage: float, coh_ratio: float = 1.0
    ) -> "Depths":
        """Depths at a given Bob depth and eavesdropper advantage."""
        if coh_ratio < 1.0 - _CONSISTENCY_RTOL:
            raise DomainError(f"coh_ratio must be >= 1, got {coh_ratio}")
        de = math.sqrt(advantage) * delta_b
        return cls(
            delta_b=delta_b,
            delta_e=de,
            delta_e_coh=coh_ratio * de,
            advantage=advantage,
        )


def eavesdropper_advantage(ch: ChannelParams) -> float:
    """Squared ratio of Eve's SNR to Bob's: ((tau_e/sigma_e)/(tau_b/sigma_b))^2."""
    return ((ch.tau_e / ch.sigma_e) / (ch.tau_b / ch.sigma_b)) ** 2


def excess_noise_advantage(
    tau_b: float, tau_e: float, n_bar: float, sigma_b_excess_sq: float = 0.0
) -> float:
    """Advantage in shot-noise mode: (tau_e/tau_b) (1 + excess/(tau_b n_bar)).

    Algebraically identical to eavesdropper_advantage on params built via
    ChannelParams.shot_noise_limited with the same arguments.
    """
    if not tau_b > 0 or not tau_e > 0 or not n_bar > 0:
        raise DomainError("tau_b, tau_e, n_bar must be positive")
    if sigma_b_excess_sq < 0:
        raise DomainError("sigma_b_excess_sq must be nonnegative")
    return (tau_e / tau_b) * (1.0 + sigma_b_excess_sq / (tau_b * n_bar))


def modulation_depths(ch: ChannelParams, mod: ModulationScheme) -> Depths:
    """Map raw link parameters onto standardized depths.

    delta = tau * delta_n / (2 sigma) for each intensity detector; the
    coherent depth is sqrt(tau_e) (sqrt(n1) - sqrt(n0)).
    """
    delta_b = ch.tau_b * mod.delta_n / (2.0 * ch.sigma_b)
    delta_e = ch.tau_e * mod.delta_n / (2.0 * ch.sigma_e)
    delta_e_coh = math.sqrt(ch.tau_e) * (math.sqrt(mod.n1) - math.sqrt(mod.n0))
    return Depths(
        delta_b=delta_b,
        delta_e=delta_e,
        delta_e_coh=delta_e_coh,
        advantage=eavesdropper_advantage(ch),
    )


def helstrom_error_probability(delta_e_coh: float) -> float:
    """Minimum error probability for discriminating the two pulse states.

    P_err = (1 - sqrt(1 - exp(-delta^2))) / 2, monotonically decreasing
    from 1/2 at zero depth toward 0.

    >>> helstrom_error_probability(0.0)
    0.5
    """
    if delta_e_coh < 0.0:
        raise DomainError(f"depth must be nonnegative, got {delta_e_coh}")
    # -expm1 keeps precision when the exponent is tiny
    return 0.5 * (1.0 - math.sqrt(-math.expm1(-delta_e_coh * delta_e_coh)))


def coherent_mixture_entropy(p, q):
    """Von Neumann entropy in bits of p|A><A| + (1-p)|B><B| with |<A|B>|^2 = q.

    The nonzero eigenvalues are (1 +- sqrt(1 - 4p(1-p)(1-q))) / 2, so the
    entropy is the binary entropy of the smaller one.  Accepts scalars or
    arrays; symmetric under p <-> 1-p, zero for pure states (p in {0, 1})
    and for indistinguishable states (q = 1).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("mixture weight p must lie in [0, 1]")
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise DomainError("overlap q must lie in [0, 1]")
    radicand = 1.0 - 4.0 * p * (1.0 - p) * (1.0 - q)
    # exact radicand is >= q >= 0; clamp rounding noise only
    radicand = np.where(radicand < 0.0, np.where(radicand > -1e-12, 0.0, radicand), radicand)
    if np.any(radicand < 0.0):
        raise DomainError("mixture eigenvalue radicand went negative beyond rounding")
    lam = 0.5 * (1.0 - np.sqrt(radicand))
    return binary_entropy(lam)


def binary_entropy(x):
    """-x log2 x - (1-x) log2 (1-x), with the 0 log 0 = 0 convention."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("binary entropy argument must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x)
    out = np.where((x == 0.0) | (x == 1.0), 0.0, t)
    return float(out) if out.ndim == 0 else out

"""Monte Carlo cross-validation of the analytic rates.

Rounds are generated in fixed-size chunks, one Philox counter-based
substream per (seed, chunk index), so the sample stream is fully
determined by the config and the order in which chunks are accumulated
cannot change any estimate.  Mutual informations are plug-in estimates
over equal-width histograms with the Miller-Madow bias correction;
uncertainties come from a multinomial bootstrap of the joint histogram,
which is equivalent to bootstrapping the rounds themselves because the
estimator sees the data only through that histogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .model import Depths, DomainError, Scenario, helstrom_error_probability

__all__ = [
    "SimConfig",
    "RoundBatch",
    "simulate",
    "collect",
    "dump_rounds",
    "estimate_mi",
    "estimate_key_rate_mc",
    "mi_tolerance",
]

_MIN_SAMPLES = 10_000
_LN2 = math.log(2.0)
# bootstrap substream tags; far above any chunk index
_TAG_BOOT_AB = (1 << 62) + 1
_TAG_BOOT_BE = (1 << 62) + 2

# agreement floor for verdicts against analytic values, bits
MC_ABS_FLOOR = 2e-3


@dataclass(frozen=True)
class SimConfig:
    """One reproducible simulation run.

    The sample stream is a pure function of (seed, chunk_rounds, rounds,
    scenario, depths); chunk_rounds only sets the substream layout and
    stays at its default in normal use.
    """

    rounds: int
    seed: int
    scenario: Scenario
    depths: Depths
    bins: int = 256
    bootstrap_resamples: int = 20
    chunk_rounds: int = 1 << 20

    def __post_init__(self):
        if self.rounds < _MIN_SAMPLES:
            raise DomainError(f"rounds must be >= {_MIN_SAMPLES}, got {self.rounds}")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        if self.scenario is Scenario.HOLEVO:
            raise DomainError(
                "the Holevo scenario keeps Eve quantum; there is no classical "
                "record to simulate"
            )
        if self.bins < 16:
            raise DomainError(f"bins must be >= 16, got {self.bins}")
        if self.bootstrap_resamples < 2:
            raise DomainError("bootstrap_resamples must be >= 2")
        if self.chunk_rounds < 1:
            raise DomainError("chunk_rounds must be positive")

    @property
    def eve_depth(self) -> float:
        """Depth of Eve's simulated record (coherent depth where she
        measures coherently)."""
        if self.scenario is Scenario.DIRECT_DETECTION:
            return self.depths.delta_e
        return self.depths.delta_e_coh

    @property
    def histogram_halfwidth(self) -> float:
        """Bins span +-(largest continuous depth + 6)."""
        if self.scenario is Scenario.HELSTROM:
            return self.depths.delta_b + 6.0
        return max(self.depths.delta_b, self.eve_depth) + 6.0


@dataclass(frozen=True)
class RoundBatch:
    """A contiguous block of rounds; one array row per round.

    y_e is present for continuous-detection scenarios, m_e for the
    discrimination scenario; the other is None.
    """

    a: np.ndarray
    y_b: np.ndarray
    y_e: np.ndarray | None = None
    m_e: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.a)


def simulate(cfg: SimConfig) -> Iterator[RoundBatch]:
    """Yield the configured round stream chunk by chunk.

    Per chunk the draws happen in a fixed order (bit, Bob noise, Eve
    noise or flip variate) so the stream never depends on how it is
    consumed.
    """
    db = cfg.depths.delta_b
    helstrom = cfg.scenario is Scenario.HELSTROM
    if helstrom:
        p_err = helstrom_error_probability(cfg.depths.delta_e_coh)
    else:
        de = cfg.eve_depth
    produced = 0
    chunk_index = 0
    while produced < cfg.rounds:
        n = min(cfg.chunk_rounds, cfg.rounds - produced)
        rng = np.random.Generator(np.random.Philox(key=[cfg.seed, chunk_index]))
        a = rng.integers(0, 2, size=n, dtype=np.uint8)
        sign = 2.0 * a - 1.0
        y_b = rng.standard_normal(n) + sign * db
        if helstrom:
            flip = rng.random(n) < p_err
            yield RoundBatch(a=a, y_b=y_b, m_e=(a ^ flip).astype(np.uint8))
        else:
            y_e = rng.standard_normal(n) + sign * de
            yield RoundBatch(a=a, y_b=y_b, y_e=y_e)
        produced += n
        chunk_index += 1


def collect(cfg: SimConfig) -> RoundBatch:
    """Materialize the whole stream as one batch (small runs only)."""
    batches = list(simulate(cfg))
    cat = lambda parts: None if parts[0] is None else np.concatenate(parts)
    return RoundBatch(
        a=np.concatenate([b.a for b in batches]),
        y_b=np.concatenate([b.y_b for b in batches]),
        y_e=cat([b.y_e for b in batches]),
        m_e=cat([b.m_e for b in batches]),
    )


def dump_rounds(cfg: SimConfig, sink: str | BinaryIO) -> int:
    """Write the raw round stream as packed little-endian records.

    Continuous scenarios: (bit u8, y_b f64, y_e f64), 17 bytes per round.
    Discrimination: (bit u8, y_b f64, outcome u8), 10 bytes.  Returns the
    byte count written.
    """
    helstrom = cfg.scenario is Scenario.HELSTROM
    if helstrom:
        dtype = np.dtype([("a", "<u1"), ("y_b", "<f8"), ("m_e", "<u1")])
    else:
        dtype = np.dtype([("a", "<u1"), ("y_b", "<f8"), ("y_e", "<f8")])
    own = isinstance(sink, str)
    fh = open(sink, "wb") if own else sink
    written = 0
    try:
        for batch in simulate(cfg):
            rec = np.empty(len(batch), dtype=dtype)
            rec["a"] = batch.a
            rec["y_b"] = batch.y_b
            if helstrom:
                rec["m_e"] = batch.m_e
            else:
                rec["y_e"] = batch.y_e
            payload = rec.tobytes()
            fh.write(payload)
            written += len(payload)
    finally:
        if own:
            fh.close()
    return written


def _plug_entropy_nats(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _mm_mi_bits(counts: np.ndarray) -> float:
    """Plug-in MI of a 2-D contingency table, Miller-Madow corrected."""
    n = counts.sum()
    pj = counts / n
    px = pj.sum(axis=1)
    py = pj.sum(axis=0)
    mi_nats = _plug_entropy_nats(px) + _plug_entropy_nats(py) - _plug_entropy_nats(pj.ravel())
    occupied = np.count_nonzero(px) + np.count_nonzero(py) - np.count_nonzero(pj) - 1
    return (mi_nats + occupied / (2.0 * n)) / _LN2


def _bootstrap_se(counts: np.ndarray, resamples: int, seed: int, tag: int) -> float:
    n = int(counts.sum())
    pvals = counts.ravel() / counts.sum()
    pvals = pvals / pvals.sum()
    rng = np.random.Generator(np.random.Philox(key=[seed, tag]))
    values = np.empty(resamples)
    for i in range(resamples):
        resampled = rng.multinomial(n, pvals).reshape(counts.shape).astype(float)
        values[i] = _mm_mi_bits(resampled)
    return float(values.std(ddof=1))


def _bin_indices(y: np.ndarray, halfwidth: float, bins: int) -> tuple[np.ndarray, np.ndarray]:
    scale = bins / (2.0 * halfwidth)
    idx = np.floor((y + halfwidth) * scale).astype(np.int64)
    keep = (idx >= 0) & (idx < bins)
    return idx, keep


def _accumulate_counts(
    batches: Iterable[RoundBatch], which: str, halfwidth: float, bins: int
) -> np.ndarray:
    if isinstance(batches, RoundBatch):
        batches = (batches,)
    counts = None
    for batch in batches:
        ib, keep = _bin_indices(batch.y_b, halfwidth, bins)
        if which == "ab":
            rows, width = batch.a.astype(np.int64), bins
            flat = rows[keep] * bins + ib[keep]
            shape = (2, bins)
        elif which == "be":
            if batch.m_e is not None:
                rows, width = batch.m_e.astype(np.int64), bins
                flat = rows[keep] * bins + ib[keep]
                shape = (2, bins)
            else:
                ie, keep_e = _bin_indices(batch.y_e, halfwidth, bins)
                both = keep & keep_e
                flat = ib[both] * bins + ie[both]
                shape = (bins, bins)
        else:
            raise DomainError(f"which must be 'ab' or 'be', got {which!r}")
        add = np.bincount(flat, minlength=shape[0] * shape[1]).reshape(shape)
        counts = add if counts is None else counts + add
    if counts is None:
        raise DomainError("no batches supplied")
    return counts.astype(float)


def estimate_mi(
    samples: RoundBatch | Iterable[RoundBatch],
    which: str = "ab",
    bins: int = 256,
    *,
    halfwidth: float,
    bootstrap_resamples: int = 20,
    seed: int = 0,
) -> tuple[float, float]:
    """Binned MI estimate in bits with a bootstrap standard error.

    which = "ab" pairs the sent bit with Bob's record; "be" pairs Bob's
    record with Eve's (her discrimination outcome when present).
    Histogram bins are equal-width over [-halfwidth, halfwidth].
    """
    if halfwidth <= 0:
        raise DomainError("halfwidth must be positive")
    if bins < 16:
        raise DomainError(f"bins must be >= 16, got {bins}")
    counts = _accumulate_counts(samples, which, halfwidth, bins)
    n = counts.sum()
    if n < _MIN_SAMPLES:
        raise DomainError(f"need at least {_MIN_SAMPLES} in-range samples, got {int(n)}")
    tag = _TAG_BOOT_AB if which == "ab" else _TAG_BOOT_BE
    mi = _mm_mi_bits(counts)
    se = _bootstrap_se(counts, bootstrap_resamples, seed, tag)
    return mi, se


def estimate_key_rate_mc(cfg: SimConfig) -> tuple[float, float]:
    """Monte Carlo key rate max(I(B;A) - I(B;E), 0) with combined error.

    Both informations come from one pass over the same round stream; the
    bootstrap errors combine in quadrature.
    """
    halfwidth = cfg.histogram_halfwidth
    counts_ab = None
    counts_be = None
    for batch in simulate(cfg):
        add_ab = _accumulate_counts((batch,), "ab", halfwidth, cfg.bins)
        add_be = _accumulate_counts((batch,), "be", halfwidth, cfg.bins)
        counts_ab = add_ab if counts_ab is None else counts_ab + add_ab
        counts_be = add_be if counts_be is None else counts_be + add_be
    if counts_ab.sum() < _MIN_SAMPLES or counts_be.sum() < _MIN_SAMPLES:
        raise DomainError("too few in-range samples for estimation")
    mi_ab = _mm_mi_bits(counts_ab)
    mi_be = _mm_mi_bits(counts_be)
    se_ab = _bootstrap_se(counts_ab, cfg.bootstrap_resamples, cfg.seed, _TAG_BOOT_AB)
    se_be = _bootstrap_se(counts_be, cfg.bootstrap_resamples, cfg.seed, _TAG_BOOT_BE)
    rate = max(mi_ab - mi_be, 0.0)
    return rate, math.hypot(se_ab, se_be)


def mi_tolerance(std_error: float, floor: float = MC_ABS_FLOOR) -> float:
    """Agreement tolerance against an analytic value: max(3 se, floor)."""
    return max(3.0 * std_error, floor)

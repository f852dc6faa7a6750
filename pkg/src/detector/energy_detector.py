"""Sample-level Monte Carlo of the receiver's energy detector.

Each bit D is sent over N_s samples of

    y[i] = alpha_sr * x[i] + D * mu * alpha_st * alpha_tr * x[i] + n0[i] + n1[i]

with |alpha_sr| = |alpha_st| = sqrt(g) (the tag and receiver see the same
source gain), |alpha_tr| = sqrt(h) and ``tag_phase`` on the tag-to-receiver
hop. The receiver averages |y|^2 over the bit and compares it with the
midpoint of the two conditional means.

Besides the sampler, the module gives the exact law of the statistic for
the simulated model: with complex Gaussian ambient N * Z / m_D is
Gamma(N_s, 1); with constant-envelope ambient 2 * N_s * Z / sigma^2 is
noncentral chi-square with 2 * N_s degrees of freedom and noncentrality
2 * N_s * S_D / sigma^2.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from ..constants import (
    AMBIENT_CONSTANT,
    AMBIENT_GAUSSIAN,
    AMBIENT_MODELS,
    DEFAULT_CHUNK_SAMPLES,
    DEFAULT_DETECTOR_BITS,
    DEFAULT_DETECTOR_SEED,
    MIN_DETECTOR_BITS,
    STREAM_DETECTOR,
)
from ..exceptions import DetectorError
from ..model import SystemParams, ber
from ..random_streams import stream
from ..utils import setup_logging

logger = setup_logging(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    """One detector experiment.

    Attributes:
        gain_value: Source-to-tag gain g (equal to the source-to-receiver gain)
        params: Supplies mu, N_s, P_t, h and the two noise variances
        bits: Number of simulated bits
        seed: Seed of the detector streams (one stream per chunk)
        ambient: "gaussian" (circular complex Gaussian of power P_t) or
            "constant" (unit-modulus samples scaled to power P_t, random phase)
        tag_phase: Phase of the tag-to-receiver coefficient in radians
        chunk_samples: Upper bound on complex samples generated per block
    """

    gain_value: float
    params: SystemParams
    bits: int = DEFAULT_DETECTOR_BITS
    seed: int = DEFAULT_DETECTOR_SEED
    ambient: str = AMBIENT_GAUSSIAN
    tag_phase: float = 0.0
    chunk_samples: int = DEFAULT_CHUNK_SAMPLES

    def __post_init__(self):
        if self.params.n_s < 1:
            raise DetectorError("n_s must be positive")
        if not math.isfinite(self.gain_value) or self.gain_value < 0:
            raise DetectorError(f"gain_value must be finite and >= 0, got {self.gain_value}")
        if self.bits < MIN_DETECTOR_BITS:
            raise DetectorError(f"bits must be >= {MIN_DETECTOR_BITS}, got {self.bits}")
        if self.ambient not in AMBIENT_MODELS:
            raise DetectorError(f"ambient must be one of {AMBIENT_MODELS}, got {self.ambient!r}")
        if not math.isfinite(self.tag_phase):
            raise DetectorError("tag_phase must be finite")
        if self.chunk_samples < 1:
            raise DetectorError("chunk_samples must be positive")
        if self.seed < 0:
            raise DetectorError(f"seed must be non-negative, got {self.seed}")

    @property
    def n_s(self) -> int:
        return int(self.params.n_s)

    def coefficients(self) -> tuple[complex, complex]:
        """Effective channel seen by x[i] for D = 0 and D = 1."""
        p = self.params
        direct = math.sqrt(self.gain_value)
        reflected = p.mu * math.sqrt(self.gain_value) * math.sqrt(p.h) * complex(
            math.cos(self.tag_phase), math.sin(self.tag_phase)
        )
        return complex(direct), direct + reflected

    def signal_powers(self) -> tuple[float, float]:
        c0, c1 = self.coefficients()
        return self.params.p_t * abs(c0) ** 2, self.params.p_t * abs(c1) ** 2


class DetectorMoments(NamedTuple):
    mean_0: float
    mean_1: float
    var_0: float
    var_1: float
    threshold: float


@dataclass(frozen=True)
class DetectorResult:
    """Monte Carlo outcome; ``z_*`` are empirical moments of Z per hypothesis."""

    ber: float
    stderr: float
    errors: int
    bits: int
    threshold: float
    z_mean_0: float
    z_mean_1: float
    z_var_0: float
    z_var_1: float


def detector_moments(config: DetectorConfig) -> DetectorMoments:
    """Conditional mean and variance of Z under D = 0 and D = 1, and the midpoint threshold."""
    sigma2 = config.params.noise_power
    n = config.n_s
    s0, s1 = config.signal_powers()
    m0, m1 = s0 + sigma2, s1 + sigma2
    if config.ambient == AMBIENT_GAUSSIAN:
        v0, v1 = m0 ** 2 / n, m1 ** 2 / n
    else:
        v0 = (sigma2 ** 2 + 2.0 * s0 * sigma2) / n
        v1 = (sigma2 ** 2 + 2.0 * s1 * sigma2) / n
    return DetectorMoments(m0, m1, v0, v1, 0.5 * (m0 + m1))


def _cdf(config: DetectorConfig, signal: float, z: float) -> float:
    n = config.n_s
    sigma2 = config.params.noise_power
    if config.ambient == AMBIENT_GAUSSIAN:
        return float(stats.gamma.cdf(n * z / (signal + sigma2), n))
    scaled = 2.0 * n * z / sigma2
    noncentrality = 2.0 * n * signal / sigma2
    if noncentrality == 0.0:
        return float(stats.chi2.cdf(scaled, 2 * n))
    return float(stats.ncx2.cdf(scaled, 2 * n, noncentrality))


def detector_ber_exact(config: DetectorConfig) -> float:
    """Exact error probability of the midpoint detector for the simulated model."""
    moments = detector_moments(config)
    s0, s1 = config.signal_powers()
    t = moments.threshold
    miss_0 = 1.0 - _cdf(config, s0, t)
    miss_1 = _cdf(config, s1, t)
    if moments.mean_1 < moments.mean_0:
        miss_0, miss_1 = 1.0 - miss_0, 1.0 - miss_1
    return 0.5 * (miss_0 + miss_1)


def detector_ber_formula(config: DetectorConfig) -> float:
    """Closed-form link BER at ``config.gain_value``, as used by the slot rate."""
    return ber(config.gain_value, config.params)


def _ambient(rng: np.random.Generator, shape: tuple[int, int], p_t: float, model: str) -> np.ndarray:
    if model == AMBIENT_CONSTANT:
        return math.sqrt(p_t) * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=shape))
    scale = math.sqrt(p_t / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def detector_ber_mc(config: DetectorConfig) -> DetectorResult:
    """Estimate the detector BER by simulating ``config.bits`` bits.

    Bits are generated in chunks of at most ``chunk_samples`` samples;
    chunk c draws from stream (seed, DETECTOR, c), so the result depends
    only on the config.

    Returns:
        DetectorResult with the error fraction and its binomial standard error
    """
    p = config.params
    n = config.n_s
    c0, c1 = config.coefficients()
    moments = detector_moments(config)
    threshold = moments.threshold
    upper = moments.mean_1 >= moments.mean_0
    noise_scale = math.sqrt(p.noise_power / 2.0)
    per_chunk = max(1, config.chunk_samples // n)

    errors = 0
    sums = np.zeros(2)
    squares = np.zeros(2)
    counts = np.zeros(2, dtype=np.int64)
    done = 0
    chunk = 0
    while done < config.bits:
        m = min(per_chunk, config.bits - done)
        rng = stream(config.seed, STREAM_DETECTOR, chunk)
        d = rng.integers(0, 2, size=m)
        x = _ambient(rng, (m, n), p.p_t, config.ambient)
        # n0 + n1 drawn as one circular Gaussian of the summed variance
        noise = noise_scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
        coef = np.where(d == 1, c1, c0)[:, None]
        y = coef * x + noise
        z = (y.real ** 2 + y.imag ** 2).mean(axis=1)

        decided = (z > threshold) if upper else (z < threshold)
        errors += int(np.count_nonzero(decided != (d == 1)))
        for hypothesis in (0, 1):
            zh = z[d == hypothesis]
            sums[hypothesis] += zh.sum()
            squares[hypothesis] += np.square(zh).sum()
            counts[hypothesis] += len(zh)
        done += m
        chunk += 1
        logger.debug("Detector chunk %d: %d/%d bits, %d errors", chunk, done, config.bits, errors)

    rate = errors / config.bits
    stderr = math.sqrt(rate * (1.0 - rate) / config.bits)
    means = np.divide(sums, counts, out=np.full(2, np.nan), where=counts > 0)
    variances = np.divide(
        squares - counts * means ** 2, counts - 1, out=np.full(2, np.nan), where=counts > 1
    )
    logger.info(
        "Detector MC at g=%.6g, N_s=%d: BER %.6g +/- %.3g over %d bits",
        config.gain_value, n, rate, stderr, config.bits,
    )
    return DetectorResult(
        ber=rate,
        stderr=stderr,
        errors=errors,
        bits=config.bits,
        threshold=threshold,
        z_mean_0=float(means[0]),
        z_mean_1=float(means[1]),
        z_var_0=float(variances[0]),
        z_var_1=float(variances[1]),
    )

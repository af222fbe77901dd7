"""
Complex-matrix primitives for the i.i.d. Rayleigh MIMO channel.

All rates are in bits per channel use (log base 2).
"""
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .logger import Logger
from .utils import InvalidArgument, db_to_linear, linear_to_db, require

logger = Logger().get_logger(__name__)

CHANNEL_BLOCK = 4096

# tags keep the streams of different consumers apart under one seed
TAG_CHANNEL = 0
TAG_AUDIT = 1
TAG_NOISE = 2
TAG_ORTHANT = 3
TAG_LINK = 4


class RandomStream:
    """Counter-based random source: item i of (seed, tag) never depends on scheduling."""

    def __init__(self, seed: int, tag: int = TAG_CHANNEL):
        self.seed = int(seed)
        self.tag = int(tag)

    def trial(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.tag, int(index)])

    def child(self, tag: int) -> "RandomStream":
        return RandomStream(self.seed, tag)

    def channel(self, lt: int, lr: int, index: int) -> np.ndarray:
        """Draw `index` of the sequence that channels() returns, without drawing the ones before it."""
        require(index >= 0, f"draw index must be nonnegative, got {index}")
        block = self.trial(index // CHANNEL_BLOCK)
        return complex_gaussian(block, (CHANNEL_BLOCK, lr, lt))[index % CHANNEL_BLOCK]

    def channels(self, lt: int, lr: int, count: int) -> np.ndarray:
        require(count >= 0, f"sample count must be nonnegative, got {count}")
        out = np.empty((count, lr, lt), dtype=complex)
        for start in range(0, count, CHANNEL_BLOCK):
            stop = min(count, start + CHANNEL_BLOCK)
            block = self.trial(start // CHANNEL_BLOCK)
            out[start:stop] = complex_gaussian(block, (CHANNEL_BLOCK, lr, lt))[
                : stop - start
            ]
        return out

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, tag={self.tag})"


StreamLike = Union[RandomStream, np.random.Generator]


def as_generator(stream: StreamLike, index: int = 0) -> np.random.Generator:
    if isinstance(stream, RandomStream):
        return stream.trial(index)
    return stream


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts each of variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex, copy=True)
        if entries.ndim == 1:
            entries = entries.reshape(1, -1)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise InvalidArgument(f"channel must be a nonempty matrix, got {entries.shape}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def lr(self) -> int:
        return self.entries.shape[0]

    @property
    def lt(self) -> int:
        return self.entries.shape[1]

    @property
    def gram(self) -> np.ndarray:
        return self.entries @ self.entries.conj().T


@dataclass(frozen=True)
class SnrPoint:
    linear: float

    def __post_init__(self):
        if not self.linear >= 0:
            raise InvalidArgument(f"SNR must be nonnegative, got {self.linear}")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(db_to_linear(db))

    @property
    def db(self) -> float:
        return linear_to_db(self.linear)


SnrLike = Union[SnrPoint, float]


def as_snr(snr: SnrLike) -> SnrPoint:
    return snr if isinstance(snr, SnrPoint) else SnrPoint(float(snr))


@dataclass
class CapacitySampleSet:
    values: np.ndarray
    seed: int
    count: int = field(init=False)

    def __post_init__(self):
        values = np.sort(np.asarray(self.values, dtype=float).ravel())
        if values.size and values[0] < 0:
            raise InvalidArgument("capacity samples must be nonnegative")
        self.values = values
        self.count = int(values.size)

    def cdf(self, rates) -> np.ndarray:
        return empirical_cdf(self.values, rates)

    def survival(self, rates) -> np.ndarray:
        """P̂(C >= rate)."""
        rates = np.asarray(rates, dtype=float)
        return 1.0 - np.searchsorted(self.values, rates, side="left") / self.count


def sample_channel(lt: int, lr: int, stream: StreamLike, index: int = 0) -> ChannelMatrix:
    """
    One H with CN(0, 1) entries. From a RandomStream this is draw `index` of sample_channels;
    a plain Generator simply advances.
    """
    require(lt >= 1 and lr >= 1, f"antenna counts must be positive, got lt={lt}, lr={lr}")
    if isinstance(stream, RandomStream):
        return ChannelMatrix(stream.channel(lt, lr, index))
    return ChannelMatrix(complex_gaussian(stream, (lr, lt)))


def sample_channels(lt: int, lr: int, count: int, stream: StreamLike) -> np.ndarray:
    require(lt >= 1 and lr >= 1, f"antenna counts must be positive, got lt={lt}, lr={lr}")
    if isinstance(stream, RandomStream):
        return stream.channels(lt, lr, count)
    return complex_gaussian(stream, (count, lr, lt))


def small_gram(h: np.ndarray) -> np.ndarray:
    # HH^H and H^H H share their nonzero eigenvalues; use the smaller one
    lr, lt = h.shape[-2:]
    hh = np.conj(np.swapaxes(h, -1, -2))
    return h @ hh if lr <= lt else hh @ h


def logdet_eye_plus(gram: np.ndarray, scale: float) -> np.ndarray:
    """log2 det(I + scale * gram) for Hermitian PSD gram (batched)."""
    eig = np.linalg.eigvalsh(gram)
    eig = np.clip(eig, 0.0, None)
    return np.sum(np.log2(1.0 + scale * eig), axis=-1)


def mimo_mutual_info(h: Union[ChannelMatrix, np.ndarray], snr: SnrLike) -> float:
    entries = h.entries if isinstance(h, ChannelMatrix) else np.atleast_2d(h)
    snr = as_snr(snr)
    lt = entries.shape[1]
    if snr.linear == 0:
        return 0.0
    return float(logdet_eye_plus(small_gram(entries), snr.linear / lt))


def mimo_mutual_info_batch(channels: np.ndarray, snr: SnrLike) -> np.ndarray:
    snr = as_snr(snr)
    lt = channels.shape[-1]
    if snr.linear == 0:
        return np.zeros(channels.shape[:-2])
    return logdet_eye_plus(small_gram(channels), snr.linear / lt)


def chi2_cdf(g, lt: int):
    """F_G(g) = 1 - e^{-g} sum_{k<lt} g^k / k!, the CDF of sum of lt unit-mean exponentials."""
    require(int(lt) == lt and lt >= 1, f"lt must be a positive integer, got {lt}")
    g_arr = np.asarray(g, dtype=float)
    if np.any(g_arr < 0):
        raise InvalidArgument("chi-square argument must be nonnegative")
    out = special.gammainc(int(lt), g_arr)
    return float(out) if np.ndim(out) == 0 else out


def miso_capacity_cdf(rate, snr: SnrLike, lt: int):
    snr = as_snr(snr)
    rate_arr = np.asarray(rate, dtype=float)
    if np.any(rate_arr < 0):
        raise InvalidArgument("rate must be nonnegative")

    if snr.linear == 0:
        out = np.where(rate_arr > 0, 1.0, 0.0)
    else:
        threshold = np.expm1(rate_arr * math.log(2.0)) * lt / snr.linear
        out = special.gammainc(int(lt), threshold)
    return float(out) if np.ndim(out) == 0 else out


def empirical_cdf(sorted_values: np.ndarray, rates) -> np.ndarray:
    """P̂(C <= rate) for ascending samples."""
    rates = np.asarray(rates, dtype=float)
    return np.searchsorted(sorted_values, rates, side="right") / sorted_values.size


def kolmogorov_distance(sorted_values: np.ndarray, cdf) -> float:
    """sup |F̂ - F| evaluated on both sides of every jump of the empirical CDF."""
    m = sorted_values.size
    model = np.asarray(cdf(sorted_values), dtype=float)
    upper = np.arange(1, m + 1) / m - model
    lower = model - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def capacity_samples(
    snr: SnrLike, lt: int, lr: int, count: int, stream: RandomStream
) -> CapacitySampleSet:
    require(count >= 1, "capacity sample count must be positive")
    channels = sample_channels(lt, lr, count, stream)
    values = mimo_mutual_info_batch(channels, snr)
    logger.debug(
        "capacity samples drawn: %s",
        {"lt": lt, "lr": lr, "count": count, "snr_db": as_snr(snr).db},
    )
    return CapacitySampleSet(values=values, seed=stream.seed)

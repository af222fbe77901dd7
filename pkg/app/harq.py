"""
Average-rate evaluation and rate optimization for IR and Chase-combining HARQ
under isotropic Gaussian input.

Every optimizer works on an empirical channel sample set, so protocols compared at one
SNR can share the same draws.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, special

from .channel import (
    CapacitySampleSet,
    ChannelMatrix,
    RandomStream,
    SnrLike,
    as_snr,
    chi2_cdf,
    miso_capacity_cdf,
    mimo_mutual_info,
    sample_channels,
    small_gram,
)
from .logger import Logger
from .utils import InvalidArgument, require

logger = Logger().get_logger(__name__)

MIN_MC = 1000
PROB_TOL = 1e-12


@dataclass(frozen=True)
class RoundRates:
    """R^(1) >= ... >= R^(N) >= 0; R^(0) is +inf and R^(N+1) is 0 by convention."""

    rates: tuple

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise InvalidArgument("at least one round rate is required")
        for r in rates:
            if not r >= 0 or math.isinf(r):
                raise InvalidArgument(f"round rates must be finite and nonnegative: {rates}")
        for prev, cur in zip(rates, rates[1:]):
            if cur > prev:
                raise InvalidArgument(f"round rates must be nonincreasing: {rates}")
        object.__setattr__(self, "rates", rates)

    @property
    def n_max(self) -> int:
        return len(self.rates)

    def rate(self, n: int) -> float:
        if n <= 0:
            return math.inf
        if n > self.n_max:
            return 0.0
        return self.rates[n - 1]

    @property
    def decrements(self) -> np.ndarray:
        """R^(n) - R^(n+1) for n = 1..N."""
        r = np.asarray(self.rates + (0.0,))
        return r[:-1] - r[1:]

    @classmethod
    def common(cls, rate: float, cumulative_lengths: Sequence[float]) -> "RoundRates":
        return cls(tuple(rate / w for w in cumulative_lengths))


@dataclass
class AvgRateResult:
    optimal_rates: RoundRates
    avg_rate: float
    success_probs: list
    samples_used: int
    stderr: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        probs = [float(p) for p in self.success_probs]
        if len(probs) != self.optimal_rates.n_max:
            raise InvalidArgument("one success probability per round is required")
        self.success_probs = probs

    @property
    def first_rate(self) -> float:
        return self.optimal_rates.rate(1)

    def as_dict(self) -> dict:
        return {
            "rates": list(self.optimal_rates.rates),
            "avg_rate": self.avg_rate,
            "success_probs": self.success_probs,
            "samples_used": self.samples_used,
            "stderr": self.stderr,
        }


def _check_probs(success_probs, n_max: int) -> np.ndarray:
    probs = np.asarray(success_probs, dtype=float)
    if probs.shape != (n_max,):
        raise InvalidArgument(f"expected {n_max} success probabilities, got {probs.shape}")
    if np.any(probs < -PROB_TOL) or np.any(probs > 1 + PROB_TOL):
        raise InvalidArgument(f"success probabilities must lie in [0, 1]: {probs}")
    if np.any(np.diff(probs) < -PROB_TOL):
        raise InvalidArgument(f"success probabilities must be nondecreasing: {probs}")
    return probs


def avg_rate_from_probs(rates: RoundRates, success_probs) -> float:
    probs = _check_probs(success_probs, rates.n_max)
    return float(np.dot(rates.decrements, probs))


def avg_rate_by_round(rates: RoundRates, success_probs) -> float:
    """The untelescoped form: sum R^(n) (P(A_n) - P(A_{n-1})) with P(A_0) = 0."""
    probs = _check_probs(success_probs, rates.n_max)
    gains = np.diff(np.concatenate(([0.0], probs)))
    return float(np.dot(np.asarray(rates.rates), gains))


def cc_equiv_capacity(h: ChannelMatrix, snr: SnrLike, n: int) -> float:
    require(n >= 1, f"round index must be >= 1, got {n}")
    return mimo_mutual_info(h, as_snr(snr).linear * n) / n


def ir_equiv_capacity(h: ChannelMatrix, snr: SnrLike) -> float:
    return mimo_mutual_info(h, snr)


@dataclass
class ProtocolSamples:
    """One shared channel sample set at one SNR, reused by every protocol."""

    snr: SnrLike
    lt: int
    lr: int
    channels: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        self.snr = as_snr(self.snr)
        require(self.channels.ndim == 3, "channels must have shape (count, lr, lt)")
        require(self.channels.shape[1:] == (self.lr, self.lt), "channel shape mismatch")

    @classmethod
    def draw(cls, snr: SnrLike, lt: int, lr: int, count: int, stream: RandomStream):
        require(count >= 1, "sample count must be positive")
        channels = sample_channels(lt, lr, count, stream)
        return cls(snr=snr, lt=lt, lr=lr, channels=channels, seed=stream.seed)

    @property
    def count(self) -> int:
        return self.channels.shape[0]

    @cached_property
    def gram_eigenvalues(self) -> np.ndarray:
        eig = np.linalg.eigvalsh(small_gram(self.channels))
        return np.clip(eig, 0.0, None)

    @cached_property
    def mutual_info(self) -> np.ndarray:
        """C_mimo per channel draw, in draw order."""
        scale = self.snr.linear / self.lt
        return np.sum(np.log2(1.0 + scale * self.gram_eigenvalues), axis=-1)

    def capacity(self) -> CapacitySampleSet:
        return CapacitySampleSet(values=self.mutual_info, seed=self.seed)

    def cc_accumulated(self, n_max: int) -> np.ndarray:
        """n * C_cc^(n) for n = 1..N, shape (N, count)."""
        require(n_max >= 1, "n_max must be >= 1")
        n = np.arange(1, n_max + 1, dtype=float)[:, None, None]
        scale = self.snr.linear / self.lt
        return np.sum(np.log2(1.0 + n * scale * self.gram_eigenvalues[None]), axis=-1)


def _reward_stderr(decrements: np.ndarray, successes: np.ndarray) -> float:
    """Standard error of the per-draw accepted rate sum_n (R^(n) - R^(n+1)) 1[A_n]."""
    reward = decrements @ successes
    m = reward.size
    if m < 2:
        return 0.0
    return float(np.std(reward, ddof=1) / math.sqrt(m))


def _ir_stage(c: list, s: list, f_next: list):
    """
    One backward step of the IR recursion
    F_n(i) = c_i S_i + max_{j <= i} (F_{n+1}(j) - c_j S_i),
    solved with a monotone upper hull: slopes -c_j strictly decrease, queries S_i never increase.
    """
    m = len(c)
    f = [0.0] * m
    choice = [0] * m
    hull = []
    ptr = 0
    for i in range(m):
        k3, a3 = -c[i], f_next[i]
        while len(hull) >= 2:
            j1, j2 = hull[-2], hull[-1]
            k1, a1 = -c[j1], f_next[j1]
            k2, a2 = -c[j2], f_next[j2]
            if (a3 - a2) * (k1 - k2) >= (a2 - a1) * (k2 - k3):
                hull.pop()
            else:
                break
        hull.append(i)
        if ptr > len(hull) - 1:
            ptr = len(hull) - 1

        x = s[i]
        while ptr + 1 < len(hull):
            cur, nxt = hull[ptr], hull[ptr + 1]
            if f_next[nxt] - c[nxt] * x > f_next[cur] - c[cur] * x:
                ptr += 1
            else:
                break

        j = hull[ptr]
        choice[i] = j
        f[i] = c[i] * x + f_next[j] - c[j] * x
    return f, choice


def optimize_ir_rates(
    capacity_samples: CapacitySampleSet,
    n_max: int,
    round_weights: Optional[Sequence[float]] = None,
) -> AvgRateResult:
    """
    Maximizes sum_n (R^(n) - R^(n+1)) P(C >= R^(n)) over the empirical distribution.

    Thresholds are restricted to sample values (plus 0), which is exact on the empirical
    measure. With round_weights the rates are tied to one scalar R as R / W^(n), W^(n)
    being the cumulative slot count.
    """
    require(capacity_samples.count >= 1, "capacity sample set is empty")
    require(n_max >= 1, f"n_max must be >= 1, got {n_max}")

    if round_weights is not None:
        require(len(round_weights) == n_max, "one round weight per round is required")
        require(all(w > 0 for w in round_weights), "round weights must be positive")
        cumulative = np.cumsum(np.asarray(round_weights, dtype=float))
        acc = cumulative[:, None] * capacity_samples.values[None, :]
        return optimize_common_rate(acc, slot_weights(cumulative))

    values = capacity_samples.values
    m = capacity_samples.count
    candidates = np.unique(np.concatenate(([0.0], values)))
    survival = 1.0 - np.searchsorted(values, candidates, side="left") / m

    c = candidates.tolist()
    s = survival.tolist()
    f = (candidates * survival).tolist()
    choices = []
    for _ in range(n_max - 1):
        f, choice = _ir_stage(c, s, f)
        choices.append(choice)

    best = int(np.argmax(np.asarray(f)))
    idx = [best]
    for choice in reversed(choices):
        idx.append(choice[idx[-1]])

    rates = RoundRates(tuple(candidates[idx]))
    probs = survival[idx]
    avg = float(f[best])

    successes = values[None, :] >= np.asarray(rates.rates)[:, None]
    result = AvgRateResult(
        optimal_rates=rates,
        avg_rate=avg,
        success_probs=probs.tolist(),
        samples_used=m,
        stderr=_reward_stderr(rates.decrements, successes),
    )
    logger.debug("IR optimum: %s", result.as_dict())
    return result


def slot_weights(cumulative: Sequence[float]) -> np.ndarray:
    """w_n = 1/W^(n) - 1/W^(n+1) with 1/W^(N+1) = 0."""
    inv = 1.0 / np.asarray(cumulative, dtype=float)
    return inv - np.concatenate((inv[1:], [0.0]))


def optimize_common_rate(accumulated: np.ndarray, weights: Sequence[float]) -> AvgRateResult:
    """
    Maximizes R * sum_n w_n P(acc_n >= R) over scalar R >= 0.

    accumulated[n-1] holds the per-draw accumulated mutual information after round n, so
    success at round n means acc_n >= R. The objective only drops at sample values, hence
    the maximum is attained at one of them.
    """
    acc = np.atleast_2d(np.asarray(accumulated, dtype=float))
    weights = np.asarray(weights, dtype=float)
    n_max, m = acc.shape
    require(m >= 1, "accumulated sample set is empty")
    require(weights.shape == (n_max,), "one weight per round is required")
    require(np.all(weights >= 0), "weights must be nonnegative")

    if np.any(np.diff(acc, axis=0) < -1e-9):
        logger.warning("accumulated mutual information decreases across rounds for some draws")

    sorted_acc = np.sort(acc, axis=1)
    candidates = np.unique(np.concatenate(([0.0], sorted_acc.ravel())))
    survival = np.empty((n_max, candidates.size))
    for n in range(n_max):
        survival[n] = 1.0 - np.searchsorted(sorted_acc[n], candidates, side="left") / m

    objective = candidates * (weights @ survival)
    best = int(np.argmax(objective))
    rate = float(candidates[best])

    inverse_lengths = np.cumsum(weights[::-1])[::-1]
    rates = RoundRates(tuple(rate * inverse_lengths))
    # once decoded the packet stays decoded
    successes = np.logical_or.accumulate(acc >= rate, axis=0)
    probs = successes.mean(axis=1)

    result = AvgRateResult(
        optimal_rates=rates,
        avg_rate=float(objective[best]),
        success_probs=probs.tolist(),
        samples_used=m,
        stderr=_reward_stderr(rates.decrements, successes),
        extras={"common_rate": rate},
    )
    logger.debug("common-rate optimum: %s", result.as_dict())
    return result


def cc_weights(n_max: int) -> np.ndarray:
    return slot_weights(np.arange(1, n_max + 1, dtype=float))


def cc_rate_from_samples(samples: ProtocolSamples, n_max: int) -> AvgRateResult:
    require(n_max >= 1, f"n_max must be >= 1, got {n_max}")
    return optimize_common_rate(samples.cc_accumulated(n_max), cc_weights(n_max))


def optimize_cc_rate(
    snr: SnrLike, lt: int, lr: int, n_max: int, mc: int, stream: RandomStream
) -> AvgRateResult:
    require(mc >= MIN_MC, f"at least {MIN_MC} channel samples are required, got {mc}")
    samples = ProtocolSamples.draw(snr, lt, lr, mc, stream)
    return cc_rate_from_samples(samples, n_max)


def ergodic_capacity(
    snr: SnrLike, lt: int, lr: int, mc: int, stream: RandomStream
) -> float:
    require(mc >= MIN_MC, f"at least {MIN_MC} channel samples are required, got {mc}")
    return ergodic_from_samples(ProtocolSamples.draw(snr, lt, lr, mc, stream))[0]


def ergodic_from_samples(samples: ProtocolSamples) -> tuple:
    """Sample mean of C_mimo and its standard error."""
    mi = samples.mutual_info
    stderr = float(np.std(mi, ddof=1) / math.sqrt(mi.size)) if mi.size > 1 else 0.0
    return float(np.mean(mi)), stderr


def no_feedback_rate(capacity_samples: CapacitySampleSet) -> AvgRateResult:
    return optimize_ir_rates(capacity_samples, 1)


def miso_ir_avg_rate(rates: RoundRates, snr: SnrLike, lt: int) -> float:
    success = 1.0 - np.asarray(miso_capacity_cdf(np.asarray(rates.rates), snr, lt))
    return float(np.dot(rates.decrements, np.atleast_1d(success)))


def miso_cc_avg_rate(rate: float, snr: SnrLike, lt: int, n_max: int) -> float:
    """sum_n (R/n) (F_G(x/(n-1)) - F_G(x/n)), x = (2^R - 1) L_t / SNR, F_G(x/0) = 1."""
    require(rate >= 0, "rate must be nonnegative")
    snr = as_snr(snr)
    if rate == 0:
        return 0.0
    if snr.linear == 0:
        return 0.0

    x = math.expm1(rate * math.log(2.0)) * lt / snr.linear
    n = np.arange(1, n_max + 1, dtype=float)
    outage = np.asarray(chi2_cdf(x / n, lt))
    before = np.concatenate(([1.0], outage[:-1]))
    return float(np.sum(rate / n * (before - outage)))


def miso_cc_optimum(snr: SnrLike, lt: int, n_max: int) -> tuple:
    """Maximizer of the closed-form MISO CC objective: (R*, value)."""
    snr = as_snr(snr)
    if snr.linear == 0:
        return 0.0, 0.0

    g_high = float(special.gammaincinv(lt, 1.0 - 1e-9))
    upper = math.log2(1.0 + n_max * snr.linear / lt * g_high)
    grid = np.linspace(0.0, upper, 513)
    values = np.array([miso_cc_avg_rate(r, snr, lt, n_max) for r in grid])
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]

    res = optimize.minimize_scalar(
        lambda r: -miso_cc_avg_rate(r, snr, lt, n_max),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    if -res.fun >= values[best]:
        return float(res.x), float(-res.fun)
    return float(grid[best]), float(values[best])

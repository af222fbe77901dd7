import itertools
from typing import Optional, Sequence

import numpy as np

from ..channel import RandomStream, SnrLike
from ..harq import (
    MIN_MC,
    AvgRateResult,
    ProtocolSamples,
    RoundRates,
    optimize_common_rate,
    slot_weights,
)
from ..logger import Logger
from ..utils import InvalidArgument, require
from .code import LdcCode, ldc_accumulated_batch

logger = Logger().get_logger(__name__)

MAX_PARTITION_ROUNDS = 4


def ldc_accumulated(code: LdcCode, samples: ProtocolSamples, n_max: int) -> np.ndarray:
    """T^(n) C_ld^(n) for n = 1..N over the shared channel draws, shape (N, count)."""
    require(n_max <= code.n_rounds, f"{code.name} has only {code.n_rounds} rounds, {n_max} requested")
    return np.stack(
        [ldc_accumulated_batch(samples.channels, code, samples.snr, n) for n in range(1, n_max + 1)]
    )


def _evaluate_common_rate(accumulated: np.ndarray, weights: np.ndarray, rate: float) -> AvgRateResult:
    m = accumulated.shape[1]
    successes = np.logical_or.accumulate(accumulated >= rate, axis=0)
    probs = successes.mean(axis=1)
    inverse_lengths = np.cumsum(weights[::-1])[::-1]
    rates = RoundRates(tuple(rate * inverse_lengths))
    reward = rates.decrements @ successes
    return AvgRateResult(
        optimal_rates=rates,
        avg_rate=float(np.mean(reward)),
        success_probs=probs.tolist(),
        samples_used=m,
        stderr=float(np.std(reward, ddof=1) / np.sqrt(m)) if m > 1 else 0.0,
        extras={"common_rate": rate},
    )


def avg_rate_ldc_from_samples(
    code: LdcCode,
    samples: ProtocolSamples,
    n_max: int,
    optimize_r: bool = True,
    rate: Optional[float] = None,
) -> AvgRateResult:
    require(code.lt == samples.lt, f"{code.name} needs {code.lt} transmit antennas, samples have {samples.lt}")
    require(n_max >= 1, "n_max must be >= 1")
    acc = ldc_accumulated(code, samples, n_max)
    weights = slot_weights(code.cumulative_lengths[:n_max])

    if optimize_r:
        result = optimize_common_rate(acc, weights)
    else:
        if rate is None or rate < 0:
            raise InvalidArgument("a nonnegative rate is required when the rate is not optimized")
        result = _evaluate_common_rate(acc, weights, rate)
    result.extras["code"] = code.name
    return result


def avg_rate_ldc(
    code: LdcCode,
    snr: SnrLike,
    n_max: int,
    mc: int,
    stream: RandomStream,
    optimize_r: bool = True,
    lr: int = 1,
    rate: Optional[float] = None,
) -> AvgRateResult:
    require(mc >= MIN_MC, f"at least {MIN_MC} channel samples are required, got {mc}")
    samples = ProtocolSamples.draw(snr, code.lt, lr, mc, stream)
    return avg_rate_ldc_from_samples(code, samples, n_max, optimize_r, rate)


def optimal_ldc_from_samples(
    samples: ProtocolSamples, n_max: int, round_lengths: Optional[Sequence[int]] = None
) -> AvgRateResult:
    """The capacity-lossless LDC reference: C_mimo in place of C_ld^(n) in every round."""
    round_lengths = tuple(round_lengths or (1,) * n_max)
    require(len(round_lengths) == n_max, "one round length per round is required")
    require(all(t >= 1 for t in round_lengths), "round lengths must be positive")

    cumulative = np.cumsum(np.asarray(round_lengths, dtype=float))
    acc = cumulative[:, None] * samples.mutual_info[None, :]
    result = optimize_common_rate(acc, slot_weights(cumulative))
    result.extras["round_lengths"] = list(round_lengths)
    return result


def optimal_ldc_avg_rate(
    snr: SnrLike,
    lt: int,
    lr: int,
    n_max: int,
    round_lengths: Optional[Sequence[int]],
    mc: int,
    stream: RandomStream,
) -> AvgRateResult:
    require(mc >= MIN_MC, f"at least {MIN_MC} channel samples are required, got {mc}")
    samples = ProtocolSamples.draw(snr, lt, lr, mc, stream)
    return optimal_ldc_from_samples(samples, n_max, round_lengths)


def compositions(total: int, parts: int):
    """All ordered ways to write total as a sum of `parts` positive integers."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        edges = (0,) + cuts + (total,)
        yield tuple(edges[i + 1] - edges[i] for i in range(parts))


def best_round_partition(
    snr: SnrLike,
    lt: int,
    lr: int,
    t_total: int,
    n_max: int,
    mc: int,
    stream: RandomStream,
) -> tuple:
    """Exhaustive search of the round partition {T_n} for the capacity-lossless reference."""
    require(1 <= n_max <= MAX_PARTITION_ROUNDS, f"partition search supports 1..{MAX_PARTITION_ROUNDS} rounds")
    require(t_total >= n_max, f"cannot split {t_total} slots into {n_max} rounds")
    require(mc >= MIN_MC, f"at least {MIN_MC} channel samples are required, got {mc}")

    samples = ProtocolSamples.draw(snr, lt, lr, mc, stream)
    table = {}
    best_lengths, best = None, None
    for lengths in compositions(t_total, n_max):
        result = optimal_ldc_from_samples(samples, n_max, lengths)
        table[lengths] = result.avg_rate
        if best is None or result.avg_rate > best.avg_rate:
            best_lengths, best = lengths, result

    logger.info(
        "round partition search: %s",
        {"t_total": t_total, "n_max": n_max, "best": best_lengths, "avg_rate": best.avg_rate},
    )
    return best_lengths, best, table

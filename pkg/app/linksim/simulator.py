"""
Packet-level LDC-HARQ link simulation over quasi-static Rayleigh fading.

One trial keeps its channel for all rounds, sends the code's column blocks round by round
and stops at the first round whose decision matches the payload (genie ACK). Every round is
decoded for every trial so that per-round error counts come out of the same run.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..channel import TAG_LINK, SnrPoint, complex_gaussian
from ..config import Config
from ..ldc.code import LdcCode
from ..logger import Logger
from ..utils import InvalidArgument, check_increasing, require
from ..workers import run_points
from .convcode import BlockInterleaver, ConvolutionalCode
from .detector import MlDetector
from .modulation import QPSK_BITS, SymbolSet, qpsk_demap, qpsk_map

logger = Logger().get_logger(__name__)

UNCODED_BATCH = 20_000
CODED_BATCH = 1_000


@dataclass
class LinkConfig:
    code: LdcCode
    n_max: int
    snr_db: list
    trials: int
    seed: int
    coded: bool = False
    lr: int = 1
    packet_symbols: int = 100
    min_errors: int = 100
    interleaver_rows: int = 10
    interleaver_cols: int = 20
    workers: int = 1
    batch_size: Optional[int] = None

    def __post_init__(self):
        self.snr_db = [float(s) for s in self.snr_db]
        check_increasing(self.snr_db)
        require(self.trials >= 1, f"trials must be >= 1, got {self.trials}")
        require(self.lr >= 1, f"lr must be >= 1, got {self.lr}")
        require(self.min_errors >= 1, "min_errors must be >= 1")
        if not 1 <= self.n_max <= self.code.n_rounds:
            raise InvalidArgument(
                f"{self.code.name} supports 1..{self.code.n_rounds} rounds, got n_max={self.n_max}"
            )
        if self.coded:
            if self.packet_symbols % self.code.k:
                raise InvalidArgument(
                    f"packet of {self.packet_symbols} symbols does not split into "
                    f"codewords of {self.code.k} symbols"
                )
            coded_bits = self.packet_symbols * QPSK_BITS
            if self.interleaver_rows * self.interleaver_cols != coded_bits:
                raise InvalidArgument(
                    f"interleaver {self.interleaver_rows}x{self.interleaver_cols} does not hold "
                    f"{coded_bits} coded bits"
                )

    @property
    def snr_points(self) -> list:
        return [SnrPoint.from_db(db) for db in self.snr_db]

    @property
    def codewords_per_packet(self) -> int:
        return self.packet_symbols // self.code.k if self.coded else 1

    def as_dict(self) -> dict:
        return {
            "code": self.code.name,
            "n_max": self.n_max,
            "snr_db": self.snr_db,
            "trials": self.trials,
            "seed": self.seed,
            "coded": self.coded,
            "lr": self.lr,
            "packet_symbols": self.packet_symbols,
            "min_errors": self.min_errors,
        }


@dataclass
class SnrPointStats:
    snr_db: float
    n_max: int
    trials: int = 0
    failures: int = 0
    round_histogram: list = field(default_factory=list)
    genie_errors: list = field(default_factory=list)
    joint_errors: list = field(default_factory=list)
    no_arq_errors: int = 0
    a1_not_a2: int = 0
    codewords: int = 0
    codeword_joint_errors: list = field(default_factory=list)
    accepted_bits: int = 0
    channel_uses: int = 0

    def __post_init__(self):
        for name in ("round_histogram", "genie_errors", "joint_errors", "codeword_joint_errors"):
            if not getattr(self, name):
                setattr(self, name, [0] * self.n_max)

    @property
    def per(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def per_stderr(self) -> float:
        if not self.trials:
            return 0.0
        p = self.per
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def avg_rate(self) -> float:
        return self.accepted_bits / self.channel_uses if self.channel_uses else 0.0

    def round_fraction(self, n: int) -> float:
        return self.round_histogram[n - 1] / self.trials if self.trials else 0.0

    def round_error_rate(self, n: int) -> float:
        """Genie P_e^(n): decision with n rounds wrong, regardless of stopping."""
        return self.genie_errors[n - 1] / self.trials if self.trials else 0.0

    def codeword_error_rate(self, n: int) -> float:
        """Joint codeword error rate: wrong at every round 1..n."""
        return self.codeword_joint_errors[n - 1] / self.codewords if self.codewords else 0.0

    def merge(self, other: "SnrPointStats"):
        self.trials += other.trials
        self.failures += other.failures
        self.no_arq_errors += other.no_arq_errors
        self.a1_not_a2 += other.a1_not_a2
        self.codewords += other.codewords
        self.accepted_bits += other.accepted_bits
        self.channel_uses += other.channel_uses
        for name in ("round_histogram", "genie_errors", "joint_errors", "codeword_joint_errors"):
            mine, theirs = getattr(self, name), getattr(other, name)
            setattr(self, name, [a + b for a, b in zip(mine, theirs)])


@dataclass
class SimStats:
    config: LinkConfig
    points: list

    @property
    def per(self) -> list:
        return [p.per for p in self.points]

    @property
    def avg_rate(self) -> list:
        return [p.avg_rate for p in self.points]

    @property
    def round_histogram(self) -> list:
        return [p.round_histogram for p in self.points]

    @property
    def trials(self) -> list:
        return [p.trials for p in self.points]

    def header(self) -> list:
        rounds = [f"round_{n}_frac" for n in range(1, self.config.n_max + 1)]
        return ["snr_db", "per", "per_stderr", "avg_rate"] + rounds + ["trials"]

    def rows(self) -> list:
        out = []
        for p in self.points:
            fracs = [p.round_fraction(n) for n in range(1, self.config.n_max + 1)]
            out.append([p.snr_db, p.per, p.per_stderr, p.avg_rate] + fracs + [p.trials])
        return out


class LinkSimulator:
    def __init__(self, config: LinkConfig):
        self.config = config
        self.code = config.code
        self.symbol_set = SymbolSet.qpsk(self.code.k)
        self.cum_lengths = np.asarray(self.code.cumulative_lengths[: config.n_max])

        if config.coded:
            self.conv = ConvolutionalCode()
            self.interleaver = BlockInterleaver(config.interleaver_rows, config.interleaver_cols)
            # info + tail = coded bits / 2; the tail is carved out of the packet
            self.info_bits = config.packet_symbols * QPSK_BITS // self.conv.n_out
            self.payload_bits = self.info_bits - self.conv.memory
            require(self.payload_bits >= 1, "packet too short for the termination tail")
        else:
            self.info_bits = self.code.k * QPSK_BITS
            self.payload_bits = self.info_bits

        default_batch = CODED_BATCH if config.coded else UNCODED_BATCH
        self.batch_size = config.batch_size or default_batch

    def _draw(self, rng: np.random.Generator, count: int) -> tuple:
        """Common random numbers: channel, then noise, then payload, independent of SNR."""
        cfg = self.config
        ncw = cfg.codewords_per_packet
        channels = complex_gaussian(rng, (count, cfg.lr, self.code.lt))
        noise = complex_gaussian(rng, (count, ncw, cfg.lr, self.code.t_total))
        payload = rng.integers(0, 2, size=(count, self.payload_bits), dtype=np.uint8)
        return channels, noise, payload

    def _symbols(self, payload: np.ndarray) -> np.ndarray:
        """Payload bits -> transmitted symbol vectors (B, C, K)."""
        if not self.config.coded:
            return qpsk_map(payload)[:, None, :]
        coded = self.conv.encode(payload)
        symbols = qpsk_map(self.interleaver.interleave(coded))
        return symbols.reshape(payload.shape[0], -1, self.code.k)

    def run_batch(self, snr_db: float, batch: int, count: int) -> SnrPointStats:
        cfg = self.config
        rng = np.random.default_rng([cfg.seed, TAG_LINK, batch])
        channels, noise, payload = self._draw(rng, count)
        symbols = self._symbols(payload)

        detector = MlDetector(self.code, self.symbol_set, SnrPoint.from_db(snr_db))
        x = self.code.codeword(symbols)  # (B, C, L_t, T)
        received = detector.amplitude * np.einsum("bri,bcit->bcrt", channels, x) + noise

        true_idx = self.symbol_set.index_of(qpsk_demap(symbols))  # (B, C)

        wrong = np.empty((cfg.n_max, count), dtype=bool)
        cw_wrong = np.empty((cfg.n_max, count, symbols.shape[1]), dtype=bool)
        for n in range(1, cfg.n_max + 1):
            metrics = detector.metrics(received, channels, n)
            decided = np.argmin(metrics, axis=-1)
            cw_wrong[n - 1] = decided != true_idx
            if cfg.coded:
                llrs = detector.llrs_from_metrics(metrics).reshape(count, -1)
                decoded = self.conv.decode(self.interleaver.deinterleave(llrs))
                wrong[n - 1] = np.any(decoded != payload, axis=1)
            else:
                wrong[n - 1] = cw_wrong[n - 1, :, 0]

        return self._tally(snr_db, wrong, cw_wrong)

    def _tally(self, snr_db: float, wrong: np.ndarray, cw_wrong: np.ndarray) -> SnrPointStats:
        cfg = self.config
        count = wrong.shape[1]
        ncw = cw_wrong.shape[2]
        joint = np.logical_and.accumulate(wrong, axis=0)
        cw_joint = np.logical_and.accumulate(cw_wrong, axis=0)

        succeeded = ~joint[-1]
        # first round without error; rounds after an ACK are never sent
        terminating = np.argmax(~wrong, axis=0)
        histogram = np.bincount(terminating[succeeded], minlength=cfg.n_max)

        uses_per_round = ncw * self.cum_lengths
        used = np.where(succeeded, uses_per_round[terminating], uses_per_round[-1])

        stats = SnrPointStats(snr_db=snr_db, n_max=cfg.n_max)
        stats.trials = count
        stats.failures = int(np.sum(joint[-1]))
        stats.round_histogram = [int(h) for h in histogram]
        stats.genie_errors = [int(v) for v in wrong.sum(axis=1)]
        stats.joint_errors = [int(v) for v in joint.sum(axis=1)]
        stats.no_arq_errors = int(np.sum(wrong[-1]))
        stats.a1_not_a2 = int(np.sum(~wrong[0] & wrong[1])) if cfg.n_max >= 2 else 0
        stats.codewords = count * ncw
        stats.codeword_joint_errors = [int(v) for v in cw_joint.sum(axis=(1, 2))]
        stats.accepted_bits = int(np.sum(succeeded)) * self.info_bits
        stats.channel_uses = int(np.sum(used))
        return stats

    def run_point(self, snr_db: float) -> SnrPointStats:
        """Batches until min_errors failures or the trial cap, whichever comes first."""
        cfg = self.config
        total = SnrPointStats(snr_db=snr_db, n_max=cfg.n_max)
        batch = 0
        while total.trials < cfg.trials and total.failures < cfg.min_errors:
            count = min(self.batch_size, cfg.trials - total.trials)
            total.merge(self.run_batch(snr_db, batch, count))
            batch += 1
            logger.debug(
                "link batch done: %s",
                {"snr_db": snr_db, "batch": batch, "trials": total.trials, "failures": total.failures},
            )
        return total

    def run(self) -> SimStats:
        cfg = self.config
        logger.info("link simulation started: %s", cfg.as_dict())
        points = run_points(lambda i: self.run_point(cfg.snr_db[i]), len(cfg.snr_db), cfg.workers)
        logger.info(
            "link simulation finished: %s",
            {"per": [p.per for p in points], "trials": [p.trials for p in points]},
        )
        return SimStats(config=cfg, points=points)


def run_uncoded(config: LinkConfig) -> SimStats:
    if config.coded:
        raise InvalidArgument("run_uncoded needs coded=False")
    return LinkSimulator(config).run()


def run_coded(config: LinkConfig) -> SimStats:
    if not config.coded:
        raise InvalidArgument("run_coded needs coded=True")
    return LinkSimulator(config).run()


def make_link_config(code: LdcCode, **kwargs) -> LinkConfig:
    """LinkConfig with gaps filled from Config().defaults."""
    defaults = Config().defaults
    kwargs.setdefault("seed", defaults["seed"])
    kwargs.setdefault("packet_symbols", defaults["packet_symbols"])
    kwargs.setdefault("min_errors", defaults["min_packet_errors"])
    kwargs.setdefault("interleaver_rows", defaults["interleaver_rows"])
    kwargs.setdefault("interleaver_cols", defaults["interleaver_cols"])
    kwargs.setdefault("workers", defaults["workers"])
    return LinkConfig(code=code, **kwargs)

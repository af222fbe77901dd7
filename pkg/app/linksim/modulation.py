"""
Gray-labeled QPSK and BPSK, plus the enumerable symbol-vector sets used by ML detection.

QPSK labeling: bits (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2), so 00 sits in the
first quadrant and neighbouring points differ in one bit.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..utils import InvalidArgument, require

QPSK_BITS = 2
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def qpsk_map(bits) -> np.ndarray:
    b = np.asarray(bits)
    if b.shape[-1] % QPSK_BITS:
        raise InvalidArgument(f"QPSK needs an even number of bits, got {b.shape[-1]}")
    pairs = b.reshape(b.shape[:-1] + (-1, QPSK_BITS)).astype(float)
    return ((1.0 - 2.0 * pairs[..., 0]) + 1j * (1.0 - 2.0 * pairs[..., 1])) * _INV_SQRT2


def qpsk_demap(symbols) -> np.ndarray:
    """Hard nearest-point decisions, inverse of qpsk_map."""
    s = np.asarray(symbols, dtype=complex)
    bits = np.stack(((s.real < 0), (s.imag < 0)), axis=-1).astype(np.uint8)
    return bits.reshape(s.shape[:-1] + (-1,)) if s.ndim else bits


def bpsk_map(bits) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=float) + 0j


@dataclass(frozen=True, eq=False)
class SymbolSet:
    """
    All M symbol vectors of length K with their bit labels; vector i carries the bits of i
    written most significant first.
    """

    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=complex)
        labels = np.asarray(self.labels, dtype=np.uint8)
        require(vectors.ndim == 2 and labels.ndim == 2, "vectors and labels must be 2-D")
        require(vectors.shape[0] == labels.shape[0], "one label per vector is required")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> int:
        return self.vectors.shape[1]

    @property
    def bits_per_vector(self) -> int:
        return self.labels.shape[1]

    @property
    def avg_energy(self) -> float:
        return float(np.mean(np.sum(np.abs(self.vectors) ** 2, axis=1)))

    def index_of(self, bits) -> np.ndarray:
        b = np.asarray(bits, dtype=np.int64)
        if b.shape[-1] != self.bits_per_vector:
            raise InvalidArgument(f"expected {self.bits_per_vector} bits, got {b.shape[-1]}")
        weights = 1 << np.arange(self.bits_per_vector - 1, -1, -1, dtype=np.int64)
        return b @ weights

    @classmethod
    def _enumerate(cls, k: int, bits_per_symbol: int, mapper) -> "SymbolSet":
        require(k >= 1, f"vector length must be positive, got {k}")
        n_bits = k * bits_per_symbol
        labels = np.array(list(itertools.product((0, 1), repeat=n_bits)), dtype=np.uint8)
        return cls(vectors=mapper(labels), labels=labels)

    @classmethod
    def qpsk(cls, k: int) -> "SymbolSet":
        return cls._enumerate(k, QPSK_BITS, qpsk_map)

    @classmethod
    def bpsk(cls, k: int) -> "SymbolSet":
        return cls._enumerate(k, 1, bpsk_map)

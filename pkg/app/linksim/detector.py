import math

import numpy as np
from scipy.special import logsumexp

from ..channel import ChannelMatrix, SnrLike, as_snr
from ..ldc.code import LdcCode
from ..utils import InvalidArgument, require
from .modulation import SymbolSet


class MlDetector:
    """
    Exhaustive ML detection over the M symbol vectors of one LDC codeword, using the
    accumulated received prefix Y^(n). Noise is CN(0, 1) per received entry.
    """

    def __init__(self, code: LdcCode, symbol_set: SymbolSet, snr: SnrLike):
        if symbol_set.k != code.k:
            raise InvalidArgument(f"symbol vectors have length {symbol_set.k}, code needs {code.k}")
        self.code = code
        self.symbol_set = symbol_set
        self.snr = as_snr(snr)
        self.amplitude = math.sqrt(self.snr.linear / code.lt)
        self.codewords = code.codeword(symbol_set.vectors)  # (M, L_t, T)

    def metrics(self, received: np.ndarray, channels: np.ndarray, n: int) -> np.ndarray:
        """
        V_i^(n) = ||Y^(n) - sqrt(snr / L_t) H X^(n)(s_i)||_F^2.

        received: (B, C, L_r, >= T^(n)) for C codewords per trial; channels: (B, L_r, L_t).
        Returns (B, C, M).
        """
        t = self.code.t_cum(n)
        hx = self.amplitude * np.einsum("bri,mit->bmrt", channels, self.codewords[:, :, :t])
        diff = received[:, :, None, :, :t] - hx[:, None]
        return np.sum(np.abs(diff) ** 2, axis=(-2, -1))

    def detect(self, received: np.ndarray, channels: np.ndarray, n: int) -> np.ndarray:
        """Index of the ML hypothesis; np.argmin resolves ties to the lowest index."""
        return np.argmin(self.metrics(received, channels, n), axis=-1)

    def llrs(self, received: np.ndarray, channels: np.ndarray, n: int) -> np.ndarray:
        """Exact bit LLRs log P(b = 0 | Y) / P(b = 1 | Y), shape (B, C, bits per vector)."""
        return self.llrs_from_metrics(self.metrics(received, channels, n))

    def llrs_from_metrics(self, metrics: np.ndarray) -> np.ndarray:
        log_like = -metrics[..., None, :]  # (..., 1, M)
        zero = (self.symbol_set.labels.T == 0)  # (bits, M)
        num = logsumexp(np.where(zero, log_like, -np.inf), axis=-1)
        den = logsumexp(np.where(~zero, log_like, -np.inf), axis=-1)
        return num - den


def ml_detect(
    received,
    h,
    code: LdcCode,
    symbol_set: SymbolSet,
    n: int,
    snr: SnrLike,
) -> int:
    """Single-codeword ML decision from Y^(n) (L_r x T^(n) or wider)."""
    entries = h.entries if isinstance(h, ChannelMatrix) else np.atleast_2d(h)
    y = np.atleast_2d(np.asarray(received, dtype=complex))
    require(y.shape[0] == entries.shape[0], "received rows must match receive antennas")
    detector = MlDetector(code, symbol_set, snr)
    return int(detector.detect(y[None, None], entries[None], n)[0, 0])

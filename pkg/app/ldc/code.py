from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..channel import ChannelMatrix, SnrLike, as_snr
from ..utils import InvalidArgument, require


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class LdcCode:
    """
    Linear dispersion code X = sum_k s_k C_k + conj(s_k) D_k, sent column block by column block.

    c_mats and d_mats have shape (K, L_t, T); round n transmits the next round_lengths[n-1] columns.
    """

    name: str
    lt: int
    t_total: int
    k: int
    round_lengths: tuple
    c_mats: np.ndarray
    d_mats: np.ndarray

    def __post_init__(self):
        c = np.array(self.c_mats, dtype=complex, copy=True)
        d = np.array(self.d_mats, dtype=complex, copy=True)
        lengths = tuple(int(t) for t in self.round_lengths)

        require(self.lt >= 1 and self.t_total >= 1 and self.k >= 1,
                f"{self.name}: lt, t_total and k must be positive")
        expected = (self.k, self.lt, self.t_total)
        if c.shape != expected or d.shape != expected:
            raise InvalidArgument(
                f"{self.name}: spreading matrices must have shape {expected}, "
                f"got C {c.shape} and D {d.shape}"
            )
        if not lengths or any(t < 1 for t in lengths):
            raise InvalidArgument(f"{self.name}: round lengths must be positive, got {lengths}")
        if sum(lengths) != self.t_total:
            raise InvalidArgument(
                f"{self.name}: round lengths {lengths} do not sum to T={self.t_total}"
            )

        object.__setattr__(self, "round_lengths", lengths)
        object.__setattr__(self, "c_mats", _frozen(c))
        object.__setattr__(self, "d_mats", _frozen(d))

    @property
    def n_rounds(self) -> int:
        return len(self.round_lengths)

    @property
    def cumulative_lengths(self) -> tuple:
        """T^(1), ..., T^(N)."""
        return tuple(int(t) for t in np.cumsum(self.round_lengths))

    def t_cum(self, n: int) -> int:
        self._check_round(n)
        return self.cumulative_lengths[n - 1]

    @property
    def a_mats(self) -> np.ndarray:
        return self.c_mats + self.d_mats

    @property
    def b_mats(self) -> np.ndarray:
        return self.c_mats - self.d_mats

    @property
    def has_conjugation(self) -> bool:
        return bool(np.any(self.d_mats != 0))

    def _check_round(self, n: int):
        if not 1 <= n <= self.n_rounds:
            raise InvalidArgument(
                f"{self.name}: round index must be in [1, {self.n_rounds}], got {n}"
            )

    def prefix(self, n: int) -> "LdcCode":
        """The code seen after n rounds: first T^(n) columns of every spreading matrix."""
        self._check_round(n)
        if n == self.n_rounds:
            return self
        t = self.t_cum(n)
        return LdcCode(
            name=self.name,
            lt=self.lt,
            t_total=t,
            k=self.k,
            round_lengths=self.round_lengths[:n],
            c_mats=self.c_mats[:, :, :t],
            d_mats=self.d_mats[:, :, :t],
        )

    def codeword(self, symbols) -> np.ndarray:
        """Symbols (..., K) -> codewords (..., L_t, T)."""
        s = np.asarray(symbols, dtype=complex)
        if s.shape[-1] != self.k:
            raise InvalidArgument(f"{self.name}: expected {self.k} symbols, got {s.shape[-1]}")
        return np.einsum("...k,kit->...it", s, self.c_mats) + np.einsum(
            "...k,kit->...it", np.conj(s), self.d_mats
        )

    def with_round_lengths(self, round_lengths: Sequence[int]) -> "LdcCode":
        return LdcCode(
            name=self.name,
            lt=self.lt,
            t_total=self.t_total,
            k=self.k,
            round_lengths=tuple(round_lengths),
            c_mats=self.c_mats,
            d_mats=self.d_mats,
        )

    def same_as(self, other: "LdcCode") -> bool:
        return (
            self.name == other.name
            and self.lt == other.lt
            and self.t_total == other.t_total
            and self.k == other.k
            and self.round_lengths == other.round_lengths
            and np.array_equal(self.c_mats, other.c_mats)
            and np.array_equal(self.d_mats, other.d_mats)
        )

    def __repr__(self):
        return (
            f"LdcCode(name={self.name!r}, lt={self.lt}, T={self.t_total}, K={self.k}, "
            f"rounds={self.round_lengths})"
        )


def prefix(code: LdcCode, n: int) -> LdcCode:
    return code.prefix(n)


@dataclass(frozen=True)
class RealEquivalentChannel:
    """Real map from the 2K symbol coordinates (Re s_k, Im s_k) to the 2 L_r T^(n) received ones."""

    matrix: np.ndarray
    round: int


def _real_vec(blocks: np.ndarray) -> np.ndarray:
    """(..., L_r, T) complex -> (..., 2 L_r T) real: column-major vec, real parts then imaginary."""
    v = np.swapaxes(blocks, -1, -2).reshape(blocks.shape[:-2] + (-1,))
    return np.concatenate((v.real, v.imag), axis=-1)


def equivalent_channel_rows(channels: np.ndarray, code: LdcCode, n: int) -> np.ndarray:
    """
    G^T for a batch of channels: shape (..., 2K, 2 L_r T^(n)).

    s_k C_k + conj(s_k) D_k = Re(s_k) A_k + Im(s_k) jB_k, so row k is vec(H A_k) and
    row K + k is vec(H jB_k).
    """
    p = code.prefix(n)
    h = np.asarray(channels, dtype=complex)
    ha = np.einsum("...ri,kit->...krt", h, p.a_mats)
    hb = np.einsum("...ri,kit->...krt", h, 1j * p.b_mats)
    return np.concatenate((_real_vec(ha), _real_vec(hb)), axis=-2)


def equivalent_channel(h: Union[ChannelMatrix, np.ndarray], code: LdcCode, n: int) -> RealEquivalentChannel:
    entries = h.entries if isinstance(h, ChannelMatrix) else np.atleast_2d(h)
    if entries.shape[1] != code.lt:
        raise InvalidArgument(f"channel has {entries.shape[1]} transmit antennas, code needs {code.lt}")
    g = np.swapaxes(equivalent_channel_rows(entries, code, n), -1, -2)
    return RealEquivalentChannel(matrix=g, round=n)


def ldc_accumulated_batch(channels: np.ndarray, code: LdcCode, snr: SnrLike, n: int) -> np.ndarray:
    """T^(n) C_ld^(n) = (1/2) log2 det(I + (snr / L_t) G G^T) per channel."""
    snr = as_snr(snr)
    if channels.shape[-1] != code.lt:
        raise InvalidArgument(
            f"channels have {channels.shape[-1]} transmit antennas, code needs {code.lt}"
        )
    if snr.linear == 0:
        return np.zeros(channels.shape[:-2])
    gt = equivalent_channel_rows(channels, code, n)
    gram = gt @ np.swapaxes(gt, -1, -2)
    eig = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return 0.5 * np.sum(np.log2(1.0 + snr.linear / code.lt * eig), axis=-1)


def ldc_mutual_info_batch(channels: np.ndarray, code: LdcCode, snr: SnrLike, n: int) -> np.ndarray:
    return ldc_accumulated_batch(channels, code, snr, n) / code.t_cum(n)


def ldc_mutual_info(h: Union[ChannelMatrix, np.ndarray], code: LdcCode, snr: SnrLike, n: int) -> float:
    entries = h.entries if isinstance(h, ChannelMatrix) else np.atleast_2d(h)
    return float(ldc_mutual_info_batch(entries[None], code, snr, n)[0])

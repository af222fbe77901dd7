"""
Built-in linear dispersion codes. Every entry meets the per-round power constraint
with one column per ARQ round.
"""
import math
from typing import Callable, Optional

import numpy as np

from ..utils import CodeNotFound, require
from .code import LdcCode

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
GOLDEN_RATIO_CONJ = (1.0 - math.sqrt(5.0)) / 2.0


def _single_column_rounds(t_total: int) -> tuple:
    return (1,) * t_total


def alamouti(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    """Columns (s1; s2) then (-conj(s2); conj(s1))."""
    require(lt == 2, f"alamouti is defined for 2 transmit antennas, got {lt}")
    c = np.zeros((2, 2, 2), dtype=complex)
    d = np.zeros((2, 2, 2), dtype=complex)
    c[0, 0, 0] = 1
    d[0, 1, 1] = 1
    c[1, 1, 0] = 1
    d[1, 0, 1] = -1
    return LdcCode("alamouti", 2, 2, 2, _single_column_rounds(2), c, d)


def sm_repetition(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    """Spatial multiplexing repeated every round: the multi-antenna Chase-combining scheme."""
    n_rounds = n_rounds or 2
    require(lt >= 1 and n_rounds >= 1, "lt and n_rounds must be positive")
    c = np.zeros((lt, lt, n_rounds), dtype=complex)
    for k in range(lt):
        c[k, k, :] = 1
    return LdcCode(
        "sm_repetition", lt, n_rounds, lt, _single_column_rounds(n_rounds), c, np.zeros_like(c)
    )


def spatial_multiplexing(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    require(lt >= 1, "lt must be positive")
    c = np.zeros((lt, lt, 1), dtype=complex)
    for k in range(lt):
        c[k, k, 0] = 1
    return LdcCode("spatial_multiplexing", lt, 1, lt, (1,), c, np.zeros_like(c))


def antenna_switching(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    """One symbol, round n sends it from antenna n only (scaled to full per-round power)."""
    require(lt >= 1, "lt must be positive")
    c = np.zeros((1, lt, lt), dtype=complex)
    c[0] = math.sqrt(lt) * np.eye(lt)
    return LdcCode(
        "antenna_switching", lt, lt, 1, _single_column_rounds(lt), c, np.zeros_like(c)
    )


def cdd(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    """Cyclic delay diversity: each column is the previous one rotated, X[i, t] = s[(i + t) mod L_t]."""
    require(lt >= 1, "lt must be positive")
    c = np.zeros((lt, lt, lt), dtype=complex)
    for i in range(lt):
        for t in range(lt):
            c[(i + t) % lt, i, t] = 1
    return LdcCode("cdd", lt, lt, lt, _single_column_rounds(lt), c, np.zeros_like(c))


def golden(lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    """
    X = 1/sqrt(5) [[alpha (a + b theta),    alpha (c + d theta)],
                   [i alpha' (c + d theta'), alpha' (a + b theta')]]
    with theta' the conjugate root, alpha = 1 + i - i theta and alpha' = 1 + i - i theta'.
    """
    require(lt == 2, f"golden is defined for 2 transmit antennas, got {lt}")
    theta, theta_c = GOLDEN_RATIO, GOLDEN_RATIO_CONJ
    alpha = 1 + 1j - 1j * theta
    alpha_c = 1 + 1j - 1j * theta_c
    scale = 1.0 / math.sqrt(5.0)

    c = np.zeros((4, 2, 2), dtype=complex)
    c[0, 0, 0], c[0, 1, 1] = alpha, alpha_c
    c[1, 0, 0], c[1, 1, 1] = alpha * theta, alpha_c * theta_c
    c[2, 0, 1], c[2, 1, 0] = alpha, 1j * alpha_c
    c[3, 0, 1], c[3, 1, 0] = alpha * theta, 1j * alpha_c * theta_c
    c *= scale
    return LdcCode("golden", 2, 2, 4, _single_column_rounds(2), c, np.zeros_like(c))


_KNOWN_CODES: dict[str, Callable[..., LdcCode]] = {
    "alamouti": alamouti,
    "sm_repetition": sm_repetition,
    "antenna_switching": antenna_switching,
    "cdd": cdd,
    "golden": golden,
    "spatial_multiplexing": spatial_multiplexing,
}

_ALIASES = {
    "sm_rep": "sm_repetition",
    "cc": "sm_repetition",
    "as": "antenna_switching",
    "sm": "spatial_multiplexing",
}


def known_codes() -> list[str]:
    return list(_KNOWN_CODES)


def _normalize(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    return _ALIASES.get(key, key)


def check_code(name: str) -> bool:
    return _normalize(name) in _KNOWN_CODES


def zoo(name: str, lt: int = 2, n_rounds: Optional[int] = None) -> LdcCode:
    key = _normalize(name)
    if key not in _KNOWN_CODES:
        raise CodeNotFound(name, known_codes())
    return _KNOWN_CODES[key](lt=lt, n_rounds=n_rounds)

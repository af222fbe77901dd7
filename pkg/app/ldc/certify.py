"""
Optimality certificates for LDC-based HARQ: the capacity criterion checked on sampled channels,
the structural unitarity conditions on the stacked spreading matrices, and power constraints.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from strenum import StrEnum

from ..channel import TAG_AUDIT, RandomStream, SnrPoint, mimo_mutual_info_batch, sample_channels
from ..config import Config
from ..logger import Logger
from ..utils import require
from .code import LdcCode, ldc_mutual_info_batch

logger = Logger().get_logger(__name__)


class PowerLevel(StrEnum):
    PER_ROUND = "per-round"
    PER_SYMBOL = "per-symbol"
    ISOTROPIC = "isotropic"


@dataclass
class PowerCheck:
    level: PowerLevel
    residuals: list
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals)


@dataclass
class StructuralCertificate:
    """Per-round Frobenius residuals of a unitarity condition; None when not defined."""

    residuals: Optional[list]
    applicable: bool
    tol: float

    @property
    def round_passes(self) -> list:
        if self.residuals is None:
            return []
        return [r < self.tol for r in self.residuals]

    @property
    def passed(self) -> bool:
        return self.residuals is not None and all(self.round_passes)

    @property
    def certifies(self) -> bool:
        return self.applicable and self.passed


@dataclass
class RoundVerdict:
    round: int
    criterion1_pass: bool
    mi_gap: float
    theorem1_residual: Optional[float] = None
    corollary2_residual: Optional[float] = None


@dataclass
class OptimalityReport:
    code: str
    lt: int
    lr: int
    per_round: list
    theorem1_applicable: Optional[bool] = None
    corollary2_applicable: Optional[bool] = None
    power: dict = field(default_factory=dict)

    @property
    def criterion1_pass(self) -> bool:
        return all(v.criterion1_pass for v in self.per_round)

    def verdict(self, n: int) -> RoundVerdict:
        return self.per_round[n - 1]


def _round_blocks(mats: np.ndarray, code: LdcCode) -> list:
    """Columns belonging to each round (not the accumulated prefix)."""
    edges = (0,) + code.cumulative_lengths
    return [mats[:, :, edges[i]:edges[i + 1]] for i in range(code.n_rounds)]


def check_power(code: LdcCode, level: PowerLevel = PowerLevel.PER_ROUND, tol: float = 1e-9) -> PowerCheck:
    level = PowerLevel(level)
    residuals = []
    for a, b, t_n in zip(
        _round_blocks(code.a_mats, code), _round_blocks(code.b_mats, code), code.round_lengths
    ):
        a_norms = np.sum(np.abs(a) ** 2, axis=(1, 2))
        b_norms = np.sum(np.abs(b) ** 2, axis=(1, 2))
        if level == PowerLevel.PER_ROUND:
            residual = abs(np.sum(a_norms + b_norms) - 2 * code.lt * t_n)
        elif level == PowerLevel.PER_SYMBOL:
            target = code.lt * t_n / code.k
            residual = max(np.max(np.abs(a_norms - target)), np.max(np.abs(b_norms - target)))
        else:
            eye = (t_n / code.k) * np.eye(code.lt)
            aa = a @ np.conj(np.swapaxes(a, -1, -2))
            bb = b @ np.conj(np.swapaxes(b, -1, -2))
            residual = max(
                np.max(np.linalg.norm(aa - eye, axis=(1, 2))),
                np.max(np.linalg.norm(bb - eye, axis=(1, 2))),
            )
        residuals.append(float(residual))
    return PowerCheck(level=level, residuals=residuals, tol=tol)


def _vec_columns(mats: np.ndarray) -> np.ndarray:
    """[vec(M_1), ..., vec(M_K)] with column-major vec, shape (L_t T, K)."""
    k = mats.shape[0]
    return np.swapaxes(mats, 1, 2).reshape(k, -1).T


def _structure_applicable(code: LdcCode, lr: Optional[int]) -> bool:
    return code.k == code.lt * code.t_total and (lr is None or lr >= code.lt)


def check_theorem1(code: LdcCode, tol: float = 1e-9, lr: Optional[int] = None) -> StructuralCertificate:
    """Residuals ||F F^H - I|| with F = [[U, V], [conj(V), conj(U)]] per round."""
    residuals = []
    for n in range(1, code.n_rounds + 1):
        p = code.prefix(n)
        u = _vec_columns(p.c_mats)
        v = _vec_columns(p.d_mats)
        f = np.block([[u, v], [np.conj(v), np.conj(u)]])
        gram = f @ np.conj(f.T)
        residuals.append(float(np.linalg.norm(gram - np.eye(gram.shape[0]))))
    return StructuralCertificate(residuals, _structure_applicable(code, lr), tol)


def check_corollary2(code: LdcCode, tol: float = 1e-9, lr: Optional[int] = None) -> StructuralCertificate:
    """Residuals ||U U^H - I|| per round, only for codes without conjugated symbols."""
    if code.has_conjugation:
        return StructuralCertificate(None, False, tol)

    residuals = []
    for n in range(1, code.n_rounds + 1):
        u = _vec_columns(code.prefix(n).c_mats)
        gram = u @ np.conj(u.T)
        residuals.append(float(np.linalg.norm(gram - np.eye(gram.shape[0]))))
    return StructuralCertificate(residuals, _structure_applicable(code, lr), tol)


def criterion1_gaps(
    code: LdcCode, snr_db: Sequence[float], channels: np.ndarray
) -> np.ndarray:
    """max over channels of |C_ld^(n) - C_mimo|, one entry per (round, SNR)."""
    gaps = np.zeros((code.n_rounds, len(snr_db)))
    for j, db in enumerate(snr_db):
        snr = SnrPoint.from_db(db)
        mimo = mimo_mutual_info_batch(channels, snr)
        for n in range(1, code.n_rounds + 1):
            ldc = ldc_mutual_info_batch(channels, code, snr, n)
            gaps[n - 1, j] = np.max(np.abs(mimo - ldc))
    return gaps


def check_criterion1(
    code: LdcCode,
    snr_db: Optional[Sequence[float]] = None,
    mc: Optional[int] = None,
    tol: Optional[float] = None,
    lr: Optional[int] = None,
    stream: Optional[RandomStream] = None,
) -> OptimalityReport:
    defaults = Config().defaults
    snr_db = list(snr_db if snr_db is not None else defaults["audit_snr_db"])
    mc = mc or defaults["audit_samples"]
    tol = defaults["criterion1_tol"] if tol is None else tol
    lr = lr or 1
    stream = stream or RandomStream(defaults["seed"], TAG_AUDIT)
    require(mc >= 1, "audit sample count must be positive")

    channels = sample_channels(code.lt, lr, mc, stream)
    gaps = criterion1_gaps(code, snr_db, channels).max(axis=1)
    per_round = [
        RoundVerdict(round=n + 1, criterion1_pass=bool(gap < tol), mi_gap=float(gap))
        for n, gap in enumerate(gaps)
    ]
    return OptimalityReport(code=code.name, lt=code.lt, lr=lr, per_round=per_round)


def certify(
    code: LdcCode,
    snr_db: Optional[Sequence[float]] = None,
    mc: Optional[int] = None,
    lr: Optional[int] = None,
    criterion1_tol: Optional[float] = None,
    theorem1_tol: Optional[float] = None,
    stream: Optional[RandomStream] = None,
) -> OptimalityReport:
    """Every certificate for one code. Verdicts are reported side by side, never inferred from each other."""
    theorem1_tol = Config().defaults["theorem1_tol"] if theorem1_tol is None else theorem1_tol
    report = check_criterion1(code, snr_db, mc, criterion1_tol, lr, stream)

    thm1 = check_theorem1(code, theorem1_tol, report.lr)
    cor2 = check_corollary2(code, theorem1_tol, report.lr)
    for verdict in report.per_round:
        verdict.theorem1_residual = thm1.residuals[verdict.round - 1]
        if cor2.residuals is not None:
            verdict.corollary2_residual = cor2.residuals[verdict.round - 1]
    report.theorem1_applicable = thm1.applicable
    report.corollary2_applicable = cor2.applicable
    report.power = {str(level): check_power(code, level) for level in PowerLevel}

    logger.info(
        "certified code: %s",
        {
            "code": code.name,
            "criterion1": [v.criterion1_pass for v in report.per_round],
            "theorem1": thm1.round_passes,
            "corollary2": cor2.round_passes,
        },
    )
    return report

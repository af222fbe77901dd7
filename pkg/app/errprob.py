"""
n-th pairwise error probabilities of LDC-based HARQ under ML decoding.

For a transmitted vector s_j and competitors s_{i_1}, ..., s_{i_n}, the event "ML prefers
s_{i_k} after k rounds for every k" is an orthant event of a correlated Gaussian vector:
W^(k) < -d_E^(k)^2 with W^(k) = 2 Re tr(D^(k) Z^(k)H).
"""
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .channel import TAG_ORTHANT, ChannelMatrix, RandomStream, SnrLike, as_generator, as_snr, complex_gaussian
from .config import Config
from .ldc.code import LdcCode
from .linksim.modulation import SymbolSet
from .logger import Logger
from .utils import BudgetExceeded, CovarianceError, InsufficientTrials, InvalidArgument, require

logger = Logger().get_logger(__name__)

PSD_TOL = 1e-10
H_BLOCK = 256


def _entries(h) -> np.ndarray:
    return h.entries if isinstance(h, ChannelMatrix) else np.atleast_2d(np.asarray(h, dtype=complex))


def _received_difference(h, code: LdcCode, snr: SnrLike, s_a, s_b) -> np.ndarray:
    """sqrt(snr / L_t) H (X(s_a) - X(s_b)) over all T columns."""
    amp = math.sqrt(as_snr(snr).linear / code.lt)
    x = code.codeword(np.asarray(s_a)) - code.codeword(np.asarray(s_b))
    return amp * (_entries(h) @ x)


def pairwise_distance(h, code: LdcCode, s_i, s_j, n: int, snr: SnrLike) -> float:
    """d_E^(n)(i, j)^2 = ||D^(n)_{i,j}||_F^2 over the first T^(n) columns."""
    t = code.t_cum(n)
    d = _received_difference(h, code, snr, s_j, s_i)[:, :t]
    return float(np.sum(np.abs(d) ** 2))


@dataclass
class PairwiseCovariance:
    r_w: np.ndarray
    thresholds: np.ndarray

    @property
    def n(self) -> int:
        return self.thresholds.size

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.r_w))
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.r_w / np.outer(sd, sd)


def build_covariance(h, code: LdcCode, snr: SnrLike, s_j, competitors: Sequence) -> PairwiseCovariance:
    """
    R_w(k, k) = 2 d_E^(k)^2 and, for k < l, R_w(k, l) = 2 Re <D^(k)_{i_k,j}, D^(k)_{i_l,j}>_F,
    the inner product taken over the columns of the smaller round k.
    """
    n = len(competitors)
    require(1 <= n <= code.n_rounds, f"need 1..{code.n_rounds} competitors, got {n}")
    s_j = np.asarray(s_j, dtype=complex)
    diffs = []
    for s_i in competitors:
        s_i = np.asarray(s_i, dtype=complex)
        if np.array_equal(s_i, s_j):
            raise InvalidArgument("a competitor equals the transmitted vector")
        diffs.append(_received_difference(h, code, snr, s_j, s_i))

    t_cum = code.cumulative_lengths
    r_w = np.empty((n, n))
    thresholds = np.empty(n)
    for k in range(n):
        dk = diffs[k][:, : t_cum[k]]
        thresholds[k] = np.sum(np.abs(dk) ** 2)
        for l in range(k, n):
            dl = diffs[l][:, : t_cum[k]]
            r_w[k, l] = r_w[l, k] = 2.0 * np.real(np.vdot(dl, dk))

    scale = max(1.0, float(np.max(np.abs(np.diag(r_w)))))
    lowest = float(np.min(np.linalg.eigvalsh(r_w)))
    if lowest < -PSD_TOL * scale:
        raise CovarianceError(f"covariance not PSD: smallest eigenvalue {lowest:.3e}")
    return PairwiseCovariance(r_w=r_w, thresholds=thresholds)


@dataclass
class OrthantEstimate:
    prob: float
    stderr: float
    method: str


def gaussian_factor(r_w: np.ndarray) -> np.ndarray:
    """L with L L^T = R_w: Cholesky when definite, else the positive-eigenvalue subspace."""
    try:
        return np.linalg.cholesky(r_w)
    except np.linalg.LinAlgError:
        eig, vec = np.linalg.eigh(r_w)
        keep = eig > PSD_TOL * max(1.0, float(np.max(np.abs(eig))))
        return vec[:, keep] * np.sqrt(eig[keep])


def q_n(
    cov: PairwiseCovariance,
    mc: Optional[int] = None,
    stream=None,
    method: str = "mc",
) -> OrthantEstimate:
    """
    P(W^(k) < -d_E^(k)^2 for all k), W ~ N(0, R_w).

    "mc" draws from `stream`; "genz" is a cross-check whose randomized lattice uses scipy's own
    random state, so only "mc" is reproducible bit for bit.
    """
    thr = np.asarray(cov.thresholds, dtype=float)
    require(np.all(np.isfinite(thr)), "thresholds must be finite")

    if cov.n == 1:
        var = float(cov.r_w[0, 0])
        if var <= 0:
            return OrthantEstimate(float(0.0 > -thr[0]), 0.0, "exact")
        return OrthantEstimate(float(stats.norm.cdf(-thr[0] / math.sqrt(var))), 0.0, "exact")

    mc = mc or Config().defaults["orthant_samples"]

    if method == "genz":
        # integration controls are keywords of cdf(), not of the frozen distribution
        prob = stats.multivariate_normal.cdf(
            -thr,
            mean=np.zeros(cov.n),
            cov=cov.r_w,
            allow_singular=True,
            maxpts=max(mc, 1000 * cov.n),
            abseps=1e-7,
            releps=1e-6,
        )
        return OrthantEstimate(float(prob), 0.0, "genz")
    if method != "mc":
        raise InvalidArgument(f"unknown orthant method '{method}', use mc or genz")

    rng = as_generator(stream if stream is not None else RandomStream(Config().defaults["seed"], TAG_ORTHANT))
    factor = gaussian_factor(cov.r_w)
    z = rng.standard_normal((mc, factor.shape[1]))
    w = z @ factor.T
    hits = np.all(w < -thr, axis=1)
    p = float(np.mean(hits))
    return OrthantEstimate(p, math.sqrt(p * (1.0 - p) / mc), "mc")


@dataclass
class UnionBoundResult:
    bound: float
    stderr: float
    n: int
    method: str
    h_samples: int


def _check_budget(m: int, n: int, h_samples: int, budget: Optional[float]):
    budget = Config().defaults["union_budget"] if budget is None else budget
    required = float(m) ** n * (m - 1) * h_samples
    if required > budget:
        raise BudgetExceeded(required, budget, "union bound")


def _pair_distances(channels: np.ndarray, codewords: np.ndarray, amp: float, t: int) -> np.ndarray:
    """d^2 between every (j, i) pair over the first t columns, shape (h, M, M)."""
    s = amp * np.einsum("hri,mit->hmrt", channels, codewords[:, :, :t])
    diff = s[:, :, None] - s[:, None, :]
    return np.sum(np.abs(diff) ** 2, axis=(-2, -1))


def _union_exact_n1(channels, codewords, amp) -> np.ndarray:
    """Per-channel (1/M) sum_j sum_{i != j} Q(sqrt(d^2 / 2))."""
    d2 = _pair_distances(channels, codewords, amp, codewords.shape[-1])
    q = stats.norm.sf(np.sqrt(d2 / 2.0))
    m = codewords.shape[0]
    q[:, np.arange(m), np.arange(m)] = 0.0
    return q.sum(axis=(1, 2)) / m


def _union_noise(channels, codewords, amp, n, t_cum, mc_per_h, rng) -> np.ndarray:
    """
    Per-channel estimate of (1/M) sum_j E_Z[prod_k N_k], N_k counting the competitors that beat
    s_j after k rounds; this equals the sum of n-PWEPs over all competitor tuples.
    """
    h, lr = channels.shape[0], channels.shape[1]
    m = codewords.shape[0]
    t = t_cum[n - 1]
    s = amp * np.einsum("hri,mit->hmrt", channels, codewords[:, :, :t])  # (h, M, lr, t)
    z = complex_gaussian(rng, (h, m, mc_per_h, lr, t))

    total = np.zeros(h)
    for j in range(m):
        y = s[:, j, None] + z[:, j]  # (h, mc, lr, t)
        product = np.ones((h, mc_per_h))
        for k in range(n):
            tk = t_cum[k]
            diff = y[:, :, None, :, :tk] - s[:, None, :, :, :tk]  # (h, mc, i, lr, tk)
            v = np.sum(np.abs(diff) ** 2, axis=(-2, -1))
            v_true = np.sum(np.abs(z[:, j, :, :, :tk]) ** 2, axis=(-2, -1))  # (h, mc)
            beats = v < v_true[..., None]
            beats[..., j] = False
            product *= beats.sum(axis=-1)
        total += product.mean(axis=1)
    return total / m


def _union_enumerate(channels, code, symbol_set, snr, n, mc_per_h, rng) -> np.ndarray:
    m = symbol_set.size
    per_h = np.zeros(channels.shape[0])
    for hi, h in enumerate(channels):
        total = 0.0
        for j in range(m):
            others = [i for i in range(m) if i != j]
            for tup in itertools.product(others, repeat=n):
                cov = build_covariance(h, code, snr, symbol_set.vectors[j], symbol_set.vectors[list(tup)])
                total += q_n(cov, mc_per_h, rng).prob
        per_h[hi] = total / m
    return per_h


def union_bound(
    code: LdcCode,
    symbol_set: SymbolSet,
    snr: SnrLike,
    n: int,
    h_samples: int,
    mc_per_h: int,
    stream: RandomStream,
    lr: int = 1,
    method: str = "noise",
    budget: Optional[float] = None,
) -> UnionBoundResult:
    """Union bound on the n-round joint error probability P_e^(n), averaged over the channel."""
    require(1 <= n <= code.n_rounds, f"round index must be in [1, {code.n_rounds}], got {n}")
    require(symbol_set.k == code.k, "symbol vectors must match the code's symbol count")
    require(h_samples >= 1 and mc_per_h >= 1, "sample budgets must be positive")
    m = symbol_set.size
    _check_budget(m, n, h_samples, budget)

    snr = as_snr(snr)
    amp = math.sqrt(snr.linear / code.lt)
    codewords = code.codeword(symbol_set.vectors)
    t_cum = code.cumulative_lengths

    per_h = []
    for block, start in enumerate(range(0, h_samples, H_BLOCK)):
        count = min(H_BLOCK, h_samples - start)
        rng = stream.trial(block)
        channels = complex_gaussian(rng, (count, lr, code.lt))
        if n == 1:
            prefix_words = codewords[:, :, : t_cum[0]]
            per_h.append(_union_exact_n1(channels, prefix_words, amp))
        elif method == "noise":
            per_h.append(_union_noise(channels, codewords, amp, n, t_cum, mc_per_h, rng))
        elif method == "enumerate":
            per_h.append(_union_enumerate(channels, code, symbol_set, snr, n, mc_per_h, rng))
        else:
            raise InvalidArgument(f"unknown union bound method '{method}', use noise or enumerate")

    values = np.concatenate(per_h)
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    result = UnionBoundResult(
        bound=float(np.mean(values)),
        stderr=stderr,
        n=n,
        method="exact" if n == 1 else method,
        h_samples=h_samples,
    )
    logger.debug("union bound: %s", {"snr_db": snr.db, "n": n, "bound": result.bound})
    return result


def optimal_diversity(lt: int, lr: int, t_cum: int) -> int:
    require(lt >= 1 and lr >= 1 and t_cum >= 1, "arguments must be positive integers")
    return lr * min(t_cum, lt)


@dataclass
class DiversityEstimate:
    slope: float
    stderr: float
    ci_low: float
    ci_high: float
    points: int


def diversity_estimate(
    curve: Sequence, window_db: Optional[float] = None, confidence: float = 0.95
) -> DiversityEstimate:
    """Least-squares slope of -log10(PER) against SNR in decades over the top of the curve."""
    window_db = Config().defaults["high_snr_window_db"] if window_db is None else window_db
    pts = sorted((float(s), float(p)) for s, p in curve)
    require(pts, "empty error-rate curve")
    top = pts[-1][0]
    window = [(s, p) for s, p in pts if s >= top - window_db - 1e-12]
    if len(window) < 3:
        raise InvalidArgument(f"need at least 3 points in the top {window_db} dB, got {len(window)}")
    if any(p <= 0 for _, p in window):
        raise InsufficientTrials("zero packet errors in the high-SNR window; run more trials")

    x = np.array([s / 10.0 for s, _ in window])
    y = -np.log10(np.array([p for _, p in window]))
    fit = stats.linregress(x, y)
    half = float(stats.t.ppf(0.5 + confidence / 2.0, len(window) - 2) * fit.stderr)
    return DiversityEstimate(
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        ci_low=float(fit.slope) - half,
        ci_high=float(fit.slope) + half,
        points=len(window),
    )


def check_criterion2(
    curves: dict,
    lt: int,
    lr: int,
    round_lengths: Sequence[int],
    tol: float = 0.3,
    window_db: Optional[float] = None,
) -> list:
    """Estimated diversity per round against L_r min(T^(n), L_t); curves maps n -> [(snr_db, P_e^(n))]."""
    cumulative = np.cumsum(round_lengths)
    verdicts = []
    for n in sorted(curves):
        target = optimal_diversity(lt, lr, int(cumulative[n - 1]))
        estimate = diversity_estimate(curves[n], window_db)
        verdicts.append(
            {
                "round": n,
                "optimal": target,
                "estimated": estimate.slope,
                "ci": (estimate.ci_low, estimate.ci_high),
                "pass": abs(estimate.slope - target) <= tol,
            }
        )
    return verdicts

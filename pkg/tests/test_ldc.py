import math

import numpy as np
import pytest

from app.channel import RandomStream, SnrPoint, mimo_mutual_info
from app.harq import ProtocolSamples, optimize_ir_rates
from app.ldc import (
    LdcCode,
    PowerLevel,
    certify,
    check_code,
    check_corollary2,
    check_criterion1,
    check_power,
    check_theorem1,
    equivalent_channel,
    known_codes,
    ldc_mutual_info,
    zoo,
)
from app.ldc.rate import (
    avg_rate_ldc,
    avg_rate_ldc_from_samples,
    best_round_partition,
    compositions,
    optimal_ldc_from_samples,
)
from app.utils import CodeNotFound, InvalidArgument

AUDIT_DB = [0.0, 10.0, 20.0]


def _channels(lt=2, lr=1, count=5, seed=21):
    return RandomStream(seed).channels(lt, lr, count)


def test_alamouti_codeword(alamouti):
    a, b = 1 + 2j, -0.5 + 1j
    x = alamouti.codeword([a, b])
    assert np.allclose(x, [[a, -np.conj(b)], [b, np.conj(a)]])


def test_alamouti_first_round_selects_symbols(alamouti):
    first = alamouti.prefix(1)
    assert first.t_total == 1
    assert np.allclose(first.c_mats[:, :, 0], np.eye(2))
    assert not first.has_conjugation


def test_full_prefix_is_the_code(alamouti):
    assert alamouti.prefix(alamouti.n_rounds) is alamouti


def test_prefix_out_of_range(alamouti):
    with pytest.raises(InvalidArgument):
        alamouti.prefix(3)
    with pytest.raises(InvalidArgument):
        alamouti.prefix(0)


def test_round_lengths_must_cover_code():
    c = np.zeros((1, 2, 2), dtype=complex)
    with pytest.raises(InvalidArgument):
        LdcCode("bad", 2, 2, 1, (1,), c, c)


def test_equivalent_channel_shape(alamouti):
    h = _channels(count=1)[0]
    g = equivalent_channel(h, alamouti, 2)
    assert g.matrix.shape == (4, 4)
    # Alamouti: G^T G = |h|^2 I
    assert np.allclose(g.matrix.T @ g.matrix, np.sum(np.abs(h) ** 2) * np.eye(4))


@pytest.mark.parametrize("n", [1, 2])
def test_alamouti_is_lossless(alamouti, n):
    for h in _channels(count=10):
        for snr in (1.0, 10.0, 100.0):
            assert ldc_mutual_info(h, alamouti, snr, n) == pytest.approx(mimo_mutual_info(h, snr), abs=1e-9)


def test_sm_repetition_second_round_loses_capacity():
    code = zoo("sm_repetition")
    for h in _channels(count=10):
        g = float(np.sum(np.abs(h) ** 2))
        value = ldc_mutual_info(h, code, 10.0, 2)
        assert value == pytest.approx(0.5 * math.log2(1 + 10.0 * g), abs=1e-9)
        assert value < mimo_mutual_info(h, 10.0)


def test_cdd_second_round_by_hand():
    code = zoo("cdd")
    snr = 10.0
    for h in _channels(count=10):
        h1, h2 = h[0]
        expected = 0.5 * math.log2(1 + snr / 2 * abs(h1 + h2) ** 2) + 0.5 * math.log2(
            1 + snr / 2 * abs(h1 - h2) ** 2
        )
        assert ldc_mutual_info(h, code, snr, 2) == pytest.approx(expected, abs=1e-9)


def test_cdd_is_lossless_at_quadrature_channel():
    # |h1 + h2| = |h1 - h2| makes the circulant equivalent channel a scaled unitary
    h = np.array([[1.0, 1j]])
    for snr in (0.5, 10.0, 100.0):
        for n in (1, 2):
            assert ldc_mutual_info(h, zoo("cdd"), snr, n) == pytest.approx(mimo_mutual_info(h, snr), abs=1e-9)


@pytest.mark.parametrize("name", ["alamouti", "sm_repetition", "cdd", "golden", "spatial_multiplexing"])
@pytest.mark.parametrize("lr", [1, 2])
def test_ldc_never_beats_mimo_capacity(name, lr):
    code = zoo(name)
    for h in _channels(lt=code.lt, lr=lr, count=50, seed=33):
        for snr in (1.0, 10.0, 100.0):
            for n in range(1, code.n_rounds + 1):
                assert ldc_mutual_info(h, code, snr, n) <= mimo_mutual_info(h, snr) + 1e-9


def test_antenna_switching_bounded_after_last_round():
    # single rounds put all power on one antenna and can exceed C_mimo; the full cycle cannot
    code = zoo("antenna_switching")
    for h in _channels(count=50, seed=34):
        assert ldc_mutual_info(h, code, 10.0, code.n_rounds) <= mimo_mutual_info(h, 10.0) + 1e-9


@pytest.mark.parametrize(
    "name, expected",
    [
        ("alamouti", [True, True]),
        ("antenna_switching", [False, False]),
        ("sm_repetition", [True, False]),
        ("cdd", [True, False]),
        ("golden", [True, True]),
    ],
)
def test_criterion1_verdicts(name, expected, audit_stream):
    report = check_criterion1(zoo(name), snr_db=AUDIT_DB, mc=50, lr=1, stream=audit_stream)
    assert [v.criterion1_pass for v in report.per_round] == expected


def test_criterion1_reports_gap(audit_stream):
    report = check_criterion1(zoo("cdd"), snr_db=AUDIT_DB, mc=50, lr=1, stream=audit_stream)
    assert report.verdict(1).mi_gap < 1e-9
    assert report.verdict(2).mi_gap > 1e-3
    assert not report.criterion1_pass


def test_theorem1_golden():
    cert = check_theorem1(zoo("golden"), lr=2)
    assert cert.applicable
    assert all(r < 1e-9 for r in cert.residuals)
    assert cert.certifies


def test_theorem1_not_applicable_below_lt_receive_antennas(alamouti):
    cert = check_theorem1(alamouti, lr=1)
    assert not cert.applicable
    assert not cert.certifies


def test_theorem1_unitary_by_construction():
    q, _ = np.linalg.qr(_channels(lt=4, lr=4, count=1, seed=5)[0])
    # vec(C_k) = column k of a unitary matrix
    c = np.stack([q[:, k].reshape(2, 2, order="F") for k in range(4)])
    code = LdcCode("unitary", 2, 2, 4, (2,), c, np.zeros_like(c))
    cert = check_theorem1(code, lr=2)
    assert cert.residuals[0] < 1e-12


def test_theorem1_random_code_fails():
    rng = np.random.default_rng(8)
    c = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
    d = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
    cert = check_theorem1(LdcCode("random", 2, 2, 4, (2,), c, d), lr=2)
    assert cert.residuals[0] > 0.1
    assert not cert.passed


def test_corollary2_verdicts():
    golden = check_corollary2(zoo("golden"), lr=2)
    assert golden.round_passes == [True, True]

    sm = check_corollary2(zoo("spatial_multiplexing"), lr=2)
    assert sm.round_passes == [True]

    cdd = check_corollary2(zoo("cdd"))
    assert cdd.round_passes == [True, False]


def test_corollary2_needs_plain_symbols(alamouti):
    cert = check_corollary2(alamouti)
    assert cert.residuals is None
    assert not cert.applicable
    assert not cert.passed


@pytest.mark.parametrize("name", ["alamouti", "sm_repetition", "antenna_switching", "cdd", "golden"])
def test_zoo_meets_per_round_power(name):
    assert check_power(zoo(name), PowerLevel.PER_ROUND).passed


def test_zero_code_fails_power():
    c = np.zeros((2, 2, 2), dtype=complex)
    assert not check_power(LdcCode("zero", 2, 2, 2, (1, 1), c, c)).passed


def test_certify_collects_everything(alamouti, audit_stream):
    report = certify(alamouti, snr_db=AUDIT_DB, mc=20, lr=1, stream=audit_stream)
    assert report.criterion1_pass
    assert report.theorem1_applicable is False
    assert report.corollary2_applicable is False
    assert set(report.power) == {str(level) for level in PowerLevel}
    assert report.verdict(1).theorem1_residual is not None


def test_zoo_lookup():
    assert set(known_codes()) >= {"alamouti", "sm_repetition", "antenna_switching", "cdd", "golden"}
    assert check_code("SM-rep")
    assert zoo("as").name == "antenna_switching"
    assert zoo("sm_repetition", n_rounds=3).n_rounds == 3


def test_unknown_code_lists_known_ones():
    with pytest.raises(CodeNotFound) as err:
        zoo("nope")
    assert "alamouti" in str(err.value)
    assert "alamouti" in err.value.known


def test_single_round_ldc_rate_is_outage_optimum(alamouti, miso_samples):
    ldc = avg_rate_ldc_from_samples(alamouti, miso_samples, 1)
    ir = optimize_ir_rates(miso_samples.capacity(), 1)
    assert ldc.avg_rate == pytest.approx(ir.avg_rate, abs=1e-6)
    assert optimal_ldc_from_samples(miso_samples, 1).avg_rate == pytest.approx(ir.avg_rate)


def test_code_ordering_on_shared_draws(alamouti, miso_samples):
    rates = {
        name: avg_rate_ldc_from_samples(zoo(name), miso_samples, 2).avg_rate
        for name in ("alamouti", "cdd", "sm_repetition")
    }
    optimal = optimal_ldc_from_samples(miso_samples, 2).avg_rate
    assert rates["alamouti"] == pytest.approx(optimal, abs=1e-6)
    assert rates["alamouti"] >= rates["cdd"] >= rates["sm_repetition"]


def test_fixed_rate_evaluation(alamouti, miso_samples):
    result = avg_rate_ldc_from_samples(alamouti, miso_samples, 2, optimize_r=False, rate=2.0)
    assert result.optimal_rates.rates == pytest.approx((2.0, 1.0))
    with pytest.raises(InvalidArgument):
        avg_rate_ldc_from_samples(alamouti, miso_samples, 2, optimize_r=False)


def test_ldc_rate_needs_enough_samples(alamouti, stream):
    with pytest.raises(InvalidArgument):
        avg_rate_ldc(alamouti, SnrPoint(10.0), 2, 10, stream)


def test_compositions():
    assert list(compositions(4, 2)) == [(1, 3), (2, 2), (3, 1)]
    assert list(compositions(3, 3)) == [(1, 1, 1)]


def test_round_partition_search(stream):
    best, result, table = best_round_partition(SnrPoint.from_db(10.0), 2, 1, 3, 2, 2000, stream)
    assert set(table) == {(1, 2), (2, 1)}
    assert table[best] == max(table.values())
    assert result.extras["round_lengths"] == list(best)


@pytest.mark.slow
def test_antenna_switching_is_far_from_optimal(stream):
    samples = ProtocolSamples.draw(SnrPoint.from_db(10.0), 2, 1, 20_000, stream)
    switching = avg_rate_ldc_from_samples(zoo("antenna_switching"), samples, 2).avg_rate
    alamouti = avg_rate_ldc_from_samples(zoo("alamouti"), samples, 2).avg_rate
    assert alamouti > switching

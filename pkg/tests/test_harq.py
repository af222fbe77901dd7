import itertools
import math

import numpy as np
import pytest
from scipy import integrate

from app.channel import CapacitySampleSet, RandomStream, SnrPoint, mimo_mutual_info
from app.harq import (
    ProtocolSamples,
    RoundRates,
    avg_rate_by_round,
    avg_rate_from_probs,
    cc_equiv_capacity,
    cc_rate_from_samples,
    ergodic_capacity,
    ir_equiv_capacity,
    miso_cc_avg_rate,
    miso_cc_optimum,
    miso_ir_avg_rate,
    no_feedback_rate,
    optimize_cc_rate,
    optimize_ir_rates,
)
from app.utils import InvalidArgument


def test_avg_rate_single_round():
    assert avg_rate_from_probs(RoundRates((2.0,)), [0.5]) == pytest.approx(1.0)


def test_avg_rate_two_rounds():
    rates = RoundRates((2.0, 1.0))
    assert avg_rate_from_probs(rates, [0.5, 0.9]) == pytest.approx(1.4)
    assert avg_rate_by_round(rates, [0.5, 0.9]) == pytest.approx(1.4)


def test_avg_rate_without_outage_is_first_rate():
    rates = RoundRates((3.0, 1.5, 1.0))
    assert avg_rate_from_probs(rates, [1.0, 1.0, 1.0]) == pytest.approx(3.0)


def test_decreasing_success_probs_rejected():
    with pytest.raises(InvalidArgument):
        avg_rate_from_probs(RoundRates((2.0, 1.0)), [0.9, 0.5])


def test_increasing_rates_rejected():
    with pytest.raises(InvalidArgument):
        RoundRates((1.0, 2.0))


def test_rate_conventions():
    rates = RoundRates((2.0, 1.0))
    assert rates.rate(0) == math.inf
    assert rates.rate(3) == 0.0
    assert list(rates.decrements) == [1.0, 1.0]


def test_cc_first_round_is_plain_mimo(stream):
    h = RandomStream(3).channels(2, 2, 1)[0]
    assert cc_equiv_capacity(h, 5.0, 1) == pytest.approx(mimo_mutual_info(h, 5.0))
    assert ir_equiv_capacity(h, 5.0) == pytest.approx(mimo_mutual_info(h, 5.0))


def test_cc_second_round_miso():
    h = np.array([[0.4 - 0.2j, 1.1 + 0.3j]])
    g = float(np.sum(np.abs(h) ** 2))
    assert cc_equiv_capacity(h, 10.0, 2) == pytest.approx(0.5 * math.log2(1 + 10.0 * g))


def test_cc_round_zero_rejected():
    with pytest.raises(InvalidArgument):
        cc_equiv_capacity(np.array([[1.0, 0.0]]), 1.0, 0)


def test_ir_single_round_on_four_samples():
    result = optimize_ir_rates(CapacitySampleSet(values=[1.0, 2.0, 3.0, 4.0], seed=0), 1)
    assert result.optimal_rates.rates == (2.0,)
    assert result.avg_rate == pytest.approx(1.5)
    assert result.success_probs == [0.75]


def _brute_force_ir(values, n_max):
    values = np.sort(np.asarray(values))
    candidates = np.unique(np.concatenate(([0.0], values)))
    best = 0.0
    for combo in itertools.combinations_with_replacement(candidates[::-1], n_max):
        rates = RoundRates(tuple(sorted(combo, reverse=True)))
        probs = [np.mean(values >= r) for r in rates.rates]
        best = max(best, avg_rate_from_probs(rates, probs))
    return best


@pytest.mark.parametrize("n_max", [2, 3])
def test_ir_matches_exhaustive_search(n_max):
    values = np.random.default_rng(4).exponential(2.0, size=9)
    result = optimize_ir_rates(CapacitySampleSet(values=values, seed=4), n_max)
    assert result.avg_rate == pytest.approx(_brute_force_ir(values, n_max))


def test_ir_reported_probs_match_rates(miso_samples):
    capacity = miso_samples.capacity()
    result = optimize_ir_rates(capacity, 3)
    expected = [np.mean(capacity.values >= r) for r in result.optimal_rates.rates]
    assert result.success_probs == pytest.approx(expected)
    assert avg_rate_from_probs(result.optimal_rates, result.success_probs) == pytest.approx(result.avg_rate)


def test_ir_empty_samples_rejected():
    with pytest.raises(InvalidArgument):
        optimize_ir_rates(CapacitySampleSet(values=[], seed=0), 1)


def test_cc_and_ir_coincide_for_one_round(miso_samples):
    cc = cc_rate_from_samples(miso_samples, 1)
    ir = optimize_ir_rates(miso_samples.capacity(), 1)
    assert cc.avg_rate == pytest.approx(ir.avg_rate)
    assert no_feedback_rate(miso_samples.capacity()).avg_rate == pytest.approx(ir.avg_rate)


def test_ir_beats_cc(miso_samples):
    for n_max in (2, 3):
        ir = optimize_ir_rates(miso_samples.capacity(), n_max)
        cc = cc_rate_from_samples(miso_samples, n_max)
        assert ir.avg_rate >= cc.avg_rate - 1e-12


def test_more_rounds_never_hurt(miso_samples):
    ir = [optimize_ir_rates(miso_samples.capacity(), n).avg_rate for n in (1, 2, 4)]
    cc = [cc_rate_from_samples(miso_samples, n).avg_rate for n in (1, 2, 4)]
    assert ir == sorted(ir)
    assert cc == sorted(cc)


def test_cc_rates_follow_common_rate(miso_samples):
    result = cc_rate_from_samples(miso_samples, 3)
    r = result.extras["common_rate"]
    assert result.optimal_rates.rates == pytest.approx((r, r / 2, r / 3))


def test_ergodic_zero_snr(stream):
    assert ergodic_capacity(SnrPoint(0.0), 2, 1, 1000, stream) == 0.0


def test_ergodic_siso_matches_quadrature(stream):
    expected, _ = integrate.quad(lambda x: math.log2(1 + 10.0 * x) * math.exp(-x), 0, math.inf)
    value = ergodic_capacity(SnrPoint(10.0), 1, 1, 50_000, stream)
    assert value == pytest.approx(expected, rel=0.01)


def test_too_few_samples_rejected(stream):
    with pytest.raises(InvalidArgument):
        optimize_cc_rate(SnrPoint(10.0), 2, 1, 2, 10, stream)


def test_miso_cc_single_round_equals_ir_closed_form():
    snr = SnrPoint.from_db(10.0)
    for r in (0.5, 2.0, 3.5):
        assert miso_cc_avg_rate(r, snr, 2, 1) == pytest.approx(miso_ir_avg_rate(RoundRates((r,)), snr, 2))


def _check_miso_closed_forms(db, count, rel, stream):
    snr = SnrPoint.from_db(db)
    samples = ProtocolSamples.draw(snr, 2, 1, count, stream)
    ir = optimize_ir_rates(samples.capacity(), 4)
    assert miso_ir_avg_rate(ir.optimal_rates, snr, 2) == pytest.approx(ir.avg_rate, rel=rel)

    _, value = miso_cc_optimum(snr, 2, 4)
    cc = cc_rate_from_samples(samples, 4)
    assert value == pytest.approx(cc.avg_rate, rel=rel)
    assert value >= miso_cc_avg_rate(cc.extras["common_rate"], snr, 2, 4) - 1e-9


def test_miso_closed_form_matches_samples(stream):
    _check_miso_closed_forms(10.0, 20_000, 0.02, stream)


@pytest.mark.slow
@pytest.mark.parametrize("db", [0.0, 10.0, 20.0])
def test_miso_closed_forms_across_snr(db, stream):
    _check_miso_closed_forms(db, 100_000, 0.01, stream)


def test_protocol_samples_shape_checked():
    with pytest.raises(InvalidArgument):
        ProtocolSamples(snr=1.0, lt=2, lr=1, channels=np.zeros((4, 2, 2), dtype=complex))


def test_protocol_ordering_on_shared_draws(miso_samples):
    from app.harq import ergodic_from_samples
    from app.ldc.rate import optimal_ldc_from_samples

    ergodic, _ = ergodic_from_samples(miso_samples)
    ir = optimize_ir_rates(miso_samples.capacity(), 4).avg_rate
    optimal_ldc = optimal_ldc_from_samples(miso_samples, 4).avg_rate
    cc = cc_rate_from_samples(miso_samples, 4).avg_rate
    single = no_feedback_rate(miso_samples.capacity()).avg_rate
    assert ergodic >= ir >= optimal_ldc - 1e-12
    assert optimal_ldc >= cc >= single


def _empirical_avg_rate(values, rates):
    probs = [float(np.mean(values >= r)) for r in rates]
    return avg_rate_from_probs(RoundRates(tuple(rates)), probs)


@pytest.mark.parametrize("eps", [1e-6, 1e-3, 0.05])
def test_ir_optimum_survives_perturbation(miso_samples, eps):
    capacity = miso_samples.capacity()
    result = optimize_ir_rates(capacity, 3)
    best = list(result.optimal_rates.rates)
    assert _empirical_avg_rate(capacity.values, best) == pytest.approx(result.avg_rate)
    for n in range(len(best)):
        for step in (eps, -eps):
            moved = list(best)
            moved[n] += step
            if moved[n] < 0 or any(a < b for a, b in zip(moved, moved[1:])):
                continue
            assert _empirical_avg_rate(capacity.values, moved) <= result.avg_rate + 1e-12


def test_ir_with_ten_rounds_nears_ergodic(stream):
    from app.harq import ergodic_from_samples

    samples = ProtocolSamples.draw(SnrPoint.from_db(10.0), 2, 2, 20_000, stream)
    ergodic, _ = ergodic_from_samples(samples)
    four = optimize_ir_rates(samples.capacity(), 4).avg_rate / ergodic
    ten = optimize_ir_rates(samples.capacity(), 10).avg_rate / ergodic
    # about 0.94 at ten rounds: the remaining gap is the price of a finite deadline
    assert four < ten <= 1.0
    assert ten > 0.92

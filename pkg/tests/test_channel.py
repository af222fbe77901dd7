import math

import numpy as np
import pytest
from scipy import integrate

from app.channel import (
    CapacitySampleSet,
    ChannelMatrix,
    RandomStream,
    SnrPoint,
    capacity_samples,
    chi2_cdf,
    kolmogorov_distance,
    mimo_mutual_info,
    mimo_mutual_info_batch,
    miso_capacity_cdf,
    sample_channel,
    sample_channels,
)
from app.utils import InvalidArgument, parse_db_grid


def test_same_seed_same_channels():
    a = RandomStream(5).channels(2, 1, 10)
    b = RandomStream(5).channels(2, 1, 10)
    assert np.array_equal(a, b)


def test_draw_does_not_depend_on_count():
    short = RandomStream(5).channels(2, 2, 10)
    long = RandomStream(5).channels(2, 2, 5000)
    assert np.array_equal(short, long[:10])


def test_tags_give_independent_streams():
    a = RandomStream(5, 0).channels(2, 1, 10)
    b = RandomStream(5, 1).channels(2, 1, 10)
    assert not np.allclose(a, b)


def test_channel_shape(stream):
    h = sample_channel(2, 2, stream)
    assert isinstance(h, ChannelMatrix)
    assert (h.lr, h.lt) == (2, 2)
    assert sample_channels(3, 2, 7, stream).shape == (7, 2, 3)


def test_zero_antennas_rejected(stream):
    with pytest.raises(InvalidArgument):
        sample_channel(0, 1, stream)


def test_single_draws_are_indexed(stream):
    first = sample_channel(2, 2, stream, 0).entries
    assert np.array_equal(first, sample_channel(2, 2, stream, 0).entries)
    assert not np.allclose(first, sample_channel(2, 2, stream, 1).entries)

    batch = stream.channels(2, 2, 5000)
    for i in (0, 1, 4095, 4096, 4999):
        assert np.array_equal(sample_channel(2, 2, stream, i).entries, batch[i])


def test_generator_draws_advance():
    rng = np.random.default_rng(3)
    assert not np.allclose(sample_channel(2, 1, rng).entries, sample_channel(2, 1, rng).entries)


def test_unit_variance_entries():
    h = RandomStream(11).channels(1, 1, 100_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)
    assert abs(np.mean(h)) < 0.02


def test_channel_matrix_is_read_only():
    h = ChannelMatrix(np.ones((1, 2)))
    with pytest.raises(ValueError):
        h.entries[0, 0] = 2.0


def test_mutual_info_zero_snr():
    assert mimo_mutual_info(np.array([[0.3 + 1j, -2.0]]), SnrPoint(0.0)) == 0.0


def test_mutual_info_scalar_channel():
    assert mimo_mutual_info(np.array([[1.0]]), 1.0) == pytest.approx(1.0)


def test_mutual_info_miso_by_hand():
    assert mimo_mutual_info(np.array([[1.0, 1.0]]), 10.0) == pytest.approx(math.log2(11.0))


def test_mutual_info_batch_matches_single(stream):
    channels = sample_channels(2, 3, 20, stream)
    batch = mimo_mutual_info_batch(channels, 5.0)
    single = [mimo_mutual_info(h, 5.0) for h in channels]
    assert np.allclose(batch, single)


def test_mutual_info_uses_smaller_gram(stream):
    # lr > lt and lr < lt must agree with the direct log-det
    for lt, lr in ((2, 3), (3, 2)):
        h = sample_channels(lt, lr, 1, stream)[0]
        direct = np.log2(np.linalg.det(np.eye(lr) + 4.0 / lt * h @ h.conj().T).real)
        assert mimo_mutual_info(h, 4.0) == pytest.approx(direct)


def test_chi2_cdf_lower_endpoint():
    assert chi2_cdf(0.0, 3) == 0.0


@pytest.mark.parametrize("g", [0.1, 0.5, 1.0, 3.0])
def test_chi2_cdf_single_antenna_is_exponential(g):
    assert chi2_cdf(g, 1) == pytest.approx(1.0 - math.exp(-g), abs=1e-12)


def test_chi2_cdf_matches_quadrature():
    value, _ = integrate.quad(lambda g: g * math.exp(-g), 0.0, 2.0, epsabs=1e-13)
    assert chi2_cdf(2.0, 2) == pytest.approx(value, abs=1e-10)


def test_chi2_cdf_negative_rejected():
    with pytest.raises(InvalidArgument):
        chi2_cdf(-0.1, 2)


def test_miso_cdf_edges():
    assert miso_capacity_cdf(0.0, 10.0, 2) == 0.0
    assert miso_capacity_cdf(1.0, 0.0, 2) == 1.0
    assert miso_capacity_cdf(1.0, 1.0, 1) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_empirical_cdf_and_survival():
    samples = CapacitySampleSet(values=[4.0, 1.0, 3.0, 2.0], seed=0)
    assert list(samples.values) == [1.0, 2.0, 3.0, 4.0]
    assert samples.cdf(2.0) == pytest.approx(0.5)
    assert samples.survival(2.0) == pytest.approx(0.75)
    assert samples.survival(0.0) == pytest.approx(1.0)


def test_empirical_miso_cdf_matches_closed_form(stream):
    snr = SnrPoint.from_db(10.0)
    samples = capacity_samples(snr, 2, 1, 20_000, stream)
    distance = kolmogorov_distance(samples.values, lambda r: miso_capacity_cdf(r, snr, 2))
    assert distance < 0.02


def test_snr_point_round_trip():
    assert SnrPoint.from_db(10.0).linear == pytest.approx(10.0)
    assert SnrPoint(100.0).db == pytest.approx(20.0)
    with pytest.raises(InvalidArgument):
        SnrPoint(-1.0)


def test_db_grid_parsing():
    assert parse_db_grid("0:4:20") == [0.0, 4.0, 8.0, 12.0, 16.0, 20.0]
    assert parse_db_grid("0,10,20") == [0.0, 10.0, 20.0]
    with pytest.raises(InvalidArgument):
        parse_db_grid("10,5")
    with pytest.raises(InvalidArgument):
        parse_db_grid("")

import numpy as np
import pytest

from app.channel import TAG_AUDIT, TAG_CHANNEL, RandomStream, SnrPoint
from app.harq import ProtocolSamples
from app.ldc import zoo

SEED = 1729


@pytest.fixture
def stream():
    return RandomStream(SEED, TAG_CHANNEL)


@pytest.fixture
def audit_stream():
    return RandomStream(SEED, TAG_AUDIT)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def alamouti():
    return zoo("alamouti")


@pytest.fixture
def miso_samples(stream):
    """2x1 draws at 10 dB shared by the rate tests."""
    return ProtocolSamples.draw(SnrPoint.from_db(10.0), 2, 1, 4000, stream)

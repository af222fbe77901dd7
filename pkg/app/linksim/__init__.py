from .convcode import BlockInterleaver, ConvolutionalCode
from .detector import MlDetector, ml_detect
from .modulation import SymbolSet, qpsk_demap, qpsk_map
from .simulator import (
    LinkConfig,
    LinkSimulator,
    SimStats,
    SnrPointStats,
    make_link_config,
    run_coded,
    run_uncoded,
)

__all__ = [
    "BlockInterleaver",
    "ConvolutionalCode",
    "MlDetector",
    "ml_detect",
    "SymbolSet",
    "qpsk_demap",
    "qpsk_map",
    "LinkConfig",
    "LinkSimulator",
    "SimStats",
    "SnrPointStats",
    "make_link_config",
    "run_coded",
    "run_uncoded",
]

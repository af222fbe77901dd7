from .code import (
    LdcCode,
    RealEquivalentChannel,
    equivalent_channel,
    ldc_mutual_info,
    ldc_mutual_info_batch,
    prefix,
)
from .certify import (
    OptimalityReport,
    PowerLevel,
    certify,
    check_corollary2,
    check_criterion1,
    check_power,
    check_theorem1,
)
from .loader import load_code, save_code
from .rate import avg_rate_ldc, best_round_partition, optimal_ldc_avg_rate
from .zoo import check_code, known_codes, zoo

__all__ = [
    "LdcCode",
    "RealEquivalentChannel",
    "equivalent_channel",
    "ldc_mutual_info",
    "ldc_mutual_info_batch",
    "prefix",
    "OptimalityReport",
    "PowerLevel",
    "certify",
    "check_corollary2",
    "check_criterion1",
    "check_power",
    "check_theorem1",
    "load_code",
    "save_code",
    "avg_rate_ldc",
    "best_round_partition",
    "optimal_ldc_avg_rate",
    "check_code",
    "known_codes",
    "zoo",
]

from .channel import RandomStream, SnrPoint, capacity_samples, mimo_mutual_info
from .harq import RoundRates, optimize_cc_rate, optimize_ir_rates


__all__ = [
    "RandomStream",
    "SnrPoint",
    "capacity_samples",
    "mimo_mutual_info",
    "RoundRates",
    "optimize_cc_rate",
    "optimize_ir_rates",
]

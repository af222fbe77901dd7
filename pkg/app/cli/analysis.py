from typing import Optional

import click
import numpy as np

from ..channel import (
    TAG_CHANNEL,
    SnrPoint,
    capacity_samples,
    kolmogorov_distance,
    miso_capacity_cdf,
)
from ..config import Config, Subcommand
from ..harq import (
    AvgRateResult,
    ProtocolSamples,
    cc_rate_from_samples,
    ergodic_from_samples,
    no_feedback_rate,
    optimize_ir_rates,
)
from ..ldc.rate import avg_rate_ldc_from_samples, optimal_ldc_from_samples
from ..logger import Logger
from ..report import CsvReport
from ..utils import InvalidArgument
from .utils import code_options, common_options, emit, guarded, load_run_code, resolve, stream_for

logger = Logger().get_logger(__name__)

PROTOCOLS = ("ir", "cc", "optimal-ldc", "no-feedback", "ergodic")
LDC_PREFIX = "ldc:"

CDF_QUANTILE = 0.999


@click.command("capacity-cdf")
@common_options
@click.option("--lt", type=int, default=None)
@click.option("--lr", type=int, default=None)
@click.option("--samples", type=int, default=None, help="Channel draws per SNR point.")
@click.option("--rate-points", "rate_points", type=int, default=None)
@guarded
def capacity_cdf(config_path, plot_script, **flags):
    """Empirical CDF of the MIMO capacity, with the chi-square closed form for MISO."""
    run_config = resolve(
        Subcommand.CAPACITY_CDF,
        config_path,
        flags,
        {
            "lt": 2,
            "lr": 1,
            "snr_db": "10",
            "samples": Config().defaults["capacity_samples"],
            "rate_points": 50,
            "n_max": None,
        },
        trials_key="samples",
    )
    lt, lr = run_config["lt"], run_config["lr"]
    miso = lr == 1

    header = ["snr_db", "rate", "empirical_cdf"] + (["closed_form_cdf"] if miso else [])
    report = CsvReport(run_config, header)
    for db in run_config["snr_db"]:
        snr = SnrPoint.from_db(db)
        samples = capacity_samples(snr, lt, lr, run_config["samples"], stream_for(run_config, TAG_CHANNEL))
        upper = float(np.quantile(samples.values, CDF_QUANTILE))
        rates = np.linspace(0.0, upper, run_config["rate_points"])
        empirical = samples.cdf(rates)
        if miso:
            closed = np.atleast_1d(miso_capacity_cdf(rates, snr, lt))
            distance = kolmogorov_distance(samples.values, lambda r: miso_capacity_cdf(r, snr, lt))
            logger.info("capacity CDF check: %s", {"snr_db": db, "kolmogorov_distance": distance})
            report.add_rows([db, float(r), float(e), float(c)] for r, e, c in zip(rates, empirical, closed))
        else:
            report.add_rows([db, float(r), float(e)] for r, e in zip(rates, empirical))

    emit(report, run_config, plot_script, "rate", header[2:])


def _parse_protocols(protocols) -> list:
    parsed = []
    for p in protocols:
        p = p.strip().lower()
        if p in PROTOCOLS or (p.startswith(LDC_PREFIX) and len(p) > len(LDC_PREFIX)):
            parsed.append(p)
        else:
            raise InvalidArgument(
                f"unknown protocol '{p}', use one of {', '.join(PROTOCOLS)} or ldc:<code>"
            )
    return parsed


def evaluate_protocol(protocol: str, samples: ProtocolSamples, n_max: int, run_config) -> tuple:
    """(avg_rate, stderr, first-round rate or None) for one protocol on shared samples."""
    if protocol == "ergodic":
        mean, stderr = ergodic_from_samples(samples)
        return mean, stderr, None

    result: Optional[AvgRateResult] = None
    if protocol == "ir":
        result = optimize_ir_rates(samples.capacity(), n_max)
    elif protocol == "cc":
        result = cc_rate_from_samples(samples, n_max)
    elif protocol == "no-feedback":
        result = no_feedback_rate(samples.capacity())
    elif protocol == "optimal-ldc":
        result = optimal_ldc_from_samples(samples, n_max)
    else:
        code = load_run_code(run_config, name=protocol[len(LDC_PREFIX):], n_rounds=n_max)
        # fixed-length codes stop at their own last round
        rounds = min(n_max, code.n_rounds)
        if rounds < n_max:
            logger.info("deadline clamped to code rounds: %s", {"code": code.name, "n_max": n_max, "rounds": rounds})
        result = avg_rate_ldc_from_samples(code, samples, rounds)
    return result.avg_rate, result.stderr, result.first_rate


@click.command("avg-rate")
@common_options
@code_options
@click.option("--protocol", "protocols", multiple=True,
              help="ir, cc, ldc:<code>, optimal-ldc, no-feedback or ergodic; repeatable.")
@click.option("--lt", type=int, default=None)
@click.option("--lr", type=int, default=None)
@click.option("--samples", type=int, default=None, help="Channel draws shared by all protocols.")
@guarded
def avg_rate(config_path, plot_script, protocols, **flags):
    """Optimal long-term average rate per protocol on one shared channel sample set."""
    flags["protocols"] = ",".join(protocols) if protocols else None
    run_config = resolve(
        Subcommand.AVG_RATE,
        config_path,
        flags,
        {
            "lt": 2,
            "lr": 1,
            "n_max": 4,
            "snr_db": "0:4:20",
            "samples": Config().defaults["capacity_samples"],
            "protocols": "ergodic,ir,optimal-ldc,cc,no-feedback",
            "code": None,
            "code_file": None,
        },
        trials_key="samples",
    )
    protocols = _parse_protocols(run_config["protocols"])
    n_max = run_config["n_max"]

    report = CsvReport(run_config, ["snr_db", "protocol", "avg_rate", "stderr", "first_rate"])
    for db in run_config["snr_db"]:
        # every SNR point reuses the same channel draws
        samples = ProtocolSamples.draw(
            SnrPoint.from_db(db),
            run_config["lt"],
            run_config["lr"],
            run_config["samples"],
            stream_for(run_config, TAG_CHANNEL),
        )
        for protocol in protocols:
            rate, stderr, first = evaluate_protocol(protocol, samples, n_max, run_config)
            report.add_row([db, protocol, rate, stderr, first])
            logger.debug("protocol evaluated: %s", {"snr_db": db, "protocol": protocol, "avg_rate": rate})

    emit(report, run_config, plot_script, "snr_db", ["avg_rate"])

import click

from ..channel import TAG_AUDIT, TAG_CHANNEL, SnrPoint
from ..config import Config, Subcommand
from ..ldc import PowerLevel, certify
from ..ldc.rate import best_round_partition
from ..logger import Logger
from ..report import CsvReport
from .utils import code_options, common_options, emit, guarded, load_run_code, resolve, stream_for

logger = Logger().get_logger(__name__)


@click.command("check-ldc")
@common_options
@code_options
@click.option("--lr", type=int, default=None, help="Receive antennas for the audit (default 1).")
@click.option("--samples", type=int, default=None, help="Audit channel draws.")
@click.option("--search-partitions/--no-search-partitions", "search_partitions", default=None,
              help="Also search round partitions of the code length for the lossless reference.")
@guarded
def check_ldc(config_path, plot_script, **flags):
    """Criterion-1 audit, unitarity residuals and power checks for one code."""
    defaults = Config().defaults
    run_config = resolve(
        Subcommand.CHECK_LDC,
        config_path,
        flags,
        {
            "lr": 1,
            "samples": defaults["audit_samples"],
            "snr_db": ",".join(str(s) for s in defaults["audit_snr_db"]),
            "n_max": None,
            "code": None,
            "code_file": None,
            "search_partitions": False,
        },
        trials_key="samples",
    )
    code = load_run_code(run_config, n_rounds=run_config.get("n_max"))
    report = certify(
        code,
        snr_db=run_config["snr_db"],
        mc=run_config["samples"],
        lr=run_config["lr"],
        stream=stream_for(run_config, TAG_AUDIT),
    )

    levels = [str(level) for level in PowerLevel]
    header = [
        "round",
        "criterion1_pass",
        "mi_gap",
        "theorem1_residual",
        "theorem1_applicable",
        "corollary2_residual",
        "corollary2_applicable",
    ] + [f"power_{level.replace('-', '_')}" for level in levels]
    csv = CsvReport(dict(run_config, code_name=code.name), header)
    for verdict in report.per_round:
        power = [report.power[level].residuals[verdict.round - 1] for level in levels]
        csv.add_row(
            [
                verdict.round,
                verdict.criterion1_pass,
                verdict.mi_gap,
                verdict.theorem1_residual,
                report.theorem1_applicable,
                verdict.corollary2_residual if verdict.corollary2_residual is not None else "n/a",
                report.corollary2_applicable,
            ]
            + power
        )
    emit(csv, run_config, plot_script, "round", ["mi_gap"])

    if run_config["search_partitions"]:
        _search_partitions(code, run_config)


def _search_partitions(code, run_config):
    n_max = run_config.get("n_max") or code.n_rounds
    db = run_config["snr_db"][len(run_config["snr_db"]) // 2]
    best, result, table = best_round_partition(
        SnrPoint.from_db(db),
        code.lt,
        run_config["lr"],
        code.t_total,
        n_max,
        max(run_config["samples"], Config().defaults["capacity_samples"]),
        stream_for(run_config, TAG_CHANNEL),
    )
    csv = CsvReport(dict(run_config, partition_snr_db=db), ["round_lengths", "avg_rate", "best"])
    for lengths, rate in table.items():
        csv.add_row(["-".join(str(t) for t in lengths), rate, lengths == best])
    out = run_config.get("out")
    if out and out != "-":
        stem, dot, ext = out.rpartition(".")
        csv.write(f"{stem}_partitions.{ext}" if dot else f"{out}_partitions")
    else:
        csv.write(None)

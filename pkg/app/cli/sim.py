import click

from ..channel import TAG_ORTHANT, SnrPoint
from ..config import Config, Subcommand
from ..errprob import union_bound
from ..linksim import SymbolSet, make_link_config, run_coded, run_uncoded
from ..logger import Logger
from ..report import CsvReport
from ..utils import InvalidArgument
from .utils import code_options, common_options, emit, guarded, load_run_code, resolve, stream_for

logger = Logger().get_logger(__name__)

MODES = ("uncoded", "coded")


@click.command("pwep")
@common_options
@code_options
@click.option("--lr", type=int, default=None)
@click.option("--h-samples", "h_samples", type=int, default=None, help="Channel draws per point.")
@click.option("--mc-per-h", "mc_per_h", type=int, default=None, help="Noise draws per channel.")
@click.option("--method", type=click.Choice(["noise", "enumerate"]), default=None)
@click.option("--budget", type=float, default=None, help="Refuse above this many elementary terms.")
@guarded
def pwep(config_path, plot_script, **flags):
    """Union bound on the joint n-round error probability for rounds 1..N."""
    defaults = Config().defaults
    run_config = resolve(
        Subcommand.PWEP,
        config_path,
        flags,
        {
            "code": "alamouti",
            "code_file": None,
            "lr": 1,
            "n_max": None,
            "snr_db": "8:2:20",
            "h_samples": 2000,
            "mc_per_h": 20,
            "method": "noise",
            "budget": defaults["union_budget"],
        },
        trials_key="h_samples",
    )
    code = load_run_code(run_config, n_rounds=run_config.get("n_max"))
    n_max = run_config.get("n_max") or code.n_rounds
    if n_max > code.n_rounds:
        raise InvalidArgument(f"{code.name} has {code.n_rounds} rounds, n_max={n_max} requested")
    symbol_set = SymbolSet.qpsk(code.k)

    report = CsvReport(dict(run_config, code_name=code.name), ["snr_db", "n", "union_bound", "stderr"])
    for db in run_config["snr_db"]:
        for n in range(1, n_max + 1):
            result = union_bound(
                code,
                symbol_set,
                SnrPoint.from_db(db),
                n,
                run_config["h_samples"],
                run_config["mc_per_h"],
                stream_for(run_config, TAG_ORTHANT),
                lr=run_config["lr"],
                method=run_config["method"],
                budget=run_config["budget"],
            )
            report.add_row([db, n, result.bound, result.stderr])

    emit(report, run_config, plot_script, "snr_db", ["union_bound"], logscale_y=True)


@click.command("linksim")
@common_options
@click.option("--code", type=str, default=None, help="Built-in code names, comma separated.")
@click.option("--code-file", "code_file", type=str, default=None, help="Code definition file.")
@click.option("--mode", "modes", multiple=True, type=click.Choice(MODES), help="uncoded and/or coded.")
@click.option("--lr", type=int, default=None)
@click.option("--min-errors", "min_errors", type=int, default=None)
@click.option("--packet-symbols", "packet_symbols", type=int, default=None)
@click.option("--workers", type=int, default=None, help="Threads evaluating SNR points.")
@guarded
def linksim(config_path, plot_script, modes, **flags):
    """Packet error rate and average rate of LDC-HARQ links by simulation."""
    defaults = Config().defaults
    flags["modes"] = ",".join(modes) if modes else None
    run_config = resolve(
        Subcommand.LINKSIM,
        config_path,
        flags,
        {
            "code": "alamouti",
            "code_file": None,
            "modes": "uncoded",
            "lr": 1,
            "n_max": None,
            "snr_db": "0:4:20",
            "trials": 100_000,
            "min_errors": defaults["min_packet_errors"],
            "packet_symbols": defaults["packet_symbols"],
        },
    )
    for mode in run_config["modes"]:
        if mode not in MODES:
            raise InvalidArgument(f"unknown mode '{mode}', use uncoded or coded")

    if run_config.get("code_file"):
        codes = [load_run_code(run_config, n_rounds=run_config.get("n_max"))]
    else:
        names = [c.strip() for c in run_config["code"].split(",") if c.strip()]
        codes = [load_run_code(run_config, name=name, n_rounds=run_config.get("n_max")) for name in names]

    n_max = run_config.get("n_max") or min(code.n_rounds for code in codes)
    rounds = range(1, n_max + 1)
    header = (
        ["code", "mode", "snr_db", "per", "per_stderr", "avg_rate"]
        + [f"round_{n}_frac" for n in rounds]
        + ["trials"]
        + [f"pe_{n}" for n in rounds]
        + ["a1_not_a2_frac"]
    )
    report = CsvReport(run_config, header)

    for code in codes:
        for mode in run_config["modes"]:
            coded = mode == "coded"
            config = make_link_config(
                code,
                n_max=n_max,
                snr_db=run_config["snr_db"],
                trials=run_config["trials"],
                seed=run_config["seed"],
                coded=coded,
                lr=run_config["lr"],
                packet_symbols=run_config["packet_symbols"],
                min_errors=run_config["min_errors"],
                workers=run_config["workers"],
            )
            stats = run_coded(config) if coded else run_uncoded(config)
            for point in stats.points:
                report.add_row(
                    [code.name, mode, point.snr_db, point.per, point.per_stderr, point.avg_rate]
                    + [point.round_fraction(n) for n in rounds]
                    + [point.trials]
                    + [point.round_error_rate(n) for n in rounds]
                    + [point.a1_not_a2 / point.trials if point.trials else 0.0]
                )

    emit(report, run_config, plot_script, "snr_db", ["per"], logscale_y=True)

import functools
from typing import Any, Mapping, Optional

import click

from ..channel import RandomStream
from ..config import Config, RunConfig, Subcommand, make_run_config, read_config_file
from ..ldc import load_code, zoo
from ..ldc.code import LdcCode
from ..logger import Logger
from ..report import CsvReport
from ..utils import BudgetExceeded, CodeNotFound, HarqLabError, InvalidArgument

logger = Logger().get_logger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class CliErrorGuard:
    """Turns library exceptions into exit codes: usage 2, budget refusal 3, anything else 1."""

    def __init__(self, logger):
        self.logger = logger
        self.exit_code = 0

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        if exc_type is None:
            return False
        if issubclass(exc_type, (click.exceptions.ClickException, click.exceptions.Exit, click.Abort)):
            return False

        if issubclass(exc_type, BudgetExceeded):
            self.exit_code = EXIT_BUDGET
        elif issubclass(exc_type, (InvalidArgument, CodeNotFound)):
            self.exit_code = EXIT_USAGE
        else:
            self.exit_code = EXIT_FAILURE
        self.log_err(exc_type, exc_value)
        return True

    def log_err(self, exc_type, exc_value):
        if self.logger is None:
            return
        if self.exit_code == EXIT_FAILURE and not issubclass(exc_type, HarqLabError):
            self.logger.error(f"Error: {exc_value}")
        else:
            self.logger.error(f"Error: {exc_value}", exc_info=False)
        click.echo(f"error: {exc_value}", err=True)


def guarded(f):
    @functools.wraps(f)
    def decorated(*args, **kwargs):
        with CliErrorGuard(logger) as guard:
            return f(*args, **kwargs)
        click.get_current_context().exit(guard.exit_code)

    return decorated


def common_options(f):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="KEY=VALUE run file; SECTION_ prefixed keys apply to one subcommand."),
        click.option("--seed", type=int, default=None, help="Master seed."),
        click.option("--snr-db", "snr_db", type=str, default=None,
                     help="SNR grid in dB: '0,10,20' or 'start:step:stop'."),
        click.option("--out", type=str, default=None, help="CSV path, '-' for stdout."),
        click.option("--n-max", "n_max", type=int, default=None, help="ARQ deadline N."),
        click.option("--trials", type=int, default=None,
                     help="Monte Carlo budget: link trials, or channel draws where --samples/--h-samples is unset."),
        click.option("--plot-script", "plot_script", is_flag=True, default=False,
                     help="Write a gnuplot script next to the CSV."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def code_options(f):
    f = click.option("--code-file", "code_file", type=str, default=None, help="Code definition file.")(f)
    f = click.option("--code", type=str, default=None, help="Built-in code name.")(f)
    return f


def resolve(
    subcommand: Subcommand,
    config_path: Optional[str],
    flags: Mapping[str, Any],
    fallbacks: Mapping[str, Any],
    trials_key: Optional[str] = None,
) -> RunConfig:
    """
    With trials_key set, --trials fills that draw-count key unless it was given explicitly.
    """
    defaults = Config().defaults
    if trials_key is not None:
        flags = dict(flags)
        trials = flags.pop("trials", None)
        if flags.get(trials_key) is None:
            flags[trials_key] = trials
    base = {"seed": defaults["seed"], "workers": defaults["workers"], "out": None}
    base.update(fallbacks)
    run_config = make_run_config(subcommand, read_config_file(config_path), flags, base)
    logger.info("resolved run config: %s", dict(run_config))
    return run_config


def load_run_code(run_config: RunConfig, name: Optional[str] = None, n_rounds: Optional[int] = None) -> LdcCode:
    if run_config.get("code_file"):
        return load_code(run_config["code_file"])
    name = name or run_config.get("code")
    if not name:
        raise InvalidArgument("either --code or --code-file is required")
    return zoo(name, lt=run_config.get("lt") or 2, n_rounds=n_rounds)


def stream_for(run_config: RunConfig, tag: int) -> RandomStream:
    return RandomStream(run_config["seed"], tag)


def emit(report: CsvReport, run_config: RunConfig, plot_script: bool, x: str, ys, logscale_y: bool = False):
    out = run_config.get("out")
    report.write(out)
    if plot_script:
        if not out or out == "-":
            raise InvalidArgument("--plot-script needs --out pointing at a file")
        report.write_plot_script(out, x, ys, logscale_y)

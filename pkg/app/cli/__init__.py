import click

from .analysis import avg_rate, capacity_cdf
from .ldc import check_ldc
from .sim import linksim, pwep


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Hybrid-ARQ over quasi-static MIMO: capacity, average rate, LDC audits and link simulation."""


for command in (capacity_cdf, avg_rate, check_ldc, pwep, linksim):
    cli.add_command(command)


__all__ = ["cli", "capacity_cdf", "avg_rate", "check_ldc", "pwep", "linksim"]

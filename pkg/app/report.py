import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from .logger import Logger, default_serializer

logger = Logger().get_logger(__name__)

CONFIG_PREFIX = "# config: "


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvReport:
    """
    CSV with the resolved run configuration embedded as the first comment line,
    so that identical (config, seed) runs produce byte-identical files.
    """

    def __init__(self, config: dict, header: Sequence[str]):
        self.config = dict(config)
        self.header = list(header)
        self.rows = []

    def add_row(self, row: Sequence):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} cells, header has {len(self.header)}")
        self.rows.append(list(row))

    def add_rows(self, rows):
        for row in rows:
            self.add_row(row)

    def render(self) -> str:
        buf = io.StringIO()
        config_json = json.dumps(self.config, sort_keys=True, default=default_serializer)
        buf.write(CONFIG_PREFIX + config_json + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def write(self, out: Optional[str] = None):
        text = self.render()
        if not out or out == "-":
            sys.stdout.write(text)
            return
        with open(out, "w", newline="") as f:
            f.write(text)
        logger.info("CSV written: %s", {"path": out, "rows": len(self.rows)})

    def write_plot_script(self, csv_path: str, x: str, ys: Sequence[str], logscale_y: bool = False) -> str:
        """gnuplot script next to the CSV plotting columns ys against x."""
        script_path = os.path.splitext(csv_path)[0] + ".gp"
        cols = {name: i + 1 for i, name in enumerate(self.header)}
        base = os.path.basename(csv_path)
        lines = [
            "set datafile separator ','",
            "set datafile commentschars '#'",
            "set key autotitle columnhead",
            f"set xlabel '{x}'",
            "set grid",
        ]
        if logscale_y:
            lines.append("set logscale y")
        plots = [f"'{base}' using {cols[x]}:{cols[y]} with linespoints title '{y}'" for y in ys]
        lines.append("plot " + ", \\\n     ".join(plots))
        with open(script_path, "w") as f:
            f.write("\n".join(lines) + "\n")
        logger.info("plot script written: %s", {"path": script_path})
        return script_path


def read_config_line(path: str) -> dict:
    with open(path) as f:
        first = f.readline()
    if not first.startswith(CONFIG_PREFIX):
        raise ValueError(f"{path} has no config header")
    return json.loads(first[len(CONFIG_PREFIX):])

"""CSV and plot-data emission for command results."""

import io
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Tuple

import pandas as pd

from . import __version__
from .config import ResolvedConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"


class ReportWriter:
    """Writes tables for one command invocation into the output directory.

    ``csv``: header row plus ``#`` comment lines carrying the config digest and the full
    resolved config. ``plot``: two bare whitespace-separated columns.
    """

    def __init__(
        self,
        config: ResolvedConfig,
        command: str,
        output_dir: Optional[Path] = None,
        fmt: Optional[str] = None,
        timestamp: Optional[bool] = None,
    ):
        self.config = config
        self.command = command
        self.output_dir = Path(output_dir) if output_dir is not None else config.output_directory
        self.format = fmt or config.output_format
        self.timestamp = config.timestamp if timestamp is None else timestamp

    def header_lines(self):
        lines = [
            f"# teg-sim {__version__} {self.command}",
            f"# config-sha256: {self.config.digest()}",
            f"# config: {self.config.to_json()}",
        ]
        if self.timestamp:
            lines.append(f"# generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
        return lines

    def render_csv(self, table: pd.DataFrame) -> str:
        buffer = io.StringIO()
        table.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return "\n".join(self.header_lines()) + "\n" + buffer.getvalue()

    @staticmethod
    def render_plot(table: pd.DataFrame, columns: Tuple[str, str]) -> str:
        lines = []
        for x, y in table[list(columns)].itertuples(index=False, name=None):
            lines.append(f"{_plot_cell(x)} {_plot_cell(y)}")
        return "\n".join(lines) + "\n"

    def write(self, name: str, table: pd.DataFrame, plot_columns: Tuple[str, str]) -> Path:
        """Write ``table`` as ``<name>.csv`` or ``<name>.dat`` and return the path."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        if self.format == "plot":
            path = self.output_dir / f"{name}.dat"
            content = self.render_plot(table, plot_columns)
        else:
            path = self.output_dir / f"{name}.csv"
            content = self.render_csv(table)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        logger.info("wrote %s (%d rows)", path, len(table))
        return path


def _plot_cell(value) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value).replace(" ", "_")

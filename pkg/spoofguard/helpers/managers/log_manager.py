"""Module that provides an event table for the live display.

The `LoggerTable` class keeps the most recent pipeline events (epochs finished,
files written, failures) in a circular buffer, stamped with the time elapsed since
the run started, and renders them as a scrolling table inside a panel. The full
event history is kept so callers and tests can inspect what a run reported.
"""

from __future__ import annotations

import time
from collections import deque

from rich.box import SIMPLE
from rich.panel import Panel
from rich.table import Table

EVENT_STYLES = {"info": "pale_turquoise1", "warning": "gold3", "error": "bold red"}


class LoggerTable:
    """Scrolling table of timestamped events."""

    def __init__(
        self,
        max_rows: int = 6,
        title_color: str = "light_cyan3",
        border_style: str = "cyan",
    ) -> None:
        """Initialize the row buffer and the run clock."""
        self.row_buffer: deque[tuple[str, str, str, str]] = deque(maxlen=max_rows)
        self.title_color = title_color
        self.border_style = border_style
        self.history: list[tuple[str, str]] = []
        self.start_time = time.monotonic()

    def log(self, event: str, details: str, level: str = "info") -> None:
        """Record an event; `level` selects the row colour (info, warning, error)."""
        elapsed = int(time.monotonic() - self.start_time)
        stamp = f"+{elapsed // 60:02d}:{elapsed % 60:02d}"
        self.row_buffer.append((stamp, event, details, EVENT_STYLES.get(level, EVENT_STYLES["info"])))
        self.history.append((event, details))

    def render_log_panel(self) -> Panel:
        """Render the buffered events as a titled panel."""
        table = Table(
            box=SIMPLE,
            show_header=True,
            show_edge=True,
            border_style=self.title_color,
        )
        table.add_column(f"[{self.title_color}]Elapsed", style="pale_turquoise4", width=8)
        table.add_column(f"[{self.title_color}]Event", width=20)
        table.add_column(f"[{self.title_color}]Details", style="pale_turquoise4", width=52)
        for stamp, event, details, style in self.row_buffer:
            table.add_row(stamp, f"[{style}]{event}", details)

        return Panel(
            table,
            title=f"[bold {self.title_color}]Pipeline Events",
            border_style=self.border_style,
        )

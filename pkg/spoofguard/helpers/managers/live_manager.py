"""Live terminal view of a pipeline stage: progress panels above an event table.

`LiveManager` owns the `rich.live.Live` object. Library code only talks to it
through the stage/unit helpers and `update_log`, and every caller accepts `None`
instead of a manager, so tests and `--no-live` runs never touch the terminal.
"""

from __future__ import annotations

import time

from rich.console import Console, Group
from rich.live import Live
from rich.progress import TaskID

from spoofguard.helpers.general_utils import format_duration
from spoofguard.helpers.managers.log_manager import LoggerTable
from spoofguard.helpers.managers.progress_manager import ProgressManager


class LiveManager:
    """Redraws progress and events together on stderr, keeping stdout for reports."""

    def __init__(
        self,
        progress_manager: ProgressManager,
        logger: LoggerTable,
        console: Console | None = None,
        refreshes_per_second: int = 8,
    ) -> None:
        """Start the live view with an empty event table."""
        self.progress_manager = progress_manager
        self.logger = logger
        self.started_at = time.monotonic()
        self.live = Live(
            self._view(),
            console=console or Console(stderr=True),
            refresh_per_second=refreshes_per_second,
        )
        self.update_log("Run started", f"{progress_manager.stage_name} has started.")

    def start_stage(self, label: str, total: int) -> None:
        """Show the stage bar."""
        self.progress_manager.start_stage(label, total)

    def advance_stage(self, advance: int = 1) -> None:
        """Advance the stage bar."""
        self.progress_manager.advance_stage(advance)

    def start_unit(self, number: int, total: int) -> TaskID:
        """Show a bar for one unit and return its task."""
        return self.progress_manager.start_unit(number, total)

    def advance_unit(self, unit_id: TaskID, advance: int = 1) -> None:
        """Advance a unit bar."""
        self.progress_manager.advance_unit(unit_id, advance)

    def update_log(self, event: str, details: str, level: str = "info") -> None:
        """Append an event row and redraw."""
        self.logger.log(event, details, level)
        self.live.update(self._view())

    def stop(self, status: str = "ok") -> None:
        """Report the run's outcome and duration, then release the terminal."""
        duration = format_duration(time.monotonic() - self.started_at)
        if status == "ok":
            self.update_log("Run ended", f"Finished in {duration}")
        else:
            self.update_log("Run failed", f"Stopped after {duration}", level="error")
        self.live.stop()

    def _view(self) -> Group:
        """Progress panels stacked above the event table."""
        return Group(self.progress_manager.render(), self.logger.render_log_panel())


def initialize_managers(stage_name: str, unit_name: str, console: Console | None = None) -> LiveManager:
    """Create the progress and event managers of one command run."""
    return LiveManager(ProgressManager(stage_name, unit_name), LoggerTable(), console=console)

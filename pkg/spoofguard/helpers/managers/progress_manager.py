"""Progress bars for pipeline stages.

A stage is the whole job of one command (all epochs of a training run, every
utterance of a corpus). A unit is the piece currently being worked through, such
as the batches of one epoch or the files handed to the worker pool. Finished units
are hidden so the panel only shows work in flight.
"""

from __future__ import annotations

from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    ProgressColumn,
    TaskID,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table

LABEL_WIDTH = 14


class ProgressManager:
    """Stage and unit progress of one command run."""

    def __init__(self, stage_name: str, unit_name: str, color: str = "light_cyan3") -> None:
        """Create empty stage and unit bars titled after `stage_name` and `unit_name`."""
        self.stage_name = stage_name
        self.unit_name = unit_name
        self.color = color
        self.stage_progress = Progress(*self._columns(TimeElapsedColumn()))
        self.unit_progress = Progress(*self._columns(TimeRemainingColumn()))
        self.stage_task_id: TaskID | None = None

    def start_stage(self, label: str, total: int) -> None:
        """Show the stage bar; `total` counts the stage's units."""
        self.stage_task_id = self.stage_progress.add_task(self._label(label), total=total)

    def advance_stage(self, advance: int = 1) -> None:
        """Advance the stage bar; a no-op before `start_stage`."""
        if self.stage_task_id is not None:
            self.stage_progress.advance(self.stage_task_id, advance)

    def start_unit(self, number: int, total: int) -> TaskID:
        """Show a bar for unit `number` (1-based) made of `total` steps."""
        return self.unit_progress.add_task(self._label(f"{self.unit_name} {number}"), total=total)

    def advance_unit(self, unit_id: TaskID, advance: int = 1) -> None:
        """Advance a unit's bar and hide it once every step is done."""
        self.unit_progress.advance(unit_id, advance)
        if self.unit_progress.tasks[unit_id].finished:
            self.unit_progress.update(unit_id, visible=False)

    def render(self) -> Table:
        """Side-by-side stage and unit panels."""
        grid = Table.grid(expand=False)
        grid.add_row(
            Panel(self.stage_progress, title=f"[bold {self.color}]{self.stage_name}", border_style="steel_blue", width=48),
            Panel(self.unit_progress, title=f"[bold {self.color}]{self.unit_name}s", border_style="medium_purple", width=48),
        )
        return grid

    def _label(self, text: str) -> str:
        """Truncate or pad `text` to the label column."""
        if len(text) > LABEL_WIDTH:
            text = text[: LABEL_WIDTH - 1] + "…"
        return f"[{self.color}]{text:<{LABEL_WIDTH}}"

    @staticmethod
    def _columns(clock: ProgressColumn) -> list[ProgressColumn]:
        """Label, bar and count, then `clock`."""
        return [TextColumn("{task.description}"), BarColumn(bar_width=14), MofNCompleteColumn(), clock]

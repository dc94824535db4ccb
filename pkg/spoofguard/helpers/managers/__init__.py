"""Terminal display of running commands.

Modules:
    - live_manager: the rich Live view that ties progress and events together.
    - log_manager: the scrolling table of pipeline events.
    - progress_manager: stage and unit progress bars.
"""

__all__ = [
    "live_manager",
    "log_manager",
    "progress_manager",
]

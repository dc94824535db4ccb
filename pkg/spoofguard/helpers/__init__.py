"""Package that provides utility modules and functions to support the toolkit.

Modules:
    - config: Constants and settings used across the project.
    - file_utils: Utilities for text, atomic binary and run-log file operations.
    - general_utils: Directories, worker counts, seeded random streams, durations.
    - managers: Live terminal display of progress and events.
"""

# helpers/__init__.py

__all__ = [
    "config",
    "file_utils",
    "general_utils",
    "managers",
]

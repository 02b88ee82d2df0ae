"""Host library for planner heuristic candidates (child side of the wire)."""

from .context import TaskContext
from .server import ENTRY_POINT, serve

__version__ = "0.1.0"

__all__ = ["ENTRY_POINT", "TaskContext", "serve"]

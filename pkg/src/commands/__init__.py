"""Command package: experiment service and command registry."""

from .service import ExperimentService
from .tools import COMMANDS, COMMAND_SPECS, build_command_dispatch

__all__ = ["COMMANDS", "COMMAND_SPECS", "ExperimentService", "build_command_dispatch"]

"""Shared exception base for the toolkit.

Every module defines its own error types next to the code that raises them;
all of them derive from :class:`CascadekitError` so the CLI can map any
toolkit failure to exit code 1 with a module-qualified message.
"""

from __future__ import annotations


class CascadekitError(Exception):
    """Base class for all toolkit errors."""

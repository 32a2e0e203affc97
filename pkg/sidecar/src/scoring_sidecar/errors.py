"""Error types for configuration and startup failures."""

from __future__ import annotations


class SidecarError(Exception):
    """Base class for errors that should stop the service from starting."""


class ConfigError(SidecarError):
    """Invalid, unreadable, or incomplete configuration."""


class ModelLoadError(SidecarError):
    """A configured model identifier has no loadable implementation."""

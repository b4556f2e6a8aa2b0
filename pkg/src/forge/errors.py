"""Shared exception types."""


class ForgeError(Exception):
    """Base class for all engine errors."""


class ConfigError(ForgeError):
    """Bad configuration or usage; the CLI maps this to exit code 2."""

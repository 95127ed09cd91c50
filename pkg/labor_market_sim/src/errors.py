"""
Exception types shared by the simulator modules.
"""


class DomainError(ValueError):
    """A numerical operation was called outside its domain."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)

class AdapterError(Exception):
    """Base class for extraction failures."""


class InputLayoutError(AdapterError):
    """Input directory or prompt file does not match the expected layout."""


class MissingDependencyError(AdapterError):
    """A real-model backbone was requested but its runtime is not installed."""

"""Exception types shared across the package."""

from __future__ import annotations


class GridParseError(ValueError):
    """A textual 0/1 grid could not be parsed."""


class ConfigError(ValueError):
    """Invalid configuration, architecture, or parameter shape."""


class DataFormatError(ValueError):
    """Malformed data file (image, manifest, params)."""


class WindowCapExceeded(RuntimeError):
    """A window grew past the size this operation is willing to handle."""

    def __init__(self, size: int, cap: int, what: str = "window"):
        self.size = size
        self.cap = cap
        self.what = what
        super().__init__(f"{what} has {size} points, exceeding the cap of {cap}")


class InvalidGraphError(ValueError):
    """An operator graph failed structural validation."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid operator graph: {lines}")

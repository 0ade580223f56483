"""Exception types raised across the package."""


class HubridgeError(Exception):
    pass


class DimensionMismatch(HubridgeError, ValueError):
    pass


class DegenerateInputError(HubridgeError, ValueError):
    """Input geometry makes the requested quantity undefined."""


class FileFormatError(HubridgeError, ValueError):
    """A malformed input file; carries the path and 1-based line number."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        where = f"{self.path}:{lineno}" if lineno is not None else self.path
        super().__init__(f"{where}: {message}")


class RankDeficientWarning(RuntimeWarning):
    """Unregularized fit on rank-deficient observations; minimum-norm solution used."""

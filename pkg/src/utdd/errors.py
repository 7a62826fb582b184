"""Exception types shared across the package."""


class UtddError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(UtddError, ValueError):
    """An argument violates an operation's contract."""


class DegenerateInputError(UtddError, ValueError):
    """Input is structurally valid but statistically degenerate (e.g. zero variance)."""


class CsvFormatError(UtddError, ValueError):
    """A CSV file does not conform to the expected layout.

    ``line`` is the 1-based line number of the first offending line.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line

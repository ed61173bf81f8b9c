"""Exception hierarchy shared by all modules."""


class CryptoEffError(Exception):
    """Base class for every error raised by the toolkit."""


class MissingFile(CryptoEffError, FileNotFoundError):
    pass


class MalformedRow(CryptoEffError, ValueError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        super().__init__(f"malformed row at line {line}" + (f": {detail}" if detail else ""))


class DuplicateDate(CryptoEffError, ValueError):
    def __init__(self, date):
        self.date = date
        super().__init__(f"duplicate date {date}")


class InvalidRange(CryptoEffError, ValueError):
    pass


class SeriesRejected(CryptoEffError, ValueError):
    """A series failed the data-quality screens.

    ``reason`` is one of ``"Empty"``, ``"TooShort"``, ``"ZeroClose"``;
    ``detail`` carries ``(actual, required)`` or the offending date.
    """

    def __init__(self, reason: str, detail=None, symbol: str = ""):
        self.reason = reason
        self.detail = detail
        self.symbol = symbol
        msg = reason if detail is None else f"{reason}{detail!r}"
        super().__init__(f"{symbol}: {msg}" if symbol else msg)


class TooShort(CryptoEffError, ValueError):
    pass


class ZeroClose(CryptoEffError, ValueError):
    pass


class WindowTooLarge(CryptoEffError, ValueError):
    pass


class LengthMismatch(CryptoEffError, ValueError):
    pass


class AlignmentError(CryptoEffError, ValueError):
    pass


class EmptyUniverse(CryptoEffError, ValueError):
    pass


class SingularRegression(CryptoEffError, ValueError):
    pass


class InsufficientOverlap(CryptoEffError, ValueError):
    pass


class ZeroVariance(CryptoEffError, ValueError):
    pass


class NonConvergence(CryptoEffError, RuntimeError):
    pass


class InsufficientHistory(CryptoEffError, ValueError):
    pass


class SingleClassTraining(CryptoEffError, ValueError):
    pass


class EmptyGrid(CryptoEffError, ValueError):
    pass


class TooFewRows(CryptoEffError, ValueError):
    pass


class EmptyTestSet(CryptoEffError, ValueError):
    pass


class DomainError(CryptoEffError, ValueError):
    pass


class NonPositiveSpread(CryptoEffError, ValueError):
    pass


class ArgumentCountError(CryptoEffError, ValueError):
    pass


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its budget; the result is best-so-far."""

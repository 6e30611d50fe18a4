"""Exception hierarchy shared by all modules."""


class RatmlError(Exception):
    """Base class for library errors."""


class LengthMismatch(RatmlError, ValueError):
    pass


class IndexOutOfRange(RatmlError, IndexError):
    pass


class RankDeficient(RatmlError, ValueError):
    pass


class DivisionByZero(RatmlError, ZeroDivisionError):
    pass


class TooLarge(RatmlError, ValueError):
    """Exhaustive enumeration requested for a code with too many codewords."""

    def __init__(self, k: int, limit: int):
        super().__init__(f"k={k} exceeds the enumeration limit {limit}")
        self.k = k
        self.limit = limit


class InvalidSpec(RatmlError, ValueError):
    pass


class InvalidCode(RatmlError, ValueError):
    pass


class NotACodeword(RatmlError, ValueError):
    pass


class PoleError(RatmlError, ArithmeticError):
    """The rational map was evaluated where ``H(u) = 0``."""


class InvalidEpsilon(RatmlError, ValueError):
    pass


class OrderOutOfRange(RatmlError, ValueError):
    pass


class HypothesisViolated(RatmlError, ValueError):
    """Some ``l`` distinct columns of G are linearly dependent.

    ``columns`` holds the 1-based indices of one dependent set.
    """

    def __init__(self, order: int, columns: tuple[int, ...]):
        cols = ",".join(map(str, columns))
        super().__init__(
            f"columns {{{cols}}} of G are dependent; no clean expansion of order {order}")
        self.order = order
        self.columns = columns


class NotBchCode(RatmlError, TypeError):
    pass


class ConfigError(RatmlError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class DecodeError(RatmlError, RuntimeError):
    """A decoder raised while processing simulation trials."""

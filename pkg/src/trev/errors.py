class TrevError(Exception):
    """Base class for every error raised by the engine."""


class ParseError(TrevError):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected: tuple[str, ...] = ()):
        self.line, self.col, self.expected = line, col, expected
        where = f"{line}:{col}: " if line else ""
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}{message}{hint}")


class KindConflict(ParseError):
    pass


class GroundingError(TrevError):
    pass


class StratificationError(TrevError):
    def __init__(self, cycle: list):
        self.cycle = cycle
        super().__init__("negative cycle through " + " -> ".join(map(str, cycle)))


class PathError(TrevError):
    pass


class FragmentError(TrevError):
    """Formula lies outside the executable (or checkable) fragment."""


class BoundExceeded(TrevError):
    pass


class ExpansionLimit(BoundExceeded):
    pass


class BudgetExceeded(BoundExceeded):
    pass

"""Exception types.  Each carries a short machine-readable ``reason``."""


class OverlapError(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class BuildError(OverlapError):
    pass


class FormatError(OverlapError):
    pass


class ParseError(OverlapError):
    pass


class StatError(OverlapError):
    pass


class DataError(OverlapError):
    pass


class SkipError(OverlapError):
    pass

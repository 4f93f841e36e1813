"""Exception types shared across the package.

CLI exit-code mapping: ParseError / ValidationError / ConfigError are usage
or input problems (exit 2); UnreachableError / InfeasibleError are evaluation
failures on well-formed inputs (exit 1).
"""


class HotlwoError(Exception):
    pass


class ParseError(HotlwoError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no


class ValidationError(HotlwoError):
    pass


class ConfigError(HotlwoError):
    pass


class UnreachableError(HotlwoError):
    """A demand cannot be routed from src to dst under any weights."""

    def __init__(self, src: str, dst: str):
        super().__init__(f"no path from {src} to {dst}")
        self.src = src
        self.dst = dst


class InfeasibleError(HotlwoError):
    pass

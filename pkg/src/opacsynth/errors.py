class OpacityError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OpacityError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class SemanticError(OpacityError):
    """Well-formed input that names unknown things or breaks determinism."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ResourceLimitError(OpacityError):
    """A configured cap (states, strings, search nodes) was exceeded."""


class UnsolvableError(OpacityError):
    """No supervisor meets the objective."""


class FixtureConstraintError(OpacityError):
    def __init__(self, fixture: str, violations: list[str]):
        lines = "\n  ".join(violations)
        super().__init__(f"fixture {fixture!r} violates {len(violations)} constraint(s):\n  {lines}")
        self.fixture = fixture
        self.violations = violations

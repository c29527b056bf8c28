"""Exception types raised by the engine, scenario parser and CLI."""


class GridArenaError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GridArenaError):
    """Invalid world configuration (duplicate ids, bad action order, ...)."""


class PdmError(GridArenaError):
    """Invalid probability distribution matrix (negative or all-zero weights)."""


class PlacementError(GridArenaError):
    """No admissible cell remains for an element during world generation."""

    def __init__(self, element_id: str, message: str):
        super().__init__(f"cannot place {element_id!r}: {message}")
        self.element_id = element_id


class StateError(GridArenaError):
    """Operation applied to a world in the wrong lifecycle state."""


class SchemaIssue:
    """One problem found while validating a scenario document."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.message = message
        self.line = line

    def __str__(self) -> str:
        loc = f"line {self.line}: " if self.line is not None else ""
        where = f" at {self.path}" if self.path else ""
        return f"{loc}{self.message}{where}"

    def __repr__(self) -> str:
        return f"SchemaIssue(path={self.path!r}, message={self.message!r}, line={self.line!r})"


class SchemaError(GridArenaError):
    """Scenario document failed validation; carries all issues found."""

    def __init__(self, issues: list[SchemaIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


class CliError(GridArenaError):
    """Request that the CLI cannot honour (e.g. external controllers)."""

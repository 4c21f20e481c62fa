"""Exception types shared across the package."""


class ContractError(ValueError):
    """A caller violated a documented precondition (shape, index, domain)."""


class ParseError(ValueError):
    """Malformed LibSVM input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

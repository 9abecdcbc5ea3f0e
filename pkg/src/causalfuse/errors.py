"""Exception hierarchy.

Everything raised on purpose by the library derives from
:class:`CausalFuseError`; the CLI maps those to exit status 1.
"""


class CausalFuseError(Exception):
    """Base class for domain errors."""


class FormulaSyntaxError(CausalFuseError, ValueError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnboundVariableError(CausalFuseError, LookupError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class ModelError(CausalFuseError):
    """A causal model is malformed or fails validation."""

    def __init__(self, message, violations=()):
        self.violations = list(violations)
        super().__init__(message)


class ContextError(CausalFuseError):
    pass


class InterventionError(CausalFuseError):
    pass


class SearchLimitError(CausalFuseError):
    """An exponential search would exceed the configured caps."""


class CauseQueryError(CausalFuseError):
    pass


class EffectNotHoldError(CausalFuseError):
    """The effect formula is false in the actual world, so AC1 cannot hold."""


class TreeError(CausalFuseError):
    pass


class HtaError(CausalFuseError):
    pass


class HtaSyntaxError(HtaError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class MergeError(CausalFuseError):
    pass


class EvidenceError(CausalFuseError):
    pass


class EvidenceConflictError(EvidenceError):
    """No exogenous context is consistent with the evidence."""

    def __init__(self, message, conflict=None):
        self.conflict = conflict or {}
        super().__init__(message)

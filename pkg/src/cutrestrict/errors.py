"""Exception types shared across the package.

Exit-code mapping used by the CLI: FormulaSyntaxError / ProofFormatError /
InvalidProofError -> 1, PreconditionError -> 2, InternalCheckError -> 3.
"""


class CutrestrictError(Exception):
    pass


class FormulaSyntaxError(CutrestrictError):
    """Bad concrete syntax; carries the character position."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class SignatureError(CutrestrictError):
    """Formula uses a connective outside the calculus signature."""


class ProofFormatError(CutrestrictError):
    """Malformed proof file (structure, header, indentation)."""


class InvalidProofError(CutrestrictError):
    """A node failed rule-instance validation; carries the diagnostic."""

    def __init__(self, diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class PreconditionError(CutrestrictError):
    """Operation invoked outside its contract (caller error, exit code 2)."""


class InternalCheckError(CutrestrictError):
    """A mechanically checked invariant (tameness, reductivity, pre-soundness,
    measure decrease) failed: indicates a bug, exit code 3."""

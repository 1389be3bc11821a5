"""Exception hierarchy shared by all modules."""


class DarkModeLabError(Exception):
    """Base class for every error raised by the package."""


class InvalidSpec(DarkModeLabError):
    """A network specification violates one of its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid spec")


class ParseError(DarkModeLabError):
    """A spec file could not be parsed. ``field`` names the offending key."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        locus = []
        if field is not None:
            locus.append(f"field {field!r}")
        if line is not None:
            locus.append(f"line {line}")
        prefix = f"[{', '.join(locus)}] " if locus else ""
        super().__init__(prefix + message)


class DimensionMismatch(ParseError):
    """Array lengths in a spec file disagree with the declared M and N."""


class EigensolverFailure(DarkModeLabError):
    """Dense eigensolver did not converge or failed its residual check."""


class PreconditionViolated(DarkModeLabError):
    """Inputs fall outside the regime where an operation is defined."""


class ZeroCouplingInGroup(PreconditionViolated):
    """A degenerate group passed to the hybridization chain has an uncoupled member."""


class UnstableSystem(DarkModeLabError):
    """The drift matrix has an eigenvalue with non-negative real part."""


class SingularKroneckerSystem(DarkModeLabError):
    """The vectorized Lyapunov system is numerically singular."""


class NoConvergence(DarkModeLabError):
    """Fixed-point iteration hit its iteration cap."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class TooLarge(DarkModeLabError):
    """Combinatorial enumeration requested beyond the supported size."""

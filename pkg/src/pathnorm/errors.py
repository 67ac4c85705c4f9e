"""Exception types shared across the package."""


class PathNormError(Exception):
    """Base class for all package-specific failures."""


class NumericalError(PathNormError):
    """A numerical procedure could not reach its contract."""


class NonIntegrable(NumericalError):
    """The curvature integral shows no sign of converging."""


class MultiSingular(PathNormError):
    """More than one singular point; the singular-case formulas cover one."""


class NoAsymptote(NumericalError):
    """Edge sampling of f and f' did not stabilize to a linear asymptote."""


class GammaInfinite(NumericalError):
    """The complexity norm of the activation diverges."""


class NoConvergence(NumericalError):
    """An iterative refinement hit its cap before meeting the target."""


class DimMismatch(PathNormError, ValueError):
    """Input dimension does not match the network."""


class TooLarge(PathNormError):
    """The instance exceeds the size cap of an enumeration routine."""


class IndexOutOfRange(PathNormError, IndexError):
    """Block or neuron index outside the network."""


class WidthMismatch(PathNormError, ValueError):
    """Source width is incompatible with the requested block layout."""


class NormBudgetViolated(PathNormError):
    """A candidate function exceeds the norm budget of its class."""


class EmptyDataset(PathNormError, ValueError):
    """Risk of an empty sample is undefined."""


class Diverged(NumericalError):
    """Training objective became non-finite."""


class LambdaTooSmall(PathNormError, ValueError):
    """Regularization weight below the level the risk bound requires."""


class ParseError(PathNormError, ValueError):
    """A model or activation file could not be parsed.

    Carries best-effort location info for JSON errors.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column

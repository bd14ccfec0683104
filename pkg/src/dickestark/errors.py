"""Exception hierarchy.

Everything raised on purpose by this package derives from
:class:`DickeStarkError`. Failures of a numerical procedure (instability,
non-convergence, norm loss) additionally derive from
:class:`NumericalFailure`; the command line maps those to exit code 3.
"""


class DickeStarkError(Exception):
    """Base class for all package errors."""


class NumericalFailure(DickeStarkError):
    """A numerical procedure could not produce a trustworthy result."""


class InvalidParameters(DickeStarkError, ValueError):
    """Parameters violate a basic constraint (sign, range, type)."""


class NegativeDiscriminant(DickeStarkError, ValueError):
    """A closed-form boundary is undefined because its radicand is negative."""


class IllPosed(DickeStarkError, ValueError):
    """``U * N >= 2 * omega_c``: the displaced cavity frequency is not positive."""


class BogoliubovUnstable(NumericalFailure):
    """``2|lambda| >= omega`` for a quadratic boson form; no normalizable vacuum."""


# alias used by the fluctuation module
Unstable = BogoliubovUnstable


class LandscapeUnstable(NumericalFailure):
    """The energy landscape is Bogoliubov-unstable over the whole scanned domain."""


class BelowThreshold(DickeStarkError, ValueError):
    """Requested the superradiant order parameter at ``g <= g_t``."""


class WrongPhase(DickeStarkError, ValueError):
    """An operation specific to one phase was called in another phase."""


class DomainError(DickeStarkError, ValueError):
    """A logarithm or inverse hyperbolic function left its domain."""


class CutoffTooSmall(DickeStarkError, ValueError):
    """Fock cutoff below the minimum an operation needs."""


class NoConvergence(NumericalFailure):
    """An iterative solver stopped before meeting its tolerance.

    Attributes
    ----------
    iterations : int
        Matrix-vector products (or outer iterations) spent.
    residual : float
        Best residual norm reached.
    """

    def __init__(self, message, iterations=0, residual=float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class InconsistentDetunings(DickeStarkError, ValueError):
    """Sideband detunings do not match the requested cavity frequency."""


class DegenerateBalance(DickeStarkError, ValueError):
    """Blue/red Rabi balance is undefined for ``epsilon_S >= 1/2``."""


class Infeasible(DickeStarkError, ValueError):
    """No drive configuration meets the hardware constraints.

    Attributes
    ----------
    constraint : str
        Name of the binding constraint, e.g. ``"Omega_r"``.
    """

    def __init__(self, constraint, message=""):
        super().__init__(message or f"infeasible: {constraint} exceeds its limit")
        self.constraint = constraint


class StepTooLarge(DickeStarkError, ValueError):
    """Integrator step does not resolve the fastest frequency."""


class NormDrift(NumericalFailure):
    """State norm drifted beyond the integrator quality gate."""


class ConfigError(DickeStarkError, ValueError):
    """Malformed run configuration.

    Attributes
    ----------
    line : int or None
        1-based line number in the config file, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

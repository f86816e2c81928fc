"""Exception types shared across the toolkit.

Split into three families so the CLI can map them onto its exit codes:
configuration problems, violated mathematical preconditions, and numerical
non-convergence.
"""


class WvnlabError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(WvnlabError):
    """Malformed configuration, input file, or inconsistent parameters."""


class PreconditionError(WvnlabError):
    """A mathematical precondition of an operation is violated."""


class DegenerateFloquetError(PreconditionError):
    """Energy at or outside a band edge, where the Floquet pair degenerates."""


class BandDomainError(PreconditionError):
    """Energy outside every band interior."""

    def __init__(self, message, nearest_band=None):
        super().__init__(message)
        self.nearest_band = nearest_band


class SmallDivisorError(PreconditionError):
    """A resonant divisor fell below the configured floor.

    Carries enough context to name the offending combination: the divisor
    argument ``alpha``, the Fourier index ``index`` whose denominator
    vanished (if any), the harmonic ``K`` and the phase sum involved.
    """

    def __init__(self, message, *, alpha=None, index=None, K=None,
                 phase_sum=None, phases=None, level=None):
        super().__init__(message)
        self.alpha = alpha
        self.index = index
        self.K = K
        self.phase_sum = phase_sum
        self.phases = phases
        self.level = level


class ZeroMeanError(PreconditionError):
    """The embedded-eigenvalue mean criterion vanished."""


class ShorterSumError(PreconditionError):
    """The doubled quasimomentum is already a sum of fewer phases."""


class InsufficientRangeError(PreconditionError):
    """A trajectory is too short for the requested asymptotic fit."""


class NonConvergenceError(WvnlabError):
    """A numerical procedure failed to converge."""


class IntegrationError(NonConvergenceError):
    """ODE integrator failure; ``position`` holds the last abscissa."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SteeringError(NonConvergenceError):
    """Phase steering did not converge within the horizon."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class UnwrapError(NonConvergenceError):
    """Phase unwrapping guard violated and refinement failed."""

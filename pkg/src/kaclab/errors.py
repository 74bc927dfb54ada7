"""Exception and warning types shared by all kaclab modules."""


class KaclabError(Exception):
    """Base class for all kaclab errors."""


class DomainError(KaclabError):
    """An argument lies outside the domain an operation is defined on."""


class SingularPoint(KaclabError):
    """The angular cross-section was evaluated at its nonintegrable singularity."""


class DivergentMoment(KaclabError):
    """A kernel moment that does not exist for the given singularity exponent."""


class AccuracyNotReached(KaclabError):
    """A quadrature error estimate stayed above the requested tolerance."""


class ResolutionError(KaclabError):
    """Frequency/physical grids cannot resolve each other's oscillations."""


class StiffnessError(KaclabError):
    """Adaptive time stepping rejected too many consecutive step attempts."""


class DegenerateFit(KaclabError):
    """A fit was requested on a series with no signal to fit."""


class WindowTooSmall(KaclabError):
    """Fewer usable frequencies than the fit requires."""


class OverflowGuard(KaclabError):
    """A multiplier symbol would overflow double precision (log-symbol > 700)."""


class UnsupportedRegime(KaclabError):
    """An operation was requested outside its supported exponent range."""


class InsufficientSamples(KaclabError):
    """A probe sample family is too small to be meaningful."""


class KernelMismatch(KaclabError):
    """Declared singularity exponent disagrees with the measured kernel tail."""


class ConfigError(KaclabError):
    """Run configuration failed validation.

    Carries the full list of offending fields so a single run reports
    every problem at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnreliableEntropyWarning(UserWarning):
    """Entropy computed on a reconstruction with too much clamped-negative mass."""

"""
Exceptions raised by ionbath. Everything that is a bad input is also a ValueError,
so callers that only know about ValueError (as the CLI error handling does) still catch it.
"""


class IonbathError(Exception):
    pass


class ConfigError(IonbathError, ValueError):
    """An experiment config could not be read or does not describe a runnable experiment"""


class NonPhysicalStateError(IonbathError, ValueError):
    """A density matrix is not finite, not positive semidefinite beyond tolerance or has zero trace"""


class DegenerateSteadyStateError(IonbathError, ValueError):
    """The Liouvillian kernel is not one-dimensional"""


class ValidationFailure(IonbathError):
    """At least one check of the invariant suite failed"""


class UnstableStepperError(IonbathError, ValueError):
    """An expanded stepper would amplify the highest Fock levels instead of damping them"""

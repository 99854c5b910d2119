"""Exception hierarchy shared by all qubus modules."""


class QubusError(Exception):
    """Base class for all errors raised by this package."""


class NormError(QubusError):
    """Input qubit coefficients deviate from unit norm beyond tolerance."""


class PhaseUndefined(QubusError):
    """A phase was requested for a branch with (numerically) zero weight."""


class DegenerateAngle(QubusError):
    """A builder angle sits on a pole of the construction (sin/cos ~ 0)."""


class DegenerateGeometry(QubusError):
    """Phase-space points are collinear/parallel where the construction
    needs a unique intersection or circumcenter."""


class NotDisentangled(QubusError):
    """Pure-state concurrence requested while the bus still carries
    branch-dependent amplitudes; use the traced concurrence instead."""


class NumericalFailure(QubusError):
    """An underlying linear-algebra routine failed to converge."""


class CutoffTooSmall(QubusError):
    """Fock-space truncation is too aggressive for the requested state
    or operation."""


class FitFailed(QubusError):
    """Too few valid grid points in the central window to fit a curvature."""

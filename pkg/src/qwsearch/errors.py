"""Exception hierarchy shared by all modules."""


class QwSearchError(Exception):
    """Base class for numerical and data errors raised by the package."""

    status = "error"


class InsufficientDataError(QwSearchError, ValueError):
    status = "insufficient_data"


class DegenerateSpectrumError(QwSearchError):
    """The extremal eigenvalues needed by the analysis are (near) degenerate."""

    status = "degenerate"


class DisconnectedGraphError(DegenerateSpectrumError):
    status = "disconnected"


class SpectralError(QwSearchError):
    """Eigensolver failed to converge."""


class BracketError(QwSearchError):
    """No sign change of the overlap difference inside the gamma scan window."""

    status = "bracket_failure"


class WindowEdgeError(QwSearchError):
    """The success probability maximum sits at the edge of the time window."""

    status = "window_edge"


class SingularSystemError(QwSearchError):
    status = "singular"


class DegenerateComponentError(QwSearchError):
    """A mixture component collapsed (log-std below the floor)."""

    status = "degenerate_component"


class DegenerateVarianceError(QwSearchError, ValueError):
    status = "degenerate_variance"

"""Exception hierarchy for curvlab.

Every structural failure raises a dedicated subclass of CurvlabError so
callers (and the CLI exit-code mapping) can distinguish bad input from
infeasible preconditions.
"""


class CurvlabError(Exception):
    """Base class for all curvlab errors."""


class NotIrreducibleError(CurvlabError):
    """Support graph of the kernel is not strongly connected."""


class StationaryMismatchError(CurvlabError):
    """Supplied distribution is not stationary for the kernel."""


class NonFiniteTimeError(CurvlabError):
    """Time argument is NaN or infinite."""


class BadEpsilonError(CurvlabError):
    """Perturbation parameter outside (0, 1)."""


class NotConnectedError(CurvlabError):
    """Graph underlying a metric construction is not connected."""


class NonpositiveWeightError(CurvlabError):
    """Edge weight must be strictly positive."""


class DimensionMismatchError(CurvlabError):
    """Operands live on different state spaces."""


class EmptyGeneratingSetError(CurvlabError):
    """A generating set with no pairs was supplied."""


class SupportViolationError(CurvlabError):
    """Reference measure vanishes where the argument has mass."""


class AtStationarityError(CurvlabError):
    """Entropy contraction ratio undefined at the stationary law."""


class BadRatesError(CurvlabError):
    """Model rate parameters violate their sign/boundary constraints."""


class MonotonicityViolatedError(CurvlabError):
    """Rate monotonicity required by the requested operation fails."""


class SingularLaplacianError(CurvlabError):
    """Killed-walk Laplacian is singular (refresh misses a component)."""


class TooLargeError(CurvlabError):
    """State space exceeds the configured cap."""


class DisconnectedSupportError(CurvlabError):
    """Support of the target law is not connected under single-site moves."""


class AsymmetricInteractionError(CurvlabError):
    """Pairwise interaction violates the symmetry convention."""


class SpecFormatError(CurvlabError):
    """Serialized chain description fails schema or consistency checks."""

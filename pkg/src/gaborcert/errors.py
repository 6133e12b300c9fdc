"""Exception and warning types shared across the package."""


class GaborCertError(Exception):
    """Base class for all errors raised by gaborcert."""


class SingularMatrix(GaborCertError):
    pass


class MisalignedShift(GaborCertError):
    """A translation does not land on the sampling grid."""


class DegenerateWindow(GaborCertError):
    pass


class NonDecaying(GaborCertError):
    """Periodization shells stopped shrinking at the truncation order."""


class GridMismatch(GaborCertError):
    pass


class ZeroMean(GaborCertError):
    pass


class ZeroInner(GaborCertError):
    pass


class NonPositiveInner(GaborCertError):
    pass


class MissingDerivatives(GaborCertError):
    pass


class ConditionFailed(GaborCertError):
    pass


class EmptyInterval(GaborCertError):
    pass


class GridTooLarge(GaborCertError):
    pass


class NoConvergence(GaborCertError):
    pass


class ConfigError(GaborCertError):
    """Invalid run configuration (mapped to exit code 2 by the CLI)."""


class SupportTruncation(UserWarning):
    """The quadrature box cuts off a non-negligible part of an integrand."""


class TruncationWarning(UserWarning):
    """The last shell of a truncated lattice sum is not negligible."""


class NonRigorous(UserWarning):
    pass

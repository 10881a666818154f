"""Exception hierarchy shared by all modules."""


class MopucError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class NotHermitian(MopucError):
    pass


class NotPSD(MopucError):
    pass


class NotPD(MopucError):
    pass


class NotContraction(MopucError):
    pass


class NotNormalizable(MopucError):
    pass


class BadSample(MopucError):
    pass


class MomentOrderTooHigh(MopucError):
    pass


class RadiusTooLarge(MopucError):
    pass


class DegreeMismatch(MopucError):
    pass


class InsufficientMoments(MopucError):
    pass


class TrivialMeasure(MopucError):
    pass


class ConventionCheckFailed(MopucError):
    pass


class SingularPolynomial(MopucError):
    pass


class SingularPencil(MopucError):
    pass


class DepthExceeded(MopucError):
    pass


class BadConfig(MopucError):
    pass

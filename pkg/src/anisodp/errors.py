"""Exception types raised across the package."""


class AnisoDPError(ValueError):
    """Base class for every input or configuration error raised here."""


class EmptyData(AnisoDPError):
    pass


class NonFinite(AnisoDPError):
    pass


class RaggedRows(AnisoDPError):
    pass


class DimensionMismatch(AnisoDPError):
    pass


class NotSymmetric(AnisoDPError):
    pass


class NotPSD(AnisoDPError):
    pass


class NegativeVariance(AnisoDPError):
    pass


class SingularForNegativePower(AnisoDPError):
    pass


class NonPositiveScale(AnisoDPError):
    pass


class InvalidDelta(AnisoDPError):
    pass


class InvalidDeltaTilde(AnisoDPError):
    pass


class EmptyLedger(AnisoDPError):
    pass


class EpsilonOutOfRange(AnisoDPError):
    """The proven privacy constants do not cover this epsilon.

    ``guarantee`` still carries the formula's value so callers can surface it
    as a warning instead of dropping it.
    """

    def __init__(self, message, guarantee=None):
        super().__init__(message)
        self.guarantee = guarantee


class FractionalProbability(AnisoDPError):
    """ZeroNoise was asked for a Bernoulli draw with p outside {0, 1}."""


class TooFewSamples(AnisoDPError):
    pass


class HistogramBot(AnisoDPError):
    """StableHistogram released no bucket (max noisy count below threshold)."""


class InvalidSpec(AnisoDPError):
    pass


class DegenerateInput(AnisoDPError):
    pass

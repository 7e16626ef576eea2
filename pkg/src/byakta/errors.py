"""Exception types shared across the package."""


class ByaktaError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(ByaktaError, ValueError):
    pass


class NonDigitCharacter(ByaktaError, ValueError):
    pass


class EmptyAfterNormalization(ByaktaError, ValueError):
    """Text reduced to nothing after normalization."""


class UnknownSymbol(ByaktaError, KeyError):
    pass


class IdOutOfRange(ByaktaError, IndexError):
    pass


class ShapeMismatch(ByaktaError, ValueError):
    pass


class NonFiniteError(ByaktaError, FloatingPointError):
    """A tensor op produced NaN or Inf."""


class MissingGradient(ByaktaError, RuntimeError):
    pass


class MissingParameter(ByaktaError, KeyError):
    pass


class AudioTooShort(ByaktaError, ValueError):
    pass


class UnsupportedFormat(ByaktaError, ValueError):
    pass


class SampleRateMismatch(ByaktaError, ValueError):
    pass


class CrossfadeLongerThanClip(ByaktaError, ValueError):
    pass


class BadMagic(ByaktaError, ValueError):
    pass


class VersionUnsupported(ByaktaError, ValueError):
    pass


class CorruptPayload(ByaktaError, ValueError):
    pass


class EmptyList(ByaktaError, ValueError):
    pass


class ConfigError(ByaktaError, ValueError):
    pass

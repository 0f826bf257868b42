"""Exception hierarchy for statgeo."""


class StatGeoError(Exception):
    """Base class for all library errors."""


class ExpressionError(StatGeoError, ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression source.

    ``offset`` is the 0-based character offset of the offending token and
    ``expected`` a short hint of what the parser wanted there.
    """

    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnknownIdentifier(ExpressionError):
    pass


class VariableOutOfRange(ExpressionError):
    pass


class DomainError(StatGeoError, ValueError):
    """A function was evaluated outside its real domain."""


class NonSmoothPoint(StatGeoError):
    """Derivative-based quantities requested exactly at a kink."""


class ModelError(StatGeoError, ValueError):
    """Inconsistent model construction."""


class WrongVariant(StatGeoError, TypeError):
    pass


class WrongClass(StatGeoError, TypeError):
    pass


class NonIntegerExponent(StatGeoError, ValueError):
    pass


class NonPositiveY(StatGeoError, ValueError):
    pass


class DuplicateP(StatGeoError, ValueError):
    pass


class BoundViolation(StatGeoError, AssertionError):
    def __init__(self, message, w=None):
        self.w = w
        super().__init__(message)


class UnstableExtraction(StatGeoError, ArithmeticError):
    pass


class InconclusiveClassification(StatGeoError):
    def __init__(self, message, data=None):
        self.data = data
        super().__init__(message)


class UnknownExample(StatGeoError, KeyError):
    pass


class SignChange(StatGeoError, ValueError):
    pass


class TooFewSamples(StatGeoError, ValueError):
    pass


class NotHomogeneous(StatGeoError, ValueError):
    pass


class DegenerateGradient(StatGeoError, ArithmeticError):
    pass

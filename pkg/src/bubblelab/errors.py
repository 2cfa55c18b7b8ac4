"""Exception hierarchy shared by all bubblelab modules."""


class BubbleLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BubbleLabError, ValueError):
    pass


class RangeError(BubbleLabError, ValueError):
    """Parameters fall outside the range where a closed form is valid."""


class PoleError(BubbleLabError, ArithmeticError):
    pass


class QuadratureError(BubbleLabError, ArithmeticError):
    pass


class RealityError(BubbleLabError, ArithmeticError):
    """A quantity that must be real came back with a sizeable imaginary part."""


class ConfigError(BubbleLabError, ValueError):
    pass


class BoundaryAmbiguous(BubbleLabError):
    """Query point lies within tolerance of a polygon edge."""


class BlowupError(BubbleLabError, ArithmeticError):
    pass


class SwallowedError(BubbleLabError):
    """Point lies inside a Loewner hull, so the forward map is undefined."""


class OrientationError(BubbleLabError):
    pass


class TailError(BubbleLabError):
    pass


class ExhaustedError(BubbleLabError):
    def __init__(self, message: str, attempts: int = 0, accepted: int = 0):
        super().__init__(message)
        self.attempts = attempts
        self.accepted = accepted

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0


class DegenerateError(BubbleLabError, ArithmeticError):
    pass


class ClearanceError(BubbleLabError, ValueError):
    pass


class NonconvergenceError(BubbleLabError, ArithmeticError):
    pass


class BiasError(BubbleLabError, ArithmeticError):
    pass


class FactorizationError(BubbleLabError, ArithmeticError):
    pass


class MomentBlowupError(BubbleLabError, ValueError):
    pass

"""Exception types shared across the laboratory."""


class SmoothingLabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SmoothingLabError, ValueError):
    """A constructor or operation argument violates its contract."""


class OriginError(SmoothingLabError, ValueError):
    """Radial quantity requested at r = 0 where the formula is singular."""


class AliasingError(SmoothingLabError, RuntimeError):
    """Grid field carries too much mass near the box boundary.

    Raised instead of silently wrapping: the periodic transform would fold
    the tail back into the box and corrupt every downstream integral.
    """

    def __init__(self, fraction: float, threshold: float):
        self.fraction = fraction
        self.threshold = threshold
        super().__init__(
            f"boundary mass fraction {fraction:.3e} exceeds threshold {threshold:.3e}"
        )


class ToleranceNotMetError(SmoothingLabError, RuntimeError):
    """Adaptive quadrature ran out of budget before reaching tolerance.

    Carries the best estimate so callers can report it instead of a bare
    failure.
    """

    def __init__(self, estimate: float, achieved: float, requested: float):
        self.estimate = estimate
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"quadrature reached error {achieved:.3e} (requested {requested:.3e}); "
            f"estimate {estimate!r}"
        )


class InvalidWeightError(SmoothingLabError, ValueError):
    """A radial weight fails the hypotheses required by the caller."""


class ConfigError(SmoothingLabError, ValueError):
    """Configuration file failed to parse or validate."""

    def __init__(self, section: str, key: str, message: str):
        self.section = section
        self.key = key
        super().__init__(f"[{section}] {key}: {message}")

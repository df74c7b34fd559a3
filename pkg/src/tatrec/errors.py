class TatrecError(Exception):
    """Base class for all package errors."""


class InvalidMediumError(TatrecError, ValueError):
    pass


class InstabilityError(TatrecError, FloatingPointError):
    def __init__(self, step: int):
        super().__init__(f"non-finite value produced at step {step}")
        self.step = step


class DataExhaustedError(TatrecError, IndexError):
    pass


class GeometryError(TatrecError, ValueError):
    pass


class AssetNotFoundError(TatrecError, FileNotFoundError):
    pass


class UndefinedMetricError(TatrecError, ZeroDivisionError):
    pass


class ConfigError(TatrecError, ValueError):
    pass

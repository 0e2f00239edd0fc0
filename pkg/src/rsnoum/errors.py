"""Exception types raised by the simulator."""


class RsnoumError(Exception):
    """Base class for simulator errors."""


class InvalidMcsError(RsnoumError, ValueError):
    """MCS index outside the table."""


class DegenerateGeometryError(RsnoumError, ValueError):
    """Channel vectors for which a precoder or correlation is undefined."""


class CalibrationError(RsnoumError):
    """Threshold table missing an entry or a measured curve that is not monotone."""


class ConfigError(RsnoumError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key

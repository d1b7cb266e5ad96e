"""Exception types shared by the model, barrier, solver and runner layers."""


class AfsError(Exception):
    """Base class for package errors."""


class SingularKinematicsError(AfsError, ValueError):
    """The articulation denominator ``l_f cos(beta) + l_r`` vanished."""


class BarrierDomainError(AfsError, ValueError):
    """``h1 <= 0``: the vehicle is inside the expanded unsafe region."""


class CoincidentPointError(AfsError, ValueError):
    """A bearing was requested between two coincident points."""


class DimensionError(AfsError, ValueError):
    pass


class NotPsdError(AfsError, ValueError):
    pass


class ConfigError(AfsError, ValueError):
    pass

"""Exception hierarchy shared across the package."""


class TilingPlanError(Exception):
    """Base class for all errors raised by tilingplan."""


# geometry
class DegenerateHullError(TilingPlanError, ValueError):
    pass


class UnsupportedInputError(TilingPlanError, ValueError):
    pass


# robot model
class ShapeError(TilingPlanError, ValueError):
    pass


class InvalidConfigurationError(TilingPlanError, ValueError):
    pass


# preprocessing
class SamplingFailureError(TilingPlanError, RuntimeError):
    pass


class StartIsolatedError(TilingPlanError, RuntimeError):
    pass


class BundleLoadError(TilingPlanError, IOError):
    pass


class BundleVersionError(BundleLoadError):
    pass


class BundleChecksumError(BundleLoadError):
    pass


class BundleFormatError(BundleLoadError):
    pass


# tiling graph / planners
class LookupFailure(TilingPlanError, KeyError):
    pass


class InvalidQueryError(TilingPlanError, ValueError):
    pass


class RobotMismatchError(TilingPlanError, ValueError):
    pass


# lattice lab
class DomainError(TilingPlanError, ValueError):
    pass


class NotALatticePointError(TilingPlanError, ValueError):
    pass


class PreconditionError(TilingPlanError, ValueError):
    pass


# scenario io
class ScenarioError(TilingPlanError, ValueError):
    pass


class ScenarioSchemaError(ScenarioError):
    pass


class MalformedScenarioError(ScenarioError):
    pass


class StartInCollisionError(ScenarioError):
    pass


class EmptyInputError(TilingPlanError, ValueError):
    pass

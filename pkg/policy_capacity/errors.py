"""
Exception hierarchy

Every error raised on purpose by the library derives from PolicyCapacityError.
The CLI maps ConfigError to exit code 2 and everything else to exit code 3.
"""


class PolicyCapacityError(Exception):
    """Base class for library errors"""


class ConfigError(PolicyCapacityError, ValueError):
    """Invalid or incomplete run configuration"""


class SpecMismatchError(PolicyCapacityError, ValueError):
    """Environment, policy or parameter shapes do not agree"""


class EstimationError(PolicyCapacityError, ValueError):
    """An estimator precondition does not hold"""

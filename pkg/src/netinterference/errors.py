"""Exception hierarchy shared across the package."""


class NetInterferenceError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NetInterferenceError, ValueError):
    """Invalid design, batch or experiment configuration."""


class ContractError(NetInterferenceError, ValueError):
    """Inputs violate a shape or consistency contract."""


class EstimatorError(NetInterferenceError, RuntimeError):
    """An estimator cannot be trained or evaluated on the given data."""


class SolverError(EstimatorError):
    """The normal equations could not be solved."""


class RoutingError(NetInterferenceError, RuntimeError):
    """A job has no server able to process it."""

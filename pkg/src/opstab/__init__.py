"""Population and sample fixed-point operators for singular statistical models."""

from .core import (
    EpochSchedule,
    IterationError,
    IterationTrace,
    OperatorHandle,
    ParamPoint,
    RegimeParams,
    ValidationError,
    best_iterate_error,
    epoch_schedule,
    fast_unstable_iteration_bound,
    iterate,
    iterate_until,
    predicted_radius,
)
from .algorithms import AlgorithmConfig, make_operator

__version__ = "0.1.0"

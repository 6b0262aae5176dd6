"""Operator handles, the iteration driver, and regime calculators.

Every model in this package has its true parameter at the origin, so the
default target of an iteration is the zero vector of the right dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class IterationError(RuntimeError):
    """Raised when an operator evaluation produces a non-finite value.

    ``iteration`` is the index of the iterate the operator was applied to.
    """

    def __init__(self, message: str, iteration: Optional[int] = None, theta=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration
        self.theta = theta


# ---------------------------------------------------------------------------
# parameter points and operators
# ---------------------------------------------------------------------------


def as_vector(theta) -> np.ndarray:
    """Coerce a scalar, list, array or ParamPoint to a 1-D float array."""
    if isinstance(theta, ParamPoint):
        return theta.coords.copy()
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.ndim != 1:
        raise ValidationError(f"parameter must be a vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ParamPoint:
    """A finite parameter vector."""

    coords: np.ndarray

    def __post_init__(self):
        arr = as_vector(self.coords)
        if arr.size == 0:
            raise ValidationError("parameter must have at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"non-finite parameter {arr}")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __float__(self):
        if self.dim != 1:
            raise TypeError("only 1-D points convert to float")
        return float(self.coords[0])

    @classmethod
    def zeros(cls, dim: int) -> "ParamPoint":
        return cls(np.zeros(dim))


LEVELS = ("population", "sample")


@dataclass(frozen=True)
class OperatorHandle:
    """A fixed-point map theta -> F(theta) together with its provenance.

    ``step`` is the underlying pure function on float vectors; use
    ``handle(theta)`` to evaluate it.
    """

    model: str
    algorithm: str
    level: str
    step: Callable[[np.ndarray], np.ndarray]
    dim: int
    data: Any = None
    config: Any = None

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValidationError(f"level must be one of {LEVELS}, got {self.level!r}")
        if self.level == "population" and self.data is not None:
            raise ValidationError("population operators take no dataset")
        if self.level == "sample" and self.data is None:
            raise ValidationError("sample operators need a dataset")

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.step(as_vector(theta)), dtype=float)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

TERMINATION_REASONS = ("max-iters", "threshold-hit", "divergence", "stalled")


@dataclass(frozen=True)
class IterationTrace:
    """Iterates theta^0..theta^T (rows of ``points``) and their errors."""

    points: np.ndarray
    errors: np.ndarray
    target: np.ndarray
    reason: str
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.reason not in TERMINATION_REASONS:
            raise ValidationError(f"unknown termination reason {self.reason!r}")

    @property
    def initial(self) -> ParamPoint:
        return ParamPoint(self.points[0])

    @property
    def final(self) -> ParamPoint:
        return ParamPoint(self.points[-1])

    @property
    def final_error(self) -> float:
        return float(self.errors[-1])

    @property
    def iterations(self) -> int:
        """Number of operator applications recorded."""
        return len(self.points) - 1

    def __len__(self):
        return len(self.points)

    def entries(self):
        """Yield (t, ParamPoint, error) triples."""
        for t, (pt, err) in enumerate(zip(self.points, self.errors)):
            yield t, ParamPoint(pt), float(err)


def _errors(points: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((points - target) ** 2, axis=1))


def _run(op, theta0, target, max_iters, threshold=None, stall_tol=None):
    import time

    x = as_vector(theta0)
    if not np.all(np.isfinite(x)):
        raise ValidationError("initial point must be finite")
    target = np.zeros_like(x) if target is None else as_vector(target)
    if target.shape != x.shape:
        raise ValidationError("target and initial point differ in dimension")
    limit = 1e6 * (1.0 + np.linalg.norm(x))

    start = time.perf_counter()
    pts = [x]
    reason = "max-iters"
    hit = None
    if threshold is not None and np.linalg.norm(x - target) <= threshold:
        hit, reason = 0, "threshold-hit"
    else:
        for t in range(max_iters):
            try:
                y = op(x)
            except IterationError as exc:
                raise IterationError(str(exc), iteration=t, theta=x) from exc
            except (ArithmeticError, np.linalg.LinAlgError) as exc:
                raise IterationError(str(exc), iteration=t, theta=x) from exc
            if not np.all(np.isfinite(y)):
                raise IterationError(f"non-finite iterate from {x}", iteration=t, theta=x)
            pts.append(y)
            if np.linalg.norm(y) > limit:
                reason = "divergence"
                break
            if threshold is not None and np.linalg.norm(y - target) <= threshold:
                hit, reason = t + 1, "threshold-hit"
                break
            if stall_tol is not None and np.linalg.norm(y - x) <= stall_tol * np.linalg.norm(x):
                reason = "stalled"
                break
            x = y
    points = np.vstack(pts)
    trace = IterationTrace(points, _errors(points, target), target, reason,
                           wall_time=time.perf_counter() - start)
    return trace, hit


def iterate(op, theta0, T: int, target=None) -> IterationTrace:
    """Apply ``op`` T times starting from ``theta0``.

    The trace stops early, flagged as divergence, once the iterate norm
    exceeds 1e6 * (1 + |theta0|).
    """
    if T < 0:
        raise ValidationError("T must be nonnegative")
    trace, _ = _run(op, theta0, target, int(T))
    return trace


def iterate_until(op, theta0, target=None, threshold: float = 1e-6,
                  max_iters: int = 10_000, stall_tol: Optional[float] = None):
    """Iterate until the error first drops to ``threshold``.

    Returns ``(trace, hit_iteration)``; ``hit_iteration`` is None when the
    threshold was never reached. With ``stall_tol`` set, the run also stops
    once a step moves by at most ``stall_tol * |theta|`` (the iterates have
    settled on a fixed point outside the threshold ball).
    """
    if not threshold > 0:
        raise ValidationError("threshold must be positive")
    return _run(op, theta0, target, int(max_iters), threshold=threshold,
                stall_tol=stall_tol)


def best_iterate_error(trace: IterationTrace, target=None):
    """Index and value of the smallest error along the trace (first on ties)."""
    if len(trace) == 0:
        raise ValidationError("empty trace")
    errs = trace.errors if target is None else _errors(trace.points, as_vector(target))
    k = int(np.argmin(errs))
    return k, float(errs[k])


# ---------------------------------------------------------------------------
# regimes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeParams:
    """Convergence/stability regime of an operator pair.

    Exactly one of ``beta`` (sublinear convergence) and ``kappa`` (linear
    convergence) is set. ``gamma >= 0`` means stable, ``gamma < 0`` unstable.
    """

    gamma: float
    eps: float
    beta: Optional[float] = None
    kappa: Optional[float] = None
    rho: float = 1.0
    alpha: float = 1e-3
    delta: float = 0.05
    inner_radius: float = 0.0

    def __post_init__(self):
        if (self.beta is None) == (self.kappa is None):
            raise ValidationError("exactly one of beta and kappa must be given")
        if self.beta is not None and not self.beta > 0:
            raise ValidationError("beta must be positive")
        if self.kappa is not None and not 0 < self.kappa < 1:
            raise ValidationError("kappa must lie in (0, 1)")
        for name in ("eps", "rho", "alpha"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if not 0 <= self.inner_radius < self.rho:
            raise ValidationError("inner_radius must lie in [0, rho)")
        if self.beta is not None and self.gamma > 0 and self.gamma * self.beta >= 1 + self.beta:
            raise ValidationError("need 1 + beta - gamma*beta > 0")

    @property
    def stable(self) -> bool:
        return self.gamma >= 0

    @property
    def fast(self) -> bool:
        return self.kappa is not None


def predicted_radius(regime: RegimeParams):
    """Final statistical radius and iteration budget for a regime.

    Returns ``(radius, budget)``.
    """
    r = regime
    eps, g = r.eps, r.gamma
    if r.fast and r.stable:
        return eps, math.log(1.0 / eps)
    if r.fast:
        k = r.kappa
        radius = max((2 - k) / (1 - k) * eps ** (1 / (1 + abs(g))), r.inner_radius)
        return radius, fast_unstable_iteration_bound(k, g, eps, r.rho)
    b = r.beta
    if r.stable:
        denom = 1 + b - g * b
        return eps ** (b / denom - r.alpha), eps ** (-1 / denom) * math.log(1 / r.alpha)
    radius = max(eps ** (b / (1 + b + abs(g) * b)), r.inner_radius)
    return radius, eps ** (-1 / (1 + b))


def fast_unstable_iteration_bound(kappa: float, gamma: float, eps: float, rho: float) -> float:
    """log(rho/eps) / ((1 + |gamma|) log(1/kappa)), the linear-rate budget."""
    if not 0 < kappa < 1:
        raise ValidationError("kappa must lie in (0, 1)")
    if gamma >= 0:
        raise ValidationError("gamma must be negative for the unstable bound")
    if not 0 < eps <= rho:
        raise ValidationError("need 0 < eps <= rho")
    return math.log(rho / eps) / ((1 + abs(gamma)) * math.log(1 / kappa))


@dataclass(frozen=True)
class EpochSchedule:
    """Epoch lengths of the localization argument for slow, stable operators.

    Index 0 of every array is the empty epoch (lambda_0 = 0, T_0 = 0).
    """

    lambdas: np.ndarray
    b: float
    b_prime: float
    nu_star: float
    t1: np.ndarray
    t2: np.ndarray
    lengths: np.ndarray
    cumulative: np.ndarray
    n_epochs: int

    def as_rows(self):
        for ell in range(len(self.lambdas)):
            yield (ell, float(self.lambdas[ell]), float(self.t1[ell]), float(self.t2[ell]),
                   int(self.lengths[ell]), int(self.cumulative[ell]))


def epoch_schedule(beta: float, gamma: float, eps: float, alpha: float,
                   c2: float = 1.0, epochs: Optional[int] = None) -> EpochSchedule:
    """Build the lambda recursion and epoch lengths.

    ``epochs`` overrides the default count ceil(log(1/alpha)).
    """
    if not beta > 0:
        raise ValidationError("beta must be positive")
    if not 0 <= gamma <= 1 / beta:
        raise ValidationError("need 0 <= gamma <= 1/beta")
    if not 0 < eps < 1:
        raise ValidationError("eps must lie in (0, 1)")
    if not c2 > 0:
        raise ValidationError("c2 must be positive")
    nu = beta / (1 + beta - gamma * beta)
    if not 0 < alpha < nu:
        raise ValidationError(f"alpha must lie in (0, {nu})")
    n_ep = math.ceil(math.log(1 / alpha)) if epochs is None else int(epochs)
    if n_ep < 0:
        raise ValidationError("epoch count must be nonnegative")

    b = beta * gamma / (1 + beta)
    bp = beta / (1 + beta)
    lam = np.zeros(n_ep + 1)
    for ell in range(n_ep):
        lam[ell + 1] = b * lam[ell] + bp

    C = (c2 * 2.0 ** gamma) ** (-1 / (1 + beta))
    Cp = C ** ((1 + beta + beta * gamma) / (1 + beta))
    t1 = np.zeros(n_ep + 1)
    t2 = np.zeros(n_ep + 1)
    ell = np.arange(1, n_ep + 1)
    t1[1:] = C * eps ** (-(lam[ell - 1] * gamma + 1) / (1 + beta))
    t2[1:] = Cp * eps ** (-(lam[ell] * gamma + 1) / (1 + beta))
    total = t1 + t2
    if not np.all(np.isfinite(total)) or total.max() >= 2.0 ** 62:
        raise ValidationError("epoch lengths overflow; eps is too small for this beta")
    lengths = np.ceil(total).astype(np.int64)
    lengths[0] = 0
    return EpochSchedule(lam, b, bp, nu, t1, t2, lengths, np.cumsum(lengths), n_ep)

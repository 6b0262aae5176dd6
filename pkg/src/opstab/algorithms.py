"""Step rules and the operator factory.

All rules act on a minimized ``Objective`` (see ``models``). Gradient
ascent on a log-likelihood is gradient descent on its negation, so "GA" is
accepted as an alias of "GD".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import IterationError, OperatorHandle, ValidationError, as_vector
from .models import (
    MixtureData,
    MixtureObjective,
    Objective,
    double_factorial,
    get_objective,
)

ALGORITHMS = ("GD", "GA", "NM", "CNM", "EM")

SUPPORTED = {
    "nonresponse": ("GD", "GA", "NM", "CNM"),
    "mixture": ("GD", "GA", "NM", "CNM", "EM"),
    "regression": ("GD", "GA", "NM", "CNM"),
    "polynomial": ("GD", "GA", "NM", "CNM"),
    "counterexample": ("NM",),
}


class SingularHessianError(IterationError):
    """Newton system with a (numerically) singular Hessian."""


@dataclass(frozen=True)
class AlgorithmConfig:
    step_size: Optional[float] = None
    cubic_L: Optional[float] = None
    hess_floor: float = 0.0

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise ValidationError("step size must be positive")
        if self.cubic_L is not None and not self.cubic_L > 0:
            raise ValidationError("cubic constant must be positive")
        if not self.hess_floor >= 0:
            raise ValidationError("Hessian floor must be nonnegative")


def step_size_range(model: str, p: int = 1):
    """(upper bound, inclusive) on the step size, or None if unrestricted."""
    if model == "nonresponse":
        return 8.0 / 3.0, False
    if model == "regression":
        return 1.0 / (double_factorial(4 * p - 1) * 2 * p), True
    return None


def default_config(model: str, algorithm: str, p: int = 1, spec=None) -> AlgorithmConfig:
    """Step size / cubic constant used when the caller does not give one."""
    algorithm = algorithm.upper()
    if algorithm in ("GD", "GA"):
        eta = {"nonresponse": 2.0, "mixture": 1.0, "polynomial": 0.5}.get(model)
        if model == "regression":
            eta = 0.5 * step_size_range(model, p)[0]
        return AlgorithmConfig(step_size=eta)
    if algorithm == "CNM":
        if model == "regression":
            k = 4 * p - 1
            return AlgorithmConfig(cubic_L=double_factorial(k) * k * p / 3.0)
        if model == "polynomial":
            pp = spec.p if spec is not None else 4
            return AlgorithmConfig(cubic_L=(pp - 1) * (pp - 2) / 6.0)
        return AlgorithmConfig(cubic_L=1.0)
    return AlgorithmConfig()


# ---------------------------------------------------------------------------
# step rules
# ---------------------------------------------------------------------------


def gd_step(obj: Objective, config: AlgorithmConfig, theta) -> np.ndarray:
    """theta - eta * grad f(theta)."""
    if config.step_size is None:
        raise ValidationError("gradient steps need a step size")
    th = as_vector(theta)
    return th - config.step_size * obj.grad(th)


def solve_newton_system(H, g) -> np.ndarray:
    """Solve H x = g, refusing numerically singular H.

    LAPACK's LU with partial pivoting does the work in d > 1; a condition
    number above 1e14 counts as singular, which makes the test relative
    to the scale of H.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g))):
        raise SingularHessianError("non-finite Newton system")
    if H.shape == (1, 1):
        if H[0, 0] == 0.0:
            raise SingularHessianError("zero Hessian")
        out = g / H[0, 0]
    else:
        if np.linalg.cond(H) > 1e14:
            raise SingularHessianError("singular Hessian")
        out = np.linalg.solve(H, g)
    if not np.all(np.isfinite(out)):
        raise SingularHessianError("Newton step overflowed")
    return out


def newton_step(obj: Objective, config: AlgorithmConfig, theta) -> np.ndarray:
    """theta - (H + floor I)^{-1} grad."""
    th = as_vector(theta)
    H = obj.hess(th)
    if config.hess_floor:
        H = H + config.hess_floor * np.eye(len(th))
    try:
        delta = solve_newton_system(H, obj.grad(th))
    except SingularHessianError as exc:
        raise SingularHessianError(f"{exc} at theta={th.tolist()}", theta=th) from None
    return th - delta


def cubic_model_minimizer(g: float, h: float, L: float) -> float:
    """argmin_s g s + h s^2 / 2 + L |s|^3 (the step, not the new point)."""
    if g == 0.0:
        # stationary points are kept fixed
        return 0.0
    root = math.sqrt(h * h + 12.0 * L * abs(g))
    if h >= 0:
        return -2.0 * g / (h + root)
    # same root, written to avoid cancellation in h + root when h < 0
    return -math.copysign((root - h) / (6.0 * L), g)


def cnm_step(obj: Objective, config: AlgorithmConfig, theta) -> np.ndarray:
    """Cubic-regularized Newton step in one dimension.

    Computed at |theta| and reflected, so the map is exactly odd for the
    even objectives used here.
    """
    if config.cubic_L is None:
        raise ValidationError("cubic-regularized Newton needs the constant L")
    th = as_vector(theta)
    if th.size != 1:
        raise ValidationError("cubic-regularized Newton is one-dimensional only")
    t = float(th[0])
    a = abs(t)
    x = np.array([a])
    g = float(obj.grad(x)[0])
    h = float(obj.hess(x)[0, 0])
    if not (math.isfinite(g) and math.isfinite(h)):
        raise IterationError(f"non-finite derivatives at theta={t}", theta=th)
    y = a + cubic_model_minimizer(g, h, config.cubic_L)
    return np.array([math.copysign(y, t) if t != 0 else y])


def em_step_mixture(data: Optional[MixtureData], theta, order: int = 100) -> np.ndarray:
    """mean X tanh(theta'X), or E[X tanh(theta'X)] when ``data`` is None."""
    th = as_vector(theta)
    d = th.size if data is None else data.dim
    return MixtureObjective(data, d=d, order=order).em_map(th)


# ---------------------------------------------------------------------------
# factory
# ---------------------------------------------------------------------------


def _check_step_size(model, config, p):
    bound = step_size_range(model, p)
    if bound is None or config.step_size is None:
        return
    hi, inclusive = bound
    ok = config.step_size <= hi * (1 + 1e-12) if inclusive else config.step_size < hi
    if not ok:
        raise ValidationError(f"step size {config.step_size} outside the admissible range "
                              f"(0, {hi}{']' if inclusive else ')'} for {model}")


def make_operator(model: str, algorithm: str, level: str, data=None,
                  config: Optional[AlgorithmConfig] = None, *, p: int = 1, d: int = 1,
                  spec=None, order: int = 100) -> OperatorHandle:
    """Operator for (model, algorithm) at population or sample level.

    The polynomial and counterexample families are deterministic: pass the
    spec as ``spec`` (or as ``data`` at sample level).
    """
    algorithm = algorithm.upper()
    if model not in SUPPORTED:
        raise ValidationError(f"unknown model {model!r}; supported: {sorted(SUPPORTED)}")
    if algorithm not in SUPPORTED[model]:
        matrix = "; ".join(f"{m}: {','.join(a)}" for m, a in SUPPORTED.items())
        raise ValidationError(f"unsupported pair ({model}, {algorithm}); supported: {matrix}")

    deterministic = model in ("polynomial", "counterexample")
    if deterministic:
        spec = spec if spec is not None else data
        data = None
    if data is not None:
        p = getattr(data, "p", p)
        d = data.dim
    elif spec is not None:
        d = spec.dim
    if level == "sample" and data is None and not deterministic:
        raise ValidationError("sample operators need a dataset")
    if level == "population":
        data = None

    obj = get_objective(model, level, data, p=p, d=d, spec=spec, order=order)
    base = default_config(model, algorithm, p=p, spec=spec)
    if config is None:
        config = base
    else:
        config = AlgorithmConfig(
            step_size=config.step_size if config.step_size is not None else base.step_size,
            cubic_L=config.cubic_L if config.cubic_L is not None else base.cubic_L,
            hess_floor=config.hess_floor,
        )

    if algorithm in ("GD", "GA"):
        _check_step_size(model, config, p)
        step = lambda th: gd_step(obj, config, th)
    elif algorithm == "NM":
        step = lambda th: newton_step(obj, config, th)
    elif algorithm == "CNM":
        if obj.dim != 1:
            raise ValidationError("cubic-regularized Newton is one-dimensional only")
        step = lambda th: cnm_step(obj, config, th)
    else:
        step = obj.em_map

    # the sample handle keeps its dataset (or spec) as its data reference
    ref = None if level == "population" else (data if data is not None else spec)
    return OperatorHandle(model, algorithm, level, step, obj.dim, ref, config)

"""Data generators, objectives and sample optimizers for the test models.

Objectives follow one sign convention: they are minimized. Log-likelihoods
are negated here, once, so every algorithm is a descent method. The only
exception is the escape counterexample, which is kept in its original
maximization form because only its Newton map is ever used.

Models
------
``nonresponse``   Gaussian responses with value-dependent missingness (1-D).
``mixture``       symmetric two-component Gaussian location mixture fitted to
                  standard normal data (any d).
``regression``    single-index model Y = (X'theta)^(2p) + noise (any d).
``polynomial``    deterministic |theta|^p / p with a -eps |theta|^q / q tilt.
``counterexample`` -theta^4 (theta - 2)^2 with a -theta^2/sqrt(n) tilt (1-D).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .core import ParamPoint, ValidationError, as_vector

MODELS = ("nonresponse", "mixture", "regression", "polynomial", "counterexample")

LOG2 = math.log(2.0)
LOG2PI = math.log(2.0 * math.pi)


def double_factorial(k: int) -> int:
    """k!! by exact integer recurrence (1 for k <= 0)."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NonResponseData:
    """Response indicators and the responses that were actually observed.

    ``y_obs`` holds Y_i for the records with r_i = 1, in record order; the
    unobserved responses are not stored at all.
    """

    r: np.ndarray
    y_obs: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.int8)
        y = np.asarray(self.y_obs, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise ValidationError("need a nonempty 1-D indicator array")
        if not np.all((r == 0) | (r == 1)):
            raise ValidationError("indicators must be 0 or 1")
        if y.shape != (int(r.sum()),):
            raise ValidationError("one observed response per r_i = 1 is required")
        if not np.all(np.isfinite(y)):
            raise ValidationError("observed responses must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "y_obs", y)

    @property
    def n(self) -> int:
        return int(self.r.size)

    @property
    def dim(self) -> int:
        return 1

    @cached_property
    def stats(self):
        """(fraction missing, mean of R*Y^2, fraction observed)."""
        n = self.n
        observed = float(self.r.sum()) / n
        return 1.0 - observed, float(np.sum(self.y_obs ** 2)) / n, observed

    def y_full(self) -> np.ndarray:
        """Responses with NaN in the unobserved slots (for export only)."""
        out = np.full(self.n, np.nan)
        out[self.r == 1] = self.y_obs
        return out


@dataclass(frozen=True, eq=False)
class MixtureData:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] == 0:
            raise ValidationError("mixture data must be a nonempty (n, d) array")
        if not np.all(np.isfinite(x)):
            raise ValidationError("mixture data must be finite")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @cached_property
    def second_moment(self) -> np.ndarray:
        return self.x.T @ self.x / self.n


@dataclass(frozen=True, eq=False)
class RegressionData:
    x: np.ndarray
    y: np.ndarray
    p: int = 1

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2 or x.shape[0] == 0 or y.shape[0] != x.shape[0]:
            raise ValidationError("regression data must be (n, d) inputs and n responses")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("regression data must be finite")
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError("link power p must be a positive integer")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", int(self.p))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @cached_property
    def stats(self):
        """1-D sufficient statistics (mean Y^2, mean Y X^2p, mean X^4p)."""
        x = self.x[:, 0]
        x2p = x ** (2 * self.p)
        return float(np.mean(self.y ** 2)), float(np.mean(self.y * x2p)), float(np.mean(x2p ** 2))


@dataclass(frozen=True)
class PolynomialSpec:
    """f(theta) = |theta|^p / p, tilted by -eps |theta|^q / q at sample level."""

    p: float = 4
    q: float = 2
    eps: float = 1e-4
    d: int = 1

    def __post_init__(self):
        if not self.q >= 2:
            raise ValidationError("need q >= 2")
        if not self.p > self.q + 1:
            raise ValidationError("need p > q + 1")
        if not self.eps >= 0:
            raise ValidationError("eps must be nonnegative")
        if self.d < 1:
            raise ValidationError("d must be positive")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def minimizer_norm(self) -> float:
        return self.eps ** (1.0 / (self.p - self.q))


@dataclass(frozen=True)
class CounterexampleSpec:
    n: int = 10_000

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be at least 1")

    @property
    def dim(self) -> int:
        return 1

    @property
    def tilt(self) -> float:
        return 1.0 / math.sqrt(self.n)


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValidationError(f"sample size must be a positive integer, got {n}")


def gen_nonresponse(n: int, theta_star: float = 0.0, seed=None) -> NonResponseData:
    """Y ~ N(0,1); Y is observed with probability exp(-theta*^2 Y^2 / 2) / 2."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    prob = 0.5 * np.exp(-0.5 * theta_star ** 2 * y ** 2)
    r = (rng.random(n) < prob).astype(np.int8)
    return NonResponseData(r, y[r == 1])


def gen_mixture(n: int, d: int = 1, seed=None) -> MixtureData:
    """Standard normal draws: the over-specified mixture at theta* = 0."""
    _check_n(n)
    _check_n(d)
    return MixtureData(np.random.default_rng(seed).standard_normal((n, d)))


def gen_regression(n: int, d: int = 1, p: int = 1, theta_star=0.0, seed=None) -> RegressionData:
    _check_n(n)
    _check_n(d)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    noise = rng.standard_normal(n)
    ts = np.broadcast_to(np.asarray(theta_star, dtype=float), (d,))
    return RegressionData(x, (x @ ts) ** (2 * p) + noise, p)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _hermite_rule(order: int):
    t, w = np.polynomial.hermite.hermgauss(order)
    nodes = math.sqrt(2.0) * t
    weights = w / math.sqrt(math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite_expect(integrand, order: int = 100) -> float:
    """E[g(Z)] for Z ~ N(0, 1) by Gauss-Hermite quadrature.

    ``integrand`` must accept a numpy array of nodes.
    """
    if int(order) != order or not 10 <= order <= 200:
        raise ValidationError("quadrature order must be an integer in [10, 200]")
    z, w = _hermite_rule(int(order))
    vals = np.asarray(integrand(z), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("integrand is not finite at every node")
    return float(np.dot(w, vals))


def log_cosh(u):
    a = np.abs(u)
    return a + np.log1p(np.exp(-2.0 * a)) - LOG2


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------


class Objective:
    """Value, gradient and Hessian of a minimized objective on R^dim."""

    model = ""

    def __init__(self, level: str, dim: int):
        if level not in ("population", "sample"):
            raise ValidationError(f"unknown level {level!r}")
        self.level = level
        self.dim = int(dim)

    def _vec(self, theta) -> np.ndarray:
        th = as_vector(theta)
        if th.size != self.dim:
            raise ValidationError(f"{self.model} objective expects dimension {self.dim}, got {th.size}")
        return th

    def value(self, theta) -> float:
        raise NotImplementedError

    def grad(self, theta) -> np.ndarray:
        raise NotImplementedError

    def hess(self, theta) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, theta):
        th = self._vec(theta)
        return self.value(th), self.grad(th), self.hess(th)


class NonResponseObjective(Objective):
    """Negated average log-likelihood of the non-response model.

    With u = theta^2 + 1 and f(theta) = 1 / (u (2 sqrt(u) - 1)), the sample
    objective depends on the data only through q = mean(1 - R),
    s = mean(R Y^2) and the observed fraction. The population objective is
    the same expression with q = s = observed = 1/2.
    """

    model = "nonresponse"

    def __init__(self, data: NonResponseData | None = None):
        super().__init__("population" if data is None else "sample", 1)
        self.q, self.s, self.observed = (0.5, 0.5, 0.5) if data is None else data.stats

    @staticmethod
    def f(theta):
        u = theta * theta + 1.0
        return 1.0 / (u * (2.0 * np.sqrt(u) - 1.0))

    @staticmethod
    def f_prime(theta):
        u = theta * theta + 1.0
        ru = np.sqrt(u)
        return -2.0 * theta * (3.0 * ru - 1.0) / (u * (2.0 * ru - 1.0)) ** 2

    def value(self, theta):
        t = self._vec(theta)[0]
        u = t * t + 1.0
        return float(self.s * u / 2 + self.observed * LOG2
                     - self.q * math.log1p(-0.5 / math.sqrt(u)))

    def grad(self, theta):
        t = self._vec(theta)[0]
        return np.array([t * (self.s - self.q * self.f(t))])

    def hess(self, theta):
        t = self._vec(theta)[0]
        return np.array([[self.s - self.q * (self.f(t) + t * self.f_prime(t))]])


def nonresponse_T1(theta):
    """1/2 - f(theta)/2: the curvature part that vanishes at the origin."""
    return 0.5 - 0.5 * NonResponseObjective.f(theta)


def nonresponse_T2(theta):
    u = theta * theta + 1.0
    a = 2.0 * np.sqrt(u) - 1.0
    return (3.0 + 1.0 / a) / (2.0 * u * u * a)


class MixtureObjective(Objective):
    """Negated log-likelihood of 0.5 N(theta, I) + 0.5 N(-theta, I).

    Population expectations reduce to one-dimensional Gaussian integrals by
    rotating theta onto the first axis; they are computed by Gauss-Hermite
    quadrature of the given order.
    """

    model = "mixture"

    def __init__(self, data: MixtureData | None = None, d: int = 1, order: int = 100):
        if data is not None:
            d = data.dim
        super().__init__("population" if data is None else "sample", d)
        self.data = data
        self.order = order
        if data is None:
            _hermite_rule(order)
            gauss_hermite_expect(lambda z: z, order)  # validates order

    # population helpers, all in terms of r = |theta|
    def _E(self, g):
        z, w = _hermite_rule(self.order)
        return float(np.dot(w, g(z)))

    def pop_xtanh(self, r: float) -> float:
        """E[Z tanh(r Z)]."""
        return self._E(lambda z: z * np.tanh(r * z))

    def value(self, theta):
        th = self._vec(theta)
        d = self.dim
        if self.data is None:
            r = float(np.linalg.norm(th))
            return 0.5 * d * LOG2PI + 0.5 * (d + r * r) - self._E(lambda z: log_cosh(r * z))
        x = self.data.x
        return float(0.5 * d * LOG2PI + 0.5 * np.mean(np.sum(x * x, axis=1)) + 0.5 * th @ th
                     - np.mean(log_cosh(x @ th)))

    def em_map(self, theta) -> np.ndarray:
        """mean X tanh(theta'X) (sample) or its expectation (population)."""
        th = self._vec(theta)
        if self.data is None:
            r = float(np.linalg.norm(th))
            if r == 0.0:
                return np.zeros_like(th)
            return th * (self.pop_xtanh(r) / r)
        x = self.data.x
        if self.dim == 1:
            x1 = x[:, 0]
            return np.array([np.mean(x1 * np.tanh(th[0] * x1))])
        return x.T @ np.tanh(x @ th) / self.data.n

    def grad(self, theta):
        th = self._vec(theta)
        return th - self.em_map(th)

    def hess(self, theta):
        th = self._vec(theta)
        d = self.dim
        if self.data is None:
            # I - E[XX' sech^2(theta'X)], written with tanh^2 = 1 - sech^2 so
            # that it is exactly zero at the origin
            r = float(np.linalg.norm(th))
            a2 = self._E(lambda z: (z * np.tanh(r * z)) ** 2)
            if d == 1:
                return np.array([[a2]])
            a0 = self._E(lambda z: np.tanh(r * z) ** 2)
            if r == 0.0:
                return np.zeros((d, d))
            u = th / r
            uu = np.outer(u, u)
            return a2 * uu + a0 * (np.eye(d) - uu)
        x = self.data.x
        if d == 1:
            x1 = x[:, 0]
            t = np.tanh(th[0] * x1)
            x2 = x1 * x1
            return np.array([[1.0 - np.mean(x2) + np.mean(x2 * t * t)]])
        t = np.tanh(x @ th)
        return np.eye(d) - (x.T * (1.0 - t * t)) @ x / self.data.n


class RegressionObjective(Objective):
    """Half mean squared residual of Y on (X'theta)^(2p).

    The population objective is (1 + (4p-1)!! |theta|^(4p)) / 2 since the
    noise has unit variance and X is standard normal.
    """

    model = "regression"

    def __init__(self, data: RegressionData | None = None, p: int = 1, d: int = 1):
        if data is not None:
            p, d = data.p, data.dim
        if int(p) != p or p < 1:
            raise ValidationError("link power p must be a positive integer")
        super().__init__("population" if data is None else "sample", d)
        self.data = data
        self.p = int(p)
        self.dfact = float(double_factorial(4 * self.p - 1))

    def value(self, theta):
        th = self._vec(theta)
        p = self.p
        if self.data is None:
            r = float(np.linalg.norm(th))
            return 0.5 * (1.0 + self.dfact * r ** (4 * p))
        if self.dim == 1:
            my2, myx, m4 = self.data.stats
            t = th[0]
            return 0.5 * (my2 - 2.0 * t ** (2 * p) * myx + t ** (4 * p) * m4)
        resid = self.data.y - (self.data.x @ th) ** (2 * p)
        return float(0.5 * np.mean(resid * resid))

    def grad(self, theta):
        th = self._vec(theta)
        p = self.p
        if self.data is None:
            r = float(np.linalg.norm(th))
            return self.dfact * 2 * p * r ** (4 * p - 2) * th
        if self.dim == 1:
            _, myx, m4 = self.data.stats
            t = th[0]
            return np.array([2 * p * (m4 * t ** (4 * p - 1) - myx * t ** (2 * p - 1))])
        z = self.data.x @ th
        resid = self.data.y - z ** (2 * p)
        return -(2 * p) * (self.data.x.T @ (resid * z ** (2 * p - 1))) / self.data.n

    def hess(self, theta):
        th = self._vec(theta)
        p = self.p
        if self.data is None:
            r = float(np.linalg.norm(th))
            c = self.dfact * 2 * p
            return c * (r ** (4 * p - 2) * np.eye(self.dim)
                        + (4 * p - 2) * r ** (4 * p - 4) * np.outer(th, th))
        if self.dim == 1:
            _, myx, m4 = self.data.stats
            t = th[0]
            return np.array([[2 * p * ((4 * p - 1) * m4 * t ** (4 * p - 2)
                                       - (2 * p - 1) * myx * t ** (2 * p - 2))]])
        z = self.data.x @ th
        resid = self.data.y - z ** (2 * p)
        w = (2 * p) ** 2 * z ** (4 * p - 2) - 2 * p * (2 * p - 1) * resid * z ** (2 * p - 2)
        return (self.data.x.T * w) @ self.data.x / self.data.n


class PolynomialObjective(Objective):
    """|theta|^p / p, minus eps |theta|^q / q at sample level."""

    model = "polynomial"

    def __init__(self, spec: PolynomialSpec, level: str = "sample"):
        super().__init__(level, spec.d)
        self.spec = spec
        self.eps = spec.eps if level == "sample" else 0.0

    def value(self, theta):
        r = float(np.linalg.norm(self._vec(theta)))
        p, q = self.spec.p, self.spec.q
        return r ** p / p - self.eps * r ** q / q

    def radial(self, r: float) -> float:
        """Gradient divided by theta: |theta|^(p-2) - eps |theta|^(q-2)."""
        p, q = self.spec.p, self.spec.q
        return r ** (p - 2) - self.eps * r ** (q - 2)

    def grad(self, theta):
        th = self._vec(theta)
        r = float(np.linalg.norm(th))
        if r == 0.0:
            return np.zeros_like(th)
        return self.radial(r) * th

    def hess(self, theta):
        th = self._vec(theta)
        r = float(np.linalg.norm(th))
        p, q = self.spec.p, self.spec.q
        d = self.dim
        if r == 0.0:
            # continuous limit; only the q = 2 tilt survives at the origin
            return -self.eps * np.eye(d) if q == 2 else np.zeros((d, d))
        outer = (p - 2) * r ** (p - 4) - self.eps * (q - 2) * r ** (q - 4)
        return self.radial(r) * np.eye(d) + outer * np.outer(th, th)


class CounterexampleObjective(Objective):
    """-(theta^4 - a theta^2)(theta - 2)^2 with a = 1/sqrt(n) (a = 0 at population).

    Kept in maximization form: the population function peaks at 0 and 2.
    """

    model = "counterexample"

    def __init__(self, spec: CounterexampleSpec, level: str = "sample"):
        super().__init__(level, 1)
        self.spec = spec
        self.a = spec.tilt if level == "sample" else 0.0

    def _parts(self, t):
        a = self.a
        u = (t ** 4 - a * t * t, 4 * t ** 3 - 2 * a * t, 12 * t * t - 2 * a)
        v = ((t - 2) ** 2, 2 * (t - 2), 2.0)
        return u, v

    def value(self, theta):
        (u, _, _), (v, _, _) = self._parts(self._vec(theta)[0])
        return -u * v

    def grad(self, theta):
        (u, u1, _), (v, v1, _) = self._parts(self._vec(theta)[0])
        return np.array([-(u1 * v + u * v1)])

    def hess(self, theta):
        (u, u1, u2), (v, v1, v2) = self._parts(self._vec(theta)[0])
        return np.array([[-(u2 * v + 2 * u1 * v1 + u * v2)]])


def counterexample_stationary_point(n: int) -> float:
    """Positive stationary point of the tilted counterexample near the origin."""
    obj = CounterexampleObjective(CounterexampleSpec(n), "sample")
    g = lambda t: obj.grad(t)[0]
    hi = 2.0 * n ** -0.25
    return float(brentq(g, 1e-3 * hi, hi, xtol=1e-15))


def get_objective(model: str, level: str, data=None, *, p: int = 1, d: int = 1,
                  spec=None, order: int = 100) -> Objective:
    """Build the objective of ``model`` at ``level``.

    Sample-level statistical models need ``data``; the polynomial and
    counterexample families take their spec as ``data`` (or ``spec``).
    """
    if level not in ("population", "sample"):
        raise ValidationError(f"unknown level {level!r}")
    if model in ("polynomial", "counterexample"):
        spec = spec if spec is not None else data
        want = PolynomialSpec if model == "polynomial" else CounterexampleSpec
        if not isinstance(spec, want):
            raise ValidationError(f"{model} needs a {want.__name__}")
        cls = PolynomialObjective if model == "polynomial" else CounterexampleObjective
        return cls(spec, level)
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}; choose from {MODELS}")
    if level == "sample" and data is None:
        raise ValidationError("sample objectives need a dataset")
    if level == "population":
        data = None
    want = {"nonresponse": NonResponseData, "mixture": MixtureData,
            "regression": RegressionData}[model]
    if data is not None and not isinstance(data, want):
        raise ValidationError(f"{model} expects {want.__name__}, got {type(data).__name__}")
    if model == "nonresponse":
        if d != 1:
            raise ValidationError("the non-response model is one-dimensional")
        return NonResponseObjective(data)
    if model == "mixture":
        return MixtureObjective(data, d=d, order=order)
    return RegressionObjective(data, p=p, d=d)


def objective(model: str, level: str, data, theta, **kw):
    """(value, gradient, Hessian) of the minimized objective at ``theta``."""
    return get_objective(model, level, data, **kw)(theta)


def polynomial_objective(spec: PolynomialSpec, level: str, theta):
    return PolynomialObjective(spec, level)(theta)


def counterexample_objective(spec: CounterexampleSpec, level: str, theta):
    return CounterexampleObjective(spec, level)(theta)


# ---------------------------------------------------------------------------
# sample optimizers (1-D)
# ---------------------------------------------------------------------------


def _root(fun, lo, hi):
    flo, fhi = fun(lo), fun(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if not flo < 0 < fhi:
        raise ValidationError(f"bisection interval [{lo}, {hi}] does not bracket a root "
                              f"(values {flo}, {fhi})")
    return brentq(fun, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def _mixture_mle(data: MixtureData) -> float:
    x = data.x[:, 0]
    if np.sum(x * x) <= data.n:
        return 0.0
    obj = MixtureObjective(data)
    g = lambda t: obj.grad(np.array([t]))[0]
    # g(t) >= t - max|x|, so g is strictly positive past max|x|; the margin
    # keeps a root sitting exactly at max|x| (all points equal) inside the grid
    hi = float(np.max(np.abs(x))) * (1.0 + 1e-6) + 1e-12
    # g < 0 just right of 0 and g(hi) > 0; scan for every upward crossing
    # and keep the best one in case the likelihood has several local maxima
    grid = np.linspace(0.0, hi, 401)[1:]
    vals = np.array([g(t) for t in grid])
    lo_edge = grid[0]
    while vals[0] >= 0:
        lo_edge /= 2.0
        if lo_edge < 1e-300:
            raise ValidationError("could not bracket the mixture likelihood root")
        grid = np.concatenate(([lo_edge], grid))
        vals = np.concatenate(([g(lo_edge)], vals))
    roots = [_root(g, grid[i], grid[i + 1])
             for i in range(len(grid) - 1) if vals[i] < 0 <= vals[i + 1]]
    if not roots:
        raise ValidationError("mixture likelihood root not bracketed")
    return min(roots, key=lambda t: obj.value(np.array([t])))


def _nonresponse_mle(data: NonResponseData) -> float:
    q, s, _ = data.stats
    # curvature at the origin is s - q; the origin is optimal unless it is negative
    if s >= q:
        return 0.0
    h = lambda t: s - q * NonResponseObjective.f(t)
    hi = 2.0 * max(1.0, (q / (2.0 * s)) ** (1.0 / 3.0))
    while h(hi) <= 0:
        hi *= 2.0
    lo = 0.5 * hi
    while h(lo) >= 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ValidationError("could not bracket the non-response likelihood root")
    return _root(h, lo, hi)


def _regression_mle(data: RegressionData) -> float:
    p = data.p
    x = data.x[:, 0]
    num = float(np.sum(data.y * x ** (2 * p)))
    if num <= 0:
        return 0.0
    return (num / float(np.sum(x ** (4 * p)))) ** (1.0 / (2 * p))


def sample_mle(model: str, data) -> ParamPoint:
    """Nonnegative global optimizer of the 1-D sample objective."""
    if getattr(data, "dim", 1) != 1:
        raise ValidationError("sample_mle supports one-dimensional data only")
    if model == "mixture" and isinstance(data, MixtureData):
        return ParamPoint([_mixture_mle(data)])
    if model == "nonresponse" and isinstance(data, NonResponseData):
        return ParamPoint([_nonresponse_mle(data)])
    if model == "regression" and isinstance(data, RegressionData):
        return ParamPoint([_regression_mle(data)])
    if model == "polynomial" and isinstance(data, PolynomialSpec):
        return ParamPoint([data.minimizer_norm])
    raise ValidationError(f"no sample optimizer for model {model!r} with {type(data).__name__}")


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def save_dataset(data, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if isinstance(data, NonResponseData):
                w.writerow(["r", "y"])
                y = data.y_full()
                for ri, yi in zip(data.r, y):
                    w.writerow([int(ri), repr(float(yi)) if ri == 1 else ""])
            elif isinstance(data, MixtureData):
                w.writerow([f"x{j + 1}" for j in range(data.dim)])
                w.writerows([[repr(float(v)) for v in row] for row in data.x])
            elif isinstance(data, RegressionData):
                w.writerow([f"x{j + 1}" for j in range(data.dim)] + ["y"])
                for row, yi in zip(data.x, data.y):
                    w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])
            else:
                raise ValidationError(f"cannot save {type(data).__name__}")
    except OSError as exc:
        raise OSError(f"could not write dataset to {path}: {exc}") from exc


def load_dataset(path, p: int = 1):
    """Read a dataset written by ``save_dataset``; the header decides the kind."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"could not read dataset {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: missing header row")
    header, body = rows[0], rows[1:]
    if header == ["r", "y"]:
        r = np.array([int(row[0]) for row in body], dtype=np.int8)
        y = np.array([float(row[1]) for row in body if row[0] == "1"])
        return NonResponseData(r, y)
    xcols = [h for h in header if h.startswith("x")]
    if not xcols or header[: len(xcols)] != [f"x{j + 1}" for j in range(len(xcols))]:
        raise ValidationError(f"{path}: unrecognized header {header}")
    arr = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    if header[-1] == "y" and len(header) == len(xcols) + 1:
        return RegressionData(arr[:, :-1], arr[:, -1], p)
    if len(header) == len(xcols):
        return MixtureData(arr)
    raise ValidationError(f"{path}: unrecognized header {header}")

"""Empirical readouts: perturbation profiles, power-law fits, rate classes."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algorithms import AlgorithmConfig, make_operator
from .core import IterationError, IterationTrace, ValidationError


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float
    residual_norm: float
    domain: str  # "log-log" or "semilog"
    n_points: int = 0


def fit_linear(u, v, domain: str = "linear") -> RateFit:
    """Least-squares line v = slope * u + intercept."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    A = np.column_stack([u, np.ones_like(u)])
    (slope, intercept), *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - (slope * u + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    if ss_tot <= 1e-30 * max(1.0, float(v @ v)):
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(slope), float(intercept), r2, float(np.sqrt(ss_res)), domain, len(u))


def fit_power_law(xs, ys) -> RateFit:
    """Least-squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise ValidationError("need at least three (x, y) pairs of equal length")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValidationError("power-law fits need positive data")
    return fit_linear(np.log(xs), np.log(ys), "log-log")


def fit_semilog(xs, ys) -> RateFit:
    """Least-squares line through (x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise ValidationError("need at least three (x, y) pairs of equal length")
    if np.any(ys <= 0):
        raise ValidationError("semilog fits need positive y")
    return fit_linear(xs, np.log(ys), "semilog")


# ---------------------------------------------------------------------------
# convergence classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceClass:
    mode: str  # "FAST" or "SLOW"
    rate: float  # kappa_hat for FAST, beta_hat for SLOW
    fit: RateFit
    other: RateFit

    @property
    def kappa_hat(self) -> Optional[float]:
        return self.rate if self.mode == "FAST" else None

    @property
    def beta_hat(self) -> Optional[float]:
        return self.rate if self.mode == "SLOW" else None


SKIP_TRANSIENT = 5
FAST_MARGIN = 0.02


def classify_convergence(trace, skip: int = SKIP_TRANSIENT) -> ConvergenceClass:
    """Decide between linear and sublinear convergence of an error sequence.

    Accepts an ``IterationTrace`` or a plain error sequence. The first
    ``skip`` iterations and any trailing plateau at the numerical floor are
    left out of the fits.
    """
    errs = np.asarray(trace.errors if isinstance(trace, IterationTrace) else trace, dtype=float)
    if errs.size < 20:
        raise ValidationError("need at least 20 trace entries")
    zero = np.flatnonzero(errs <= 0)
    if zero.size:
        errs = errs[: zero[0]]
    t = np.arange(errs.size, dtype=float)
    keep = t >= max(skip, 1)
    if errs.size:
        final = errs[-1]
        flat = np.abs(errs - final) <= 2 * np.finfo(float).eps * final
        # drop the tail that has settled at the floor, keeping its first point
        tail = errs.size
        while tail > 1 and flat[tail - 1] and flat[tail - 2]:
            tail -= 1
        keep &= t < tail
    if keep.sum() < 3:
        raise ValidationError("too few usable points after removing transient and plateau")
    tt, ee = t[keep], errs[keep]
    semi = fit_semilog(tt, ee)
    loglog = fit_power_law(tt, ee)
    if semi.r2 >= loglog.r2 + FAST_MARGIN:
        return ConvergenceClass("FAST", float(np.exp(semi.slope)), semi, loglog)
    return ConvergenceClass("SLOW", -loglog.slope, loglog, semi)


# ---------------------------------------------------------------------------
# perturbation profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityProfile:
    radii: np.ndarray
    sup_perturbation: np.ndarray  # NaN where the radius is invalid
    probes_ok: np.ndarray
    n_probes: int
    fit_range: tuple
    fit: Optional[RateFit]
    inner_radius: Optional[float] = None

    @property
    def valid(self) -> np.ndarray:
        return self.probes_ok * 2 >= self.n_probes

    @property
    def gamma_hat(self) -> float:
        return float("nan") if self.fit is None else self.fit.slope


def probe_directions(d: int, count: int, seed=0) -> np.ndarray:
    """Unit probe directions: +-1 in 1-D, normalized Gaussian draws otherwise."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if count < 8:
        raise ValidationError("use at least 8 probes per radius when d > 1")
    g = np.random.default_rng(seed).standard_normal((count, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def perturbation_profile(model: str, algorithm: str, data, radii: Sequence[float],
                         probes_per_radius: int = 16, seed=0,
                         config: Optional[AlgorithmConfig] = None,
                         fit_range: Optional[tuple] = None, *, p: int = 1,
                         spec=None, order: int = 100) -> StabilityProfile:
    """Sup over probe points of |F_n(theta) - F(theta)| on spheres around 0.

    ``data`` is the dataset (or the deterministic spec for the polynomial and
    counterexample families). The exponent is fitted over ``fit_range``
    (inclusive radius bounds; default all radii).
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0):
        raise ValidationError("radii must be a nonempty list of positive values")
    if np.any(np.diff(radii) <= 0):
        raise ValidationError("radii must be strictly increasing")
    kw = dict(p=p, spec=spec, order=order)
    sample = make_operator(model, algorithm, "sample", data, config, **kw)
    if spec is None and model in ("polynomial", "counterexample"):
        kw["spec"] = data
    pop = make_operator(model, algorithm, "population", None, sample.config,
                        d=sample.dim, **kw)
    dirs = probe_directions(sample.dim, probes_per_radius, seed)

    sup = np.full(radii.size, np.nan)
    ok = np.zeros(radii.size, dtype=int)
    for k, r in enumerate(radii):
        best = 0.0
        for u in dirs:
            theta = r * u
            try:
                diff = np.linalg.norm(sample(theta) - pop(theta))
            except (IterationError, ValidationError, ArithmeticError):
                continue
            if not np.isfinite(diff):
                continue
            ok[k] += 1
            best = max(best, float(diff))
        if ok[k] * 2 >= len(dirs):
            sup[k] = best

    lo, hi = fit_range if fit_range is not None else (radii[0], radii[-1])
    use = (radii >= lo * (1 - 1e-12)) & (radii <= hi * (1 + 1e-12)) & np.isfinite(sup) & (sup > 0)
    fit = fit_power_law(radii[use], sup[use]) if use.sum() >= 3 else None
    prof = StabilityProfile(radii, sup, ok, len(dirs), (float(lo), float(hi)), fit)
    if fit is not None and fit.slope < 0:
        prof = StabilityProfile(radii, sup, ok, len(dirs), prof.fit_range, fit,
                                detect_inner_radius(prof))
    return prof


def detect_inner_radius(profile: StabilityProfile, factor: float = 2.0) -> float:
    """Largest radius where the perturbation exceeds ``factor`` times the fitted trend.

    Falls back to the smallest profiled radius when the trend never breaks.
    Only meaningful for unstable (negative-exponent) profiles.
    """
    if profile.fit is None or not profile.fit.slope < 0:
        raise ValidationError("inner radius is defined for unstable profiles only (gamma_hat < 0)")
    r = profile.radii
    s = profile.sup_perturbation
    trend = np.exp(profile.fit.intercept) * r ** profile.fit.slope
    broken = np.isfinite(s) & (s > factor * trend)
    if not broken.any():
        return float(r[0])
    return float(r[broken].max())


def write_profile_csv(profile: StabilityProfile, path, summary_path=None) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "sup_perturbation", "probes_ok"])
            for r, s, k in zip(profile.radii, profile.sup_perturbation, profile.probes_ok):
                w.writerow([repr(float(r)), "" if not np.isfinite(s) else repr(float(s)), int(k)])
        if summary_path is not None:
            with Path(summary_path).open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["gamma_hat", "r_tilde", "r2"])
                w.writerow([repr(profile.gamma_hat),
                            "" if profile.inner_radius is None else repr(profile.inner_radius),
                            "" if profile.fit is None else repr(profile.fit.r2)])
    except OSError as exc:
        raise OSError(f"could not write profile to {path}: {exc}") from exc

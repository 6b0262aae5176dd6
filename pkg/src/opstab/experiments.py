"""Monte-Carlo sweeps, figure reproductions and the deterministic suites."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .algorithms import AlgorithmConfig, cubic_model_minimizer, make_operator
from .analysis import (
    ConvergenceClass,
    classify_convergence,
    fit_linear,
    fit_power_law,
    perturbation_profile,
)
from .core import (
    IterationError,
    IterationTrace,
    ValidationError,
    best_iterate_error,
    iterate,
    iterate_until,
)
from .models import (
    CounterexampleSpec,
    PolynomialSpec,
    gen_mixture,
    gen_nonresponse,
    gen_regression,
)

MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def cell_seed(master_seed: int, algorithm_index: int, n: int, trial: int) -> int:
    """64-bit seed of one sweep cell, chained through split-mix rounds."""
    h = _splitmix64(int(master_seed) & MASK64)
    for part in (algorithm_index, n, trial):
        h = _splitmix64(h ^ (int(part) & MASK64))
    return h


# ---------------------------------------------------------------------------
# sweep configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitRule:
    """How a sweep cell picks theta^0.

    kind "fixed":   theta^0 = value along the first coordinate axis.
    kind "offset":  |theta^0| = value, direction uniform on the sphere.
    kind "annulus": |theta^0| uniform in [r_in, r_out], direction uniform.
    In one dimension the random direction is a random sign.
    """

    kind: str = "fixed"
    value: float = 0.5
    r_in: float = 0.0
    r_out: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "offset", "annulus"):
            raise ValidationError(f"unknown init rule {self.kind!r}")
        if self.kind == "annulus" and not 0 <= self.r_in <= self.r_out:
            raise ValidationError("annulus needs 0 <= r_in <= r_out")

    def draw(self, d: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            out = np.zeros(d)
            out[0] = self.value
            return out
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        r = self.value if self.kind == "offset" else rng.uniform(self.r_in, self.r_out)
        return r * u


@dataclass(frozen=True)
class ThresholdRule:
    """Threshold c * n^(-a); a = 0 gives an absolute threshold."""

    c: float = 3.0
    a: float = 0.25

    def __post_init__(self):
        if not self.c > 0 or self.a < 0:
            raise ValidationError("threshold needs c > 0 and a >= 0")

    def __call__(self, n: int) -> float:
        return self.c * n ** (-self.a)


@dataclass(frozen=True)
class SweepConfig:
    model: str
    algorithms: tuple
    n_grid: tuple = tuple(2 ** k for k in range(10, 17))
    d: int = 1
    p: int = 1
    trials: int = 20
    master_seed: int = 0
    init: object = InitRule()  # one InitRule or a mapping algorithm -> InitRule
    threshold: ThresholdRule = ThresholdRule()
    max_iters: int = 20_000
    stall_tol: Optional[float] = 1e-10
    configs: object = None  # mapping algorithm -> AlgorithmConfig
    record_timing: bool = True

    def __post_init__(self):
        algs = (self.algorithms,) if isinstance(self.algorithms, str) else tuple(self.algorithms)
        object.__setattr__(self, "algorithms", tuple(a.upper() for a in algs))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.algorithms:
            raise ValidationError("need at least one algorithm")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValidationError("n grid must be nonempty and strictly ascending")
        if self.n_grid[0] < 1:
            raise ValidationError("sample sizes must be positive")
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        if self.threshold.a <= 0:
            raise ValidationError("threshold exponent must be positive")
        if self.model not in ("nonresponse", "mixture", "regression"):
            raise ValidationError(f"sweeps run on statistical models, not {self.model!r}")
        if self.model == "nonresponse" and self.d != 1:
            raise ValidationError("the non-response model is one-dimensional")

    def init_for(self, algorithm: str) -> InitRule:
        if isinstance(self.init, InitRule):
            return self.init
        return self.init.get(algorithm, InitRule())

    def config_for(self, algorithm: str) -> Optional[AlgorithmConfig]:
        return None if not self.configs else self.configs.get(algorithm)


CSV_COLUMNS = ("model", "algorithm", "n", "d", "trial", "seed", "final_error", "min_error",
               "hit_iteration", "iterations_run", "wall_time")


@dataclass(frozen=True)
class SweepRow:
    model: str
    algorithm: str
    n: int
    d: int
    trial: int
    seed: int
    final_error: float  # NaN for a failed cell
    min_error: float
    hit_iteration: Optional[int]
    iterations_run: int
    wall_time: float

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.final_error)


@dataclass(frozen=True)
class Aggregate:
    algorithm: str
    n: int
    median_final_error: float
    median_hit_iteration: float  # over trials that reached the threshold
    hits: int
    trials: int
    failures: int


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.algorithm, r.n, r.trial))

    @property
    def aggregates(self) -> List[Aggregate]:
        return aggregate_rows(self.rows)

    def aggregate(self, algorithm: str) -> List[Aggregate]:
        return [a for a in self.aggregates if a.algorithm == algorithm]

    def algorithms(self) -> List[str]:
        return sorted({r.algorithm for r in self.rows})


def aggregate_rows(rows: Sequence[SweepRow]) -> List[Aggregate]:
    groups: Dict[tuple, List[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.n), []).append(r)
    out = []
    for (alg, n), grp in sorted(groups.items()):
        ok = [r for r in grp if not r.failed]
        hits = [r.hit_iteration for r in ok if r.hit_iteration is not None]
        out.append(Aggregate(
            alg, n,
            float(np.median([r.final_error for r in ok])) if ok else float("nan"),
            float(np.median(hits)) if hits else float("nan"),
            len(hits), len(grp), len(grp) - len(ok)))
    return out


def make_dataset(model: str, n: int, d: int, p: int, seed: int):
    if model == "nonresponse":
        return gen_nonresponse(n, seed=seed)
    if model == "mixture":
        return gen_mixture(n, d, seed=seed)
    if model == "regression":
        return gen_regression(n, d, p, seed=seed)
    raise ValidationError(f"no data generator for {model!r}")


def _run_cell(args) -> SweepRow:
    cfg, alg_index, n, trial = args
    alg = cfg.algorithms[alg_index]
    seed = cell_seed(cfg.master_seed, alg_index, n, trial)
    rng = np.random.default_rng(seed)
    data = make_dataset(cfg.model, n, cfg.d, cfg.p, seed=rng.integers(0, 2 ** 63))
    theta0 = cfg.init_for(alg).draw(cfg.d, rng)
    start = time.perf_counter()
    try:
        op = make_operator(cfg.model, alg, "sample", data, cfg.config_for(alg), p=cfg.p)
        trace, hit = iterate_until(op, theta0, None, cfg.threshold(n), cfg.max_iters,
                                   stall_tol=cfg.stall_tol)
        _, emin = best_iterate_error(trace)
        final, iters = trace.final_error, trace.iterations
    except IterationError:
        final = emin = float("nan")
        hit, iters = None, -1
    wall = time.perf_counter() - start if cfg.record_timing else 0.0
    return SweepRow(cfg.model, alg, n, cfg.d, trial, seed, final, emin, hit, iters, wall)


def run_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Run every (algorithm, n, trial) cell; rows come back sorted."""
    cells = [(config, a, n, t) for a in range(len(config.algorithms))
             for n in config.n_grid for t in range(config.trials)]
    # validate the (model, algorithm) pairs before spending time on data
    for alg in config.algorithms:
        make_operator(config.model, alg, "population", None, config.config_for(alg),
                      p=config.p, d=config.d)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells, chunksize=8))
    else:
        rows = [_run_cell(c) for c in cells]
    return SweepResult(rows)


@dataclass(frozen=True)
class SweepSlopes:
    error: object  # RateFit of median final error vs n
    hits: object  # RateFit of median hit iteration vs n (log-log), or None
    hits_semilog: object  # RateFit of median hit iteration vs log n, or None


def sweep_slopes(result: SweepResult, algorithm: str) -> SweepSlopes:
    agg = [a for a in result.aggregate(algorithm) if math.isfinite(a.median_final_error)]
    if len(agg) < 3:
        raise ValidationError(f"fewer than three usable sample sizes for {algorithm}")
    ns = np.array([a.n for a in agg], dtype=float)
    err = fit_power_law(ns, [a.median_final_error for a in agg])
    hv = [(a.n, a.median_hit_iteration) for a in agg
          if math.isfinite(a.median_hit_iteration) and a.median_hit_iteration > 0]
    hits = semi = None
    if len(hv) >= 3:
        hn, hh = map(np.array, zip(*hv))
        hits = fit_power_law(hn, hh)
        # iterations against log n on linear axes
        semi = fit_linear(np.log(hn), hh, "semilog")
    return SweepSlopes(err, hits, semi)


# ---------------------------------------------------------------------------
# CSV and plots
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def emit_csv(result: SweepResult, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in result.rows:
                w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"could not write sweep CSV {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise ValidationError(f"{path}: unexpected columns {reader.fieldnames}")
            rows = []
            for rec in reader:
                fl = lambda k: float(rec[k]) if rec[k] != "" else float("nan")
                rows.append(SweepRow(
                    rec["model"], rec["algorithm"], int(rec["n"]), int(rec["d"]),
                    int(rec["trial"]), int(rec["seed"]), fl("final_error"), fl("min_error"),
                    int(rec["hit_iteration"]) if rec["hit_iteration"] else None,
                    int(rec["iterations_run"]), fl("wall_time")))
    except OSError as exc:
        raise OSError(f"could not read sweep CSV {path}: {exc}") from exc
    return SweepResult(rows)


def emit_plot(result: SweepResult, path, quantity: str = "final_error") -> None:
    """Log-log plot of a per-n median, one series per algorithm, as SVG/PDF/PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if quantity not in ("final_error", "hit_iteration"):
        raise ValidationError("quantity must be final_error or hit_iteration")
    attr = "median_" + quantity
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for alg in result.algorithms():
        pts = [(a.n, getattr(a, attr)) for a in result.aggregate(alg)
               if math.isfinite(getattr(a, attr)) and getattr(a, attr) > 0]
        if not pts:
            continue
        ns, vs = zip(*pts)
        label = alg
        if len(pts) >= 3:
            label += f" (slope {fit_power_law(ns, vs).slope:+.3f})"
        ax.plot(ns, vs, marker="o", label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("median " + quantity.replace("_", " "))
    if result.rows:
        ax.set_title(result.rows[0].model)
        ax.legend()
    try:
        fig.savefig(Path(path), metadata={"Date": None} if str(path).endswith(".svg") else None)
    except OSError as exc:
        raise OSError(f"could not write plot {path}: {exc}") from exc
    finally:
        plt.close(fig)


# ---------------------------------------------------------------------------
# population rates and stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    algorithm: str
    trace: IterationTrace
    convergence: Optional[ConvergenceClass]


def run_population_rates(model: str, algorithms: Sequence[str], theta0, T: int, *,
                         p: int = 1, d: int = 1, spec=None,
                         configs: Optional[dict] = None) -> Dict[str, RateReport]:
    """Population traces and their rate classes, one per algorithm."""
    out = {}
    for alg in algorithms:
        alg = alg.upper()
        cfg = (configs or {}).get(alg)
        op = make_operator(model, alg, "population", None, cfg, p=p, d=d, spec=spec)
        th0 = np.zeros(op.dim)
        th0[:] = np.atleast_1d(np.asarray(theta0, dtype=float))
        trace = iterate(op, th0, T)
        conv = None
        if np.count_nonzero(trace.errors) >= 20:
            conv = classify_convergence(trace)
        out[alg] = RateReport(alg, trace, conv)
    return out


def nlr_profile_windows(n: int):
    """Default radius windows for the regression stability profiles.

    Gradient descent: [n^-1/2, n^-1/4], where the linear noise term
    dominates. Newton: [5 n^-1/4, 1], outside the inner radius.
    """
    return {"GD": (n ** -0.5, n ** -0.25), "NM": (5 * n ** -0.25, 1.0)}


# ---------------------------------------------------------------------------
# escape counterexample
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EscapeResult:
    n: int
    inner_radius: float
    init_below: float
    init_annulus: float
    below: IterationTrace
    annulus: IterationTrace

    @property
    def below_escaped(self) -> bool:
        """The trace from the small init ended within 0.5 of the far fixed point 2."""
        return len(self.below) > 1 and abs(float(self.below.points[-1, 0]) - 2.0) <= 0.5

    @property
    def below_left_unit_ball(self) -> bool:
        return len(self.below) > 1 and bool(np.all(np.abs(self.below.points[1:, 0]) >= 1.0))

    @property
    def annulus_max_norm(self) -> float:
        return float(np.max(np.abs(self.annulus.points[:, 0])))


def counterexample_inner_radius(n: int) -> float:
    """Inner radius read off the Newton perturbation profile of the counterexample."""
    s = n ** -0.25
    radii = np.geomspace(0.1 * s, 3.0 * s, 80)
    prof = perturbation_profile("counterexample", "NM", CounterexampleSpec(n), radii,
                                fit_range=(1.5 * s, 3.0 * s))
    if prof.inner_radius is None:
        raise ValidationError("counterexample profile did not show an unstable trend")
    return prof.inner_radius


def find_escape_init(n: int, upper: float, T: int = 50, grid: int = 4000) -> Optional[float]:
    """Smallest grid point in (0, upper) whose Newton iterates all stay outside the
    unit ball and end within 0.5 of 2; None if there is none."""
    op = make_operator("counterexample", "NM", "sample", CounterexampleSpec(n))
    for t0 in np.linspace(0, upper, grid + 1)[1:-1]:
        try:
            tr = iterate(op, t0, T)
        except IterationError:
            continue
        pts = tr.points[1:, 0]
        if np.all(np.abs(pts) >= 1.0) and abs(pts[-1] - 2.0) <= 0.5:
            return float(t0)
    return None


def run_escape_demo(n: int = 10_000, init_below: Optional[float] = None,
                    init_annulus: Optional[float] = None, T: int = 50) -> EscapeResult:
    """Newton on the tilted counterexample from inside and outside the inner radius.

    Without an explicit ``init_below`` the escaping start is located by a
    deterministic scan of (0, r_tilde); the default annulus start is
    3 n^-1/4.
    """
    r_tilde = counterexample_inner_radius(n)
    if init_annulus is None:
        init_annulus = 3.0 * n ** -0.25
    if init_below is None:
        init_below = find_escape_init(n, r_tilde)
        if init_below is None:
            raise ValidationError(f"no escaping start found below r_tilde={r_tilde:g}")
    if not init_below < r_tilde < init_annulus:
        raise ValidationError(f"need init_below < r_tilde ({r_tilde:g}) < init_annulus")
    op = make_operator("counterexample", "NM", "sample", CounterexampleSpec(n))
    return EscapeResult(n, r_tilde, float(init_below), float(init_annulus),
                        iterate(op, init_below, T), iterate(op, init_annulus, T))


# ---------------------------------------------------------------------------
# polynomial family: three-algorithm bounds
# ---------------------------------------------------------------------------


def _poly_steps(p, q, eps, eta, L):
    """Scalar sample-level GD, Newton and cubic-Newton maps for theta > 0."""

    def gd(t):
        return t - eta * (t ** (p - 1) - eps * t ** (q - 1))

    def nm(t):
        a, b = t ** (p - 2), eps * t ** (q - 2)
        return ((p - 2) * a - (q - 2) * b) / ((p - 1) * a - (q - 1) * b) * t

    def cnm(t):
        g = t ** (p - 1) - eps * t ** (q - 1)
        h = (p - 1) * t ** (p - 2) - (q - 1) * eps * t ** (q - 2)
        return t + cubic_model_minimizer(g, h, L)

    return {"GD": gd, "NM": nm, "CNM": cnm}


def _first_hit(step, t0, target, floor, max_iters):
    """(hit index or None, min over t >= 1 of error / floor, iterations run, errors)."""
    t = t0
    worst = math.inf
    errs = [abs(t0)]
    for k in range(1, max_iters + 1):
        t = step(t)
        e = abs(t)
        errs.append(e)
        worst = min(worst, e / floor)
        if e <= target:
            return k, worst, errs
    return None, worst, errs


@dataclass(frozen=True)
class BoundsEntry:
    p: float
    q: float
    eps: float
    algorithm: str
    check: str
    passed: bool
    detail: str


@dataclass
class BoundsReport:
    entries: List[BoundsEntry]
    constants: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> List[BoundsEntry]:
        return [e for e in self.entries if not e.passed]

    def lines(self) -> List[str]:
        return [f"p={e.p:g} q={e.q:g} eps={e.eps:g} {e.algorithm:>3} {e.check:<12} "
                f"{'ok' if e.passed else 'FAIL'}  {e.detail}" for e in self.entries]


FLOOR_RTOL = 1e-12
CALIBRATION_SAFETY = 2.0


def run_polynomial_bounds_suite(p: float = 4, q: float = 2,
                           eps_list: Sequence[float] = (1e-3, 1e-4, 1e-5),
                           eta: Optional[float] = None, theta0: float = 1.0) -> BoundsReport:
    """Check the three-algorithm bounds on the polynomial family.

    Every iterate must stay above the floor eps^(1/(p-q)). Each algorithm's
    first time below twice the floor is compared with its budget
    C eps^-e, e = (p-2)/(p-q) (GD), log(1/eps) (NM), (p-3)/(p-1) (CNM);
    C is the measured constant at the largest eps times a safety factor 2.
    Gradient descent must also still be above twice the floor at a tenth
    of its budget.
    """
    PolynomialSpec(p, q, max(eps_list), 1)  # validates (p, q)
    eps_list = sorted(eps_list, reverse=True)
    if eta is None:
        eta = 1.0 / (p - 1)
    L = (p - 1) * (p - 2) / 6.0
    scale = {
        "GD": lambda e: e ** (-(p - 2) / (p - q)),
        "NM": lambda e: math.log(1.0 / e),
        "CNM": lambda e: e ** (-(p - 3) / (p - 1)),
    }
    entries: List[BoundsEntry] = []
    constants: Dict[str, float] = {}
    nm_hits = []
    for eps in eps_list:
        floor = eps ** (1.0 / (p - q))
        steps = _poly_steps(p, q, eps, eta, L)
        for alg in ("GD", "NM", "CNM"):
            # generous iteration cap: 50x the uncalibrated budget
            cap = int(50 * max(scale[alg](eps), 10.0) / (eta if alg == "GD" else 1.0)) + 100
            hit, worst, errs = _first_hit(steps[alg], theta0, 2 * floor, floor, cap)
            if alg not in constants:
                if hit is None:
                    raise ValidationError(f"{alg} never reached twice the floor at eps={eps}")
                constants[alg] = CALIBRATION_SAFETY * hit / scale[alg](eps)
            budget = constants[alg] * scale[alg](eps)
            ok_floor = worst >= 1 - FLOOR_RTOL
            entries.append(BoundsEntry(p, q, eps, alg, "floor", ok_floor,
                                      f"min error/floor = {worst:.12g}"))
            ok_hit = hit is not None and hit <= budget
            entries.append(BoundsEntry(p, q, eps, alg, "budget", ok_hit,
                                      f"hit t={hit} budget={budget:.1f}"))
            if alg == "GD":
                t_early = int(math.floor(0.1 * budget))
                e_early = errs[t_early] if t_early < len(errs) else errs[-1]
                entries.append(BoundsEntry(p, q, eps, alg, "not-early", e_early > 2 * floor,
                                          f"error at t={t_early} is {e_early:.3g} "
                                          f"vs {2 * floor:.3g}"))
            if alg == "NM":
                nm_hits.append((eps, hit))
    if len(nm_hits) >= 3 and all(h is not None for _, h in nm_hits):
        # hits against log(1/eps) on linear axes
        lin = fit_linear([math.log(1 / e) for e, _ in nm_hits], [float(h) for _, h in nm_hits],
                          "semilog")
        entries.append(BoundsEntry(p, q, float("nan"), "NM", "log-affine", lin.r2 >= 0.95,
                                  f"R^2 of hits vs log(1/eps) = {lin.r2:.4f}"))
    return BoundsReport(entries, constants)


# ---------------------------------------------------------------------------
# sweep presets used by the reproduction scripts
# ---------------------------------------------------------------------------

_N_GRID = tuple(2 ** k for k in range(10, 17))


def preset(name: str, **overrides) -> SweepConfig:
    """Named sweep protocols.

    nlr      regression p=1: GD from 0.5, NM and CNM from 1, threshold n^-1/4
    mixture       EM and Newton from 1, threshold 1.5 n^-1/4
    nonresponse   gradient ascent from 0.5, Newton from 1, threshold 1.5 n^-1/4
    mixture-d2    EM in d=2 from |theta|=1, threshold 2 n^-1/4, n = 2^11..2^16
    nlr-d2        regression GD in d=2 from |theta|=0.5, same grid
    """
    fixed = InitRule("fixed", 1.0)
    half = InitRule("fixed", 0.5)
    table = {
        "nlr": dict(model="regression", algorithms=("GD", "NM", "CNM"),
                         init={"GD": half, "NM": fixed, "CNM": fixed},
                         threshold=ThresholdRule(1.0, 0.25)),
        "mixture": dict(model="mixture", algorithms=("EM", "NM"), init=fixed,
                        threshold=ThresholdRule(1.5, 0.25)),
        "nonresponse": dict(model="nonresponse", algorithms=("GA", "NM"),
                            init={"GA": half, "NM": fixed},
                            threshold=ThresholdRule(1.5, 0.25)),
        "mixture-d2": dict(model="mixture", algorithms=("EM",), d=2, trials=10,
                           n_grid=_N_GRID[1:], init=InitRule("offset", 1.0),
                           threshold=ThresholdRule(2.0, 0.25)),
        "nlr-d2": dict(model="regression", algorithms=("GD",), d=2, trials=10,
                       n_grid=_N_GRID[1:], init=InitRule("offset", 0.5),
                       threshold=ThresholdRule(2.0, 0.25)),
    }
    if name not in table:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(table)}")
    kw = dict(table[name])
    kw.update(overrides)
    return SweepConfig(**kw)


PRESETS = ("nlr", "mixture", "nonresponse", "mixture-d2", "nlr-d2")

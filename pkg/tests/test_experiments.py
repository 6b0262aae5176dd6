import math

import numpy as np
import pytest

from opstab.core import ValidationError
from opstab.experiments import (
    CSV_COLUMNS,
    InitRule,
    SweepConfig,
    SweepResult,
    ThresholdRule,
    aggregate_rows,
    cell_seed,
    emit_csv,
    emit_plot,
    preset,
    read_csv,
    run_escape_demo,
    run_population_rates,
    run_polynomial_bounds_suite,
    run_sweep,
    sweep_slopes,
)


def small_config(**kw):
    base = dict(model="mixture", algorithms=("EM", "NM"), n_grid=(256, 512, 1024), trials=3,
                init=InitRule("fixed", 1.0), threshold=ThresholdRule(1.5, 0.25),
                record_timing=False)
    base.update(kw)
    return SweepConfig(**base)


class TestSeeds:
    def test_distinct_over_many_cells(self):
        seeds = {cell_seed(0, a, n, t) for a in range(5) for n in range(1, 201)
                 for t in range(100)}
        assert len(seeds) == 100_000

    def test_depends_on_master(self):
        assert cell_seed(0, 0, 1024, 0) != cell_seed(1, 0, 1024, 0)
        assert 0 <= cell_seed(2 ** 70, 3, 5, 7) < 2 ** 64


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(n_grid=(512, 256)), dict(n_grid=()), dict(trials=0), dict(algorithms=()),
        dict(threshold=ThresholdRule(1.0, 0.0)), dict(model="polynomial"),
        dict(model="nonresponse", d=2),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            small_config(**kw)

    def test_init_rules(self):
        rng = np.random.default_rng(0)
        assert InitRule("fixed", 0.5).draw(3, rng).tolist() == [0.5, 0, 0]
        assert np.linalg.norm(InitRule("offset", 2.0).draw(3, rng)) == pytest.approx(2.0)
        r = np.linalg.norm(InitRule("annulus", 0, 0.2, 0.4).draw(2, rng))
        assert 0.2 <= r <= 0.4
        with pytest.raises(ValidationError):
            InitRule("annulus", 0, 0.5, 0.1)

    def test_presets(self):
        for name in ("nlr", "mixture", "nonresponse", "mixture-d2", "nlr-d2"):
            assert isinstance(preset(name), SweepConfig)
        assert preset("mixture", trials=2).trials == 2
        with pytest.raises(ValidationError):
            preset("nope")

    def test_unsupported_pair_fails_fast(self):
        with pytest.raises(ValidationError):
            run_sweep(small_config(model="regression", algorithms=("EM",)))


class TestSweep:
    def test_single_cell_reproducible(self):
        cfg = small_config(algorithms=("EM",), n_grid=(64,), trials=1,
                           threshold=ThresholdRule(1e-3, 1e-9))
        a, b = run_sweep(cfg), run_sweep(cfg)
        assert len(a.rows) == 1
        assert a.rows == b.rows

    def test_byte_identical_across_workers(self, tmp_path):
        cfg = small_config()
        emit_csv(run_sweep(cfg), tmp_path / "a.csv")
        emit_csv(run_sweep(cfg, workers=2), tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_rows_and_medians(self):
        res = run_sweep(small_config())
        assert len(res.rows) == 2 * 3 * 3
        keys = [(r.algorithm, r.n, r.trial) for r in res.rows]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)
        for agg in res.aggregates:
            grp = [r for r in res.rows if (r.algorithm, r.n) == (agg.algorithm, agg.n)]
            assert agg.median_final_error == np.median([r.final_error for r in grp])
            hits = [r.hit_iteration for r in grp if r.hit_iteration is not None]
            assert agg.hits == len(hits)
            if hits:
                assert agg.median_hit_iteration == np.median(hits)
            for r in grp:
                assert r.min_error <= r.final_error
                assert r.iterations_run >= (r.hit_iteration or 0)

    def test_csv_round_trip(self, tmp_path):
        res = run_sweep(small_config(record_timing=True))
        emit_csv(res, tmp_path / "s.csv")
        back = read_csv(tmp_path / "s.csv")
        assert back.rows == res.rows
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_empty_csv(self, tmp_path):
        emit_csv(SweepResult([]), tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
        assert read_csv(tmp_path / "e.csv").rows == []

    def test_csv_errors(self, tmp_path):
        with pytest.raises(OSError, match="nodir"):
            emit_csv(SweepResult([]), tmp_path / "nodir" / "x.csv")
        (tmp_path / "bad.csv").write_text("a,b\n")
        with pytest.raises(ValidationError):
            read_csv(tmp_path / "bad.csv")

    def test_plot(self, tmp_path):
        res = run_sweep(small_config())
        path = tmp_path / "fig.svg"
        emit_plot(res, path)
        text = path.read_text()
        assert "EM (slope" in text and "NM (slope" in text
        emit_plot(res, tmp_path / "hits.svg", quantity="hit_iteration")
        with pytest.raises(ValidationError):
            emit_plot(res, tmp_path / "x.svg", quantity="nope")

    def test_failed_cells_recorded(self, monkeypatch):
        import opstab.experiments as ex
        from opstab.core import IterationError, OperatorHandle

        def broken(model, alg, level, data=None, config=None, **kw):
            def step(theta):
                raise IterationError("boom", theta=theta)
            return OperatorHandle(model, alg, level, step, 1,
                                  data if level == "sample" else None, config)

        monkeypatch.setattr(ex, "make_operator", broken)
        res = run_sweep(small_config(algorithms=("EM",), trials=2))
        assert len(res.rows) == 3 * 2 and all(r.failed for r in res.rows)
        assert all(r.hit_iteration is None and r.iterations_run == -1 for r in res.rows)
        assert all(a.failures == 2 and math.isnan(a.median_final_error) for a in res.aggregates)

    def test_slopes(self):
        res = run_sweep(small_config())
        s = sweep_slopes(res, "EM")
        assert s.error.domain == "log-log"
        with pytest.raises(ValidationError):
            sweep_slopes(run_sweep(small_config(n_grid=(256, 512))), "EM")

    def test_aggregate_handles_failures(self):
        from opstab.experiments import SweepRow
        rows = [SweepRow("m", "A", 10, 1, t, t, e, e, h, 1, 0.0)
                for t, (e, h) in enumerate([(1.0, 3), (float("nan"), None), (3.0, None)])]
        (agg,) = aggregate_rows(rows)
        assert agg.median_final_error == 2.0
        assert agg.median_hit_iteration == 3.0
        assert (agg.hits, agg.trials, agg.failures) == (1, 3, 1)


class TestPopulationRates:
    def test_nlr(self):
        rep = run_population_rates("regression", ["NM", "GD", "CNM"], 1.0, 3000)
        assert rep["NM"].convergence.mode == "FAST"
        assert rep["NM"].convergence.kappa_hat == pytest.approx(2 / 3, abs=0.01)
        assert rep["GD"].convergence.mode == "SLOW"
        assert 0.45 <= rep["GD"].convergence.beta_hat <= 0.55
        assert 1.8 <= rep["CNM"].convergence.beta_hat <= 2.2

    def test_mixture_newton(self):
        rep = run_population_rates("mixture", ["NM"], 0.3, 40)["NM"]
        assert rep.convergence.mode == "FAST" and rep.convergence.kappa_hat <= 7 / 9 + 0.02

    def test_zero_start(self):
        rep = run_population_rates("regression", ["GD"], 0.0, 30)["GD"]
        assert np.all(rep.trace.points == 0) and rep.convergence is None


@pytest.fixture(scope="module")
def escape():
    return run_escape_demo(10_000)


class TestEscape:
    def test_default_demo(self, escape):
        assert escape.init_below < escape.inner_radius < escape.init_annulus
        assert escape.below_escaped and escape.below_left_unit_ball
        assert escape.annulus_max_norm <= 0.5

    def test_deterministic(self, escape):
        again = run_escape_demo(10_000, escape.init_below, escape.init_annulus)
        assert np.array_equal(again.below.points, escape.below.points)
        assert np.array_equal(again.annulus.points, escape.annulus.points)

    def test_zero_iterations(self, escape):
        res = run_escape_demo(10_000, escape.init_below, T=0)
        assert len(res.below) == 1 and len(res.annulus) == 1
        assert res.below.points[0, 0] == res.init_below

    def test_ordering_enforced(self):
        with pytest.raises(ValidationError):
            run_escape_demo(10_000, init_below=0.5, init_annulus=1.0)


class TestPolynomialBounds:
    @pytest.mark.parametrize("p,q", [(4, 2), (5, 2), (5, 3)])
    def test_passes(self, p, q):
        rep = run_polynomial_bounds_suite(p, q)
        assert rep.passed, "\n".join(rep.lines())
        checks = {(e.algorithm, e.check) for e in rep.entries}
        assert ("NM", "log-affine") in checks and ("GD", "not-early") in checks

    def test_deterministic(self):
        a, b = run_polynomial_bounds_suite(), run_polynomial_bounds_suite()
        assert a.lines() == b.lines() and a.constants == b.constants

    def test_floor_halving(self):
        rep = run_polynomial_bounds_suite(4, 2, (1e-4, 5e-5, 2.5e-5))
        floors = [e ** 0.5 for e in (1e-4, 5e-5)]
        assert floors[1] / floors[0] == pytest.approx(1 / math.sqrt(2))
        assert rep.passed

    def test_invalid_family(self):
        with pytest.raises(ValidationError):
            run_polynomial_bounds_suite(3, 2)

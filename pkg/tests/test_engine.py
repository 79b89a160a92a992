import numpy as np
import pytest

from groupinfer import (
    BudgetError, RunConfig, ValidationError,
    build_schedule, default_four_mode_mixture,
    final_select_baseline, group_inference, iid_baseline,
)


def make_config(**overrides) -> RunConfig:
    params = dict(
        m=64, k=4, rho=0.5, t_total=20, lam=1.0, seed=0, dimension=2,
        condition=default_four_mode_mixture(),
    )
    params.update(overrides)
    return RunConfig(**params)


class TestGroupInference:
    def test_golden_evaluation_count(self):
        report = group_inference(make_config())
        assert report.nfe_counted == 184
        assert report.nfe_predicted == 184
        assert len(report.final_indices) == 4

    def test_pool_sizes_follow_schedule(self):
        cfg = make_config(m=32, k=4, rho=0.5, t_total=10)
        report = group_inference(cfg)
        sched = build_schedule(32, 4, 0.5, 10)
        assert tuple(rec.pool_size for rec in report.steps) == sched.sizes
        assert report.nfe_counted == sched.nfe

    def test_selections_are_nested(self):
        report = group_inference(make_config(seed=3))
        previous = None
        for rec in report.steps:
            current = set(rec.selected)
            if previous is not None:
                assert current.issubset(previous)
            previous = current
        assert set(report.final_indices).issubset(previous)

    def test_m_equals_k_never_solves(self):
        report = group_inference(make_config(m=4, k=4))
        assert report.final_indices == (0, 1, 2, 3)
        assert report.nfe_counted == 4 * 20
        assert all(rec.strategy is None for rec in report.steps)
        assert report.final_solve_strategy is None

    def test_rho_one_advances_all_then_one_final_solve(self):
        report = group_inference(make_config(m=16, rho=1.0, t_total=8))
        assert report.nfe_counted == 16 * 8
        assert all(rec.strategy is None for rec in report.steps)
        assert all(rec.pool_size == 16 for rec in report.steps)
        assert report.final_solve_strategy is not None
        assert len(report.final_indices) == 4

    def test_stalled_schedule_resolved_by_final_solve(self):
        report = group_inference(make_config(m=5, k=4, rho=0.9, t_total=6))
        assert report.nfe_counted == 5 * 6
        assert len(report.final_indices) == 4

    def test_deterministic_reports(self):
        a = group_inference(make_config(seed=11))
        b = group_inference(make_config(seed=11))
        assert a.final_indices == b.final_indices
        assert a.objective == b.objective
        assert a.nfe_counted == b.nfe_counted
        assert a.to_json() == b.to_json()

    def test_objective_recomputable_from_final_scores(self):
        report = group_inference(make_config(seed=5))
        expected = float(
            report.final_unary.sum() + np.triu(report.final_binary, 1).sum()
        )
        assert report.objective == pytest.approx(expected, rel=1e-9)

    def test_budget_error_carries_step_context(self):
        # Explicit exact on a pool pruned 64 -> 32 forces branch-and-bound
        # on an instance whose first-step scores are fully tied at k=32;
        # the tie fast path handles that, so use a later, large instance:
        # 64 -> 32 at step 1 is tied (fast path), step 2 solves 32 -> 16
        # with real scores. A tiny node budget cannot crack n=128, k=64.
        cfg = make_config(m=128, strategy="exact")
        import groupinfer.engine as eng
        from groupinfer.qip import solve as real_solve

        def tight_solve(problem, strategy="auto"):
            return real_solve(problem, strategy=strategy, node_budget=200)
        original = eng.solve
        eng.solve = tight_solve
        try:
            with pytest.raises(BudgetError, match="step"):
                group_inference(cfg)
        finally:
            eng.solve = original

    def test_validates_dimension_against_condition(self):
        with pytest.raises(ValidationError):
            make_config(dimension=3)

    def test_strategy_recorded_per_step(self):
        report = group_inference(make_config(m=64, seed=2))
        used = [rec.strategy for rec in report.steps if rec.strategy]
        assert used, "pruning steps should record a solver strategy"
        assert set(used) <= {"exact", "greedy"}


class TestBaselines:
    def test_iid_uses_first_k_candidates(self):
        report = iid_baseline(make_config(seed=9))
        assert report.final_indices == (0, 1, 2, 3)
        assert report.nfe_counted == 4 * 20

    def test_iid_matches_prefix_of_pool(self):
        cfg = make_config(seed=4)
        iid = iid_baseline(cfg)
        big = group_inference(make_config(seed=4, m=8, k=8, rho=1.0))
        assert np.array_equal(iid.final_samples, big.final_samples[:4])

    def test_final_select_costs_full_budget(self):
        cfg = make_config(m=16, seed=1)
        report = final_select_baseline(cfg)
        assert report.nfe_counted == 16 * 20
        assert len(report.final_indices) == 4
        assert set(report.final_indices) <= set(range(16))

    def test_group_inference_beats_iid_on_average(self):
        seeds = range(50)
        group = np.mean([group_inference(make_config(seed=s)).objective for s in seeds])
        iid = np.mean([iid_baseline(make_config(seed=s)).objective for s in seeds])
        assert group > iid

    def test_mean_objective_non_decreasing_in_m(self):
        seeds = range(12)
        means = []
        for m in (4, 8, 16, 32):
            means.append(np.mean([
                group_inference(make_config(m=m, seed=s)).objective for s in seeds
            ]))
        assert all(a <= b + 1e-12 for a, b in zip(means, means[1:]))


class TestReportSerialization:
    def test_json_roundtrip_and_schema(self):
        import json
        report = group_inference(make_config(seed=8))
        doc = json.loads(report.to_json())
        assert doc["schema"] == "groupinfer/report/v1"
        assert doc["final_indices"] == list(report.final_indices)
        assert doc["nfe_counted"] == 184
        assert "wall_ms" not in json.dumps(doc)

    def test_timings_only_on_request(self):
        report = group_inference(make_config(seed=8))
        with_timings = report.to_json(include_timings=True)
        assert "wall_ms" in with_timings

    def test_step_rows_cover_all_steps(self):
        report = group_inference(make_config(seed=8))
        rows = report.step_rows()
        assert len(rows) == 20
        assert rows[0]["pool_size"] == 64

    def test_normalization_flag_changes_selection_inputs_only(self):
        plain = group_inference(make_config(seed=6))
        normed = group_inference(make_config(seed=6, normalize_scores=True))
        # Reported metrics stay on raw scores in both cases.
        for report in (plain, normed):
            expected = float(report.final_unary.sum() + np.triu(report.final_binary, 1).sum())
            assert report.objective == pytest.approx(expected, rel=1e-9)

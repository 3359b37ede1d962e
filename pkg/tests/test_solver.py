import csv
import warnings

import numpy as np
import pytest

from tcomplete.diffops import apply_diff, compute_spectra
from tcomplete.media import generate_mask
from tcomplete.solver import (
    CSV_HEADER,
    IterationRecord,
    Method,
    SolverConfig,
    _initial_state,
    admm_step,
    objective,
    solve,
    write_iteration_log,
)
from tcomplete.proximal import GradientPair
from tcomplete.tensor_core import frobenius_norm
from tcomplete.tprod import identity_tensor, nuclear_norm, tprod


def low_tubal_rank_instance():
    """A 20x20x3 tubal-rank-2 tensor with 60% of entries observed."""
    rng = np.random.default_rng(7)
    truth = tprod(
        rng.standard_normal((20, 2, 3)), rng.standard_normal((2, 20, 3))
    ) * 100.0
    mask = generate_mask(truth.shape, 0.6, 11)
    return truth, mask, np.where(mask, truth, 0.0)


def solve_quietly(config, observed, mask, ground_truth=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solve(config, observed, mask, ground_truth)


# --- configuration -------------------------------------------------------------


def test_config_rejects_non_method():
    with pytest.raises(TypeError):
        SolverConfig(method="tnn-tv1")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"lam": 0.0},
        {"lam": -0.5},
        {"beta1": 0.0},
        {"beta2": -1e-4},
        {"tol": 0.0},
        {"max_iter": 0},
        {"log_every": 0},
    ],
)
def test_config_rejects_nonpositive_values(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(method=Method.TNN_TV1, **kwargs)


def test_tv_weight_defaults():
    assert SolverConfig(method=Method.TNN_TV1).tv_weight == 0.1
    assert SolverConfig(method=Method.TNN_TV2).tv_weight == 1.0
    assert SolverConfig(method=Method.TNN_ONLY).tv_weight == 0.0


def test_tv_weight_explicit_override():
    assert SolverConfig(method=Method.TNN_TV1, lam=5.0).tv_weight == 5.0
    assert SolverConfig(method=Method.TNN_TV2, lam=0.03).tv_weight == 0.03
    # the TV-free method ignores lam entirely
    assert SolverConfig(method=Method.TNN_ONLY, lam=5.0).tv_weight == 0.0


def test_method_command_line_spellings():
    assert Method.TNN_TV1.value == "tnn-tv1"
    assert Method.TNN_TV2.value == "tnn-tv2"
    assert Method.TNN_ONLY.value == "tnn"


def test_method_difference_orders():
    assert Method.TNN_TV1.diff_order is not None
    assert Method.TNN_TV2.diff_order is not None
    assert Method.TNN_TV1.diff_order != Method.TNN_TV2.diff_order
    assert Method.TNN_ONLY.diff_order is None


# --- objective -------------------------------------------------------------------


def test_objective_of_zeros_is_zero():
    z = np.zeros((3, 4, 2))
    assert objective(z, None, 0.0) == 0.0


def test_objective_identity_low_rank_term():
    # nuclear norm of the t-product identity equals its first-row dimension
    assert objective(identity_tensor(2, 3), None, 0.7) == pytest.approx(2.0)


def test_objective_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((4, 5, 3))
    d1 = rng.standard_normal((4, 5, 3))
    d2 = rng.standard_normal((4, 5, 3))
    want = nuclear_norm(z) + 0.25 * float(np.sum(np.sqrt(d1**2 + d2**2)))
    got = objective(z, GradientPair(d1, d2), 0.25)
    assert got == pytest.approx(want, rel=1e-12)


# --- input validation ---------------------------------------------------------------


def test_solve_rejects_non_third_order():
    cfg = SolverConfig(method=Method.TNN_ONLY)
    with pytest.raises(ValueError):
        solve(cfg, np.zeros((4, 4)), np.ones((4, 4), dtype=bool))


def test_solve_rejects_mask_shape_mismatch():
    cfg = SolverConfig(method=Method.TNN_ONLY)
    with pytest.raises(ValueError):
        solve(cfg, np.zeros((4, 4, 2)), np.ones((4, 3, 2), dtype=bool))


def test_solve_rejects_nonfinite_observed_entry():
    observed = np.ones((4, 4, 2))
    observed[0, 0, 0] = np.inf
    cfg = SolverConfig(method=Method.TNN_ONLY, max_iter=2)
    with pytest.raises(ValueError):
        solve(cfg, observed, np.ones((4, 4, 2), dtype=bool))


def test_solve_ignores_nonfinite_outside_mask():
    # unobserved entries never participate, so garbage there is harmless
    truth, mask, observed = low_tubal_rank_instance()
    observed = observed.copy()
    observed[~mask] = np.nan
    est, _ = solve_quietly(
        SolverConfig(method=Method.TNN_ONLY, max_iter=3), observed, mask
    )
    assert np.isfinite(est).all()


def test_solve_rejects_ground_truth_shape_mismatch():
    cfg = SolverConfig(method=Method.TNN_ONLY)
    with pytest.raises(ValueError):
        solve(
            cfg,
            np.zeros((4, 4, 2)),
            np.ones((4, 4, 2), dtype=bool),
            ground_truth=np.zeros((4, 4, 3)),
        )


# --- solver behaviour ----------------------------------------------------------------


def test_fully_observed_input_is_returned_exactly():
    truth, _, _ = low_tubal_rank_instance()
    full = np.ones(truth.shape, dtype=bool)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        est, records = solve(
            SolverConfig(method=Method.TNN_TV2, max_iter=50), truth, full
        )
    assert np.array_equal(est, truth)
    # pinning every entry leaves nothing to iterate on
    assert len(records) == 2
    assert not any(issubclass(w.category, RuntimeWarning) for w in caught)


@pytest.mark.parametrize("method", list(Method))
def test_observed_entries_are_pinned_exactly(method):
    truth, mask, observed = low_tubal_rank_instance()
    est, _ = solve_quietly(
        SolverConfig(method=method, max_iter=20), observed, mask
    )
    assert np.array_equal(est[mask], truth[mask])


@pytest.mark.parametrize("method", list(Method))
def test_stopping_brackets_the_tolerance(method):
    """The run ends at the first armed iteration under tol, not before or after."""
    truth, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=method, tol=1e-4, max_iter=500)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _, records = solve(cfg, observed, mask)
    assert len(records) < cfg.max_iter
    assert records[-1].rel_change <= cfg.tol
    assert records[-2].rel_change > cfg.tol
    assert not any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_record_iterations_are_contiguous_from_one():
    _, mask, observed = low_tubal_rank_instance()
    _, records = solve_quietly(
        SolverConfig(method=Method.TNN_TV1, max_iter=12, tol=1e-30), observed, mask
    )
    assert [r.iteration for r in records] == list(range(1, 13))


def test_solver_is_deterministic():
    truth, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=Method.TNN_TV2, tol=1e-4)
    est1, recs1 = solve_quietly(cfg, observed, mask, ground_truth=truth)
    est2, recs2 = solve_quietly(cfg, observed, mask, ground_truth=truth)
    assert np.array_equal(est1, est2)
    assert recs1 == recs2


def test_exhausted_iteration_budget_warns():
    _, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=Method.TNN_TV1, tol=1e-12, max_iter=5)
    with pytest.warns(RuntimeWarning, match="max_iter"):
        _, records = solve(cfg, observed, mask)
    assert len(records) == 5


def test_dormant_thresholds_never_stop_vacuously():
    """Data far below both shrinkage thresholds keeps every splitting variable
    at zero; the estimate barely moves, but that stillness must not count as
    convergence."""
    _, mask, observed = low_tubal_rank_instance()
    tiny = observed * 1e-9
    cfg = SolverConfig(method=Method.TNN_TV1, max_iter=30)
    with pytest.warns(RuntimeWarning, match="max_iter"):
        est, records = solve(cfg, tiny, mask)
    assert len(records) == 30
    init = np.where(mask, tiny, 0.0)
    assert frobenius_norm(est - init) <= 1e-8 * frobenius_norm(init)


def test_all_zero_input_returns_zeros():
    observed = np.zeros((6, 6, 2))
    mask = generate_mask((6, 6, 2), 0.5, 4)
    cfg = SolverConfig(method=Method.TNN_TV2, max_iter=3)
    with pytest.warns(RuntimeWarning):
        est, records = solve(cfg, observed, mask)
    assert np.all(est == 0)
    assert all(r.rel_change == 0.0 for r in records)


def test_tv_free_method_reports_zero_tv_residual():
    _, mask, observed = low_tubal_rank_instance()
    _, records = solve_quietly(
        SolverConfig(method=Method.TNN_ONLY, max_iter=8), observed, mask
    )
    assert all(r.res_tv == 0.0 for r in records)


def test_tv_free_step_carries_no_gradient_state():
    _, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=Method.TNN_ONLY)
    state = admm_step(_initial_state(observed, mask, None), cfg, observed, mask, None)
    assert state.gradients is None
    assert state.dual_tv is None


def test_dual_updates_are_scaled_constraint_gaps():
    _, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=Method.TNN_TV1)
    order = cfg.method.diff_order
    spectra = compute_spectra(observed.shape[0], observed.shape[1], order)
    st0 = _initial_state(observed, mask, order)
    st1 = admm_step(st0, cfg, observed, mask, spectra)
    assert np.array_equal(
        st1.dual_split - st0.dual_split,
        cfg.beta1 * (st1.estimate - st1.low_rank),
    )
    assert np.array_equal(
        st1.dual_tv.d1,
        cfg.beta2 * (apply_diff(st1.estimate, order, 1) - st1.gradients.d1),
    )
    assert np.array_equal(
        st1.dual_tv.d2,
        cfg.beta2 * (apply_diff(st1.estimate, order, 2) - st1.gradients.d2),
    )


def test_vanishing_tv_weight_reduces_to_plain_nuclear_method():
    truth, mask, observed = low_tubal_rank_instance()
    results = {}
    for method in Method:
        lam = None if method is Method.TNN_ONLY else 1e-12
        est, _ = solve_quietly(
            SolverConfig(method=method, lam=lam, tol=1e-6), observed, mask
        )
        results[method] = est
    bound = 1e-3 * frobenius_norm(observed)
    assert frobenius_norm(results[Method.TNN_TV1] - results[Method.TNN_ONLY]) <= bound
    assert frobenius_norm(results[Method.TNN_TV2] - results[Method.TNN_ONLY]) <= bound


def test_ground_truth_adds_error_metrics_to_records():
    truth, mask, observed = low_tubal_rank_instance()
    cfg = SolverConfig(method=Method.TNN_ONLY, tol=1e-6)
    _, bare = solve_quietly(cfg, observed, mask)
    _, tracked = solve_quietly(cfg, observed, mask, ground_truth=truth)
    assert all(r.rse is None and r.psnr is None for r in bare)
    assert all(isinstance(r.rse, float) and isinstance(r.psnr, float) for r in tracked)
    assert tracked[-1].rse < tracked[0].rse
    assert tracked[-1].psnr > tracked[0].psnr


# --- convergence log ---------------------------------------------------------------


def test_csv_header_columns():
    assert CSV_HEADER == (
        "iter",
        "rel_change",
        "res_split",
        "res_tv",
        "objective",
        "rse",
        "psnr",
    )


def fake_records(n, with_metrics=False):
    out = []
    for i in range(1, n + 1):
        out.append(
            IterationRecord(
                iteration=i,
                rel_change=1.0 / i,
                res_split=2.0 / i,
                res_tv=3.0 / i,
                objective=10.0 + i,
                rse=0.5 / i if with_metrics else None,
                psnr=20.0 + i if with_metrics else None,
            )
        )
    return out


def test_log_subsampling_keeps_multiples_and_final_row(tmp_path):
    path = tmp_path / "log.csv"
    write_iteration_log(fake_records(7), path, log_every=3)
    rows = list(csv.reader(path.open()))
    assert rows[0] == list(CSV_HEADER)
    assert [r[0] for r in rows[1:]] == ["3", "6", "7"]


def test_log_values_roundtrip_exactly(tmp_path):
    path = tmp_path / "log.csv"
    records = fake_records(4, with_metrics=True)
    write_iteration_log(records, path)
    rows = list(csv.reader(path.open()))
    assert len(rows) == 5
    for rec, row in zip(records, rows[1:]):
        assert int(row[0]) == rec.iteration
        assert float(row[1]) == rec.rel_change
        assert float(row[2]) == rec.res_split
        assert float(row[3]) == rec.res_tv
        assert float(row[4]) == rec.objective
        assert float(row[5]) == rec.rse
        assert float(row[6]) == rec.psnr


def test_log_without_ground_truth_leaves_metric_cells_empty(tmp_path):
    path = tmp_path / "log.csv"
    write_iteration_log(fake_records(2), path)
    rows = list(csv.reader(path.open()))
    assert rows[1][5] == "" and rows[1][6] == ""


def test_log_with_sparse_cadence_still_writes_final_row(tmp_path):
    path = tmp_path / "log.csv"
    write_iteration_log(fake_records(4), path, log_every=10)
    rows = list(csv.reader(path.open()))
    assert [r[0] for r in rows[1:]] == ["4"]


def test_log_of_no_records_is_header_only(tmp_path):
    path = tmp_path / "log.csv"
    write_iteration_log([], path)
    rows = list(csv.reader(path.open()))
    assert rows == [list(CSV_HEADER)]


def test_log_rejects_bad_cadence(tmp_path):
    with pytest.raises(ValueError):
        write_iteration_log(fake_records(2), tmp_path / "log.csv", log_every=0)

import numpy as np
import pytest

from repca import (
    DataMatrix,
    DimensionMismatch,
    InvalidSpec,
    NormSpec,
    Projection,
    SolverConfig,
    SpectrumGapWarning,
    SynthSpec,
    center_columns,
    check_convergence,
    count_monotone_violations,
    fit,
    fit_irls,
    fit_momentum,
    fit_pgd,
    principal_angles,
    synth_subspace,
    vanilla_pca,
)

ALL_FITTERS = (fit_pgd, fit_momentum, fit_irls)


def _instance(seed, m=12, n=90, k=3, noise=0.1, frac=0.0, scale=1.0):
    spec = SynthSpec(m=m, n=n, k_true=k, noise_sigma=noise,
                     outlier_frac=frac, outlier_scale=scale, seed=seed)
    data, basis, _ = synth_subspace(spec)
    return data, basis


# ------------------------------------------------------------ config checks


def test_solver_config_validation():
    SolverConfig()
    with pytest.raises(InvalidSpec):
        SolverConfig(variant="newton")
    with pytest.raises(InvalidSpec):
        SolverConfig(max_iter=0)
    with pytest.raises(InvalidSpec):
        SolverConfig(tol=-1e-8)
    with pytest.raises(InvalidSpec):
        SolverConfig(eps=0.0)
    with pytest.raises(InvalidSpec):
        SolverConfig(init="warm")


def test_fit_rejects_mismatched_variant():
    data, _ = _instance(0)
    with pytest.raises(InvalidSpec):
        fit_pgd(data, 2, NormSpec.l1(), SolverConfig(variant="irls"))


def test_fit_rejects_fro_norm():
    data, _ = _instance(0)
    with pytest.raises(InvalidSpec):
        fit_pgd(data, 2, NormSpec.fro(), SolverConfig(variant="pgd"))


def test_fit_rejects_uncentered_data():
    data = DataMatrix(np.random.default_rng(0).standard_normal((4, 20)) + 5.0)
    with pytest.raises(ValueError):
        fit_pgd(data, 2, NormSpec.l1())


def test_fit_rejects_bad_k():
    data, _ = _instance(0, m=5, n=40)
    with pytest.raises(DimensionMismatch):
        fit_pgd(data, 0, NormSpec.l1())
    with pytest.raises(DimensionMismatch):
        fit_pgd(data, 6, NormSpec.l1())


def test_vanilla_init_needs_k_within_sample_count():
    data, _ = _instance(0, m=6, n=90, k=2)
    thin, _ = center_columns(DataMatrix(data.values[:, :4]))
    with pytest.raises(DimensionMismatch):
        fit_pgd(thin, 5, NormSpec.l1())
    # a random start has no such restriction as long as k <= m
    out = fit_pgd(thin, 5, NormSpec.l1(), SolverConfig(init="random", max_iter=5))
    assert out.projection.k == 5


# -------------------------------------------------------------- convergence


def test_check_convergence_relative_rule():
    assert check_convergence([10.0, 10.0 + 1e-9], 1e-8)
    assert not check_convergence([10.0, 9.0], 1e-8)
    assert not check_convergence([10.0], 1e-8)
    with pytest.raises(ValueError):
        check_convergence([], 1e-8)


def test_check_convergence_near_zero_objective():
    # an exactly flat trace converges even at zero ...
    assert check_convergence([0.0, 0.0], 1e-8)
    # ... but rounding-scale jitter around zero does not
    assert not check_convergence([1e-31, 2e-31], 1e-8)


def test_count_monotone_violations():
    assert count_monotone_violations([3.0, 2.0, 1.0]) == 0
    assert count_monotone_violations([3.0, 3.1, 1.0, 1.2]) == 2
    assert count_monotone_violations([5.0]) == 0
    # increases within the rounding slack are not violations
    assert count_monotone_violations([1.0, 1.0 + 1e-14]) == 0


# -------------------------------------------------------------- vanilla PCA


def test_vanilla_pca_matches_svd():
    rng = np.random.default_rng(1)
    for _ in range(10):
        data, _ = _instance(int(rng.integers(1000)), m=9, n=60, k=4, noise=0.5)
        got = vanilla_pca(data, 3)
        u = np.linalg.svd(data.values, full_matrices=False)[0][:, :3]
        # arccos cannot resolve angles much below sqrt(eps), so 1e-6 is tight
        assert principal_angles(got, Projection(u)).max() < 1e-6


def test_vanilla_pca_maximizes_captured_variance():
    rng = np.random.default_rng(2)
    data, _ = _instance(7, m=8, n=50, k=3, noise=0.4)
    best = vanilla_pca(data, 2)
    captured = np.linalg.norm(best.values.T @ data.values) ** 2
    for _ in range(100):
        q, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        assert np.linalg.norm(q.T @ data.values) ** 2 <= captured + 1e-9


def test_vanilla_pca_requires_centered_input():
    with pytest.raises(ValueError):
        vanilla_pca(DataMatrix(np.ones((3, 5))), 1)


# ---------------------------------------------------------------- fit paths


def test_fit_dispatches_by_variant():
    data, _ = _instance(3)
    for variant, direct in (("pgd", fit_pgd), ("momentum", fit_momentum), ("irls", fit_irls)):
        cfg = SolverConfig(variant=variant, max_iter=40)
        via_fit = fit(data, 2, NormSpec.l1(), cfg)
        again = direct(data, 2, NormSpec.l1(), cfg)
        np.testing.assert_array_equal(via_fit.objective_trace, again.objective_trace)
        np.testing.assert_array_equal(via_fit.projection.values, again.projection.values)


def test_fit_is_deterministic_bit_for_bit():
    data, _ = _instance(4, frac=0.1, scale=4.0)
    for variant in ("pgd", "momentum", "irls"):
        cfg = SolverConfig(variant=variant, max_iter=60)
        a = fit(data, 2, NormSpec.l2p(1.0), cfg)
        b = fit(data, 2, NormSpec.l2p(1.0), cfg)
        np.testing.assert_array_equal(a.objective_trace, b.objective_trace)
        np.testing.assert_array_equal(a.projection.values, b.projection.values)
        assert a.iterations == b.iterations
        assert a.converged == b.converged


def test_random_init_is_seeded():
    data, _ = _instance(5)
    base = SolverConfig(init="random", seed=11, max_iter=30)
    a = fit_pgd(data, 2, NormSpec.l1(), base)
    b = fit_pgd(data, 2, NormSpec.l1(), base)
    c = fit_pgd(data, 2, NormSpec.l1(), SolverConfig(init="random", seed=12, max_iter=30))
    np.testing.assert_array_equal(a.projection.values, b.projection.values)
    assert not np.array_equal(a.objective_trace[:1], c.objective_trace[:1])


def test_momentum_first_step_equals_plain_step():
    """With W_old = W_0 the extrapolation vanishes, so one momentum round
    reproduces one plain gradient round exactly."""
    data, _ = _instance(6, frac=0.05, scale=3.0)
    one = SolverConfig(variant="pgd", max_iter=1, tol=0.0)
    one_m = SolverConfig(variant="momentum", max_iter=1, tol=0.0)
    a = fit_pgd(data, 2, NormSpec.l1(), one)
    b = fit_momentum(data, 2, NormSpec.l1(), one_m)
    np.testing.assert_array_equal(a.projection.values, b.projection.values)
    np.testing.assert_array_equal(a.objective_trace, b.objective_trace)


def test_callback_sees_every_iterate():
    data, _ = _instance(7)
    seen = []
    out = fit_pgd(data, 2, NormSpec.l1(), SolverConfig(max_iter=25),
                  callback=lambda it, basis, obj: seen.append((it, basis, obj)))
    assert [it for it, _, _ in seen] == list(range(out.iterations + 1))
    assert all(isinstance(basis, Projection) for _, basis, _ in seen)
    np.testing.assert_array_equal([obj for _, _, obj in seen], out.objective_trace)


def test_result_trace_is_read_only():
    data, _ = _instance(8)
    out = fit_pgd(data, 2, NormSpec.l1(), SolverConfig(max_iter=10))
    with pytest.raises(ValueError):
        out.objective_trace[0] = 0.0
    assert out.wall_time_ms > 0.0


# ----------------------------------------------------- descent and recovery


def test_pgd_columnwise_trace_never_increases():
    """The weighted quadratic majorizes the columnwise loss for p <= 2, so
    every recorded step must descend (up to the rounding slack)."""
    rng = np.random.default_rng(9)
    for i in range(25):
        m = int(rng.integers(5, 30))
        n = int(rng.integers(2 * m, 120))
        k = int(rng.integers(1, 4))
        data, _ = _instance(i, m=m, n=n, k=k,
                            noise=float(rng.uniform(0.01, 0.3)),
                            frac=float(rng.uniform(0.0, 0.1)),
                            scale=float(rng.uniform(1.0, 5.0)))
        p = float(rng.uniform(0.5, 2.0))
        out = fit_pgd(data, k, NormSpec.l2p(p), SolverConfig(max_iter=150, tol=1e-10))
        assert out.monotone_violations == 0


def test_solvers_converge_and_report_it():
    data, _ = _instance(10, noise=0.05)
    for fitter, variant in zip(ALL_FITTERS, ("pgd", "momentum", "irls")):
        out = fitter(data, 3, NormSpec.l1(), SolverConfig(variant=variant, max_iter=500))
        assert out.converged
        assert out.iterations < 500
        assert len(out.objective_trace) == out.iterations + 1


def test_p2_reduces_to_vanilla_pca():
    data, _ = _instance(11, noise=0.3)
    van = vanilla_pca(data, 3)
    for fitter, variant in zip(ALL_FITTERS, ("pgd", "momentum", "irls")):
        out = fitter(data, 3, NormSpec.l2p(2.0), SolverConfig(variant=variant))
        assert out.converged
        assert out.iterations <= 3
        assert principal_angles(out.projection, van).max() < 1e-6


def test_zero_residual_converges_immediately():
    # rank-1 data fit with k = 1: nothing left to reduce
    data = DataMatrix(np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 0.0]]), centered=True)
    for fitter, variant in zip(ALL_FITTERS, ("pgd", "momentum", "irls")):
        out = fitter(data, 1, NormSpec.l1(), SolverConfig(variant=variant))
        assert out.converged
        assert out.iterations == 0
        np.testing.assert_array_equal(out.objective_trace, [0.0])


def test_zero_residual_columnwise_loss_stays_at_zero():
    data = DataMatrix(np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 0.0]]), centered=True)
    out = fit_pgd(data, 1, NormSpec.l2p(1.0), SolverConfig(max_iter=50))
    assert out.converged
    assert out.objective_trace[-1] == pytest.approx(0.0, abs=1e-12)


def test_irls_counts_degenerate_spectra():
    # symmetric four-point configuration: the reweighted scatter inside the
    # first round is exactly isotropic, so the eigenvector cut is arbitrary
    data = DataMatrix(np.array([[1.0, 1.0, -1.0, -1.0],
                                [1.0, -1.0, -1.0, 1.0]]), centered=True)
    with pytest.warns(SpectrumGapWarning):
        out = fit_irls(data, 1, NormSpec.l1(), SolverConfig(variant="irls", max_iter=20))
    assert out.spectrum_gap_events >= 1
    assert out.converged


def test_robust_fit_recovers_subspace_under_outliers():
    data, truth = _instance(12, m=10, n=150, k=2, noise=0.02, frac=0.1, scale=6.0)
    van_angle = principal_angles(vanilla_pca(data, 2), truth).max()
    out = fit_irls(data, 2, NormSpec.l1(), SolverConfig(variant="irls"))
    robust_angle = principal_angles(out.projection, truth).max()
    assert robust_angle < van_angle

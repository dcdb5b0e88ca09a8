"""Orthonormal-subspace solvers for the robust reconstruction losses.

Three iterations share one skeleton: rebuild the per-sample weight
diagonal from the current residual, form the reweighted scatter
M = X diag(d) X^T, then move the basis.

* ``fit_pgd``       takes the gradient step W + M W / ||M||_2 and retracts
                    with the nearest-orthonormal (Procrustes) projection.
                    The step equals the descent-guaranteed 1/L for the
                    loss's gradient convention, so the trace is monotone.
* ``fit_momentum``  extrapolates V = W + (s-2)/(s+1) (W - W_old) first and
                    steps from V.  Faster, but without the monotone
                    guarantee.
* ``fit_irls``      replaces W with the top-k eigenvectors of M each
                    round.  Occasional objective increases are kept and
                    counted rather than damped.

Convergence is declared when the relative objective change drops to
``tol``; a zero scatter matrix (residual exactly zero) also counts as
converged because the objective is at its global minimum.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, SpectrumGapWarning
from .linalg import DataMatrix, Projection, SymmetricMatrix, procrustes_project, top_r_eigvecs, spectral_norm
from .objectives import NormSpec, _objective_from_residual, weighted_scatter, weights_l1, weights_l2p

MONOTONE_SLACK_RTOL = 1e-12

VARIANTS = ("pgd", "momentum", "irls")
INITS = ("vanilla", "random")

IterationCallback = Callable[[int, Projection, float], None]


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "pgd"
    max_iter: int = 500
    tol: float = 1e-8
    eps: float = 1e-10
    init: str = "vanilla"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidSpec(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.max_iter < 1:
            raise InvalidSpec(f"max_iter must be at least 1, got {self.max_iter}")
        if self.tol < 0.0:
            raise InvalidSpec(f"tol must be nonnegative, got {self.tol}")
        if self.eps <= 0.0:
            raise InvalidSpec(f"eps must be positive, got {self.eps}")
        if self.init not in INITS:
            raise InvalidSpec(f"init must be one of {INITS}, got {self.init!r}")


@dataclass(frozen=True)
class FitResult:
    projection: Projection
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    wall_time_ms: float
    monotone_violations: int
    spectrum_gap_events: int = 0

    def __post_init__(self) -> None:
        trace = np.array(self.objective_trace, dtype=float, copy=True)
        trace.setflags(write=False)
        object.__setattr__(self, "objective_trace", trace)


def check_convergence(trace, tol: float) -> bool:
    """True when the last objective change is at most tol, relatively.

    The comparison is |J_last - J_prev| <= tol * max(|J_prev|, 1e-30); the
    floor only keeps an exactly-zero objective from dividing by zero.
    """
    arr = np.asarray(trace, dtype=float)
    if arr.size == 0:
        raise ValueError("trace must be nonempty")
    if arr.size < 2:
        return False
    prev, last = float(arr[-2]), float(arr[-1])
    return abs(last - prev) <= tol * max(abs(prev), 1e-30)


def count_monotone_violations(trace) -> int:
    """Objective increases beyond rounding slack 1e-12 * |J_0|."""
    arr = np.asarray(trace, dtype=float)
    if arr.size < 2:
        return 0
    slack = MONOTONE_SLACK_RTOL * abs(float(arr[0]))
    return int(np.sum(arr[1:] > arr[:-1] + slack))


def vanilla_pca(data: DataMatrix, k: int) -> Projection:
    """Top-k eigenvectors of X X^T: the squared-Frobenius minimizer."""
    _require_centered(data)
    m, n = data.shape
    if not 1 <= k <= min(m, n):
        raise DimensionMismatch(f"k must be in [1, min(m, n)] = [1, {min(m, n)}], got {k}")
    return top_r_eigvecs(SymmetricMatrix(data.values @ data.values.T), k)


def _require_centered(data: DataMatrix) -> None:
    if not data.centered:
        raise ValueError("data must be centered; run center_columns first")


def _check_fit_args(data: DataMatrix, k: int, norm: NormSpec, config: SolverConfig, variant: str) -> None:
    if config.variant != variant:
        raise InvalidSpec(
            f"config.variant is {config.variant!r} but the {variant} solver was called"
        )
    if norm.kind not in ("l1", "l2p"):
        raise InvalidSpec(f"robust solvers take the l1 or l2p loss, got {norm.kind!r}")
    _require_centered(data)
    m, n = data.shape
    if not 1 <= k <= m:
        raise DimensionMismatch(f"k must be in [1, {m}], got {k}")
    if config.init == "vanilla" and k > min(m, n):
        raise DimensionMismatch(
            f"vanilla init needs k <= min(m, n) = {min(m, n)}, got {k}"
        )


def _initial_basis(data: DataMatrix, k: int, config: SolverConfig) -> Projection:
    if config.init == "vanilla":
        return vanilla_pca(data, k)
    rng = np.random.default_rng(config.seed)
    return procrustes_project(rng.standard_normal((data.n_features, k)))


def _weights_for(norm: NormSpec, resid: np.ndarray, eps: float) -> np.ndarray:
    if norm.kind == "l1":
        return weights_l1(resid, eps)
    return weights_l2p(resid, norm.p, eps)


def _result(projection, trace, iterations, converged, start, gap_events=0) -> FitResult:
    return FitResult(
        projection=projection,
        objective_trace=np.asarray(trace, dtype=float),
        iterations=iterations,
        converged=converged,
        wall_time_ms=(time.perf_counter() - start) * 1000.0,
        monotone_violations=count_monotone_violations(trace),
        spectrum_gap_events=gap_events,
    )


def fit_pgd(
    data: DataMatrix,
    k: int,
    norm: NormSpec,
    config: SolverConfig | None = None,
    callback: IterationCallback | None = None,
) -> FitResult:
    """Projected-gradient descent on the chosen robust loss.

    Each round rebuilds the weight diagonal at the current basis, steps
    along the reweighted scatter with the largest step the descent bound
    allows, and retracts onto the orthonormal matrices.  Every step
    decreases the weighted quadratic built around the current iterate.
    For the columnwise loss that quadratic lies above the loss itself,
    so the recorded trace is non-increasing up to rounding; the
    elementwise loss enjoys no such bound and its trace can tick upward
    even though the overall trend still falls.
    """
    config = config if config is not None else SolverConfig(variant="pgd")
    _check_fit_args(data, k, norm, config, "pgd")
    start = time.perf_counter()
    basis = _initial_basis(data, k, config)
    x = data.values
    w = basis.values
    resid = x - w @ (w.T @ x)
    trace = [_objective_from_residual(resid, norm)]
    if callback is not None:
        callback(0, basis, trace[0])
    converged = False
    iterations = 0
    for it in range(1, config.max_iter + 1):
        d = _weights_for(norm, resid, config.eps)
        scatter = weighted_scatter(data, d)
        top = spectral_norm(scatter)
        if top == 0.0:
            converged = True
            break
        basis = procrustes_project(w + (scatter.values @ w) / top)
        w = basis.values
        resid = x - w @ (w.T @ x)
        trace.append(_objective_from_residual(resid, norm))
        iterations = it
        if callback is not None:
            callback(it, basis, trace[-1])
        if check_convergence(trace, config.tol):
            converged = True
            break
    return _result(basis, trace, iterations, converged, start)


def fit_momentum(
    data: DataMatrix,
    k: int,
    norm: NormSpec,
    config: SolverConfig | None = None,
    callback: IterationCallback | None = None,
) -> FitResult:
    """Momentum-accelerated variant of ``fit_pgd``.

    Keeps the previous basis and a counter s starting at 1; each round
    extrapolates V = W + (s-2)/(s+1) (W - W_old), steps from V along the
    scatter built at W, retracts, and increments s.  The first round is a
    plain gradient step because W_old starts equal to W.  The objective
    may fluctuate; increases are counted, not suppressed.
    """
    config = config if config is not None else SolverConfig(variant="momentum")
    _check_fit_args(data, k, norm, config, "momentum")
    start = time.perf_counter()
    basis = _initial_basis(data, k, config)
    x = data.values
    w = basis.values
    w_old = w
    resid = x - w @ (w.T @ x)
    trace = [_objective_from_residual(resid, norm)]
    if callback is not None:
        callback(0, basis, trace[0])
    converged = False
    iterations = 0
    s = 1
    for it in range(1, config.max_iter + 1):
        d = _weights_for(norm, resid, config.eps)
        scatter = weighted_scatter(data, d)
        top = spectral_norm(scatter)
        if top == 0.0:
            converged = True
            break
        v = w + ((s - 2.0) / (s + 1.0)) * (w - w_old)
        basis = procrustes_project(v + (scatter.values @ v) / top)
        w_old = w
        w = basis.values
        s += 1
        resid = x - w @ (w.T @ x)
        trace.append(_objective_from_residual(resid, norm))
        iterations = it
        if callback is not None:
            callback(it, basis, trace[-1])
        if check_convergence(trace, config.tol):
            converged = True
            break
    return _result(basis, trace, iterations, converged, start)


def fit_irls(
    data: DataMatrix,
    k: int,
    norm: NormSpec,
    config: SolverConfig | None = None,
    callback: IterationCallback | None = None,
) -> FitResult:
    """Iteratively reweighted eigendecomposition.

    Each round rebuilds the weight diagonal and jumps straight to the
    top-k eigenvectors of the reweighted scatter.  Typically converges in
    very few rounds; any objective increase is kept and counted in
    ``monotone_violations``.  Near-degenerate eigengaps are recorded in
    ``spectrum_gap_events`` instead of raising.
    """
    config = config if config is not None else SolverConfig(variant="irls")
    _check_fit_args(data, k, norm, config, "irls")
    start = time.perf_counter()
    basis = _initial_basis(data, k, config)
    x = data.values
    w = basis.values
    resid = x - w @ (w.T @ x)
    trace = [_objective_from_residual(resid, norm)]
    if callback is not None:
        callback(0, basis, trace[0])
    converged = False
    iterations = 0
    gap_events = 0
    for it in range(1, config.max_iter + 1):
        d = _weights_for(norm, resid, config.eps)
        scatter = weighted_scatter(data, d)
        if not scatter.values.any():
            converged = True
            break
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            basis = top_r_eigvecs(scatter, k)
        gap_events += sum(
            1 for c in caught if issubclass(c.category, SpectrumGapWarning)
        )
        w = basis.values
        resid = x - w @ (w.T @ x)
        trace.append(_objective_from_residual(resid, norm))
        iterations = it
        if callback is not None:
            callback(it, basis, trace[-1])
        if check_convergence(trace, config.tol):
            converged = True
            break
    return _result(basis, trace, iterations, converged, start, gap_events)


_FITTERS = {"pgd": fit_pgd, "momentum": fit_momentum, "irls": fit_irls}


def fit(
    data: DataMatrix,
    k: int,
    norm: NormSpec,
    config: SolverConfig,
    callback: IterationCallback | None = None,
) -> FitResult:
    """Dispatch to the solver named by ``config.variant``."""
    return _FITTERS[config.variant](data, k, norm, config, callback)

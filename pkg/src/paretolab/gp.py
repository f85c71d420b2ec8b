"""Gaussian-process regression with a squared-exponential ARD kernel.

One independent model per objective.  Hyperparameters are found by
maximizing the log marginal likelihood with multi-start gradient ascent;
all linear algebra goes through a single Cholesky factorization of
K + noise*I (with jitter escalation for rank-deficient grids).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import InvalidArgument, NumericError

# log-space bounds for the hyperparameter search (normalized coordinates,
# standardized targets)
LENGTHSCALE_BOUNDS = (1e-3, 1e3)
NOISE_BOUNDS = (1e-8, 1.0)
SIGNAL_BOUNDS = (1e-4, 1e4)

JITTER_START_FACTOR = 1e-10
JITTER_MAX_FACTOR = 1e-4


@dataclass
class KernelParams:
    """Squared-exponential ARD kernel hyperparameters."""

    signal_variance: float
    lengthscales: np.ndarray
    noise_variance: float

    def __post_init__(self):
        self.lengthscales = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if self.signal_variance <= 0:
            raise InvalidArgument("signal_variance must be positive")
        if np.any(self.lengthscales <= 0):
            raise InvalidArgument("lengthscales must be positive")
        if self.noise_variance < 0:
            raise InvalidArgument("noise_variance must be nonnegative")

    @property
    def dim(self) -> int:
        return self.lengthscales.shape[0]


@dataclass
class Prediction:
    mean: float
    std: float


@dataclass
class FitConfig:
    """Settings for the marginal-likelihood search."""

    n_restarts: int = 4
    max_iter: int = 60
    seed: int = 0
    warm_start: KernelParams | None = None
    optimize: bool = True
    fixed_params: KernelParams | None = None
    # Narrower lengthscale bounds keep extrapolation honest when the
    # caller knows the design-space scale (e.g. [0, 1] coordinates).
    lengthscale_bounds: tuple[float, float] = LENGTHSCALE_BOUNDS


@dataclass
class GpModel:
    params: KernelParams
    train_inputs: np.ndarray
    train_targets: np.ndarray
    factor: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    y_mean: float = 0.0
    y_std: float = 1.0
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return self.train_inputs.shape[1]


def kernel_eval(x1, x2, params: KernelParams) -> float:
    """SE-ARD kernel value between two design vectors (noise excluded)."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != x2.shape or x1.shape[0] != params.dim:
        raise InvalidArgument(
            f"dimension mismatch: {x1.shape} vs {x2.shape} vs {params.dim} lengthscales"
        )
    z = (x1 - x2) / params.lengthscales
    return float(params.signal_variance * np.exp(-0.5 * np.dot(z, z)))


def _kernel_matrix(X1, X2, params: KernelParams):
    d2 = _scaled_sqdist(X1, X2, params.lengthscales)
    return params.signal_variance * np.exp(-0.5 * d2)


def _scaled_sqdist(X1, X2, lengthscales):
    A = X1 / lengthscales
    B = X2 / lengthscales
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _chol_with_jitter(K, noise):
    """Cholesky of K + noise*I, escalating jitter on failure."""
    n = K.shape[0]
    scale = max(np.trace(K) / n, 1e-12)
    jitter = 0.0
    while True:
        try:
            L = cholesky(K + (noise + jitter) * np.eye(n), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            pass
        jitter = JITTER_START_FACTOR * scale if jitter == 0.0 else jitter * 10.0
        if jitter > JITTER_MAX_FACTOR * scale:
            raise NumericError(
                "covariance factorization failed even with maximum jitter"
            )


def log_marginal_likelihood(X, y, params: KernelParams):
    """LML and its gradient w.r.t. log(signal), log(lengthscales), log(noise).

    Returns (lml, grad) with grad ordered [signal, ls_1..ls_d, noise].
    """
    n = X.shape[0]
    Kse = _kernel_matrix(X, X, params)
    L, jitter = _chol_with_jitter(Kse, params.noise_variance)
    alpha = cho_solve((L, True), y)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(L))))
        - 0.5 * n * np.log(2.0 * np.pi)
    )
    Kinv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - Kinv

    grad = np.empty(params.dim + 2)
    # d/dlog(signal_variance): the SE block itself
    grad[0] = 0.5 * float(np.sum(W * Kse))
    for d in range(params.dim):
        diff2 = (X[:, d : d + 1] - X[:, d : d + 1].T) ** 2
        dK = Kse * (diff2 / params.lengthscales[d] ** 2)
        grad[1 + d] = 0.5 * float(np.sum(W * dK))
    grad[-1] = 0.5 * params.noise_variance * float(np.trace(W))
    return lml, grad


def _pack(params: KernelParams):
    return np.concatenate(
        (
            [np.log(params.signal_variance)],
            np.log(params.lengthscales),
            [np.log(max(params.noise_variance, NOISE_BOUNDS[0]))],
        )
    )


def _unpack(theta, dim) -> KernelParams:
    return KernelParams(
        signal_variance=float(np.exp(theta[0])),
        lengthscales=np.exp(theta[1 : 1 + dim]),
        noise_variance=float(np.exp(theta[-1])),
    )


def _clip_theta(theta, dim, ls_bounds=LENGTHSCALE_BOUNDS):
    lo = np.concatenate(
        (
            [np.log(SIGNAL_BOUNDS[0])],
            np.full(dim, np.log(ls_bounds[0])),
            [np.log(NOISE_BOUNDS[0])],
        )
    )
    hi = np.concatenate(
        (
            [np.log(SIGNAL_BOUNDS[1])],
            np.full(dim, np.log(ls_bounds[1])),
            [np.log(NOISE_BOUNDS[1])],
        )
    )
    return np.clip(theta, lo, hi)


def _ascend(X, y, theta0, max_iter, ls_bounds=LENGTHSCALE_BOUNDS):
    """Projected gradient ascent with backtracking line search."""
    dim = X.shape[1]
    theta = _clip_theta(theta0, dim, ls_bounds)
    lml, grad = log_marginal_likelihood(X, y, _unpack(theta, dim))
    step = 0.5
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad)
        if gnorm < 1e-7:
            break
        improved = False
        while step > 1e-6:
            cand = _clip_theta(theta + step * grad / max(gnorm, 1.0), dim, ls_bounds)
            try:
                cand_lml, cand_grad = log_marginal_likelihood(
                    X, y, _unpack(cand, dim)
                )
            except NumericError:
                step *= 0.5
                continue
            if cand_lml > lml:
                theta, lml, grad = cand, cand_lml, cand_grad
                step = min(step * 2.0, 2.0)
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return theta, lml


def fit(inputs, targets, config: FitConfig | None = None) -> GpModel:
    """Train one GP on (inputs, targets) for a single objective.

    Targets are standardized internally; predictions are de-standardized.
    """
    config = config or FitConfig()
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise InvalidArgument("inputs and targets must have equal length >= 1")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidArgument("non-finite training data")

    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < 1e-12:
        y_std = 1.0
    ys = (y - y_mean) / y_std

    dim = X.shape[1]
    if config.fixed_params is not None or not config.optimize:
        params = config.fixed_params or config.warm_start
        if params is None:
            params = KernelParams(1.0, np.full(dim, 0.3), 1e-4)
    else:
        rng = np.random.default_rng(config.seed)
        starts = []
        if config.warm_start is not None:
            starts.append(_pack(config.warm_start))
        starts.append(_pack(KernelParams(1.0, np.full(dim, 0.3), 1e-2)))
        while len(starts) < max(config.n_restarts, 1):
            ls = np.exp(rng.uniform(np.log(0.05), np.log(2.0), size=dim))
            sv = np.exp(rng.uniform(np.log(0.3), np.log(3.0)))
            nv = np.exp(rng.uniform(np.log(1e-6), np.log(1e-1)))
            starts.append(_pack(KernelParams(sv, ls, nv)))
        best_theta, best_lml = None, -np.inf
        for theta0 in starts:
            theta, lml = _ascend(X, ys, theta0, config.max_iter, config.lengthscale_bounds)
            if lml > best_lml:
                best_theta, best_lml = theta, lml
        params = _unpack(best_theta, dim)

    Kse = _kernel_matrix(X, X, params)
    L, jitter = _chol_with_jitter(Kse, params.noise_variance)
    alpha = cho_solve((L, True), ys)
    return GpModel(
        params=params,
        train_inputs=X,
        train_targets=y,
        factor=L,
        alpha=alpha,
        y_mean=y_mean,
        y_std=y_std,
        jitter=jitter,
    )


def predict_many(model: GpModel, queries) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and std at many query points (vectorized)."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != model.dim:
        raise InvalidArgument(
            f"query dimension {Q.shape[1]} does not match model dimension {model.dim}"
        )
    Ks = _kernel_matrix(model.train_inputs, Q, model.params)
    mean = Ks.T @ model.alpha
    v = solve_triangular(model.factor, Ks, lower=True)
    var = model.params.signal_variance - np.sum(v * v, axis=0)
    np.maximum(var, 0.0, out=var)
    return mean * model.y_std + model.y_mean, np.sqrt(var) * model.y_std


def predict(model: GpModel, query) -> Prediction:
    """Posterior predictive mean/std at a single design vector."""
    mean, std = predict_many(model, np.atleast_2d(np.asarray(query, dtype=float)))
    return Prediction(mean=float(mean[0]), std=float(std[0]))

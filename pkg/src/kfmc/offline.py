"""Batch completion: alternating code / dictionary / completion updates.

The model factorizes the (implicit) feature image of the data as
phi(X) ~ phi(D) Z and minimizes

    0.5 Tr(K_XX - 2 K_XD Z + Z' K_DD Z) + 0.5 alpha Tr(K_DD) + 0.5 beta ||Z||_F^2

over Z (closed form), D, and the unobserved entries of X (relaxed Newton
steps with momentum), projecting X back onto the observed data after every
sweep.  For the RBF kernel the alpha term is a constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve

from .exceptions import NumericalError
from .kernels import KernelSpec, kernel_diag, kernel_matrix, power_weights
from .masking import MaskedMatrix

# Floor for the diagonal Newton scalings of the completion update.
EPS_DIAG = 1e-12


@dataclass
class OfflineHyperparams:
    """Batch solver settings.

    r is the dictionary size; alpha and beta regularize the dictionary image
    and the codes; tau > 1 relaxes the Newton steps; eta in [0, 1) is the
    momentum weight.  Iteration stops when the relative objective change
    drops below tol or after t_max sweeps.
    """

    r: int
    alpha: float = 0.1
    beta: float = 0.1
    tau: float = 2.0
    eta: float = 0.5
    t_max: int = 500
    tol: float = 1e-6
    seed: int | None = 0
    dict_init: str = "normal"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("dictionary size r must be >= 1")
        if self.dict_init not in ("normal", "data"):
            raise ValueError("dict_init must be 'normal' or 'data'")
        if not self.tau > 1:
            raise ValueError("tau must be > 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.eta < 1:
            raise ValueError("eta must lie in [0, 1)")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


@dataclass
class OfflineModel:
    """Fitted state: dictionary, codes, completed data, and diagnostics."""

    dictionary: np.ndarray
    codes: np.ndarray
    mm: MaskedMatrix
    dict_momentum: np.ndarray
    completion_momentum: np.ndarray
    objective_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0
    converged: bool = False

    @property
    def completed(self) -> np.ndarray:
        return self.mm.completion


def objective(spec: KernelSpec, X: np.ndarray, D: np.ndarray, Z: np.ndarray,
              alpha: float, beta: float) -> float:
    """Value of the kernelized factorization objective at (X, D, Z)."""
    K_XD = kernel_matrix(spec, X, D)
    K_DD = kernel_matrix(spec, D, D)
    fit_term = 0.5 * (kernel_diag(spec, X).sum()
                      - 2.0 * float(np.sum(K_XD * Z.T))
                      + float(np.sum(Z * (K_DD @ Z))))
    return fit_term + 0.5 * alpha * kernel_diag(spec, D).sum() \
        + 0.5 * beta * float(np.sum(Z * Z))


def solve_codes(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                beta: float) -> np.ndarray:
    """Exact minimizer over the codes: (K_DD + beta I) \\ K_XD'."""
    r = D.shape[1]
    K_DD = kernel_matrix(spec, D, D)
    K_XD = kernel_matrix(spec, X, D)
    try:
        chol = cho_factor(K_DD + beta * np.eye(r), lower=True)
        Z = cho_solve(chol, K_XD.T)
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(f"code solve failed: {exc}") from exc
    if not np.all(np.isfinite(Z)):
        raise NumericalError("code solve produced non-finite values")
    return Z


def grad_dictionary_poly_frozen(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                                Z: np.ndarray, alpha: float,
                                W1: np.ndarray | None = None,
                                W2: np.ndarray | None = None) -> np.ndarray:
    """Frozen-weight dictionary gradient for the polynomial kernel.

    This is the gradient of the reweighted surrogate in which the power
    weights W1, W2 are held fixed; the true gradient is ``degree`` times it.
    """
    r = D.shape[1]
    if W1 is None:
        W1 = power_weights(spec, X.T @ D)
    if W2 is None:
        W2 = power_weights(spec, D.T @ D)
    return -X @ (W1 * Z.T) + D @ ((Z @ Z.T + alpha * np.eye(r)) * W2)


def _poly_dictionary_hessian(spec, D, Z, alpha, W2=None):
    if W2 is None:
        W2 = power_weights(spec, D.T @ D)
    H = (Z @ Z.T) * W2
    H[np.diag_indices_from(H)] += alpha * np.diag(W2)
    return H


def _rbf_dictionary_parts(spec, X, D, Z, alpha):
    r = D.shape[1]
    K_XD = kernel_matrix(spec, X, D)
    K_DD = kernel_matrix(spec, D, D)
    Q1 = -(Z.T * K_XD)
    Q2 = (0.5 * (Z @ Z.T) + 0.5 * alpha * np.eye(r)) * K_DD
    g1 = Q1.sum(axis=0)
    g2 = Q2.sum(axis=0)
    return Q1, Q2, g1, g2


def grad_dictionary_rbf(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                        Z: np.ndarray, alpha: float) -> np.ndarray:
    """Exact dictionary gradient of :func:`objective` for the RBF kernel."""
    s2 = spec.sigma**2
    Q1, Q2, g1, g2 = _rbf_dictionary_parts(spec, X, D, Z, alpha)
    return (2.0 / s2) * (X @ Q1 - D * g1) + (4.0 / s2) * (D @ Q2 - D * g2)


def grad_completion_rbf(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                        Z: np.ndarray) -> np.ndarray:
    """Exact completion gradient of :func:`objective` for the RBF kernel.

    The self-similarity term is constant (k(x, x) = 1), so only the
    cross-kernel term contributes.
    """
    s2 = spec.sigma**2
    K_XD = kernel_matrix(spec, X, D)
    Q3 = -(Z * K_XD.T)
    g3 = Q3.sum(axis=0)
    return (2.0 / s2) * (D @ Q3 - X * g3)


def _solve_right(G: np.ndarray, M: np.ndarray, *, spd: bool) -> np.ndarray:
    """Return G @ M^{-1} for symmetric M (SPD fast path via Cholesky)."""
    try:
        if spd:
            return cho_solve(cho_factor(M, lower=True), G.T).T
        return solve(M, G.T, assume_a="sym").T
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(f"Newton scaling solve failed: {exc}") from exc


def dictionary_step(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                    Z: np.ndarray, alpha: float, tau: float) -> np.ndarray:
    """Relaxed Newton increment for the dictionary (D moves by -step)."""
    r = D.shape[1]
    if spec.is_poly:
        W1 = power_weights(spec, X.T @ D)
        W2 = power_weights(spec, D.T @ D)
        g = grad_dictionary_poly_frozen(spec, X, D, Z, alpha, W1, W2)
        if not np.any(g):
            return np.zeros_like(D)
        H = _poly_dictionary_hessian(spec, D, Z, alpha, W2)
        H = H + (1e-8 * np.trace(H) / r) * np.eye(r)
        step = (1.0 / tau) * _solve_right(g, H, spd=True)
    else:
        s2 = spec.sigma**2
        Q1, Q2, g1, g2 = _rbf_dictionary_parts(spec, X, D, Z, alpha)
        g = (2.0 / s2) * (X @ Q1 - D * g1) + (4.0 / s2) * (D @ Q2 - D * g2)
        if not np.any(g):
            return np.zeros_like(D)
        B = (2.0 / s2) * (2.0 * Q2 - np.diag(g1) - 2.0 * np.diag(g2))
        B = 0.5 * (B + B.T)
        B = B + (1e-8 * abs(np.trace(B)) / r) * np.eye(r)
        step = (1.0 / tau) * _solve_right(g, B, spd=False)
    if not np.all(np.isfinite(step)):
        raise NumericalError("dictionary step produced non-finite values")
    return step


def completion_step(spec: KernelSpec, X: np.ndarray, D: np.ndarray,
                    Z: np.ndarray, tau: float) -> np.ndarray:
    """Relaxed Newton increment for the completion (X moves by -step).

    The scaling is diagonal per column, so the step restricted to the
    unobserved entries is itself a valid step.
    """
    if spec.is_poly:
        q = spec.degree
        w = (np.sum(X * X, axis=0) + spec.offset) ** (q - 1)
        W4 = power_weights(spec, X.T @ D)
        g = q * (X * w) - q * (D @ (W4.T * Z))
        scale = np.maximum(w, EPS_DIAG)
    else:
        # Self-similarity contributions cancel for RBF: the diagonal Newton
        # scaling collapses to the column sums of the cross-kernel term.
        s2 = spec.sigma**2
        K_XD = kernel_matrix(spec, X, D)
        Q3 = -(Z * K_XD.T)
        g3 = Q3.sum(axis=0)
        g = (2.0 / s2) * (D @ Q3 - X * g3)
        d = -(2.0 / s2) * g3
        scale = np.where(d >= 0, np.maximum(d, EPS_DIAG), np.minimum(d, -EPS_DIAG))
    step = (1.0 / tau) * g / scale
    if not np.all(np.isfinite(step)):
        raise NumericalError("completion step produced non-finite values")
    return step


def fit(mm: MaskedMatrix, spec: KernelSpec, hp: OfflineHyperparams,
        update_completion: bool = True) -> OfflineModel:
    """Run the batch solver and return the completed model.

    Each sweep updates the codes in closed form, then applies momentum
    Newton steps to the dictionary and (unless ``update_completion`` is
    False, for fully observed training data) to the completion, restoring
    the observed entries afterwards.  In momentum-free runs (eta = 0) a
    step that increases the objective is retried once with the relaxation
    doubled, then accepted; with momentum the transient increases are part
    of how the iteration escapes poor joint configurations, so steps are
    applied as computed.
    """
    if mm.mask.n_observed < 1:
        raise ValueError("at least one observed entry is required")
    m, n = mm.shape
    rng = np.random.default_rng(hp.seed)
    if hp.dict_init == "data":
        # seed the atoms with columns of the imputed data (any r columns of
        # the data span the same feature subspace, generically)
        idx = rng.choice(n, size=hp.r, replace=hp.r > n)
        D = mm.completion[:, idx] + 1e-3 * rng.standard_normal((m, hp.r))
    else:
        D = rng.standard_normal((m, hp.r))
    mom_D = np.zeros_like(D)
    mom_X = np.zeros((m, n))
    X = mm.completion.copy()
    obs = mm.mask.observed
    observed_values = mm.values[obs]
    trace: list[float] = []
    Z = np.zeros((hp.r, n))
    converged = False
    t = 0

    def partial_model():
        result = mm.copy()
        result.completion[:] = X
        return OfflineModel(D, Z, result, mom_D, mom_X,
                            np.asarray(trace), t, converged)

    guarded = hp.eta == 0.0
    try:
        for t in range(1, hp.t_max + 1):
            Z = solve_codes(spec, X, D, hp.beta)
            current = objective(spec, X, D, Z, hp.alpha, hp.beta)

            step = dictionary_step(spec, X, D, Z, hp.alpha, hp.tau)
            if guarded:
                D_try = D - step
                after = objective(spec, X, D_try, Z, hp.alpha, hp.beta)
                if after > current:
                    step = dictionary_step(spec, X, D, Z, hp.alpha,
                                           2.0 * hp.tau)
                    D_try = D - step
                    after = objective(spec, X, D_try, Z, hp.alpha, hp.beta)
                mom_D = step
            else:
                mom_D = hp.eta * mom_D + step
                D_try = D - mom_D
                after = None
            if not np.all(np.isfinite(D_try)):
                raise NumericalError("dictionary update diverged")
            D = D_try
            if after is not None:
                current = after

            if update_completion:
                step = completion_step(spec, X, D, Z, hp.tau)
                if guarded:
                    X_try = X - step
                    X_try[obs] = observed_values
                    after = objective(spec, X_try, D, Z, hp.alpha, hp.beta)
                    if after > current:
                        step = completion_step(spec, X, D, Z, 2.0 * hp.tau)
                        X_try = X - step
                        X_try[obs] = observed_values
                        after = objective(spec, X_try, D, Z, hp.alpha, hp.beta)
                    mom_X = step
                else:
                    mom_X = hp.eta * mom_X + step
                    X_try = X - mom_X
                    X_try[obs] = observed_values
                    after = None
                if not np.all(np.isfinite(X_try)):
                    raise NumericalError("completion update diverged")
                X = X_try
                if after is not None:
                    current = after

            if not guarded:
                current = objective(spec, X, D, Z, hp.alpha, hp.beta)
            trace.append(current)
            if len(trace) >= 2:
                prev = trace[-2]
                if abs(trace[-1] - prev) < hp.tol * max(abs(prev), 1e-30):
                    converged = True
                    break
    except NumericalError as exc:
        exc.model = partial_model()
        exc.trace = np.asarray(trace)
        exc.iteration = t
        raise

    return partial_model()

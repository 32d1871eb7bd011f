import tracemalloc

import numpy as np
import pytest
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize

from kfmc import (KernelSpec, OnlineHyperparams, OnlineModel, SyntheticSpec,
                  complete_sample, generate, mean_pairwise_distance,
                  impute_init, random_mask, relative_error, run_stream,
                  sample_objective, update_dictionary)
from kfmc.kernels import kernel_matrix, power_weights
from kfmc import online


def test_hyperparam_validation():
    with pytest.raises(ValueError):
        OnlineHyperparams(r=2, n_iter=0)
    with pytest.raises(ValueError):
        OnlineHyperparams(r=2, n_pass=0)
    with pytest.raises(ValueError):
        OnlineHyperparams(r=2, tau=0.5)


def test_fully_observed_sample_unchanged(rng):
    D = rng.standard_normal((4, 3))
    model = OnlineModel(D)
    x = rng.standard_normal(4)
    hp = OnlineHyperparams(r=3, beta=0.1, seed=0)
    x_hat, z, info = complete_sample(model, x, np.arange(4),
                                     KernelSpec.rbf(1.0), hp)
    assert np.array_equal(x_hat, x)
    assert info.converged and info.iterations == 0
    K_DD = kernel_matrix(KernelSpec.rbf(1.0), D, D)
    k = kernel_matrix(KernelSpec.rbf(1.0), x[:, None], D)[0]
    expected = np.linalg.solve(K_DD + 0.1 * np.eye(3), k)
    assert np.allclose(z, expected)


def test_code_solve_hand_value():
    # 2x2 identity dictionary, fully observed x = e1, poly(c=1, q=2), beta=1
    model = OnlineModel(np.eye(2))
    hp = OnlineHyperparams(r=2, alpha=0.0, beta=1.0, seed=0)
    _, z, _ = complete_sample(model, np.array([1.0, 0.0]), np.array([0, 1]),
                              KernelSpec.poly(2, 1.0), hp)
    assert np.allclose(z, [19 / 24, 1 / 24])


def test_code_step_matches_independent_minimizer(rng):
    spec = KernelSpec.poly(2, 1.0)
    D = rng.standard_normal((5, 3))
    x = rng.standard_normal(5)
    beta = 0.3
    model = OnlineModel(D)
    hp = OnlineHyperparams(r=3, alpha=0.0, beta=beta, seed=0)
    _, z, _ = complete_sample(model, x, np.arange(5), spec, hp)

    k = kernel_matrix(spec, x[:, None], D)[0]
    K_DD = kernel_matrix(spec, D, D)

    def quad(zv):
        return (-k @ zv + 0.5 * zv @ (K_DD @ zv) + 0.5 * beta * zv @ zv)

    res = minimize(quad, np.zeros(3), method="L-BFGS-B",
                   options={"gtol": 1e-12})
    assert np.allclose(z, res.x, atol=1e-6)


def _random_sample_instance(seed, kind):
    r = np.random.default_rng(seed)
    m, ra = 6, 4
    D = r.standard_normal((m, ra))
    x = r.standard_normal(m)
    obs = np.sort(r.choice(m, size=3, replace=False))
    spec = (KernelSpec.poly(int(r.integers(2, 4)), 0.5 + r.uniform())
            if kind == "poly" else KernelSpec.rbf(0.8 + 2 * r.uniform()))
    return D, x, obs, spec


@pytest.mark.parametrize("kind", ["poly", "rbf"])
def test_inner_loop_monotone_without_momentum(kind):
    # replicate the inner loop, checking the per-sample objective after each
    # accepted z-step and x-step
    for trial in range(40):
        D, x, obs, spec = _random_sample_instance(trial, kind)
        m, ra = D.shape
        beta, alpha, tau = 0.05, 0.1, 2.0
        K_DD = kernel_matrix(spec, D, D)
        chol = cho_factor(K_DD + beta * np.eye(ra), lower=True)
        xs = np.where(np.isin(np.arange(m), obs), x, np.nan)
        x0, miss = online._prepare_column(xs, obs, D)
        cur = x0.copy()
        objs = []
        for _ in range(15):
            k = kernel_matrix(spec, cur[:, None], D)[0]
            z = cho_solve(chol, k)
            objs.append(sample_objective(spec, cur, z, D, alpha, beta))
            step = online._sample_step(spec, cur, z, D, k, tau)
            x_try = cur.copy()
            x_try[miss] -= step[miss]
            after = sample_objective(spec, x_try, z, D, alpha, beta)
            if after > objs[-1]:
                step = online._sample_step(spec, cur, z, D, k, 2 * tau)
                x_try = cur.copy()
                x_try[miss] -= step[miss]
                after = sample_objective(spec, x_try, z, D, alpha, beta)
                if after > objs[-1]:
                    break
            cur = x_try
            objs.append(after)
        diffs = np.diff(objs)
        assert np.all(diffs <= 1e-9 * np.maximum(np.abs(objs[:-1]), 1e-30))


@pytest.mark.parametrize("kind", ["poly", "rbf"])
def test_complete_sample_does_not_increase_objective(kind):
    for trial in range(20):
        D, x, obs, spec = _random_sample_instance(100 + trial, kind)
        model = OnlineModel(D)
        hp = OnlineHyperparams(r=4, alpha=0.1, beta=0.05, eta=0.0, n_iter=25,
                               tol=0.0, seed=0)
        xs = np.where(np.isin(np.arange(6), obs), x, np.nan)
        x_hat, z, info = complete_sample(model, xs, obs, spec, hp)
        x0, _ = online._prepare_column(xs, obs, D)
        k0 = kernel_matrix(spec, x0[:, None], D)[0]
        K_DD = kernel_matrix(spec, D, D)
        z0 = np.linalg.solve(K_DD + hp.beta * np.eye(4), k0)
        start = sample_objective(spec, x0, z0, D, hp.alpha, hp.beta)
        assert info.objective <= start + 1e-9 * max(abs(start), 1e-30)


def test_update_dictionary_stationary_cases(rng):
    D = rng.standard_normal((4, 3))
    x = rng.standard_normal(4)
    hp = OnlineHyperparams(r=3, alpha=0.0, beta=0.1, eta=0.5, seed=0)
    model = OnlineModel(D)
    update_dictionary(model, x, np.zeros(3), KernelSpec.poly(2, 1.0), hp)
    assert np.array_equal(model.dictionary, D)


def test_update_dictionary_sufficient_decrease_poly():
    # Lemma-style bound on the frozen-weight per-sample objective
    tau = 2.0
    for trial in range(100):
        r = np.random.default_rng(trial)
        m, ra = 5, 3
        D = r.standard_normal((m, ra))
        x = r.standard_normal(m)
        z = r.standard_normal(ra)
        alpha = 0.2 + 0.5 * r.uniform()
        spec = KernelSpec.poly(int(r.integers(2, 4)), 0.3 + r.uniform())
        w1 = (x @ D + spec.offset) ** (spec.degree - 1)
        W2 = power_weights(spec, D.T @ D)

        def frozen(Dc):
            t1 = -np.sum(w1 * (x @ Dc + spec.offset) * z)
            M2 = W2 * (Dc.T @ Dc + spec.offset)
            return t1 + 0.5 * z @ (M2 @ z) + 0.5 * alpha * np.trace(M2)

        grad = (-np.outer(x, w1 * z)
                + D @ ((np.outer(z, z) + alpha * np.eye(ra)) * W2))
        H = np.outer(z, z) * W2 + alpha * np.diag(np.diag(W2))
        tau0 = np.linalg.norm(H, 2)

        model = OnlineModel(D)
        hp = OnlineHyperparams(r=ra, alpha=alpha, beta=0.1, tau=tau, eta=0.0,
                               seed=0)
        update_dictionary(model, x, z, spec, hp)
        dec = frozen(model.dictionary) - frozen(D)
        bound = -np.sum(grad * grad) / (2 * tau * tau0)
        assert dec <= bound + 1e-8


def test_update_dictionary_rbf_runs_and_descends(rng):
    spec = KernelSpec.rbf(1.5)
    D = rng.standard_normal((5, 4))
    x = rng.standard_normal(5)
    model = OnlineModel(D)
    hp = OnlineHyperparams(r=4, alpha=0.1, beta=0.05, eta=0.0, seed=0)
    k = kernel_matrix(spec, x[:, None], D)[0]
    K_DD = kernel_matrix(spec, D, D)
    z = np.linalg.solve(K_DD + hp.beta * np.eye(4), k)
    before = sample_objective(spec, x, z, D, hp.alpha, hp.beta)
    update_dictionary(model, x, z, spec, hp)
    after = sample_objective(spec, x, z, model.dictionary, hp.alpha, hp.beta)
    assert after <= before


def _stream_instance(n=100, missing=0.3, seed=1):
    X_true, _ = generate(SyntheticSpec(d=3, p=3, u=1, m=30, n_per=n, seed=seed))
    mask = random_mask(30, n, missing, seed=seed + 1)
    masked = np.where(mask.observed, X_true, np.nan)
    samples = [(masked[:, j], mask.column_split(j)[0]) for j in range(n)]
    return X_true, mask, samples


def test_run_stream_fully_observed_passthrough(rng):
    X = rng.standard_normal((6, 10))
    samples = [(X[:, j], np.arange(6)) for j in range(10)]
    hp = OnlineHyperparams(r=4, beta=0.1, n_iter=5, seed=0)
    out, model = run_stream(samples, KernelSpec.rbf(2.0), hp)
    assert np.array_equal(out, X)
    assert model.samples_seen == 10


def test_run_stream_multi_pass_improves():
    X_true, mask, samples = _stream_instance()
    dbar = mean_pairwise_distance(impute_init(
        np.where(mask.observed, X_true, np.nan), mask).completion)
    spec = KernelSpec.rbf(dbar)
    finals = {}
    for n_pass in (1, 2):
        hp = OnlineHyperparams(r=60, alpha=0.1, beta=1e-4, eta=0.5, n_iter=30,
                               n_pass=n_pass, tol=1e-6, seed=0)
        out, model = run_stream(samples, spec, hp, ground_truth=X_true)
        finals[n_pass] = (model.err_trace[-1], relative_error(out, X_true))
    assert finals[2][0] <= finals[1][0]
    assert finals[2][1] <= finals[1][1] + 1e-12


def test_run_stream_cost_trace_decreases_across_passes():
    X_true, mask, samples = _stream_instance(n=60)
    spec = KernelSpec.rbf(3.0)
    hp = OnlineHyperparams(r=30, alpha=0.1, beta=1e-4, eta=0.5, n_iter=20,
                           n_pass=4, tol=1e-6, seed=0)
    _, model = run_stream(samples, spec, hp, ground_truth=X_true)
    g = np.asarray(model.cost_trace)
    ends = g[np.arange(1, 5) * 60 - 1]
    for a, b in zip(ends[:-1], ends[1:]):
        assert b <= 1.05 * a


def test_run_stream_deterministic():
    X_true, mask, samples = _stream_instance(n=40)
    spec = KernelSpec.rbf(2.5)
    hp = OnlineHyperparams(r=20, alpha=0.1, beta=1e-3, eta=0.5, n_iter=10,
                           n_pass=2, tol=1e-6, seed=11)
    out1, m1 = run_stream(samples, spec, hp, ground_truth=X_true)
    out2, m2 = run_stream(samples, spec, hp, ground_truth=X_true)
    assert np.array_equal(out1, out2)
    assert np.array_equal(m1.dictionary, m2.dictionary)
    assert m1.cost_trace == m2.cost_trace


def test_fully_missing_column_completes_from_prior(rng):
    D = rng.standard_normal((5, 4))
    model = OnlineModel(D)
    hp = OnlineHyperparams(r=4, alpha=0.1, beta=0.1, eta=0.5, n_iter=10, seed=0)
    x = np.full(5, np.nan)
    x_hat, z, info = complete_sample(model, x, np.array([], dtype=int),
                                     KernelSpec.rbf(1.5), hp)
    assert np.all(np.isfinite(x_hat))
    assert z.shape == (4,)


def test_online_path_memory_stays_model_sized(rng):
    # no buffer sized by the stream length: peak allocation during the
    # per-sample calls stays within a small multiple of m*r + r^2
    m, r, n = 40, 10, 1500
    D0 = rng.standard_normal((m, r))
    model = OnlineModel(D0)
    spec = KernelSpec.rbf(3.0)
    hp = OnlineHyperparams(r=r, alpha=0.1, beta=1e-3, eta=0.5, n_iter=5, seed=0)
    budget_bytes = 100 * (m * r + r * r) * 8
    stream_buffer_bytes = n * m * 8
    assert budget_bytes < stream_buffer_bytes
    peak_inside = 0
    tracemalloc.start()
    try:
        for j in range(n):
            x = rng.standard_normal(m)
            obs = rng.choice(m, size=25, replace=False)
            xs = np.full(m, np.nan)
            xs[obs] = x[obs]
            tracemalloc.reset_peak()
            x_hat, z, _ = complete_sample(model, xs, obs, spec, hp)
            update_dictionary(model, x_hat, z, spec, hp)
            _, peak = tracemalloc.get_traced_memory()
            peak_inside = max(peak_inside, peak)
    finally:
        tracemalloc.stop()
    assert peak_inside <= budget_bytes


def test_sample_length_mismatch(rng):
    model = OnlineModel(rng.standard_normal((4, 2)))
    hp = OnlineHyperparams(r=2, seed=0)
    with pytest.raises(ValueError):
        complete_sample(model, np.zeros(5), np.arange(5), KernelSpec.rbf(1.0), hp)

"""Command-line interface: gen | complete | stream | ose | bounds.

Exit codes: 0 on success, 2 for usage or input errors, 3 for numerical
failures (a partial trace is saved when one exists).  Every command takes a
--seed and is reproducible given it.  The KFMC_THREADS environment variable
caps BLAS parallelism when set before the process imports numpy.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import lrf_complete, ose_lrf, svd_basis
from .bounds import ProblemShape, sampling_report
from .checkpoint import kernel_to_dict, load_checkpoint, save_checkpoint
from .dataio import (ensure_dir, read_mask_csv, read_matrix_csv, write_json,
                     write_mask_csv, write_matrix_csv, write_trace_csv)
from .exceptions import NumericalError
from .kernels import KernelSpec
from .masking import Mask, MaskedMatrix, impute_init
from .metrics import numerical_rank, relative_error
from .offline import OfflineHyperparams, fit
from .online import OnlineHyperparams, run_stream
from .ose import complete_new
from .synth import (SyntheticSpec, continuous_mask, feature_count, generate,
                    random_mask, twisted_cubic)
from .tuning import best_offline, mean_pairwise_distance, poly_candidates, rbf_candidates

PRESETS = {
    "single-nonlinear": dict(d=3, p=3, u=1, m=30, n_per=100),
    "union-nonlinear": dict(d=3, p=3, u=3, m=30, n_per=100),
    "union-linear": dict(d=3, p=1, u=10, m=30, n_per=100),
}


def _add_mask_flags(p):
    p.add_argument("--missing", type=float, default=None,
                   help="missing fraction for a uniform random mask")
    p.add_argument("--per-column-missing", type=int, default=None,
                   help="remove exactly this many entries per column")
    p.add_argument("--continuous-seqs", type=int, default=None,
                   help="number of continuous missing runs per row "
                        "(uses --missing as the rate)")


def _build_mask(args, m, n, seed) -> Mask:
    if args.per_column_missing is not None:
        return random_mask(m, n, 0.0, seed=seed,
                           per_column_exact=args.per_column_missing)
    if args.continuous_seqs is not None:
        if args.missing is None:
            raise ValueError("--continuous-seqs requires --missing")
        return continuous_mask(m, n, args.missing, args.continuous_seqs,
                               seed=seed)
    if args.missing is not None:
        return random_mask(m, n, args.missing, seed=seed)
    return Mask.full(m, n)


def cmd_gen(args) -> int:
    out = ensure_dir(args.out)
    if args.preset == "twisted-cubic":
        X = twisted_cubic(args.n_per, seed=args.seed)
        rank_predicted = 3
        params = {"kind": "twisted-cubic", "n": args.n_per}
    else:
        if args.preset:
            base = dict(PRESETS[args.preset])
        else:
            base = dict(d=args.d, p=args.p, u=args.u, m=args.m,
                        n_per=args.n_per)
        spec = SyntheticSpec(seed=args.seed,
                             include_constant=args.include_constant, **base)
        X, labels = generate(spec)
        nf = feature_count(spec.d, spec.p, spec.include_constant)
        rank_predicted = min(spec.m, spec.n, spec.u * nf)
        params = {"kind": "union-of-subspaces", **base,
                  "include_constant": spec.include_constant,
                  "labels": labels.tolist()}
    m, n = X.shape
    mask = _build_mask(args, m, n, args.seed + 1)
    write_matrix_csv(out / "data.csv", X)
    write_mask_csv(out / "mask.csv", mask)
    write_json(out / "manifest.json", {
        "params": params,
        "seed": args.seed,
        "shape": [m, n],
        "rank_predicted": rank_predicted,
        "rank_numerical": numerical_rank(X),
        "observed_fraction": mask.observed_fraction,
    })
    print(f"wrote {m}x{n} dataset to {out}")
    return 0


def _load_problem(args):
    """Read data (+ optional mask/truth) and build the masked matrix."""
    data = read_matrix_csv(args.data)
    if args.mask:
        mask = read_mask_csv(args.mask)
        if mask.shape != data.shape:
            raise ValueError("mask shape does not match data shape")
        if not np.all(np.isfinite(data[mask.observed])):
            raise ValueError("data has non-finite values at observed positions")
    else:
        mask = Mask.from_dense(data)
    truth = None
    if getattr(args, "truth", None):
        truth = read_matrix_csv(args.truth)
        if truth.shape != data.shape:
            raise ValueError("truth shape does not match data shape")
    elif np.all(np.isfinite(data)):
        truth = data
    mm = impute_init(data, mask, strategy=args.init)
    return mm, truth


def _resolve_sigma(args, mm: MaskedMatrix, seed) -> float:
    if args.sigma is not None:
        return args.sigma
    # the bandwidth heuristic always measures the row-mean-imputed matrix,
    # independent of the completion init strategy chosen for the solve
    reference = impute_init(mm.values, mm.mask, strategy="row_mean")
    dbar = mean_pairwise_distance(reference.completion, seed=seed)
    return args.sigma_mult * dbar


def _kernel_from_args(args, mm, seed) -> KernelSpec:
    if getattr(args, "method", None) == "kfmc-poly" \
            or getattr(args, "kernel", None) == "poly":
        return KernelSpec.poly(degree=args.degree, offset=args.offset)
    return KernelSpec.rbf(sigma=_resolve_sigma(args, mm, seed))


def _report(out, payload) -> None:
    write_json(Path(out) / "report.json", payload)


def cmd_complete(args) -> int:
    out = ensure_dir(args.out)
    mm, truth = _load_problem(args)
    m, n = mm.shape
    start = time.perf_counter()
    if args.method == "lrf":
        rank = args.rank if args.rank is not None else min(m, n) // 2 or 1
        X_hat, trace = lrf_complete(mm, rank, ridge=args.ridge,
                                    iters=args.iters, seed=args.seed,
                                    return_trace=True)
        payload = {
            "method": "lrf",
            "kernel": None,
            "hyperparameters": {"rank": rank, "ridge": args.ridge,
                                "iters": args.iters},
            "iterations": args.iters,
            "converged": True,
        }
    elif args.grid:
        if truth is None:
            raise ValueError("--grid requires ground truth "
                             "(fully observed --data or --truth)")
        reference = impute_init(mm.values, mm.mask, strategy="row_mean")
        dbar = mean_pairwise_distance(reference.completion, seed=args.seed)
        candidates = poly_candidates(m) + rbf_candidates(m, dbar)
        best, entries = best_offline(mm, truth, candidates, seed=args.seed)
        X_hat, trace = best.model.completed, best.model.objective_trace
        payload = {
            "method": "kfmc-grid",
            "kernel": kernel_to_dict(best.spec),
            "hyperparameters": _hp_dict(best.hp),
            "iterations": best.model.iterations,
            "converged": best.model.converged,
            "grid": [{"kernel": kernel_to_dict(e.spec),
                      "r": e.hp.r, "alpha": e.hp.alpha, "beta": e.hp.beta,
                      "relative_error": e.relative_error} for e in entries],
        }
    else:
        spec = _kernel_from_args(args, mm, args.seed)
        r = args.r if args.r is not None else _default_r(args.method, m)
        beta = args.beta if args.beta is not None else \
            (1e-4 if spec.is_rbf else 0.1)
        hp = OfflineHyperparams(r=r, alpha=args.alpha, beta=beta,
                                tau=args.tau, eta=args.eta, t_max=args.t_max,
                                tol=args.tol, seed=args.seed)
        try:
            model = fit(mm, spec, hp)
        except NumericalError as exc:
            _save_partial(out, exc)
            raise
        X_hat, trace = model.completed, model.objective_trace
        payload = {
            "method": args.method,
            "kernel": kernel_to_dict(spec),
            "hyperparameters": _hp_dict(hp),
            "iterations": model.iterations,
            "converged": model.converged,
        }
    wall = time.perf_counter() - start
    write_matrix_csv(out / "completed.csv", X_hat)
    write_trace_csv(out / "trace.csv", {"iteration": np.arange(1, len(trace) + 1),
                                        "objective": np.asarray(trace)})
    payload.update({
        "observed_fraction": mm.mask.observed_fraction,
        "relative_error": relative_error(X_hat, truth) if truth is not None else None,
        "seed": args.seed,
        "wall_time_s": wall,
    })
    _report(out, payload)
    print(f"completed {m}x{n} matrix; report in {out}")
    return 0


def _default_r(method, m) -> int:
    return 2 * m if method == "kfmc-rbf" else m


def _hp_dict(hp) -> dict:
    keys = ("r", "alpha", "beta", "tau", "eta", "tol", "seed")
    d = {k: getattr(hp, k) for k in keys if hasattr(hp, k)}
    for k in ("t_max", "n_iter", "n_pass"):
        if hasattr(hp, k):
            d[k] = getattr(hp, k)
    return d


def _save_partial(out, exc: NumericalError) -> None:
    trace = np.asarray(exc.trace if exc.trace is not None else [])
    write_trace_csv(Path(out) / "trace.csv",
                    {"iteration": np.arange(1, trace.size + 1),
                     "objective": trace})


def cmd_stream(args) -> int:
    out = ensure_dir(args.out)
    mm, truth = _load_problem(args)
    m, n = mm.shape
    start = time.perf_counter()
    resume_meta = None
    if args.resume:
        D0, spec, header = load_checkpoint(args.resume)
        if D0.shape[0] != m:
            raise ValueError(f"checkpoint rows {D0.shape[0]} != data rows {m}")
        if args.kernel and spec.kind != args.kernel:
            raise ValueError(f"checkpoint kernel {spec.kind!r} does not match "
                             f"--kernel {args.kernel!r}")
        resume_meta = header
        r = D0.shape[1]
    else:
        if args.passes < 1:
            raise ValueError("--passes 0 requires --resume (a trained model)")
        spec = _kernel_from_args(args, mm, args.seed)
        r = args.r if args.r is not None else _default_r(f"kfmc-{args.kernel}", m)
        D0 = None
    beta = args.beta if args.beta is not None else \
        (1e-4 if spec.is_rbf else 0.1)

    samples = []
    masked_data = np.where(mm.mask.observed, mm.values, np.nan)
    for j in range(n):
        obs_idx, _ = mm.mask.column_split(j)
        samples.append((masked_data[:, j], obs_idx))

    if args.passes == 0:
        X_hat = complete_new(D0, samples, spec, beta, n_iter=args.n_iter,
                             eta=args.eta, tau=args.tau, tol=args.tol)
        cost_trace, err_trace = np.empty(0), np.empty(0)
        D_final = D0
        samples_seen = resume_meta.get("metadata", {}).get("samples_seen", 0)
    else:
        hp = OnlineHyperparams(r=r, alpha=args.alpha, beta=beta, tau=args.tau,
                               eta=args.eta, n_iter=args.n_iter,
                               n_pass=args.passes, tol=args.tol,
                               seed=args.seed)
        model = None
        if D0 is not None:
            from .online import OnlineModel
            model = OnlineModel(D0)
        try:
            X_hat, model = run_stream(samples, spec, hp, ground_truth=truth,
                                      model=model)
        except NumericalError as exc:
            if exc.model is not None and exc.model.cost_trace:
                write_trace_csv(out / "trace.csv",
                                {"t": np.arange(1, len(exc.model.cost_trace) + 1),
                                 "empirical_cost": np.asarray(exc.model.cost_trace),
                                 "empirical_error": np.asarray(exc.model.err_trace)})
            raise
        cost_trace = np.asarray(model.cost_trace)
        err_trace = np.asarray(model.err_trace)
        D_final = model.dictionary
        samples_seen = model.samples_seen
    wall = time.perf_counter() - start

    write_matrix_csv(out / "completed.csv", X_hat)
    write_trace_csv(out / "trace.csv",
                    {"t": np.arange(1, len(cost_trace) + 1),
                     "empirical_cost": cost_trace,
                     "empirical_error": err_trace})
    save_checkpoint(out / "model.ckpt", D_final, spec, metadata={
        "beta": beta, "samples_seen": int(samples_seen), "seed": args.seed,
        "n_iter": args.n_iter, "eta": args.eta, "tau": args.tau,
    })
    _report(out, {
        "method": f"ol-kfmc-{spec.kind}",
        "kernel": kernel_to_dict(spec),
        "hyperparameters": {"r": int(D_final.shape[1]), "alpha": args.alpha,
                            "beta": beta, "tau": args.tau, "eta": args.eta,
                            "n_iter": args.n_iter, "n_pass": args.passes},
        "observed_fraction": mm.mask.observed_fraction,
        "relative_error": relative_error(X_hat, truth) if truth is not None else None,
        "iterations": int(samples_seen),
        "seed": args.seed,
        "wall_time_s": wall,
    })
    print(f"streamed {n} columns x {args.passes} passes; report in {out}")
    return 0


def cmd_ose(args) -> int:
    out = ensure_dir(args.out)
    data = read_matrix_csv(args.input)
    if args.mask:
        mask = read_mask_csv(args.mask)
        if mask.shape != data.shape:
            raise ValueError("mask shape does not match input shape")
    else:
        mask = Mask.from_dense(data)
    truth = None
    if args.truth:
        truth = read_matrix_csv(args.truth)
    elif np.all(np.isfinite(data)):
        truth = data
    masked = np.where(mask.observed, data, np.nan)
    m, n = data.shape
    samples = [(masked[:, j], mask.column_split(j)[0]) for j in range(n)]
    start = time.perf_counter()

    if args.baseline == "ose-lrf":
        if not args.train or args.rank is None:
            raise ValueError("--baseline ose-lrf requires --train and --rank")
        train = read_matrix_csv(args.train)
        if not np.all(np.isfinite(train)):
            raise ValueError("--train matrix must be fully observed")
        U = svd_basis(train, args.rank)
        cols = [ose_lrf(U, x, idx, ridge=args.ridge) for x, idx in samples]
        X_hat = np.column_stack(cols)
        payload = {"method": "ose-lrf", "kernel": None,
                   "hyperparameters": {"rank": args.rank, "ridge": args.ridge},
                   "iterations": 0}
    else:
        if not args.model:
            raise ValueError("either --model or --baseline ose-lrf is required")
        ckpt_bytes = Path(args.model).read_bytes()
        D, spec, header = load_checkpoint(args.model)
        if D.shape[0] != m:
            raise ValueError(f"checkpoint rows {D.shape[0]} != input rows {m}")
        beta = args.beta if args.beta is not None else \
            header.get("metadata", {}).get("beta", 1e-4)
        X_hat = complete_new(D, samples, spec, beta, n_iter=args.n_iter,
                             eta=args.eta, tau=args.tau, tol=args.tol)
        if Path(args.model).read_bytes() != ckpt_bytes:
            raise NumericalError("checkpoint changed during out-of-sample run")
        payload = {"method": f"ose-kfmc-{spec.kind}",
                   "kernel": kernel_to_dict(spec),
                   "hyperparameters": {"beta": beta, "n_iter": args.n_iter,
                                       "eta": args.eta, "tau": args.tau,
                                       "r": int(D.shape[1])},
                   "iterations": n}
    wall = time.perf_counter() - start
    write_matrix_csv(out / "completed.csv", X_hat)
    payload.update({
        "observed_fraction": mask.observed_fraction,
        "relative_error": relative_error(X_hat, truth) if truth is not None else None,
        "seed": args.seed,
        "wall_time_s": wall,
    })
    _report(out, payload)
    print(f"completed {n} new columns; report in {out}")
    return 0


def cmd_bounds(args) -> int:
    shape = ProblemShape(m=args.m, n=args.n, d=args.d, p=args.p, q=args.q,
                         u=args.u)
    report = sampling_report(shape)
    report["vacuous"] = report["rho_lrmc_vacuous"]
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfmc",
        description="High-rank matrix completion via kernelized factorization")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset + mask")
    g.add_argument("--preset", choices=[*PRESETS, "twisted-cubic"])
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--u", type=int, default=1)
    g.add_argument("--m", type=int, default=30)
    g.add_argument("--n-per", type=int, default=100)
    g.add_argument("--include-constant", action="store_true")
    _add_mask_flags(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("complete", help="batch completion of one matrix")
    c.add_argument("--data", required=True)
    c.add_argument("--mask")
    c.add_argument("--truth")
    c.add_argument("--method", choices=["kfmc-poly", "kfmc-rbf", "lrf"],
                   default="kfmc-rbf")
    c.add_argument("--grid", action="store_true",
                   help="sweep the default hyperparameter grid, keep best RE")
    c.add_argument("--init", choices=["row_mean", "zero"], default="row_mean")
    c.add_argument("--r", type=int, default=None)
    c.add_argument("--alpha", type=float, default=0.1)
    c.add_argument("--beta", type=float, default=None)
    c.add_argument("--tau", type=float, default=2.0)
    c.add_argument("--eta", type=float, default=0.5)
    c.add_argument("--t-max", type=int, default=500)
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--degree", type=int, default=2)
    c.add_argument("--offset", type=float, default=1.0)
    c.add_argument("--sigma", type=float, default=None)
    c.add_argument("--sigma-mult", type=float, default=1.0)
    c.add_argument("--rank", type=int, default=None, help="lrf rank")
    c.add_argument("--ridge", type=float, default=1e-4, help="lrf ridge")
    c.add_argument("--iters", type=int, default=100, help="lrf sweeps")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_complete)

    s = sub.add_parser("stream", help="online completion, column by column")
    s.add_argument("--data", required=True)
    s.add_argument("--mask")
    s.add_argument("--truth")
    s.add_argument("--kernel", choices=["poly", "rbf"], default="rbf")
    s.add_argument("--init", choices=["row_mean", "zero"], default="row_mean")
    s.add_argument("--passes", type=int, default=1)
    s.add_argument("--r", type=int, default=None)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--tau", type=float, default=2.0)
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument("--n-iter", type=int, default=30)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--degree", type=int, default=2)
    s.add_argument("--offset", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=None)
    s.add_argument("--sigma-mult", type=float, default=1.0)
    s.add_argument("--resume", help="checkpoint to continue from")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stream)

    o = sub.add_parser("ose", help="complete new columns against a frozen model")
    o.add_argument("--model", help="checkpoint from `kfmc stream`")
    o.add_argument("--input", required=True)
    o.add_argument("--mask")
    o.add_argument("--truth")
    o.add_argument("--beta", type=float, default=None)
    o.add_argument("--tau", type=float, default=2.0)
    o.add_argument("--eta", type=float, default=0.5)
    o.add_argument("--n-iter", type=int, default=30)
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--baseline", choices=["ose-lrf"])
    o.add_argument("--train", help="complete training matrix for ose-lrf")
    o.add_argument("--rank", type=int, default=None, help="ose-lrf basis rank")
    o.add_argument("--ridge", type=float, default=0.0)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_ose)

    b = sub.add_parser("bounds", help="sampling-rate and rank calculators")
    for name in ("m", "n", "d", "p", "q", "u"):
        b.add_argument(f"--{name}", type=int, required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"kfmc: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"kfmc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

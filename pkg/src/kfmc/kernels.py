"""Kernel evaluation, kernel-matrix assembly, and elementwise power weights.

Two kernels are supported: the polynomial kernel ``(x.T y + offset)**degree``
and the RBF kernel ``exp(-||x - y||^2 / sigma^2)``.  Columns are samples
throughout: an (m, n) array holds n points in R^m.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POLY = "poly"
RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to use plus its hyperparameters.

    ``degree`` and ``offset`` apply to the polynomial kernel, ``sigma`` to
    the RBF kernel; the irrelevant fields are ignored for the other kind.
    """

    kind: str
    degree: int = 2
    offset: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in (POLY, RBF):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == POLY:
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError("polynomial degree must be an integer >= 1")
            if self.offset < 0:
                raise ValueError("polynomial offset must be >= 0")
        else:
            if not self.sigma > 0:
                raise ValueError("rbf sigma must be > 0")

    @classmethod
    def poly(cls, degree: int = 2, offset: float = 1.0) -> "KernelSpec":
        return cls(kind=POLY, degree=int(degree), offset=float(offset))

    @classmethod
    def rbf(cls, sigma: float) -> "KernelSpec":
        return cls(kind=RBF, sigma=float(sigma))

    @property
    def is_poly(self) -> bool:
        return self.kind == POLY

    @property
    def is_rbf(self) -> bool:
        return self.kind == RBF


def eval_kernel(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate k(x, y) for two vectors of equal length."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"vector length mismatch: {x.shape} vs {y.shape}")
    if spec.is_poly:
        return float((x @ y + spec.offset) ** spec.degree)
    d2 = float(np.sum((x - y) ** 2))
    return float(np.exp(-d2 / spec.sigma**2))


def _check_columns(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("kernel matrix inputs must be 2-d arrays of columns")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row-count mismatch: {A.shape[0]} vs {B.shape[0]}")
    return A, B


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Dense kernel matrix with entry (i, j) = k(A[:, i], B[:, j])."""
    A, B = _check_columns(A, B)
    G = A.T @ B
    if spec.is_poly:
        return (G + spec.offset) ** spec.degree
    sq = np.sum(A * A, axis=0)[:, None] + np.sum(B * B, axis=0)[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / spec.sigma**2)


def kernel_diag(spec: KernelSpec, A: np.ndarray) -> np.ndarray:
    """Vector of self-similarities k(A[:, j], A[:, j]) without the full matrix."""
    A = np.asarray(A, dtype=float)
    if spec.is_poly:
        return (np.sum(A * A, axis=0) + spec.offset) ** spec.degree
    return np.ones(A.shape[1])


def power_weights(spec: KernelSpec, G: np.ndarray) -> np.ndarray:
    """Elementwise (G + offset)**(degree - 1), the reweighting matrices.

    Only defined for the polynomial kernel; ``degree`` is an integer so the
    power never involves fractional exponents of negative bases.
    """
    if not spec.is_poly:
        raise ValueError("power weights are only defined for the polynomial kernel")
    G = np.asarray(G, dtype=float)
    if spec.degree == 1:
        return np.ones_like(G)
    return (G + spec.offset) ** (spec.degree - 1)

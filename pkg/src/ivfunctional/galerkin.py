"""Galerkin matrices and the thresholded plug-in estimator of a linear functional.

Both the regressor basis ``e`` and the instrument basis ``f`` are the
trigonometric basis; they are evaluated through separate calls so that a
different instrument basis only touches ``instrument_basis``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ivfunctional import basis, kernels, linalg
from ivfunctional.dgp import JointModel, Sample
from ivfunctional.linalg import SingularMatrixError


class NotInjectiveAtThisDimension(ValueError):
    """Requested dimension exceeds the support of the operator spectrum."""


@dataclass(frozen=True)
class GalerkinPair:
    t_hat: np.ndarray
    g_hat: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return int(self.g_hat.shape[0])


@dataclass(frozen=True)
class EstimateResult:
    value: float
    truncated: bool
    alpha: float
    inv_norm: float  # nan when the matrix is singular


def regressor_basis(z, m):
    return basis.basis_matrix(z, m)


def instrument_basis(w, m):
    return basis.basis_matrix(w, m)


def true_matrix(model: JointModel, m: int) -> np.ndarray:
    """``[T]_m = Diag(lambda_1, ..., lambda_m)`` for the constructed joint law."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > model.J:
        raise NotInjectiveAtThisDimension(
            f"m={m} exceeds the spectrum truncation J={model.J}; [T]_m would be singular"
        )
    return np.diag(np.asarray(model.lambdas[:m], dtype=np.float64))


def empirical_pair(sample: Sample, m: int) -> GalerkinPair:
    """Empirical ``[T]_m`` and ``[g]_m`` from a sample."""
    if m < 1:
        raise ValueError("m must be at least 1")
    z = np.ascontiguousarray(sample.z, dtype=np.float64)
    w = np.ascontiguousarray(sample.w, dtype=np.float64)
    t_hat = kernels.galerkin_matrix(z, w, int(m))
    fw = instrument_basis(w, m)
    # column-wise means: the first entry is exactly np.mean(y) since f_1 == 1
    g_hat = np.array([np.mean(sample.y * fw[:, l]) for l in range(m)])
    return GalerkinPair(t_hat=t_hat, g_hat=g_hat, n=sample.n)


def galerkin_solution(t, g) -> np.ndarray:
    """Coefficients ``[phi_m]_m`` solving ``t x = g``; raises SingularMatrixError."""
    return linalg.invert(t) @ np.asarray(g, dtype=np.float64)


def true_functional(h, phi) -> float:
    """``sum_j h_j phi_j`` over the common support."""
    h = np.asarray(h, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    k = min(h.size, phi.size)
    return float(np.dot(h[:k], phi[:k]))


def estimate_functional(h, pair: GalerkinPair, alpha: float) -> EstimateResult:
    """Thresholded plug-in estimate ``[h]_m^t [T_hat]_m^{-1} [g_hat]_m``.

    Returns zero, flagged as truncated, when ``[T_hat]_m`` is singular at the
    pivot tolerance or its inverse has operator norm above ``alpha``.
    """
    if not alpha > 0:
        raise ValueError("threshold alpha must be positive")
    m = pair.m
    h = np.asarray(h, dtype=np.float64)
    if h.size < m:
        raise ValueError(f"representer has {h.size} coefficients, need at least m={m}")
    try:
        inv = linalg.invert(pair.t_hat)
    except SingularMatrixError:
        return EstimateResult(0.0, True, float(alpha), float("nan"))
    inv_norm = linalg.spectral_norm(inv)
    if inv_norm <= alpha:
        value = float(h[:m] @ (inv @ pair.g_hat))
        return EstimateResult(value, False, float(alpha), inv_norm)
    return EstimateResult(0.0, True, float(alpha), inv_norm)


def projected_solution(model: JointModel, phi, m: int) -> np.ndarray:
    """Population Galerkin solution ``[T]_m^{-1} [T phi]_m`` in the diagonal model."""
    phi = np.asarray(phi, dtype=np.float64)
    t = true_matrix(model, m)
    g = np.zeros(m)
    k = min(m, phi.size)
    g[:k] = model.lambdas[:k] * phi[:k]
    return galerkin_solution(t, g)


def noise_vector(sample: Sample, m: int) -> np.ndarray:
    """``[B]_l = (1/n) sum_i U_i f_l(W_i)``; needs the stored noise."""
    if sample.noise is None:
        raise ValueError("sample carries no noise realisation")
    fw = instrument_basis(sample.w, m)
    return fw.T @ sample.noise / sample.n


def residual_vector(sample: Sample, phi, phi_m, m: int) -> np.ndarray:
    """``[S]_l = (1/n) sum_i f_l(W_i) {phi(Z_i) - phi_m(Z_i)}``."""
    resid = basis.evaluate(phi, sample.z) - basis.evaluate(phi_m, sample.z)
    fw = instrument_basis(sample.w, m)
    return fw.T @ resid / sample.n


def operator_deviation_sq(t_hat, t) -> float:
    """``||[T_hat]_m - [T]_m||^2`` in operator norm."""
    return linalg.spectral_norm(np.asarray(t_hat) - np.asarray(t)) ** 2

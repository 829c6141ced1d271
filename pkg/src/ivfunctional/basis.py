"""Trigonometric basis, Sobolev-type weight sequences and coefficient vectors.

Basis functions are indexed from 1: ``e_1 = 1``, ``e_{2k}(s) = sqrt(2) cos(2 pi k s)``
and ``e_{2k+1}(s) = sqrt(2) sin(2 pi k s)``. Coefficient vectors are plain 1-d
float arrays whose entry ``i`` is the coefficient of ``e_{i+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from ivfunctional import kernels

KINDS = ("polynomial", "exponential")


class DomainError(ValueError):
    """Argument outside the domain of a basis or weight operation."""


@dataclass(frozen=True)
class WeightConfig:
    """Smoothness, ill-posedness and ellipsoid constants of a scenario.

    ``p`` and ``s`` are the Sobolev orders of the structural function and the
    representer, ``a`` the degree of ill-posedness whose decay ``kind`` is
    polynomial (``j^{-2a}``) or exponential (``exp(-j^{2a})``). ``rho`` and ``tau``
    are the ellipsoid radii, ``d``/``D`` the link-condition constants and
    ``triangle`` the rate constant of the dimension rule.
    """

    p: float = 2.0
    s: float = 1.0
    a: float = 3.0
    kind: str = "polynomial"
    rho: float = 1.0
    tau: float = 1.0
    d: float = 1.0
    D: float = 1.0
    triangle: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        checks = [
            (self.p >= 0, "p >= 0"),
            (self.s >= 0, "s >= 0"),
            (self.a > 0, "a > 0"),
            (self.rho > 0, "rho > 0"),
            (self.tau > 0, "tau > 0"),
            (self.d >= 1, "d >= 1"),
            (self.D >= self.d, "D >= d"),
            (self.triangle >= 1, "triangle >= 1"),
        ]
        for ok, what in checks:
            if not ok:
                raise DomainError(f"weight configuration violates {what}")


def eval_basis(j: int, s: float) -> float:
    """Value of the ``j``-th trigonometric basis function at ``s`` in [0, 1]."""
    if int(j) != j or j < 1:
        raise DomainError(f"basis index must be a positive integer, got {j!r}")
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"evaluation point must lie in [0, 1], got {s!r}")
    j = int(j)
    if j == 1:
        return 1.0
    k = j // 2
    if j % 2 == 0:
        return math.sqrt(2.0) * math.cos(2.0 * math.pi * k * s)
    return math.sqrt(2.0) * math.sin(2.0 * math.pi * k * s)


def basis_matrix(s, m: int) -> np.ndarray:
    """Matrix with entry ``(i, j-1) = e_j(s_i)`` for ``j = 1..m``."""
    s = np.ascontiguousarray(s, dtype=np.float64)
    if m < 1:
        raise DomainError("m must be at least 1")
    return kernels.basis_matrix(s, int(m))


def log_weights(j, cfg: WeightConfig):
    """Natural logs of ``(b_j, h_j, v_j)``; exact for indices where v underflows."""
    j = np.asarray(j, dtype=np.float64)
    if np.any(j < 1):
        raise DomainError("weight index must be >= 1")
    first = j == 1
    lj = np.log(j)
    log_b = np.where(first, 0.0, 2.0 * cfg.p * lj)
    log_h = np.where(first, 0.0, 2.0 * cfg.s * lj)
    if cfg.kind == "polynomial":
        log_v = np.where(first, 0.0, -2.0 * cfg.a * lj)
    else:
        log_v = np.where(first, 0.0, -np.power(j, 2.0 * cfg.a))
    return log_b, log_h, log_v


def weights(j, cfg: WeightConfig):
    """Weights ``(b_j, h_j, v_j)``; index 1 is pinned to 1 for all three."""
    _, _, log_v = log_weights(j, cfg)
    jj = np.asarray(j, dtype=np.float64)
    # direct powers keep integer cases exact (3^4 == 81)
    b = np.where(jj == 1, 1.0, jj ** (2.0 * cfg.p))
    h = np.where(jj == 1, 1.0, jj ** (2.0 * cfg.s))
    if cfg.kind == "polynomial":
        v = np.where(jj == 1, 1.0, jj ** (-2.0 * cfg.a))
    else:
        v = np.exp(log_v)
    out = b, h, v
    if np.ndim(j) == 0:
        return tuple(float(x) for x in out)
    return out


def weight_vector(which: str, m: int, cfg: WeightConfig) -> np.ndarray:
    """First ``m`` entries of the ``'b'``, ``'h'``, ``'v'`` or ``'one'`` weights."""
    idx = np.arange(1, m + 1)
    if which == "one":
        return np.ones(m)
    try:
        pos = "bhv".index(which)
    except ValueError:
        raise DomainError(f"unknown weight selector {which!r}") from None
    return weights(idx, cfg)[pos]


def weighted_norm_sq(x, which: str = "one", cfg: WeightConfig | None = None, power: float = 1.0) -> float:
    """``sum_j w_j^power x_j^2`` for the selected weight sequence."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    if which == "one":
        w = np.ones(x.size)
    else:
        if cfg is None:
            raise DomainError("a WeightConfig is needed for non-unit weights")
        w = weight_vector(which, x.size, cfg)
    return float(np.sum(np.power(w, power) * x * x))


def in_ellipsoid(x, which: str, cfg: WeightConfig, radius: float) -> bool:
    return weighted_norm_sq(x, which, cfg) <= radius


def indicator_representer(lo: float, hi: float, m: int) -> np.ndarray:
    """First ``m`` coefficients of the indicator of ``[lo, hi]``."""
    if not 0.0 <= lo < hi <= 1.0:
        raise DomainError(f"need 0 <= lo < hi <= 1, got lo={lo!r}, hi={hi!r}")
    if m < 1:
        raise DomainError("m must be at least 1")
    out = np.empty(m)
    out[0] = hi - lo
    for idx in range(1, m):
        j = idx + 1
        k = j // 2
        scale = math.sqrt(2.0) / (2.0 * math.pi * k)
        if j % 2 == 0:
            out[idx] = scale * (math.sin(2 * math.pi * k * hi) - math.sin(2 * math.pi * k * lo))
        else:
            out[idx] = scale * (math.cos(2 * math.pi * k * lo) - math.cos(2 * math.pi * k * hi))
    return out


def smooth_coefs(exponent: float, scale: float, m: int) -> np.ndarray:
    """Coefficients ``scale * j^{-exponent}`` for ``j = 1..m``."""
    if not exponent > 0.5:
        raise DomainError(f"exponent must exceed 1/2 for square summability, got {exponent!r}")
    if not scale > 0:
        raise DomainError("scale must be positive")
    if m < 1:
        raise DomainError("m must be at least 1")
    j = np.arange(1, m + 1, dtype=np.float64)
    return scale * j ** (-float(exponent))


def calibrated_scale(exponent: float, order: float, radius: float) -> float:
    """Largest scale keeping ``scale * j^{-exponent}`` in the order-``order`` ellipsoid.

    Uses ``sum_j j^{2 order - 2 exponent} = zeta(2 exponent - 2 order)``, an upper
    bound for every truncation, so membership holds at any length.
    """
    gap = 2.0 * (exponent - order)
    if not gap > 1.0:
        raise DomainError(
            f"exponent {exponent} too small for order {order}: need exponent > order + 1/2"
        )
    return math.sqrt(radius / float(zeta(gap)))


def evaluate(coefs, s) -> np.ndarray:
    """Evaluate ``sum_j coefs_j e_j`` at the points ``s``."""
    coefs = np.asarray(coefs, dtype=np.float64)
    return basis_matrix(np.atleast_1d(s), coefs.size) @ coefs

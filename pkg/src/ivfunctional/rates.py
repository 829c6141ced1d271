"""Tuning rules and analytic bounds: dimension k*, rate delta*, threshold alpha,
theoretical rate curves, the Bernstein-type deviation bound and regularity checks.

Everything is computed in log space where the exponential weights would
under- or overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ivfunctional import basis
from ivfunctional.basis import DomainError, WeightConfig

THRESHOLD_MODES = ("theorem", "remark", "corollary")
DEFAULT_ETA = 2.0
# relative slack on the log-ratio test, so exact ties such as k^4 == n survive rounding
_TIE_TOL = 1e-12
_K_CAP = 2**62


@dataclass(frozen=True)
class TuningPlan:
    n: int
    k_star: int
    delta_star: float
    alpha: float
    mode: str
    rate_exponent: float | str
    triangle_implied: float


def _log_ratio(k, n, cfg):
    # log(b_k / (n v_k))
    log_b, _, log_v = basis.log_weights(float(k), cfg)
    return float(log_b) - math.log(n) - float(log_v)


def _fits(k, n, cfg):
    return _log_ratio(k, n, cfg) <= _TIE_TOL * max(1.0, math.log(n))


def select_dimension(n: int, cfg: WeightConfig) -> int:
    """``k* = max{k >= 1 : b_k / (n v_k) <= 1}``.

    ``b_k / v_k`` is nondecreasing, so the set is an initial segment and a
    doubling search followed by bisection finds its end.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    lo = 1
    hi = 2
    while _fits(hi, n, cfg):
        lo = hi
        hi *= 2
        if hi > _K_CAP:
            raise DomainError("dimension rule diverges for this configuration")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _fits(mid, n, cfg):
            lo = mid
        else:
            hi = mid
    return lo


def implied_triangle(k_star: int, cfg: WeightConfig) -> float:
    """``b_{k+1} v_k / (b_k v_{k+1})``: the band constant that ``k*`` satisfies."""
    log_b0, _, log_v0 = basis.log_weights(float(k_star), cfg)
    log_b1, _, log_v1 = basis.log_weights(float(k_star + 1), cfg)
    val = float(log_b1 - log_b0 + log_v0 - log_v1)
    return math.exp(val) if val < 709.0 else math.inf


def delta_star(k_star: int, cfg: WeightConfig) -> float:
    """``1 / (b_{k*} h_{k*})``."""
    if k_star < 1:
        raise DomainError("k_star must be at least 1")
    b, h, _ = basis.weights(int(k_star), cfg)
    return 1.0 / (b * h)


def power_dimension(n: int, cfg: WeightConfig, delta: float) -> int:
    """``floor(n^{1/(2p+2a+delta)})``, at least 1; the consistency-regime rule."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    return max(1, int(math.floor(n ** (1.0 / (2 * cfg.p + 2 * cfg.a + delta)) + 1e-12)))


def threshold_alpha(n: int, m: int, cfg: WeightConfig, mode: str = "theorem",
                    D: float | None = None, triangle: float | None = None) -> float:
    """Threshold for the inverse-norm test.

    ``theorem``: ``sqrt(n max(1, 4 D triangle / b_m))``; ``remark``: ``n``;
    ``corollary``: ``2 sqrt(D / v_m)``. ``D`` and ``triangle`` default to the
    configured constants.
    """
    if n < 1 or m < 1:
        raise DomainError("need n >= 1 and m >= 1")
    D = cfg.D if D is None else D
    triangle = cfg.triangle if triangle is None else triangle
    log_b, _, log_v = basis.log_weights(float(m), cfg)
    if mode == "theorem":
        return math.sqrt(n * max(1.0, 4.0 * D * triangle * math.exp(-float(log_b))))
    if mode == "remark":
        return float(n)
    if mode == "corollary":
        return 2.0 * math.sqrt(D) * math.exp(-0.5 * float(log_v))
    raise DomainError(f"threshold mode must be one of {THRESHOLD_MODES}, got {mode!r}")


def rate_exponent(cfg: WeightConfig) -> float | str:
    """Log-log slope of the minimax rate, or a tag in the exponential case."""
    if cfg.kind == "polynomial":
        return -min((cfg.p + cfg.s) / (cfg.p + cfg.a), 1.0)
    return f"log^-{(cfg.p + cfg.s) / cfg.a:g}"


def theoretical_rate(n: float, cfg: WeightConfig) -> float:
    """``max(n^{-(p+s)/(p+a)}, 1/n)`` or ``(log n)^{-(p+s)/a}``."""
    if n < 2:
        raise DomainError("n must be at least 2")
    if cfg.kind == "polynomial":
        return max(n ** (-(cfg.p + cfg.s) / (cfg.p + cfg.a)), 1.0 / n)
    return math.log(n) ** (-(cfg.p + cfg.s) / cfg.a)


def rate_function(cfg: WeightConfig):
    """``n -> theoretical_rate(n, cfg)``; the only form available for exponential decay."""
    return lambda n: theoretical_rate(n, cfg)


def plan(n: int, cfg: WeightConfig, mode: str = "theorem", D: float | None = None,
         triangle: float | None = None, m: int | None = None) -> TuningPlan:
    """Dimension, rate and threshold for sample size ``n``; ``m`` overrides k*."""
    k = select_dimension(n, cfg) if m is None else int(m)
    return TuningPlan(
        n=int(n), k_star=k, delta_star=delta_star(k, cfg),
        alpha=threshold_alpha(n, k, cfg, mode, D=D, triangle=triangle), mode=mode,
        rate_exponent=rate_exponent(cfg), triangle_implied=implied_triangle(k, cfg),
    )


def deviation_bound(n: int, m: int, cfg: WeightConfig, eta: float = DEFAULT_ETA,
                    v_m: float | None = None, D: float | None = None) -> float:
    """``min(1, 2 exp(-(n v_m / m^2) / (20 D eta^2) + 2 log m))``.

    Bounds ``P(||[T_hat]_m - [T]_m||^2 > v_m / (4 D))``.
    """
    if not eta >= 1:
        raise DomainError("eta must be at least 1")
    if m < 1:
        raise DomainError("m must be at least 1")
    D = cfg.D if D is None else D
    if v_m is None:
        v_m = basis.weights(int(m), cfg)[2]
    expo = -(n * v_m / (m * m)) / (20.0 * D * eta * eta) + 2.0 * math.log(m)
    if expo >= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(expo))


def _condition_sequences(k, cfg):
    k = np.asarray(k, dtype=np.float64)
    log_b, log_h, log_v = basis.log_weights(k, cfg)
    inv_b = np.exp(-log_b)
    s1 = k**2 * log_b * inv_b
    s2 = k**2 * np.minimum(-log_v, log_h) * inv_b
    s3 = k**3 * inv_b
    return s1, s2, s3


def check_regularity(cfg: WeightConfig, n_grid, k_max: int = 256) -> dict:
    """Evaluate the additional rate conditions along ``n_grid``.

    The three sequences ``k^2 log(b_k)/b_k``, ``k^2 log(min(1/v_k, h_k))/b_k`` and
    ``k^3/b_k`` depend on ``n`` only through ``k*``, so their limiting behaviour
    is judged on ``k = k_max/2..k_max`` (no growth, strict decrease for the
    first two). Partial sums of ``Gamma = sum 1/b_j`` are reported up to ``k*``.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise DomainError("n_grid must be nonempty")
    ks = [select_dimension(n, cfg) for n in n_grid]
    s1, s2, s3 = _condition_sequences(ks, cfg)

    k_max = max(int(k_max), max(ks), 8)
    kk = np.arange(2, k_max + 1)
    t1, t2, t3 = _condition_sequences(kk, cfg)
    half = kk >= k_max // 2

    def vanishing(t):
        tail = t[half]
        return bool(np.all(np.diff(tail) <= 0) and tail[-1] < tail[0])

    def bounded(t):
        return bool(np.max(t[half]) <= np.max(t[~half]) * (1 + 1e-12))

    b = basis.weight_vector("b", k_max, cfg)
    gamma_partial = np.cumsum(1.0 / b)
    return {
        "n_grid": n_grid,
        "k_star": ks,
        "log_b_over_b": s1.tolist(),
        "log_min_over_b": s2.tolist(),
        "k3_over_b": s3.tolist(),
        "log_b_over_b_vanishing": vanishing(t1),
        "log_min_over_b_vanishing": vanishing(t2),
        "k3_over_b_bounded": bounded(t3),
        "gamma_partial": [float(gamma_partial[k - 1]) for k in ks],
        "gamma_tail_partial": float(gamma_partial[-1]),
        "gamma_finite": bool(2 * cfg.p > 1),
        "p_at_least_3_2": bool(cfg.p >= 1.5),
    }


def assumption_constant(cfg: WeightConfig, m_max: int = 1000) -> dict:
    """Empirical ``Lambda`` for ``v_m sup_{j<=m} 1/(v_j h_j) <= Lambda max(1/h_m, v_m)``.

    Returns the maximal ratio over ``m <= m_max`` and whether it stops growing
    over the second half of the range.
    """
    m = np.arange(1, m_max + 1, dtype=np.float64)
    log_b, log_h, log_v = basis.log_weights(m, cfg)
    sup = np.maximum.accumulate(-log_v - log_h)
    log_ratio = log_v + sup - np.maximum(-log_h, log_v)
    half = m >= m_max // 2
    lam = float(np.exp(np.max(log_ratio)))
    return {
        "Lambda": lam,
        "bounded": bool(np.max(log_ratio[half]) <= np.max(log_ratio[~half]) + 1e-9),
        "m_max": int(m_max),
    }

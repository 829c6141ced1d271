"""Synthetic data-generating process.

The joint density of ``(Z, W)`` on the unit square is

    p(z, w) = 1 + sum_{j=2}^J lambda_j e_j(z) e_j(w),

which has uniform marginals and makes the conditional expectation operator
diagonal in the trigonometric basis, ``T e_j = lambda_j e_j`` for ``j <= J``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from ivfunctional import basis, kernels
from ivfunctional.basis import DomainError, WeightConfig

DEFAULT_J = {"polynomial": 25, "exponential": 6}

# stream tags for per-replication generators
TAG_SAMPLE = 1
TAG_DEVIATION = 2


@dataclass(frozen=True)
class JointModel:
    J: int
    lambdas: np.ndarray
    c: float
    pmax: float
    pmin: float

    @property
    def link_constant(self) -> float:
        """Smallest d (and D) for which the operator meets the link conditions."""
        return 1.0 / (self.c * self.c)

    def density(self, z, w) -> np.ndarray:
        z = np.ascontiguousarray(z, dtype=np.float64)
        w = np.ascontiguousarray(w, dtype=np.float64)
        return kernels.joint_density(z, w, self.lambdas)


@dataclass
class Sample:
    y: np.ndarray
    z: np.ndarray
    w: np.ndarray
    noise: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def __post_init__(self):
        if not (self.y.shape == self.z.shape == self.w.shape):
            raise ValueError("y, z and w must have equal lengths")


@dataclass(frozen=True)
class HardInstance:
    k_star: int
    phi_sq: float
    h_sq: float
    xi: float
    n: int
    b: float
    h_weight: float
    v: float
    d: float
    rho: float
    tau: float
    triangle: float
    error_fourth_moment_bound: float
    xi_is_parametric: bool = False

    @property
    def phi_coef(self) -> float:
        return math.sqrt(self.phi_sq)

    @property
    def h_coef(self) -> float:
        return math.sqrt(self.h_sq)

    @property
    def delta_star(self) -> float:
        return 1.0 / (self.b * self.h_weight)

    def band_ok(self) -> bool:
        """Whether ``1/triangle <= b/(n v) <= triangle`` holds for this k*."""
        r = self.b / (self.n * self.v)
        return 1.0 / self.triangle <= r <= self.triangle

    def checks(self) -> dict:
        """The three defining inequalities, evaluated in exact rational arithmetic."""
        f = Fraction
        phi2, h2 = f(self.phi_sq), f(self.h_sq)
        if self.k_star == 1 and self.xi_is_parametric:
            rhs3 = f(self.tau) * min(1 / (2 * f(self.d)), f(self.rho)) / self.n
        else:
            delta = 1 / (f(self.b) * f(self.h_weight))
            rhs3 = delta * (f(self.tau) / f(self.triangle)) * f(self.xi)
        return {
            "variance": 2 * f(self.d) * self.n * f(self.v) * phi2 <= 1,
            "membership": f(self.b) * phi2 <= f(self.rho),
            "separation": h2 * phi2 >= rhs3,
        }


def build_joint(cfg: WeightConfig, J: int | None = None, margin: float = 0.1) -> JointModel:
    """Joint law with singular values ``lambda_j = c sqrt(v_j)`` for ``2 <= j <= J``."""
    if J is None:
        J = DEFAULT_J[cfg.kind]
    if int(J) != J or J < 1:
        raise DomainError(f"spectrum truncation J must be a positive integer, got {J!r}")
    if not 0.0 < margin < 1.0:
        raise DomainError(f"margin must lie in (0, 1), got {margin!r}")
    J = int(J)
    v = basis.weight_vector("v", J, cfg)
    root_sum = float(np.sum(np.sqrt(v[1:])))
    c = 1.0 if root_sum == 0.0 else min(1.0, (1.0 - margin) / (2.0 * root_sum))
    lambdas = np.empty(J)
    lambdas[0] = 1.0
    lambdas[1:] = c * np.sqrt(v[1:])
    lambdas.setflags(write=False)
    spread = 2.0 * c * root_sum
    return JointModel(J=J, lambdas=lambdas, c=c, pmax=1.0 + spread, pmin=1.0 - spread)


def _rejection(model: JointModel, n: int, rng: np.random.Generator, max_factor: int = 10**6):
    if n < 1:
        raise DomainError("sample size must be at least 1")
    if model.J == 1:
        return rng.random(n), rng.random(n), n
    z_out = np.empty(n)
    w_out = np.empty(n)
    filled = 0
    proposals = 0
    cap = max_factor * n
    while filled < n:
        if proposals >= cap:
            raise RuntimeError(f"rejection sampler exceeded {cap} proposals")
        need = n - filled
        batch = int(need * model.pmax * 1.05) + 16
        z = rng.random(batch)
        w = rng.random(batch)
        u = rng.random(batch)
        keep = np.flatnonzero(u * model.pmax <= model.density(z, w))
        if keep.size >= need:
            keep = keep[:need]
            proposals += int(keep[-1]) + 1  # draws past the last accepted one are unused
        else:
            proposals += batch
        z_out[filled:filled + keep.size] = z[keep]
        w_out[filled:filled + keep.size] = w[keep]
        filled += keep.size
    return z_out, w_out, proposals


def sample_pairs(model: JointModel, n: int, rng: np.random.Generator):
    """I.i.d. draws of ``(Z, W)`` by rejection from the uniform square."""
    z, w, _ = _rejection(model, n, rng)
    return z, w


def acceptance_rate(model: JointModel, n: int, rng: np.random.Generator) -> float:
    _, _, proposals = _rejection(model, n, rng)
    return n / proposals


def draw_sample(model: JointModel, phi, sigma: float, n: int, rng: np.random.Generator) -> Sample:
    """Sample ``Y = phi(Z) + sigma * eps`` with standard Gaussian ``eps`` independent of ``(Z, W)``.

    Gaussian errors satisfy ``E[U^4 | W] = 3 sigma^4``.
    """
    if sigma < 0:
        raise DomainError("noise level must be nonnegative")
    z, w = sample_pairs(model, n, rng)
    noise = sigma * rng.standard_normal(n)
    y = basis.evaluate(phi, z) + noise
    return Sample(y=y, z=z, w=w, noise=noise)


def replication_seed(master_seed: int, n: int, rep: int, tag: int = TAG_SAMPLE) -> int:
    """64-bit seed for one replication stream, independent of execution order."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(n), int(rep), int(tag)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def hard_instance(cfg: WeightConfig, n: int, k_star: int, v=None, eta: float = 4.0) -> HardInstance:
    """One-dimensional least-favourable pair at index ``k_star``.

    ``xi = min(1/(2d), rho/triangle)``, ``phi^2 = xi/(n v)`` and
    ``h^2 = tau/h_{k*}``. ``v`` is either the operator weight at ``k_star`` or a
    full weight sequence (1-based indexing); defaults to the configured
    weights. ``phi^2`` is stepped down by ulps if rounding breaks the first two
    inequalities.
    """
    if k_star < 1 or n < 1:
        raise DomainError("need k_star >= 1 and n >= 1")
    b, hw, vk = basis.weights(int(k_star), cfg)
    if v is not None:
        vk = float(v) if np.ndim(v) == 0 else float(np.asarray(v)[k_star - 1])
    xi = min(1.0 / (2.0 * cfg.d), cfg.rho / cfg.triangle)
    phi_sq = xi / (n * vk)
    h_sq = cfg.tau / hw
    inst = HardInstance(
        k_star=int(k_star), phi_sq=phi_sq, h_sq=h_sq, xi=xi, n=int(n), b=b, h_weight=hw,
        v=vk, d=cfg.d, rho=cfg.rho, tau=cfg.tau, triangle=cfg.triangle,
        error_fourth_moment_bound=8.0 * (16.0 * cfg.rho**2 * eta + 3.0),
    )
    return _tighten(inst)


def parametric_instance(cfg: WeightConfig, n: int, eta: float = 4.0) -> HardInstance:
    """Least-favourable pair on the constant function (the ``1/n`` arm)."""
    xi = min(1.0 / (2.0 * cfg.d), cfg.rho)
    inst = HardInstance(
        k_star=1, phi_sq=xi / n, h_sq=cfg.tau, xi=xi, n=int(n), b=1.0, h_weight=1.0, v=1.0,
        d=cfg.d, rho=cfg.rho, tau=cfg.tau, triangle=cfg.triangle,
        error_fourth_moment_bound=8.0 * (16.0 * cfg.rho**2 * eta + 3.0),
        xi_is_parametric=True,
    )
    return _tighten(inst)


def _tighten(inst: HardInstance) -> HardInstance:
    for _ in range(64):
        c = inst.checks()
        if c["variance"] and c["membership"]:
            break
        inst = replace(inst, phi_sq=math.nextafter(inst.phi_sq, 0.0))
    return inst

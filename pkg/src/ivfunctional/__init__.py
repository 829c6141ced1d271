"""Thresholded Galerkin estimation of linear functionals in nonparametric IV regression."""

__version__ = "0.1.0"

from ivfunctional.basis import DomainError, WeightConfig  # noqa: E402
from ivfunctional.kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "DomainError", "WeightConfig", "__version__"]

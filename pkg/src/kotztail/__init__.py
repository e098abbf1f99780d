"""Tail asymptotics of Kotz Type III elliptical random vectors and the
estimators built on them."""
from importlib.metadata import PackageNotFoundError, version

from .errors import KotzTailError
from .kernels import BACKEND
from .kotz import KotzModel, KotzParams, canonical_params, gaussian_params, sample_kotz
from .linalg import CorrelationSpec, IndexSet, equicorrelated, factorize
from .qp import solve as solve_qp
from .tail import TailRequest, marginal_params, marginal_tail, tail_asymptotic

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CorrelationSpec",
    "IndexSet",
    "KotzModel",
    "KotzParams",
    "KotzTailError",
    "TailRequest",
    "canonical_params",
    "equicorrelated",
    "factorize",
    "gaussian_params",
    "marginal_params",
    "marginal_tail",
    "sample_kotz",
    "solve_qp",
    "tail_asymptotic",
]

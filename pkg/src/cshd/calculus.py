"""Centered-stencil evaluation and the derivative estimates built from it.

The two estimates are the generalized centered simplex gradient
``pinv(S^T) @ delta_c`` and the centered simplex Hessian diagonal
``pinv(W^T) @ eps`` with ``W = S .* S``.  Both accept arbitrary direction
matrices: the pseudoinverse handles under- and over-determined sample sets,
returning the least-squares / minimum-norm solution.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ParameterError, StencilError
from .linalg import as_vector, pseudoinverse, svd_rank
from .sets import SampleDirections

__all__ = [
    "Objective",
    "EvaluatedStencil",
    "GradientEstimate",
    "DiagHessianEstimate",
    "evaluate_stencil",
    "centered_gradient",
    "centered_hessian_diagonal",
    "diag_model_eval",
]


class Objective:
    """Wraps an evaluation rule ``f : R^n -> float`` with a call counter.

    The counter increases by exactly one per call, including calls whose
    evaluation raises, and is guarded by a lock so that concurrent
    evaluation keeps it exact.  The rule itself must be deterministic.
    """

    def __init__(self, fn: Callable, dim: int, name: str | None = None):
        if dim < 1:
            raise ParameterError(f"objective dimension must be positive, got {dim}")
        self._fn = fn
        self.dim = int(dim)
        self.name = name if name is not None else getattr(fn, "__name__", "objective")
        self._lock = threading.Lock()
        self._evals = 0

    @property
    def evals(self) -> int:
        """Number of evaluations issued so far."""
        return self._evals

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ParameterError(f"{self.name}: expected a point in R^{self.dim}, got shape {x.shape}")
        with self._lock:
            self._evals += 1
        return float(self._fn(x))


@dataclass(frozen=True)
class EvaluatedStencil:
    """Function values on the centered stencil x0, x0 +- s_i, and the
    difference vectors derived from them."""

    x0: np.ndarray
    f0: float
    plus_vals: np.ndarray   # f(x0 + s_i)
    minus_vals: np.ndarray  # f(x0 - s_i)
    delta_c: np.ndarray     # (plus - minus) / 2
    eps: np.ndarray         # (plus - f0) + (minus - f0)
    evals_used: int


@dataclass(frozen=True)
class GradientEstimate:
    """Generalized centered simplex gradient with its provenance."""

    value: np.ndarray
    directions: SampleDirections
    x0: np.ndarray


@dataclass(frozen=True)
class DiagHessianEstimate:
    """Centered simplex Hessian diagonal with its provenance.

    ``w_rank_deficient`` is set when W = S .* S lacks full row rank; the
    estimate is then the least-squares / minimum-norm solution rather than
    the unique one.
    """

    value: np.ndarray
    directions: SampleDirections
    x0: np.ndarray
    w_rank_deficient: bool = False


def _eval_at(f, point: np.ndarray, label: str) -> float:
    try:
        value = float(f(point))
    except StencilError:
        raise
    except Exception as exc:
        raise StencilError(f"evaluation failed at {label} = {point.tolist()}: {exc}") from exc
    if not np.isfinite(value):
        raise StencilError(f"non-finite value {value!r} at {label} = {point.tolist()}")
    return value


def evaluate_stencil(
    f, x0, S: SampleDirections, known_f0: float | None = None
) -> EvaluatedStencil:
    """Evaluate *f* on the centered stencil over *S*.

    Uses 2k evaluations for the +-s_i points plus one for f(x0), unless
    ``known_f0`` is supplied, in which case the Hessian-diagonal data costs
    nothing beyond the gradient stencil.  Evaluation failures (exceptions or
    non-finite values) raise :class:`StencilError` naming the offending
    point.
    """
    x0 = as_vector(x0, "x0")
    if x0.size != S.n:
        raise ParameterError(f"point dimension {x0.size} does not match directions in R^{S.n}")
    if known_f0 is None:
        f0 = _eval_at(f, x0, "x0")
        extra = 1
    else:
        f0 = float(known_f0)
        extra = 0
    cols = S.matrix.T
    plus = np.array([_eval_at(f, x0 + s, f"x0 + s{i}") for i, s in enumerate(cols, start=1)])
    minus = np.array([_eval_at(f, x0 - s, f"x0 - s{i}") for i, s in enumerate(cols, start=1)])
    delta_c = 0.5 * (plus - minus)
    # Grouped as (f+ - f0) + (f- - f0) to limit cancellation against a large f0.
    eps = (plus - f0) + (minus - f0)
    return EvaluatedStencil(x0, f0, plus, minus, delta_c, eps, 2 * S.k + extra)


def centered_gradient(stencil: EvaluatedStencil, S: SampleDirections) -> GradientEstimate:
    """g = pinv(S^T) @ delta_c, the generalized centered simplex gradient."""
    if stencil.delta_c.size != S.k:
        raise ParameterError("stencil was built over a different direction set")
    g = pseudoinverse(S.matrix.T) @ stencil.delta_c
    return GradientEstimate(g, S, stencil.x0)


def centered_hessian_diagonal(stencil: EvaluatedStencil, S: SampleDirections) -> DiagHessianEstimate:
    """d = pinv(W^T) @ eps with W = S .* S, the centered simplex Hessian
    diagonal."""
    if stencil.eps.size != S.k:
        raise ParameterError("stencil was built over a different direction set")
    W = S.squared()
    _, rank = svd_rank(W)
    d = pseudoinverse(W.T) @ stencil.eps
    return DiagHessianEstimate(d, S, stencil.x0, w_rank_deficient=rank < S.n)


def diag_model_eval(x, x0, f0: float, g, d) -> float:
    """Evaluate the diagonal quadratic model
    ``f0 + g . (x - x0) + 1/2 (x - x0) . D (x - x0)`` where D = Diag(d)."""
    x = as_vector(x, "x")
    x0 = as_vector(x0, "x0")
    g = as_vector(g, "g")
    d = as_vector(d, "d")
    if not (x.size == x0.size == g.size == d.size):
        raise ParameterError(
            f"diag_model_eval: mismatched dimensions {x.size}, {x0.size}, {g.size}, {d.size}"
        )
    step = x - x0
    return float(f0 + g @ step + 0.5 * (d * step) @ step)

"""Block primal-dual Frank-Wolfe solver for l1-ball-constrained ERM.

Each iteration performs an s-sparse primal Frank-Wolfe step against the
proximal linearization of the Lagrangian, maintains w = Ax through the
touched columns, then greedily updates the k dual coordinates with the
largest proximal displacement (Gauss-Southwell-r rule) and maintains
z = A'y through the touched rows. Per-iteration arithmetic is proportional
to the nonzeros of the s columns and k rows actually touched.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .core_linalg import (SparseDesignMatrix, SparseUpdate,
                          apply_row_slice_transpose, apply_sparse_col_product,
                          sparse_l1_prox, top_k_by_magnitude)
from .losses import LossModel, Regularizer
from .metrics import ConvergenceTrace, dual_objective

DEFAULT_GAP_TOL = 1e-8


class ConfigurationError(ValueError):
    """Raised when resolved step sizes are degenerate (non-finite or <= 0)."""


@dataclass(frozen=True)
class SolverConfig:
    """Constraint radius, budgets, and step sizes for both block solvers.

    Fields left as None are resolved to their theory defaults against the
    problem instance:

      eta   = mu / (2 L)
      k     = ceil(n s / d) for the l1 solver,
              ceil(n s (1/c + 1/d)) for the trace solver (both clamped to [1, n])
      delta = (1/k) / ( L/(mu n beta) + (5 beta R)/(2 alpha mu n^2) (1 + 4 L/mu) )
              with 4 -> 8 and R the spectral bound in the trace case

    mu is carried for run provenance; the Regularizer passed to solve() is
    authoritative and a mismatch is rejected.
    """

    radius: float
    s: int
    k: int = None
    eta: float = None
    delta: float = None
    mu: float = None
    max_iters: int = 1000
    gap_tol: float = DEFAULT_GAP_TOL
    eps_target: float = None  # trace solver only; defaults to gap_tol

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.eta is not None and not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.delta is not None and self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def default_delta(k: int, n: int, beta: float, alpha: float, R: float,
                  reg: Regularizer, curvature_factor: float) -> float:
    """Theory default dual step; curvature_factor is 4 (l1) or 8 (trace)."""
    L, mu = reg.l_smooth, reg.mu
    denom = (L / (mu * n * beta)
             + (5.0 * beta * R) / (2.0 * alpha * mu * n * n)
             * (1.0 + curvature_factor * L / mu))
    delta = 1.0 / (k * denom)
    if not np.isfinite(delta) or delta <= 0:
        raise ConfigurationError(
            f"default dual step is degenerate (delta={delta!r}); "
            f"check mu={mu}, R={R}")
    return delta


def resolve_l1(cfg: SolverConfig, A: SparseDesignMatrix, loss: LossModel,
               reg: Regularizer) -> SolverConfig:
    """Fill in eta, k, delta defaults for Algorithm's l1 variant."""
    if cfg.mu is not None and not math.isclose(cfg.mu, reg.mu,
                                               rel_tol=1e-12):
        raise ConfigurationError(
            f"config mu={cfg.mu} disagrees with regularizer mu={reg.mu}")
    n, d = A.n_rows, A.n_cols
    if cfg.s > d:
        raise ValueError(f"s={cfg.s} exceeds feature dimension {d}")
    eta = cfg.eta if cfg.eta is not None else reg.mu / (2.0 * reg.l_smooth)
    if not 0.0 < eta <= 1.0:
        raise ConfigurationError(f"resolved eta={eta} outside (0, 1]")
    k = cfg.k if cfg.k is not None else max(1, min(n, math.ceil(n * cfg.s / d)))
    if k > n:
        raise ValueError(f"k={k} exceeds sample count {n}")
    if cfg.delta is not None:
        delta = cfg.delta
    else:
        delta = default_delta(k, n, loss.beta, loss.alpha,
                              A.max_row_norm_sq, reg, curvature_factor=4.0)
    return replace(cfg, eta=eta, k=k, delta=delta, mu=reg.mu,
                   eps_target=cfg.eps_target if cfg.eps_target is not None
                   else cfg.gap_tol)


@dataclass
class SolverState:
    """Mutable iterates of one run: x, y and the caches w = Ax, z = A'y."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    iteration: int = 0
    flops: int = 0

    @classmethod
    def zeros(cls, n: int, d: int) -> "SolverState":
        return cls(x=np.zeros(d), y=np.zeros(n), w=np.zeros(n), z=np.zeros(d))


def primal_step(state: SolverState, cfg: SolverConfig, A: SparseDesignMatrix,
                loss: LossModel, reg: Regularizer) -> SparseUpdate:
    """Sparse Frank-Wolfe primal update; returns x_tilde for w maintenance.

    Minimizes <c, v - x> + (L eta / 2)||v - x||^2 over the s-sparse l1 ball
    with c = z/n + grad g(x), whose exact solution is the sparse l1 prox of
    x - c/(L eta). The iterate moves to (1 - eta) x + eta x_tilde.
    """
    eta = cfg.eta
    c = state.z / A.n_rows + reg.grad(state.x)
    v = state.x - c / (reg.l_smooth * eta)
    x_tilde = sparse_l1_prox(v, cfg.radius, cfg.s)
    state.x *= 1.0 - eta
    state.x[x_tilde.indices] += eta * x_tilde.values
    return x_tilde


def dual_step(state: SolverState, cfg: SolverConfig, A: SparseDesignMatrix,
              loss: LossModel) -> np.ndarray:
    """Greedy k-coordinate dual ascent; updates y and z, returns the rows."""
    y_tilde = loss.dual_prox(state.w, state.y, cfg.delta, A.n_rows)
    diff = y_tilde - state.y
    rows = top_k_by_magnitude(diff, cfg.k)
    dy = diff[rows]
    state.y[rows] = y_tilde[rows]
    state.z = apply_row_slice_transpose(A, rows, dy, state.z)
    return rows


def solve(A: SparseDesignMatrix, loss: LossModel, reg: Regularizer,
          cfg: SolverConfig):
    """Run the block primal-dual solver until gap <= gap_tol or max_iters.

    Parameters
    ----------
    A : SparseDesignMatrix
        Design matrix (n samples, d features).
    loss : LossModel
        Smooth hinge or quadratic separable loss over n samples.
    reg : Regularizer
        Strongly convex l2 regularizer g.
    cfg : SolverConfig
        Radius, budgets, and (optionally) step-size overrides.

    Returns
    -------
    x : ndarray, shape (d,)
    y : ndarray, shape (n,)
    trace : ConvergenceTrace
        One record per iteration including iteration 0; flop counts cover
        the column/row-restricted products only.
    """
    if loss.n != A.n_rows:
        raise ValueError("loss sample count does not match matrix rows")
    rc = resolve_l1(cfg, A, loss, reg)
    n, d = A.n_rows, A.n_cols
    state = SolverState.zeros(n, d)
    trace = ConvergenceTrace()
    t0 = time.perf_counter()

    def record():
        primal = loss.mean_value(state.w) + reg.value(state.x)
        dual = dual_objective(A, loss, reg, state.y, rc.radius, z=state.z)
        trace.append(state.iteration, time.perf_counter() - t0, primal, dual,
                     state.flops, int(np.count_nonzero(state.x)))
        return trace.final.gap

    gap = record()
    for t in range(1, rc.max_iters + 1):
        if gap <= rc.gap_tol:
            break
        state.iteration = t
        x_tilde = primal_step(state, rc, A, loss, reg)
        state.w = apply_sparse_col_product(A, x_tilde, state.w,
                                           1.0 - rc.eta, rc.eta)
        state.flops += int(A.col_nnz[x_tilde.indices].sum())
        rows = dual_step(state, rc, A, loss)
        state.flops += int(A.row_nnz[rows].sum())
        gap = record()
    return state.x, state.y, trace

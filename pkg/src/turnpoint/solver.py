"""Damped Newton iteration for the discrete turning-point problem."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionError, NonConvergence, SingularMatrix
from .problem import Problem
from .scheme import SchemeLayout, TridiagonalMatrix, jacobian, residual

__all__ = [
    "Damping",
    "SolverConfig",
    "DiscreteSolution",
    "tridiagonal_solve",
    "initial_guess",
    "solve",
]

log = logging.getLogger(__name__)

_PIVOT_FLOOR = 1e-300
_ARMIJO_SIGMA = 1e-4
_MIN_STEP = 2.0**-30


class Damping(str, enum.Enum):
    NONE = "none"
    ARMIJO = "armijo"


def tridiagonal_solve(m: TridiagonalMatrix, rhs) -> np.ndarray:
    """Thomas algorithm without pivoting.

    Raises SingularMatrix when a pivot falls below 1e-300 in magnitude.
    """
    d = np.asarray(rhs, dtype=float)
    n = m.size
    if d.shape != (n,):
        raise DimensionError(f"rhs has shape {d.shape}, matrix has size {n}")
    lower = m.lower.tolist()
    diag = m.diag.tolist()
    upper = m.upper.tolist()
    d = d.tolist()
    cp = [0.0] * n
    dp = [0.0] * n
    pivot = diag[0]
    if not abs(pivot) >= _PIVOT_FLOOR:
        raise SingularMatrix("zero pivot in row 0")
    cp[0] = upper[0] / pivot if n > 1 else 0.0
    dp[0] = d[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * cp[i - 1]
        if not abs(pivot) >= _PIVOT_FLOOR:
            raise SingularMatrix(f"zero pivot in row {i}")
        if i < n - 1:
            cp[i] = upper[i] / pivot
        dp[i] = (d[i] - lower[i - 1] * dp[i - 1]) / pivot
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


@dataclass(frozen=True)
class SolverConfig:
    """Newton settings.

    ``residual_tol=None`` means ``1e-14 * (1 + |U_+ - U_-|)`` for the problem
    at hand. ``continuation`` is an optional decreasing eps ladder ending at
    the target; each rung warm-starts the next.
    """

    residual_tol: float | None = None
    step_tol: float = 1e-12
    max_iters: int = 50
    damping: Damping = Damping.ARMIJO
    continuation: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "damping", Damping(self.damping))
        if self.residual_tol is not None and not self.residual_tol > 0:
            raise ConfigError("residual_tol must be positive")
        if not self.step_tol > 0:
            raise ConfigError("step_tol must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigError("max_iters must be a positive integer")
        if self.continuation is not None:
            ladder = tuple(float(e) for e in self.continuation)
            if any(b >= a for a, b in zip(ladder, ladder[1:])):
                raise ConfigError(f"continuation ladder must be strictly decreasing: {ladder}")
            object.__setattr__(self, "continuation", ladder)

    def tolerance_for(self, p: Problem) -> float:
        if self.residual_tol is not None:
            return self.residual_tol
        return 1e-14 * (1.0 + abs(p.u_plus - p.u_minus))


@dataclass
class DiscreteSolution:
    """Converged interior values plus Newton diagnostics.

    ``clamped`` records, per iteration, how many components were cut back
    into [U_-, U_+].
    """

    values: np.ndarray
    boundary: tuple[float, float]
    layout: SchemeLayout
    iterations: int
    residual_h: float
    residual_max: float
    clamped: list[int] = field(default_factory=list)

    @property
    def full(self) -> np.ndarray:
        """Nodal values including the pinned boundary values."""
        return np.concatenate([[self.boundary[0]], self.values, [self.boundary[1]]])

    @property
    def x(self) -> np.ndarray:
        return self.layout.x


def initial_guess(layout: SchemeLayout, p: Problem) -> np.ndarray:
    """Reduced step profile: U_- left of the turning point, U_+ right, the mean at 0."""
    x = layout.x
    return np.where(x > 0, p.u_plus, np.where(x < 0, p.u_minus, p.u_mid))


def _h_norm(layout: SchemeLayout, v) -> float:
    return float(np.sum(layout.chi * np.abs(v)))


def solve(layout: SchemeLayout, p: Problem, cfg: SolverConfig | None = None,
          guess: Sequence[float] | None = None) -> DiscreteSolution:
    """Newton iteration on T w = 0 with Armijo halving and clamping to [U_-, U_+]."""
    cfg = cfg or SolverConfig()
    if cfg.continuation:
        return _solve_with_continuation(layout, p, cfg)
    w = initial_guess(layout, p) if guess is None else np.clip(np.asarray(guess, dtype=float),
                                                               p.u_minus, p.u_plus)
    if w.shape != (layout.size,):
        raise DimensionError(f"initial guess has shape {w.shape}, expected ({layout.size},)")
    tol = cfg.tolerance_for(p)
    r = residual(layout, p, w)
    rnorm = _h_norm(layout, r)
    clamped: list[int] = []
    best = (rnorm, w)
    for it in range(cfg.max_iters + 1):
        if rnorm <= tol:
            return _finish(layout, p, w, r, rnorm, it, clamped)
        if it == cfg.max_iters:
            break
        delta = tridiagonal_solve(jacobian(layout, p, w), -r)
        t = 1.0
        while True:
            trial = w + t * delta
            w_new = np.clip(trial, p.u_minus, p.u_plus)
            r_new = residual(layout, p, w_new)
            rnorm_new = _h_norm(layout, r_new)
            if cfg.damping is Damping.NONE or rnorm_new <= (1.0 - _ARMIJO_SIGMA * t) * rnorm:
                break
            if t <= _MIN_STEP:
                break
            t *= 0.5
        clamped.append(int(np.count_nonzero(w_new != trial)))
        step = float(np.max(np.abs(w_new - w))) if w.size else 0.0
        log.debug("newton it=%d |T|_H=%.3e step=%.3e damping=%g clamped=%d",
                  it + 1, rnorm_new, step, t, clamped[-1])
        w, r, rnorm = w_new, r_new, rnorm_new
        if rnorm < best[0]:
            best = (rnorm, w)
        if step <= cfg.step_tol and rnorm <= tol:
            return _finish(layout, p, w, r, rnorm, it + 1, clamped)
    raise NonConvergence(
        f"no convergence in {cfg.max_iters} iterations: |T w|_H = {best[0]:.3e} > {tol:.3e}",
        best=best[1], residual=best[0])


def _finish(layout, p, w, r, rnorm, iterations, clamped) -> DiscreteSolution:
    rmax = float(np.max(np.abs(r))) if r.size else 0.0
    return DiscreteSolution(w, (p.u_minus, p.u_plus), layout, iterations, rnorm, rmax, clamped)


def _solve_with_continuation(layout: SchemeLayout, p: Problem, cfg: SolverConfig) -> DiscreteSolution:
    from dataclasses import replace

    from .meshgen import build_mesh
    from .scheme import compute_layout

    ladder = list(cfg.continuation)
    if ladder[-1] != p.epsilon:
        raise ConfigError(f"continuation ladder must end at eps={p.epsilon}, ends at {ladder[-1]}")
    mesh_cfg = layout.mesh.config
    if mesh_cfg is None:
        raise ConfigError("continuation needs a mesh built from a MeshConfig")
    plain = replace(cfg, continuation=None)
    guess = None
    prev_x = None
    for eps in ladder[:-1]:
        rung_p = replace(p, epsilon=eps)
        rung_layout = compute_layout(build_mesh(replace(mesh_cfg, epsilon=eps)), rung_p,
                                     transition=layout.transition)
        if guess is not None:
            guess = np.interp(rung_layout.x, prev_x, guess)
        sol = solve(rung_layout, rung_p, plain, guess)
        guess, prev_x = sol.values, rung_layout.x
    guess = np.interp(layout.x, prev_x, guess) if guess is not None else None
    return solve(layout, p, plain, guess)

"""Error norms, convergence orders and numerical certification of stability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, DomainError, MissingExactSolution
from .meshgen import iterated_log
from .problem import Problem
from .scheme import Scheme, SchemeLayout, TridiagonalMatrix, jacobian, residual
from .solver import DiscreteSolution

__all__ = [
    "ErrorReport",
    "Certificate",
    "h_norm",
    "max_norm",
    "order",
    "eps_order",
    "theoretical_delta",
    "error_report",
    "weighted_column_sums",
    "certify_l_matrix",
    "certify_row_sums",
    "certify_stability",
    "certify_bracket",
    "certify_suite",
    "fit_bound_constant",
    "loglog_slope",
]


def h_norm(layout: SchemeLayout, w) -> float:
    """Discrete L1 norm sum_i chi_i |w_i|."""
    w = np.asarray(w, dtype=float)
    if w.shape != layout.chi.shape:
        raise DimensionError(f"vector has shape {w.shape}, layout has {layout.chi.shape}")
    return float(np.sum(layout.chi * np.abs(w)))


def max_norm(w) -> float:
    w = np.asarray(w, dtype=float)
    return float(np.max(np.abs(w))) if w.size else 0.0


def _log_ratio(coarse: float, fine: float, base: float) -> float:
    if not (coarse > 0 and fine > 0):
        raise DomainError(f"errors must be positive, got {coarse} and {fine}")
    return (math.log(coarse) - math.log(fine)) / math.log(base)


def order(e_coarse: float, e_fine: float) -> float:
    """Observed order between runs with N/2 and N steps."""
    return _log_ratio(e_coarse, e_fine, 2.0)


def eps_order(e1_at_4eps: float, e1_at_eps: float) -> float:
    """Observed rate in eps between runs at 4*eps and eps (fixed N)."""
    return _log_ratio(e1_at_4eps, e1_at_eps, 4.0)


def theoretical_delta(epsilon: float, ell: int, lam: float, n_steps: int) -> float:
    """eps * (ln^l(lam) / N)^2."""
    return epsilon * (iterated_log(lam, ell) / n_steps) ** 2


@dataclass
class ErrorReport:
    E: float
    E1: float
    delta: float
    epsilon: float
    n_steps: int
    ell: int | None = None
    lambda_mode: str | None = None
    alpha: float | None = None
    ord: float | None = None
    ord1: float | None = None
    ord_eps: float | None = None


def error_report(sol: DiscreteSolution, p: Problem, norm_layout: SchemeLayout | None = None) -> ErrorReport:
    """Max-norm and H-norm error of ``sol`` against the exact solution of ``p``.

    ``norm_layout`` selects the weights of the H norm; by default the
    solution's own layout.
    """
    if p.exact is None:
        raise MissingExactSolution("problem has no exact solution attached")
    layout = sol.layout
    err = sol.values - p.exact(layout.x)
    weights = layout if norm_layout is None else norm_layout
    cfg = layout.mesh.config
    n = layout.mesh.n_half
    if cfg is not None:
        delta = theoretical_delta(p.epsilon, cfg.ell, cfg.lam, n)
        extra = dict(ell=cfg.ell, lambda_mode=cfg.lambda_mode.value, alpha=cfg.alpha)
    else:
        delta, extra = float("nan"), {}
    return ErrorReport(E=max_norm(err), E1=h_norm(weights, err), delta=delta,
                       epsilon=p.epsilon, n_steps=n, **extra)


def fit_bound_constant(errors, deltas) -> float:
    """Smallest C with errors <= C * deltas."""
    errors = np.asarray(errors, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    return float(np.max(errors / deltas))


def loglog_slope(ns, errors) -> float:
    """Least-squares decay rate p in errors ~ N^-p."""
    coeffs = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)
    return float(-coeffs[0])


# -- certification -----------------------------------------------------------


@dataclass
class Certificate:
    """Outcome of one numerical check; ``value`` is the quantity compared to ``bound``."""

    name: str
    passed: bool
    value: float = float("nan")
    bound: float = float("nan")
    detail: str = ""
    trials: int = 0
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: value={self.value:.6g} bound={self.bound:.6g} {self.detail}".rstrip()


def certify_l_matrix(m: TridiagonalMatrix) -> Certificate:
    """Positive diagonal and nonpositive off-diagonals."""
    bad = np.nonzero(~(m.diag > 0))[0]
    if bad.size:
        i = int(bad[0])
        return Certificate("l_matrix", False, float(m.diag[i]), 0.0, f"g[{i},{i}] = {m.diag[i]:.3e} <= 0",
                           extra={"entry": (i, i)})
    worst = -np.inf
    for offset, band in ((1, m.lower), (-1, m.upper)):
        pos = np.nonzero(band > 0)[0]
        if pos.size:
            k = int(pos[0])
            i, j = (k + 1, k) if offset == 1 else (k, k + 1)
            return Certificate("l_matrix", False, float(band[k]), 0.0, f"g[{i},{j}] = {band[k]:.3e} > 0",
                               extra={"entry": (i, j)})
        if band.size:
            worst = max(worst, float(band.max()))
    return Certificate("l_matrix", True, worst if np.isfinite(worst) else 0.0, 0.0)


def weighted_column_sums(layout: SchemeLayout, m: TridiagonalMatrix) -> np.ndarray:
    """s = (H G H^-1)^T e, i.e. s_j = sum_i chi_i g_ij / chi_j."""
    chi = layout.chi
    s = chi * m.diag
    s[:-1] += chi[1:] * m.lower
    s[1:] += chi[:-1] * m.upper
    return s / chi


def _adjacent_positions(layout: SchemeLayout) -> list[int]:
    """Nodes just outside each transition node, on the midpoint side."""
    out = []
    for k in layout.transition_positions:
        k2 = k + 1 if layout.tags[k] == Scheme.TRANSITION else k - 1
        if 0 <= k2 < layout.size:
            out.append(int(k2))
    return out


def certify_row_sums(layout: SchemeLayout, p: Problem, m: TridiagonalMatrix,
                     w=None, tol: float = 1e-12) -> Certificate:
    """min_j s_j >= b_*/2 and, next to a transition node, s_j == b(w_j)/2.

    ``w`` is the point where ``m`` was assembled; without it only the lower
    bound is checked.
    """
    s = weighted_column_sums(layout, m)
    bound = p.b_lower / 2
    smin = float(s.min())
    passed = smin >= bound - tol
    detail = f"argmin={int(np.argmin(s))}"
    adjacent = {}
    if w is not None:
        bw = p.b(np.asarray(w, dtype=float))
        for k in _adjacent_positions(layout):
            adjacent[k] = (float(s[k]), float(bw[k] / 2))
            if abs(s[k] - bw[k] / 2) > tol:
                passed = False
                detail += f" s[{k}]={s[k]!r} != b/2={bw[k] / 2!r}"
    return Certificate("row_sums", bool(passed), smin, bound, detail, extra={"adjacent": adjacent, "s": s})


def _random_w(rng: np.random.Generator, p: Problem, size: int) -> np.ndarray:
    return rng.uniform(p.u_minus, p.u_plus, size)


def certify_stability(layout: SchemeLayout, p: Problem, trials: int = 1000, rng_seed: int = 0) -> Certificate:
    """Max of ||w - v||_H / ||Tw - Tv||_H over random pairs in W; bound 2/b_*."""
    rng = np.random.default_rng(rng_seed)
    bound = 2.0 / p.b_lower
    worst = 0.0
    used = 0
    for _ in range(trials):
        w = _random_w(rng, p, layout.size)
        v = _random_w(rng, p, layout.size)
        num = h_norm(layout, w - v)
        den = h_norm(layout, residual(layout, p, w) - residual(layout, p, v))
        if num == 0 and den == 0:
            continue
        used += 1
        worst = max(worst, num / den if den > 0 else math.inf)
    return Certificate("stability", worst <= bound + 1e-9, worst, bound, trials=used)


def certify_bracket(layout: SchemeLayout, p: Problem, rtol: float = 1e-12) -> Certificate:
    """T(U_- e) <= 0 <= T(U_+ e) componentwise for the source-free problem.

    Most components vanish in exact arithmetic, so signs are judged up to
    ``rtol`` times the flux scale (U_+ - U_-) * b^*.
    """
    q = p if p.source == "zero" else replace(p, source="zero", exact=None)
    lo = residual(layout, q, np.full(layout.size, q.u_minus))
    hi = residual(layout, q, np.full(layout.size, q.u_plus))
    worst = max(float(lo.max()), float(-hi.min()))
    slack = rtol * (1.0 + (q.u_plus - q.u_minus) * q.b_upper)
    return Certificate("bracket", worst <= slack, worst, slack,
                       detail=f"max T(U-)={lo.max():.3e} min T(U+)={hi.min():.3e}")


def certify_suite(layout: SchemeLayout, p: Problem, trials: int = 1000, seed: int = 0) -> list[Certificate]:
    """L-matrix and column-sum checks at random w in W, stability, and the bracket."""
    rng = np.random.default_rng(seed)
    l_ok, rows_ok = True, True
    l_first = rows_first = None
    smin = math.inf
    offmax = -math.inf
    for t in range(trials):
        w = _random_w(rng, p, layout.size)
        g = jacobian(layout, p, w)
        c1 = certify_l_matrix(g)
        offmax = max(offmax, c1.value)
        if not c1.passed and l_ok:
            l_ok, l_first = False, f"trial {t}: {c1.detail}"
        c2 = certify_row_sums(layout, p, g, w)
        smin = min(smin, c2.value)
        if not c2.passed and rows_ok:
            rows_ok, rows_first = False, f"trial {t}: {c2.detail}"
    return [
        Certificate("l_matrix", l_ok, offmax, 0.0, detail=l_first or "", trials=trials),
        Certificate("row_sums", rows_ok, smin, p.b_lower / 2, detail=rows_first or "", trials=trials),
        certify_stability(layout, p, trials, seed + 1),
        certify_bracket(layout, p),
    ]

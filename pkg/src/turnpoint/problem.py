"""Continuous turning-point problems.

The problems solved here are

    -eps^2 u'' - x b(u) u' + c(x) = 0   on [nu, 1],   u(nu) = U_-,  u(1) = U_+,

with ``b`` a polynomial that is bounded away from zero on [U_-, U_+]. The
equation is written in conservation form with the flux

    f(x, u) = x * B_ref(u),    B_ref(u) = integral of b from ref to u,

where the lower limit ``ref`` is U_+ right of the turning point, U_- left of
it and the mean of both at x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigError
from .meshgen import Nu

__all__ = [
    "Problem",
    "SOURCES",
    "f_value",
    "f_x_value",
    "manufactured_tanh_problem",
    "tanh_exact",
    "tanh_source",
    "polynomial_bounds",
    "custom_problem",
]

# beyond this |x|/eps, tanh is +-1 and sech^2 is 0 to double precision
_SATURATION = 40.0


def _tanh_and_sech2(s):
    s = np.asarray(s, dtype=float)
    clipped = np.clip(s, -_SATURATION, _SATURATION)
    t = np.where(np.abs(s) > _SATURATION, np.sign(s), np.tanh(clipped))
    sech2 = np.where(np.abs(s) > _SATURATION, 0.0, 1.0 / np.cosh(clipped) ** 2)
    return t, sech2


def tanh_exact(epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """u(x) = 2 + tanh(x / eps)."""

    def u(x):
        t, _ = _tanh_and_sech2(np.asarray(x, dtype=float) / epsilon)
        return 2.0 + t

    return u


def tanh_source(epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """Source term making 2 + tanh(x/eps) solve -eps^2 u'' - x u u' + c = 0.

    c = eps^2 u'' + x u u' = -2 t (1 - t^2) + (x/eps) (2 + t) (1 - t^2), t = tanh(x/eps).
    """

    def c(x):
        s = np.asarray(x, dtype=float) / epsilon
        t, sech2 = _tanh_and_sech2(s)
        return sech2 * (-2.0 * t + s * (2.0 + t))

    return c


def _zero_source(epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    def c(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return c


# name -> factory(epsilon) -> c(x)
SOURCES: dict[str, Callable[[float], Callable[[np.ndarray], np.ndarray]]] = {
    "zero": _zero_source,
    "tanh-mms": tanh_source,
}


def polynomial_bounds(b: Polynomial, lo: float, hi: float) -> tuple[float, float]:
    """Min and max of ``b`` over [lo, hi] by enumerating critical points."""
    candidates = [lo, hi]
    deriv = b.trim().deriv()
    if deriv.degree() >= 1:
        for root in deriv.roots():
            if abs(root.imag) < 1e-12 and lo <= root.real <= hi:
                candidates.append(float(root.real))
    values = b(np.array(candidates))
    return float(values.min()), float(values.max())


@dataclass(frozen=True, eq=False)
class Problem:
    """A turning-point BVP with polynomial ``b`` and a named source term.

    ``b_lower``/``b_upper`` default to the exact extrema of ``b`` on
    [U_-, U_+]. ``exact`` is an optional vectorised exact solution.
    """

    epsilon: float
    b_coeffs: tuple[float, ...]
    u_minus: float
    u_plus: float
    nu: Nu = Nu.INTERIOR
    source: str = "zero"
    b_lower: float | None = None
    b_upper: float | None = None
    exact: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    _antiderivatives: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nu", Nu(int(self.nu)))
        object.__setattr__(self, "b_coeffs", tuple(float(c) for c in self.b_coeffs))
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not self.u_minus < self.u_plus:
            raise ConfigError(f"need U_- < U_+, got {self.u_minus} and {self.u_plus}")
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}; choose from {sorted(SOURCES)}")
        lo, hi = polynomial_bounds(self.b, self.u_minus, self.u_plus)
        b_lower = lo if self.b_lower is None else float(self.b_lower)
        b_upper = hi if self.b_upper is None else float(self.b_upper)
        if not b_lower > 0:
            raise ConfigError(f"b must be bounded below by a positive constant on U; min is {lo}")
        if b_lower > lo or b_upper < hi:
            raise ConfigError(f"bounds [{b_lower}, {b_upper}] do not enclose b on U = [{lo}, {hi}]")
        object.__setattr__(self, "b_lower", b_lower)
        object.__setattr__(self, "b_upper", b_upper)

    @property
    def b(self) -> Polynomial:
        return Polynomial(self.b_coeffs)

    @property
    def c(self) -> Callable[[np.ndarray], np.ndarray]:
        return SOURCES[self.source](self.epsilon)

    @property
    def u_mid(self) -> float:
        return 0.5 * (self.u_minus + self.u_plus)

    def antiderivative(self, ref: float) -> Polynomial:
        """B_ref as a polynomial in (u - ref), so B_ref(ref) is exactly 0."""
        ref = float(ref)
        poly = self._antiderivatives.get(ref)
        if poly is None:
            shifted = self.b(Polynomial([ref, 1.0])).integ()
            poly = Polynomial(shifted.coef)
            self._antiderivatives[ref] = poly
        return poly

    def big_b(self, ref: float, u):
        """B_ref(u), the integral of b from ``ref`` to ``u``."""
        return self.antiderivative(ref)(np.asarray(u, dtype=float) - float(ref))

    def reference(self, x) -> np.ndarray:
        """Lower integration limit of the flux at each abscissa."""
        x = np.asarray(x, dtype=float)
        if self.nu is Nu.BOUNDARY:
            return np.full(x.shape, self.u_plus)
        return np.where(x > 0, self.u_plus, np.where(x < 0, self.u_minus, self.u_mid))

    def range_contains(self, values, slack: float = 0.0) -> bool:
        values = np.asarray(values)
        return bool(np.all(values >= self.u_minus - slack) and np.all(values <= self.u_plus + slack))


def f_value(p: Problem, ref: float, x, u):
    """Flux f(x, u) = x * B_ref(u)."""
    return np.asarray(x, dtype=float) * p.big_b(ref, u)


def f_x_value(p: Problem, ref: float, u):
    """Partial x-derivative of the flux, B_ref(u)."""
    return p.big_b(ref, u)


def manufactured_tanh_problem(epsilon: float, b_lower: float | None = None,
                              b_upper: float | None = None) -> Problem:
    """Interior-layer problem with b(u) = u and exact solution 2 + tanh(x/eps)."""
    if not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    t1 = float(np.tanh(1.0 / epsilon))
    return Problem(
        epsilon=epsilon,
        b_coeffs=(0.0, 1.0),
        u_minus=2.0 - t1,
        u_plus=2.0 + t1,
        nu=Nu.INTERIOR,
        source="tanh-mms",
        b_lower=b_lower,
        b_upper=b_upper,
        exact=tanh_exact(epsilon),
    )


def custom_problem(epsilon: float, b_coeffs: Sequence[float], u_minus: float, u_plus: float,
                   nu: Nu | int = Nu.INTERIOR, source: str = "zero", **bounds) -> Problem:
    """Problem from plain parameters; ``source='tanh-mms'`` also attaches the exact solution."""
    exact = tanh_exact(epsilon) if source == "tanh-mms" else None
    return Problem(epsilon, tuple(b_coeffs), u_minus, u_plus, Nu(int(nu)), source, exact=exact, **bounds)

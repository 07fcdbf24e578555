"""Piecewise-equidistant S(l) meshes with iterated-logarithm transition points.

An S(l) mesh splits [0, 1] at ``l`` transition points

    tau_k = alpha * eps * ln^(l-k+1)(lam),   k = 1..l,

where ``ln^j`` is the j-fold iterated natural logarithm and ``lam`` is either
``1/eps`` or the step count ``N``. Each of the ``l + 1`` pieces is divided
into an equidistant grid. For interior turning points the half mesh is
mirrored onto [-1, 0].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "LambdaMode",
    "Nu",
    "MeshConfig",
    "Mesh",
    "DEFAULT_RATIOS",
    "default_ratios",
    "iterated_log",
    "max_iterated_depth",
    "resolve_lambda",
    "transition_points",
    "interval_counts",
    "build_half_mesh",
    "extend_symmetric",
    "build_mesh",
]


class LambdaMode(str, enum.Enum):
    INVERSE_EPSILON = "inv-eps"
    STEP_COUNT = "N"

    @classmethod
    def parse(cls, value: str | LambdaMode) -> LambdaMode:
        if isinstance(value, cls):
            return value
        aliases = {"inv-eps": cls.INVERSE_EPSILON, "1/eps": cls.INVERSE_EPSILON, "n": cls.STEP_COUNT}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise ConfigError(f"unknown lambda mode {value!r}") from None


class Nu(enum.IntEnum):
    """Left endpoint of the domain: 0 (boundary turning point) or -1 (interior)."""

    BOUNDARY = 0
    INTERIOR = -1


# q_1..q_l from the published mesh-parameter table; q_{l+1} is the complement.
DEFAULT_RATIOS: dict[int, tuple[float, ...]] = {
    1: (3 / 4,),
    2: (1 / 4, 1 / 2),
    3: (1 / 8, 1 / 8, 1 / 2),
}


def default_ratios(ell: int) -> tuple[float, ...]:
    try:
        head = DEFAULT_RATIOS[ell]
    except KeyError:
        raise ConfigError(f"no default ratios for ell={ell}; pass them explicitly") from None
    return head + (1.0 - sum(head),)


def iterated_log(lam: float, k: int) -> float:
    """Return the k-fold iterated natural logarithm of ``lam`` (``k = 0`` gives ``lam``).

    Raises DomainError if any value along the chain, including the result,
    is not strictly positive.
    """
    if k < 0:
        raise DomainError(f"depth must be nonnegative, got {k}")
    value = float(lam)
    if not value > 0:
        raise DomainError(f"iterated log of nonpositive value {lam}")
    for depth in range(1, k + 1):
        value = math.log(value)
        if not value > 0:
            raise DomainError(f"ln^{depth}({lam}) = {value} is not positive")
    return value


def max_iterated_depth(lam: float) -> int:
    """Largest useful depth K: ``0 < ln^K lam < 1`` with ``ln^(K-1) lam >= 1``."""
    if not lam > math.e:
        raise DomainError(f"lambda must exceed e, got {lam}")
    value = float(lam)
    depth = 0
    while value >= 1.0:
        value = math.log(value)
        depth += 1
    # value == 0 means ln^(K-1) was exactly 1 and the strict bound fails
    if not value > 0:
        raise DomainError(f"ln^{depth}({lam}) = 0; no depth with 0 < ln^K < 1")
    return depth


def resolve_lambda(epsilon: float, lambda_mode: LambdaMode, n_steps: int, nu: Nu = Nu.BOUNDARY) -> float:
    """1/eps, or the total number of mesh steps (2N on [-1, 1])."""
    if LambdaMode.parse(lambda_mode) is LambdaMode.INVERSE_EPSILON:
        return 1.0 / epsilon
    return float(n_steps * (2 if Nu(int(nu)) is Nu.INTERIOR else 1))


@dataclass(frozen=True)
class MeshConfig:
    """Parameters of an S(l) mesh.

    ``n_steps`` counts steps on [0, 1]; the interior mesh has twice as many,
    and ``lambda_mode=N`` then means lam = 2 * n_steps.
    ``ratios`` are the fractions q_k of steps per piece and default to the
    published values for l = 1, 2, 3. With ``lambda_mode=N`` and those
    ratios, S(3) steps shrink from the second to the third piece; set
    ``enforce_monotone=False`` to build such meshes anyway.
    """

    epsilon: float
    ell: int
    lambda_mode: LambdaMode = LambdaMode.INVERSE_EPSILON
    alpha: float = 1.0
    n_steps: int = 64
    ratios: tuple[float, ...] | None = None
    nu: Nu = Nu.INTERIOR
    enforce_monotone: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lambda_mode", LambdaMode.parse(self.lambda_mode))
        object.__setattr__(self, "nu", Nu(int(self.nu)))
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ConfigError(f"ell must be a positive integer, got {self.ell}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        ratios = default_ratios(self.ell) if self.ratios is None else tuple(float(q) for q in self.ratios)
        if len(ratios) != self.ell + 1:
            raise ConfigError(f"expected {self.ell + 1} ratios, got {len(ratios)}")
        if any(not q > 0 for q in ratios):
            raise ConfigError(f"ratios must be positive: {ratios}")
        if abs(math.fsum(ratios) - 1.0) > 1e-12:
            raise ConfigError(f"ratios must sum to 1, got {math.fsum(ratios)!r}")
        object.__setattr__(self, "ratios", ratios)
        transition_points(self)

    @property
    def lam(self) -> float:
        return resolve_lambda(self.epsilon, self.lambda_mode, self.n_steps, self.nu)


def transition_points(cfg: MeshConfig) -> tuple[float, ...]:
    """tau_1 < ... < tau_l for ``cfg``; ConfigError if l > K(lam) or tau_l >= 1."""
    lam = cfg.lam
    try:
        depth = max_iterated_depth(lam)
    except DomainError as exc:
        raise ConfigError(f"lambda={lam}: {exc}") from exc
    if cfg.ell > depth:
        raise ConfigError(f"ell={cfg.ell} exceeds the maximal iterated-log depth K={depth} for lambda={lam}")
    taus = tuple(cfg.alpha * cfg.epsilon * iterated_log(lam, cfg.ell - k + 1) for k in range(1, cfg.ell + 1))
    if not taus[-1] < 1.0:
        raise ConfigError(f"last transition point {taus[-1]} is not below 1")
    return taus


def interval_counts(n_steps: int, ratios: Sequence[float]) -> tuple[int, ...]:
    """Round q_k * N to integers; the last piece takes the remainder."""
    head = [int(math.floor(q * n_steps + 0.5)) for q in ratios[:-1]]
    counts = tuple(head + [n_steps - sum(head)])
    if min(counts) < 2:
        raise ConfigError(f"N={n_steps} with ratios {tuple(ratios)} gives piece counts {counts}; each needs >= 2")
    return counts


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable mesh on [nu, 1].

    ``points`` holds x_{nu*N} .. x_N. For the interior case, the signed
    index of ``points[j]`` is ``j - N``.
    """

    points: np.ndarray
    nu: Nu
    n_half: int
    transition_points: tuple[float, ...]
    interval_counts: tuple[int, ...]
    config: MeshConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_steps(self) -> int:
        """Total number of steps on the whole domain."""
        return len(self.points) - 1

    @property
    def offset(self) -> int:
        """Array position of x_0."""
        return self.n_half if self.nu is Nu.INTERIOR else 0

    @property
    def steps(self) -> np.ndarray:
        """h at each step; ``steps[j]`` spans ``points[j]..points[j+1]``."""
        return np.diff(self.points)

    @property
    def avg_steps(self) -> np.ndarray:
        """(h_i + h_{i+1}) / 2 at every interior node."""
        h = self.steps
        return 0.5 * (h[:-1] + h[1:])

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    def index_labels(self) -> np.ndarray:
        return np.arange(len(self.points)) - self.offset

    def dump(self) -> str:
        """Two-column ``index coordinate`` text listing."""
        return "\n".join(f"{i:d} {x:.17g}" for i, x in zip(self.index_labels(), self.points)) + "\n"


def _check_monotone_steps(points: np.ndarray) -> None:
    h = np.diff(points)
    # a few ulps of slack: equal steps from a + j*d differ in the last bits
    slack = 4 * np.spacing(np.abs(points[2:]))
    bad = np.nonzero(h[1:] < h[:-1] - slack)[0]
    if bad.size:
        i = int(bad[0]) + 1
        raise ConfigError(f"mesh violates h_i <= h_(i+1) at i={i}: {h[i - 1]!r} > {h[i]!r} "
                          "(set enforce_monotone=False to allow)")


def build_half_mesh(cfg: MeshConfig) -> Mesh:
    """S(l) mesh on [0, 1]."""
    taus = transition_points(cfg)
    counts = interval_counts(cfg.n_steps, cfg.ratios)
    edges = (0.0,) + taus + (1.0,)
    pieces = []
    for k, count in enumerate(counts):
        left, right = edges[k], edges[k + 1]
        pieces.append(left + np.arange(count) * ((right - left) / count))
    points = np.concatenate(pieces + [np.array([1.0])])
    if cfg.enforce_monotone:
        _check_monotone_steps(points)
    return Mesh(points, Nu.BOUNDARY, cfg.n_steps, taus, counts, cfg)


def extend_symmetric(half: Mesh) -> Mesh:
    """Mirror a [0, 1] mesh onto [-1, 1] by x_{-i} = -x_i."""
    if half.nu is not Nu.BOUNDARY or half.points[0] != 0.0:
        raise ConfigError("extend_symmetric expects a mesh on [0, 1]")
    pts = half.points
    full = np.concatenate([-pts[:0:-1], pts])
    return Mesh(full, Nu.INTERIOR, half.n_half, half.transition_points, half.interval_counts, half.config)


def build_mesh(cfg: MeshConfig) -> Mesh:
    """Half mesh for nu = 0, mirrored mesh for nu = -1."""
    half = build_half_mesh(cfg)
    return extend_symmetric(half) if cfg.nu is Nu.INTERIOR else half

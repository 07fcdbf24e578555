"""Hybrid central / midpoint difference scheme and its Jacobian.

Nodes where the mesh resolves the layer (rho_i <= 1) use the central scheme.
Coarse nodes use the midpoint upwind scheme, and a one-node transition scheme
sits between the two regions. On [-1, 1] the negative half uses mirrored
versions of the midpoint and transition schemes.

All routines work on the interior unknowns only. Boundary values are pinned
to U_- and U_+.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError
from .meshgen import Mesh, Nu
from .problem import Problem

__all__ = [
    "Scheme",
    "SchemeLayout",
    "TridiagonalMatrix",
    "compute_layout",
    "residual",
    "jacobian",
    "extend",
]


class Scheme(enum.IntEnum):
    CENTRAL = 0
    TRANSITION = 1
    TRANSITION_MIRROR = 2
    MIDPOINT = 3
    MIDPOINT_MIRROR = 4


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Square tridiagonal matrix stored by diagonals."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        m = len(self.diag)
        if len(self.lower) != m - 1 or len(self.upper) != m - 1:
            raise DimensionError(
                f"off-diagonals must have length {m - 1}, got {len(self.lower)} and {len(self.upper)}")

    @property
    def size(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[1:] += self.lower * v[:-1]
        out[:-1] += self.upper * v[1:]
        return out

    def __matmul__(self, v):
        return self.matvec(v)


@dataclass(frozen=True, eq=False)
class SchemeLayout:
    """Per-node scheme assignment on a mesh.

    ``rho`` holds rho_1..rho_N on the nonnegative half, ``switch_index`` is
    n = max{i <= N-1 : rho_i <= 1}. ``tags`` and ``chi`` are indexed by
    interior node in mesh order. ``rho_gaps`` lists indices i < n with
    rho_i > 1, which only occur on meshes with shrinking steps; those nodes
    still get the central scheme.
    """

    mesh: Mesh
    epsilon: float
    b_upper: float
    rho: np.ndarray
    switch_index: int
    tags: np.ndarray
    chi: np.ndarray
    transition: bool = True
    rho_gaps: tuple[int, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.tags)

    @property
    def x(self) -> np.ndarray:
        return self.mesh.interior

    @property
    def transition_positions(self) -> np.ndarray:
        """Interior positions (0-based) carrying a transition tag."""
        return np.nonzero((self.tags == Scheme.TRANSITION) | (self.tags == Scheme.TRANSITION_MIRROR))[0]

    def node_rho(self) -> np.ndarray:
        """rho reflected onto every interior node; NaN at x = 0."""
        labels = self.mesh.index_labels()[1:-1]
        out = np.full(self.size, np.nan)
        nz = labels != 0
        out[nz] = self.rho[np.abs(labels[nz]) - 1]
        return out

    def dump(self) -> str:
        """Three-column ``tag rho chi`` text listing, one interior node per line."""
        lines = [f"{Scheme(t).name} {r:.6e} {c:.17g}" for t, r, c in zip(self.tags, self.node_rho(), self.chi)]
        return "\n".join(lines) + "\n"


def compute_layout(mesh: Mesh, p: Problem, *, b_upper: float | None = None,
                   transition: bool = True, chi_variant: str = "default") -> SchemeLayout:
    """Assign schemes and weights to every interior node of ``mesh``.

    ``transition=False`` replaces the transition schemes by the central one.
    ``chi_variant='misprint'`` uses hbar_n/2 + h_{n+1} as the transition
    weight instead of h_n/2 + h_{n+1}; it exists for diagnostics only.
    """
    if mesh.nu is not p.nu:
        raise ConfigError(f"mesh is for nu={int(mesh.nu)} but problem has nu={int(p.nu)}")
    if mesh.config is not None and mesh.config.epsilon != p.epsilon:
        raise ConfigError(f"mesh built for eps={mesh.config.epsilon}, problem has eps={p.epsilon}")
    if chi_variant not in ("default", "misprint"):
        raise ConfigError(f"unknown chi variant {chi_variant!r}")
    bmax = p.b_upper if b_upper is None else float(b_upper)
    if bmax < p.b_upper:
        raise ConfigError(f"b_upper override {bmax} is below max b = {p.b_upper}")

    eps = p.epsilon
    N = mesh.n_half
    o = mesh.offset
    pts = mesh.points
    half = pts[o:]
    h_half = np.diff(half)
    rho = bmax * half[:-1] * h_half / (2.0 * eps**2)
    in_j = np.nonzero(rho[: N - 1] <= 1.0)[0]
    n = int(in_j.max()) + 1 if in_j.size else 0
    if n < 1:
        raise ConfigError("rho_1 > 1; the mesh must start at the turning point")
    # on meshes violating h_i <= h_(i+1) the set can have holes; n stays max J
    gaps = tuple(int(i) + 1 for i in np.setdiff1d(np.arange(n), in_j))

    # positive-half tags for i = 1..N-1
    i = np.arange(1, N)
    if n == N - 1:
        pos = np.full(N - 1, Scheme.CENTRAL)
    elif n == 1 and mesh.nu is Nu.BOUNDARY:
        pos = np.full(N - 1, Scheme.MIDPOINT)
    else:
        pos = np.where(i < n, Scheme.CENTRAL, np.where(i == n, Scheme.TRANSITION, Scheme.MIDPOINT))
    if not transition:
        pos = np.where(pos == Scheme.TRANSITION, Scheme.CENTRAL, pos)

    if mesh.nu is Nu.INTERIOR:
        mirror = {Scheme.CENTRAL: Scheme.CENTRAL, Scheme.TRANSITION: Scheme.TRANSITION_MIRROR,
                  Scheme.MIDPOINT: Scheme.MIDPOINT_MIRROR}
        neg = np.array([mirror[Scheme(t)] for t in pos[::-1]], dtype=int)
        tags = np.concatenate([neg, [Scheme.CENTRAL], pos]).astype(int)
    else:
        tags = np.asarray(pos, dtype=int)

    h = mesh.steps
    hl, hr = h[:-1], h[1:]
    chi = np.empty(len(tags))
    chi_by_tag = {
        Scheme.CENTRAL: 0.5 * (hl + hr),
        Scheme.TRANSITION: 0.5 * hl + hr,
        Scheme.TRANSITION_MIRROR: hl + 0.5 * hr,
        Scheme.MIDPOINT: hr,
        Scheme.MIDPOINT_MIRROR: hl,
    }
    if chi_variant == "misprint":
        chi_by_tag[Scheme.TRANSITION] = 0.25 * (hl + hr) + hr
        chi_by_tag[Scheme.TRANSITION_MIRROR] = hl + 0.25 * (hl + hr)
    for tag, values in chi_by_tag.items():
        mask = tags == tag
        chi[mask] = values[mask]

    rho.setflags(write=False)
    tags.setflags(write=False)
    chi.setflags(write=False)
    return SchemeLayout(mesh, eps, bmax, rho, n, tags, chi, transition, gaps)


def extend(p: Problem, w) -> np.ndarray:
    """Interior values with the pinned boundary values attached."""
    w = np.asarray(w, dtype=float)
    return np.concatenate([[p.u_minus], w, [p.u_plus]])


def _node_source(layout: SchemeLayout, p: Problem) -> np.ndarray:
    key = ("source", id(p), p.source, p.epsilon)
    cached = layout._cache.get(key)
    if cached is None:
        cached = p.c(layout.mesh.points)
        layout._cache[key] = cached
    return cached


def _parts(layout: SchemeLayout, p: Problem, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (layout.size,):
        raise DimensionError(f"expected {layout.size} interior values, got shape {w.shape}")
    pts = layout.mesh.points
    W = extend(p, w)
    x = pts[1:-1]
    refs = p.reference(x)
    Bl = np.empty(layout.size)
    Bc = np.empty(layout.size)
    Br = np.empty(layout.size)
    for ref in np.unique(refs):
        m = refs == ref
        idx = np.nonzero(m)[0] + 1
        Bl[m] = p.big_b(ref, W[idx - 1])
        Bc[m] = p.big_b(ref, W[idx])
        Br[m] = p.big_b(ref, W[idx + 1])
    return W, x, Bl, Bc, Br


def residual(layout: SchemeLayout, p: Problem, w) -> np.ndarray:
    """Discrete operator T applied to interior values ``w``."""
    W, x, Bl, Bc, Br = _parts(layout, p, w)
    pts = layout.mesh.points
    xl, xr = pts[:-2], pts[2:]
    h = layout.mesh.steps
    hl, hr = h[:-1], h[1:]
    chi = layout.chi
    tags = layout.tags
    eps2 = p.epsilon**2
    fl, fc, fr = xl * Bl, x * Bc, xr * Br
    cs = _node_source(layout, p)
    cl, cc, cr = cs[:-2], cs[1:-1], cs[2:]

    wl, wc, wr = W[:-2], W[1:-1], W[2:]
    out = -eps2 * ((wl - wc) / hl + (wr - wc) / hr) / chi

    conv = np.empty_like(out)
    m = tags == Scheme.CENTRAL
    conv[m] = (-(fr - fl) / (hl + hr) + Bc + cc)[m]
    m = tags == Scheme.TRANSITION
    conv[m] = (-(2 * fr - fc - fl) / (2 * chi) + Bc + cc)[m]
    m = tags == Scheme.TRANSITION_MIRROR
    conv[m] = (-(fr + fc - 2 * fl) / (2 * chi) + Bc + cc)[m]
    m = tags == Scheme.MIDPOINT
    conv[m] = (-(fr - fc) / hr + 0.5 * (Bc + Br) + 0.5 * (cc + cr))[m]
    m = tags == Scheme.MIDPOINT_MIRROR
    conv[m] = (-(fc - fl) / hl + 0.5 * (Bc + Bl) + 0.5 * (cc + cl))[m]
    return out + conv


def jacobian(layout: SchemeLayout, p: Problem, w) -> TridiagonalMatrix:
    """Exact derivative of :func:`residual` with respect to the interior values."""
    W, x, *_ = _parts(layout, p, w)
    pts = layout.mesh.points
    h = layout.mesh.steps
    hl, hr = h[:-1], h[1:]
    chi = layout.chi
    tags = layout.tags
    eps2 = p.epsilon**2
    bW = p.b(W)
    aW = pts * bW
    al, ac, ar = aW[:-2], aW[1:-1], aW[2:]
    bl, bc, br = bW[:-2], bW[1:-1], bW[2:]

    dl = -eps2 / (chi * hl)
    dc = eps2 / chi * (1.0 / hl + 1.0 / hr)
    dr = -eps2 / (chi * hr)

    m = tags == Scheme.CENTRAL
    dl[m] += (al / (hl + hr))[m]
    dc[m] += bc[m]
    dr[m] -= (ar / (hl + hr))[m]
    m = tags == Scheme.TRANSITION
    dl[m] += (al / (2 * chi))[m]
    dc[m] += (ac / (2 * chi) + bc)[m]
    dr[m] -= (ar / chi)[m]
    m = tags == Scheme.TRANSITION_MIRROR
    dl[m] += (al / chi)[m]
    dc[m] += (-ac / (2 * chi) + bc)[m]
    dr[m] -= (ar / (2 * chi))[m]
    m = tags == Scheme.MIDPOINT
    dc[m] += (ac / hr + 0.5 * bc)[m]
    dr[m] += (-ar / hr + 0.5 * br)[m]
    m = tags == Scheme.MIDPOINT_MIRROR
    dc[m] += (-ac / hl + 0.5 * bc)[m]
    dl[m] += (al / hl + 0.5 * bl)[m]
    return TridiagonalMatrix(dl[1:].copy(), dc, dr[:-1].copy())

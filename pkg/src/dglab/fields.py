"""Grid functions on parabolic cylinders.

Cells are identified with their centers: a cell belongs to a cylinder when its
center lies in the open time interval and in the open spatial ball (Euclidean
norm).  Measures are therefore ``count * cell_volume``, which is exact in
binary64 on dyadic grids and gives exact partitions of the level sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .errors import GeometryError, ParameterError

_GEOM_TOL = 1e-12


@dataclass(frozen=True)
class Cylinder:
    t_lo: float
    t_hi: float
    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.t_lo < self.t_hi:
            raise GeometryError(f"empty time interval ({self.t_lo}, {self.t_hi})")
        if not self.radius > 0:
            raise GeometryError(f"radius must be positive, got {self.radius}")

    @property
    def d(self) -> int:
        return len(self.center)

    @classmethod
    def standard(cls, r: float, t0: float = 0.0, x0: Any = None, d: int = 1) -> "Cylinder":
        """``Q_r(t0, x0) = (t0 - r^2, t0) x B_r(x0)``."""
        if x0 is None:
            x0 = (0.0,) * d
        elif np.isscalar(x0):
            x0 = (float(x0),) * d
        return cls(t0 - r * r, t0, tuple(x0), r)

    @classmethod
    def q_bar_1(cls, d: int = 1) -> "Cylinder":
        """The time-shifted unit cylinder ``(-2, -1) x B_1``."""
        return cls(-2.0, -1.0, (0.0,) * d, 1.0)

    def shifted(self, t_lo: float, t_hi: float) -> "Cylinder":
        return Cylinder(t_lo, t_hi, self.center, self.radius)

    def contains(self, other: "Cylinder") -> bool:
        gap = math.dist(self.center, other.center)
        return (
            other.t_lo >= self.t_lo - _GEOM_TOL
            and other.t_hi <= self.t_hi + _GEOM_TOL
            and gap + other.radius <= self.radius + _GEOM_TOL
        )


Q2 = Cylinder(-4.0, 0.0, (0.0,), 2.0)


@dataclass(frozen=True)
class GridSpec:
    d: int
    nt: int
    nx: tuple[int, ...]
    domain: Cylinder = Q2

    def __post_init__(self) -> None:
        if self.d not in (1, 2):
            raise ParameterError(f"grids support d in (1, 2), got {self.d}")
        nx = self.nx
        if isinstance(nx, (int, np.integer)):
            nx = (int(nx),) * self.d
        nx = tuple(int(n) for n in nx)
        object.__setattr__(self, "nx", nx)
        if len(nx) != self.d:
            raise ParameterError(f"nx has {len(nx)} entries for d={self.d}")
        if self.nt < 2 or min(nx) < 2:
            raise ParameterError("need at least 2 cells per axis")
        if self.domain.d != self.d:
            object.__setattr__(
                self, "domain", Cylinder(self.domain.t_lo, self.domain.t_hi, (self.domain.center[0],) * self.d,
                                         self.domain.radius)
            )

    @classmethod
    def uniform(cls, d: int, h: float, dt: float | None = None, domain: Cylinder | None = None) -> "GridSpec":
        """Grid with spatial step ``h`` and time step ``dt`` (default ``h``) over ``domain``."""
        domain = domain or Q2
        if domain.d != d:
            domain = Cylinder(domain.t_lo, domain.t_hi, (domain.center[0],) * d, domain.radius)
        nx = round(2 * domain.radius / h)
        nt = round((domain.t_hi - domain.t_lo) / (dt or h))
        return cls(d, nt, (nx,) * d, domain)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nt, *self.nx)

    @property
    def dt(self) -> float:
        return (self.domain.t_hi - self.domain.t_lo) / self.nt

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(2 * self.domain.radius / n for n in self.nx)

    @property
    def h(self) -> float:
        return max(self.dx)

    @property
    def cell_volume(self) -> float:
        return self.dt * math.prod(self.dx)

    @property
    def space_cell_volume(self) -> float:
        return math.prod(self.dx)

    @property
    def t_centers(self) -> np.ndarray:
        return self.domain.t_lo + (np.arange(self.nt) + 0.5) * self.dt

    def x_centers(self, axis: int = 0) -> np.ndarray:
        lo = self.domain.center[axis] - self.domain.radius
        return lo + (np.arange(self.nx[axis]) + 0.5) * self.dx[axis]

    def mesh(self) -> list[np.ndarray]:
        """Spatial coordinate arrays broadcastable to ``nx``."""
        return list(np.meshgrid(*[self.x_centers(a) for a in range(self.d)], indexing="ij"))

    def ball_mask(self, center: tuple[float, ...], radius: float) -> np.ndarray:
        r2 = np.zeros(self.nx)
        for a, xa in enumerate(self.mesh()):
            r2 = r2 + (xa - center[a]) ** 2
        return r2 < radius * radius

    def time_mask(self, t_lo: float, t_hi: float) -> np.ndarray:
        tc = self.t_centers
        return (tc > t_lo) & (tc < t_hi)

    def check_inside(self, cyl: Cylinder) -> None:
        if cyl.d != self.d:
            raise GeometryError(f"cylinder dimension {cyl.d} != grid dimension {self.d}")
        if not self.domain.contains(cyl):
            raise GeometryError(f"{cyl} is not contained in the grid domain {self.domain}")

    def cylinder_mask(self, cyl: Cylinder) -> np.ndarray:
        self.check_inside(cyl)
        tm = self.time_mask(cyl.t_lo, cyl.t_hi)
        bm = self.ball_mask(cyl.center, cyl.radius)
        return tm.reshape((-1,) + (1,) * self.d) & bm[None, ...]

    def time_index(self, t: float) -> int:
        """Index of the cell whose time interval contains ``t`` (clamped)."""
        i = math.floor((t - self.domain.t_lo) / self.dt)
        return min(max(i, 0), self.nt - 1)


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64).reshape(self.spec.shape)
        if not np.all(np.isfinite(vals)):
            raise ParameterError("grid field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.spec, values)

    def __neg__(self) -> "GridField":
        return GridField(self.spec, -self.values)

    def affine(self, scale: float, shift: float = 0.0) -> "GridField":
        return GridField(self.spec, scale * self.values + shift)

    def max_on(self, cyl: Cylinder) -> float:
        mask = self.spec.cylinder_mask(cyl)
        if not mask.any():
            raise GeometryError(f"no cell centers inside {cyl}")
        return float(self.values[mask].max())

    def min_on(self, cyl: Cylinder) -> float:
        mask = self.spec.cylinder_mask(cyl)
        if not mask.any():
            raise GeometryError(f"no cell centers inside {cyl}")
        return float(self.values[mask].min())


@dataclass(frozen=True)
class CoefficientField:
    spec: GridSpec
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    lam: float = 1.0
    Lam: float = 1.0
    q: float = 4.0

    def __post_init__(self) -> None:
        d, shape = self.spec.d, self.spec.shape
        A = np.array(self.A, dtype=np.float64).reshape(shape + (d, d))
        B = np.array(self.B, dtype=np.float64).reshape(shape + (d,))
        g = np.array(self.g, dtype=np.float64).reshape(shape)
        if not (0 < self.lam <= self.Lam):
            raise ParameterError(f"need 0 < lambda <= Lambda, got {self.lam}, {self.Lam}")
        if not self.q > max(2.0, (d + 2) / 2):
            raise ParameterError(f"need q > max(2, (d+2)/2), got {self.q}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.all(np.isfinite(g))):
            raise ParameterError("coefficients must be finite")
        if not np.allclose(A, np.swapaxes(A, -1, -2)):
            raise ParameterError("A must be symmetric")
        eig = np.linalg.eigvalsh(A.reshape(-1, d, d))
        tol = 1e-12 * self.Lam
        if eig.min() < self.lam - tol or eig.max() > self.Lam + tol:
            raise ParameterError("A has eigenvalues outside [lambda, Lambda]")
        if np.sqrt((B**2).sum(axis=-1)).max(initial=0.0) > self.Lam * (1 + 1e-12):
            raise ParameterError("|B| exceeds Lambda")
        for name, arr in (("A", A), ("B", B), ("g", g)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def diagonal(self) -> bool:
        d = self.spec.d
        off = self.A * (1 - np.eye(d))
        return not np.any(off)

    def g_norm(self) -> float:
        """Discrete L^q norm of the source over the whole grid."""
        return float((np.sum(np.abs(self.g) ** self.q) * self.spec.cell_volume) ** (1 / self.q))


Kind = Literal["below", "above", "between"]


def level_mask(values: np.ndarray, kind: Kind, k: float | None = None, l: float | None = None) -> np.ndarray:
    if kind == "below":
        return values <= k
    if kind == "above":
        return values >= l
    if kind == "between":
        if not k < l:
            raise ParameterError(f"need k < l, got {k}, {l}")
        return (values > k) & (values < l)
    raise ParameterError(f"unknown level-set kind {kind!r}")


def measure_level_set(u: GridField, cyl: Cylinder, kind: Kind, k: float | None = None,
                      l: float | None = None) -> float:
    """Measure of ``{u<=k}``, ``{u>=l}`` or ``{k<u<l}`` inside ``cyl``.

    For ``kind="above"`` pass the level as ``l`` (``k`` is accepted as a
    fallback so ``measure_level_set(u, cyl, "above", 0.5)`` works).
    """
    if kind == "above" and l is None:
        l = k
    mask = u.spec.cylinder_mask(cyl) & level_mask(u.values, kind, k, l)
    return int(np.count_nonzero(mask)) * u.spec.cell_volume


def truncate(u: GridField, k: float, l: float) -> GridField:
    if not k < l:
        raise ParameterError(f"truncation needs k < l, got {k}, {l}")
    return u.with_values(np.clip(u.values - k, 0.0, l - k))


def masked_gradient(w: np.ndarray, mask: np.ndarray, dx: tuple[float, ...]) -> list[np.ndarray]:
    """Spatial finite-difference gradient of ``w`` restricted to ``mask``.

    ``w`` has a leading time axis; ``mask`` is spatial.  Centered differences
    where both neighbours are in the mask, one-sided where only one is, zero
    for isolated cells.  Components outside the mask are zero.
    """
    lead = w.ndim - mask.ndim
    out = []
    for a in range(mask.ndim):
        ax = lead + a
        n = mask.shape[a]
        plus = np.zeros_like(mask)
        minus = np.zeros_like(mask)
        sl_lo = [slice(None)] * mask.ndim
        sl_hi = [slice(None)] * mask.ndim
        sl_lo[a], sl_hi[a] = slice(0, n - 1), slice(1, n)
        plus[tuple(sl_lo)] = mask[tuple(sl_hi)]
        minus[tuple(sl_hi)] = mask[tuple(sl_lo)]
        plus &= mask
        minus &= mask
        fwd = np.zeros_like(w)
        bwd = np.zeros_like(w)
        wl = [slice(None)] * w.ndim
        wh = [slice(None)] * w.ndim
        wl[ax], wh[ax] = slice(0, n - 1), slice(1, n)
        diff = (w[tuple(wh)] - w[tuple(wl)]) / dx[a]
        fwd[tuple(wl)] = diff
        bwd[tuple(wh)] = diff
        both = plus & minus
        g = np.where(both, 0.5 * (fwd + bwd), np.where(plus, fwd, np.where(minus, bwd, 0.0)))
        out.append(g)
    return out


def grad_sq(w: np.ndarray, mask: np.ndarray, dx: tuple[float, ...]) -> np.ndarray:
    return sum(g * g for g in masked_gradient(w, mask, dx))


def energy_integrals(u: GridField, cyl: Cylinder, k: float, p: float) -> tuple[float, float, float]:
    """Midpoint-rule integrals of ``(u-k)_+^2``, ``|D(u-k)_+|^2`` and ``(u-k)_+^p`` over ``cyl``."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    spec = u.spec
    spec.check_inside(cyl)
    tm = spec.time_mask(cyl.t_lo, cyl.t_hi)
    bm = spec.ball_mask(cyl.center, cyl.radius)
    w = np.maximum(u.values[tm] - k, 0.0)
    vol = spec.cell_volume
    sel = np.broadcast_to(bm, w.shape)
    l2 = float(np.sum(w[sel] ** 2) * vol)
    gr = float(np.sum(grad_sq(w, bm, spec.dx)[sel]) * vol)
    lp = float(np.sum(w[sel] ** p) * vol)
    return l2, gr, lp


def oscillation(u: GridField, cyl: Cylinder) -> float:
    mask = u.spec.cylinder_mask(cyl)
    if not mask.any():
        raise GeometryError(f"no cell centers inside {cyl}")
    vals = u.values[mask]
    return float(vals.max() - vals.min())


@dataclass(frozen=True, eq=False)
class SpatialSlice:
    """One time slice of a grid field, as a function on the spatial box."""

    spec: GridSpec
    t: float
    values: np.ndarray = field(repr=False)


def time_slice(u: GridField, t: float) -> SpatialSlice:
    i = u.spec.time_index(t)
    return SpatialSlice(u.spec, float(u.spec.t_centers[i]), u.values[i])


def slice_from_profile(spec: GridSpec, values: np.ndarray, t: float = 0.0) -> SpatialSlice:
    return SpatialSlice(spec, t, np.asarray(values, dtype=np.float64).reshape(spec.nx))


def _heat_kernel(spec: GridSpec, s0: float = 0.25) -> np.ndarray:
    tau = spec.t_centers - spec.domain.t_lo + s0
    r2 = sum(x**2 for x in spec.mesh())
    tau = tau.reshape((-1,) + (1,) * spec.d)
    return (s0 / tau) ** (spec.d / 2) * np.exp(-r2[None, ...] / (4 * tau))


def build_field(spec: GridSpec, kind: str, **params: Any) -> GridField:
    """Built-in fields.

    ``jump_counterexample``
        1 for cell times ``t <= -1`` and 0 afterwards: a subsolution with a
        downward jump in time.
    ``constant`` (``c``), ``linear_x`` (``slope``, default 1: ``u = slope * x_1``),
    ``smooth_bump`` (an exact heat-equation solution with unit diffusivity),
    ``solver_output`` (``config``: a :class:`dglab.solver.SolveConfig`).
    """
    shape = spec.shape
    if kind == "jump_counterexample":
        tc = spec.t_centers.reshape((-1,) + (1,) * spec.d)
        vals = np.broadcast_to(np.where(tc <= -1.0, 1.0, 0.0), shape)
    elif kind == "constant":
        vals = np.full(shape, float(params.get("c", 0.0)))
    elif kind == "linear_x":
        x = spec.mesh()[0]
        vals = np.broadcast_to(float(params.get("slope", 1.0)) * x, shape)
    elif kind == "smooth_bump":
        vals = float(params.get("amplitude", 1.0)) * _heat_kernel(spec, float(params.get("s0", 0.25)))
    elif kind == "solver_output":
        from .solver import solve

        out = solve(params["config"])
        if out.spec != spec:
            raise ParameterError("solver configuration grid differs from the requested spec")
        return out
    else:
        raise ParameterError(f"unknown field kind {kind!r}")
    return GridField(spec, np.array(vals))


def _coarse_index(spec: GridSpec, cell_size: float) -> tuple[np.ndarray, tuple[int, ...]]:
    """Flat index of the coarse space-time block containing each cell."""
    it = np.floor((spec.t_centers - spec.domain.t_lo) / cell_size).astype(int)
    idx = [it.reshape((-1,) + (1,) * spec.d)]
    sizes = [int(it.max()) + 1]
    for a in range(spec.d):
        lo = spec.domain.center[a] - spec.domain.radius
        ia = np.floor((spec.x_centers(a) - lo) / cell_size).astype(int)
        shape = [1] * (spec.d + 1)
        shape[a + 1] = -1
        idx.append(ia.reshape(shape))
        sizes.append(int(ia.max()) + 1)
    flat = np.ravel_multi_index(np.broadcast_arrays(*idx), sizes)
    return flat, tuple(sizes)


def build_coefficients(
    spec: GridSpec,
    kind: str = "identity",
    B_kind: str = "zero",
    g_kind: str = "zero",
    *,
    lam: float = 1.0,
    Lam: float = 1.0,
    q: float = 4.0,
    cell_size: float = 0.25,
    seed: int | None = None,
    B_value: Any = 0.0,
    g_value: float = 0.0,
) -> CoefficientField:
    """Coefficient fields: ``identity``, seeded ``checkerboard`` of ``lam I`` / ``Lam I`` on
    coarse space-time blocks of side ``cell_size``, or a ``smooth`` scalar modulation."""
    d, shape = spec.d, spec.shape
    rng = np.random.default_rng(seed)
    eye = np.eye(d)
    if kind == "identity":
        a = np.ones(shape)
    elif kind == "checkerboard":
        if seed is None:
            raise ParameterError("checkerboard coefficients need a seed")
        flat, sizes = _coarse_index(spec, cell_size)
        picks = rng.integers(0, 2, size=math.prod(sizes))
        a = np.where(picks[flat] == 1, Lam, lam).astype(np.float64)
    elif kind == "smooth":
        x = spec.mesh()[0][None, ...]
        t = spec.t_centers.reshape((-1,) + (1,) * d)
        a = lam + (Lam - lam) * 0.5 * (1 + np.sin(np.pi * x) * np.cos(np.pi * t))
    else:
        raise ParameterError(f"unknown coefficient kind {kind!r}")
    A = a[..., None, None] * eye

    if B_kind == "zero":
        B = np.zeros(shape + (d,))
    elif B_kind == "constant":
        B = np.broadcast_to(np.asarray(B_value, dtype=np.float64).reshape(-1)[:d] * np.ones(d), shape + (d,))
    elif B_kind == "random":
        if seed is None:
            raise ParameterError("random drift needs a seed")
        flat, sizes = _coarse_index(spec, cell_size)
        raw = rng.uniform(-1.0, 1.0, size=(math.prod(sizes), d))
        norms = np.maximum(np.sqrt((raw**2).sum(axis=1, keepdims=True)), 1.0)
        B = (Lam * raw / norms)[flat]
    else:
        raise ParameterError(f"unknown drift kind {B_kind!r}")

    if g_kind == "zero":
        g = np.zeros(shape)
    elif g_kind == "constant":
        g = np.full(shape, float(g_value))
    else:
        raise ParameterError(f"unknown source kind {g_kind!r}")
    return CoefficientField(spec, A, np.array(B), g, lam=lam, Lam=Lam, q=q)

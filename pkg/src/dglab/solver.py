"""Finite-difference solver for ``u_t = div(A grad u) + B . grad u + g``.

Cell-centered grid, conservative diffusion with arithmetic face averages of A,
first-order upwinding of the drift, explicit source.  Dirichlet data live on
a ghost layer one cell outside the box.  Output slice ``i`` is the state at
the cell-center time ``t_lo + (i + 1/2) dt``; internally each output cell is
split into ``2 * substeps`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Union

import numpy as np
from numba import njit

from .errors import ConfigurationError, DivergenceError
from .fields import CoefficientField, Cylinder, GridField, GridSpec, build_coefficients

Profile = Union[float, np.ndarray, Callable[..., Any]]


def stability_limit(coeffs: CoefficientField) -> float:
    """Largest explicit step keeping the scheme monotone: ``dx^2 / (2 d Lam + Lam dx)``."""
    dx = min(coeffs.spec.dx)
    d, Lam = coeffs.spec.d, coeffs.Lam
    return dx * dx / (2 * d * Lam + Lam * dx)


@dataclass
class SolveConfig:
    coeffs: CoefficientField
    initial: Profile = 0.0
    boundary: Profile = 0.0
    scheme: str = "explicit"
    cfl_safety: float = 0.9
    substeps: int | None = None
    tol: float = 1e-10
    max_iter: int = 200_000
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.scheme not in ("explicit", "implicit-euler"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.substeps is not None and self.substeps < 1:
            raise ConfigurationError("substeps must be >= 1")

    @property
    def spec(self) -> GridSpec:
        return self.coeffs.spec

    def resolved_substeps(self) -> int:
        dt = self.spec.dt
        if self.scheme == "implicit-euler":
            return self.substeps or 1
        limit = self.cfl_safety * stability_limit(self.coeffs)
        if self.substeps is None:
            return max(1, math.ceil(dt / (2 * limit) * (1 - 1e-12)))
        if dt / (2 * self.substeps) > limit * (1 + 1e-12):
            raise ConfigurationError(
                f"explicit step {dt / (2 * self.substeps):.6g} exceeds cfl_safety * stability_limit = {limit:.6g}"
            )
        return self.substeps


def _initial_values(spec: GridSpec, initial: Profile) -> np.ndarray:
    if callable(initial):
        vals = np.asarray(initial(*spec.mesh()), dtype=np.float64)
    else:
        vals = np.asarray(initial, dtype=np.float64)
    vals = np.broadcast_to(vals, spec.nx).astype(np.float64)
    if not np.all(np.isfinite(vals)):
        raise ConfigurationError("initial profile must be finite")
    return vals


def _ghost_frames(spec: GridSpec, boundary: Profile) -> np.ndarray:
    """Dirichlet values on the padded frame, one frame per output time cell."""
    coords = []
    for a in range(spec.d):
        x = spec.x_centers(a)
        h = spec.dx[a]
        coords.append(np.concatenate([[x[0] - h], x, [x[-1] + h]]))
    mesh = np.meshgrid(*coords, indexing="ij")
    frames = np.empty((spec.nt,) + tuple(n + 2 for n in spec.nx))
    for i, t in enumerate(spec.t_centers):
        if callable(boundary):
            frames[i] = np.broadcast_to(np.asarray(boundary(t, *mesh), dtype=np.float64), frames.shape[1:])
        else:
            frames[i] = float(boundary)
    if not np.all(np.isfinite(frames)):
        raise ConfigurationError("boundary values must be finite")
    return frames


@njit(cache=True)
def _op_1d(P, a, b, g, dx, res):
    n = a.shape[0]
    inv = 1.0 / (dx * dx)
    for j in range(n):
        c = P[j + 1]
        al = a[j] if j == 0 else 0.5 * (a[j - 1] + a[j])
        ar = a[j] if j == n - 1 else 0.5 * (a[j] + a[j + 1])
        diff = (ar * (P[j + 2] - c) - al * (c - P[j])) * inv
        bj = b[j]
        if bj > 0:
            adv = bj * (P[j + 2] - c) / dx
        else:
            adv = bj * (c - P[j]) / dx
        res[j] = diff + adv + g[j]


@njit(cache=True)
def _tridiag_1d(P, rhs, a, b, dx, h):
    """Exact implicit-Euler step (Thomas algorithm); ghosts in P are fixed."""
    n = a.shape[0]
    inv = 1.0 / (dx * dx)
    cp = np.empty(n)
    dp = np.empty(n)
    for j in range(n):
        al = a[j] if j == 0 else 0.5 * (a[j - 1] + a[j])
        ar = a[j] if j == n - 1 else 0.5 * (a[j] + a[j + 1])
        bj = b[j]
        cr = h * (ar * inv + max(bj, 0.0) / dx)
        cl = h * (al * inv + max(-bj, 0.0) / dx)
        diag = 1.0 + cr + cl
        r = rhs[j]
        if j == 0:
            r += cl * P[0]
        if j == n - 1:
            r += cr * P[n + 1]
            cr = 0.0
        if j == 0:
            cl = 0.0
        denom = diag + (cl * cp[j - 1] if j > 0 else 0.0)
        cp[j] = -cr / denom
        dp[j] = (r + (cl * dp[j - 1] if j > 0 else 0.0)) / denom
    P[n] = dp[n - 1]
    for j in range(n - 2, -1, -1):
        P[j + 1] = dp[j] - cp[j] * P[j + 2]


@njit(cache=True)
def _march_1d(u0, a, b, g, frames, dx, h, sub, implicit, tol, max_iter, out):
    nt, n = a.shape
    P = np.empty(n + 2)
    P[1:n + 1] = u0
    res = np.empty(n)
    rhs = np.empty(n)
    step = 0
    for i in range(nt):
        P[0] = frames[i, 0]
        P[n + 1] = frames[i, n + 1]
        for half in range(2):
            for s in range(sub):
                if implicit:
                    for j in range(n):
                        rhs[j] = P[j + 1] + h * g[i, j]
                    _tridiag_1d(P, rhs, a[i], b[i], dx, h)
                else:
                    _op_1d(P, a[i], b[i], g[i], dx, res)
                    for j in range(n):
                        P[j + 1] += h * res[j]
                step += 1
                for j in range(n):
                    if not np.isfinite(P[j + 1]):
                        return step
            if half == 0:
                out[i, :] = P[1:n + 1]
    return 0


@njit(cache=True)
def _coef_2d(a11, a22, b1, b2, j, k, dx, dy):
    """Neighbour weights (E, W, N, S) and diagonal of the 5-point part at cell (j, k)."""
    n, m = a11.shape
    axl = a11[j, k] if j == 0 else 0.5 * (a11[j - 1, k] + a11[j, k])
    axr = a11[j, k] if j == n - 1 else 0.5 * (a11[j, k] + a11[j + 1, k])
    ayl = a22[j, k] if k == 0 else 0.5 * (a22[j, k - 1] + a22[j, k])
    ayr = a22[j, k] if k == m - 1 else 0.5 * (a22[j, k] + a22[j, k + 1])
    ce = axr / (dx * dx) + max(b1[j, k], 0.0) / dx
    cw = axl / (dx * dx) + max(-b1[j, k], 0.0) / dx
    cn = ayr / (dy * dy) + max(b2[j, k], 0.0) / dy
    cs = ayl / (dy * dy) + max(-b2[j, k], 0.0) / dy
    return ce, cw, cn, cs


@njit(cache=True)
def _cross_2d(P, a12, j, k, dx, dy):
    """Centered d_x(a12 d_y u) + d_y(a12 d_x u) at cell (j, k); ghosts copy a12."""
    n, m = a12.shape
    jp = min(j + 1, n - 1)
    jm = max(j - 1, 0)
    kp = min(k + 1, m - 1)
    km = max(k - 1, 0)
    dyu_e = (P[j + 2, k + 2] - P[j + 2, k]) / (2 * dy)
    dyu_w = (P[j, k + 2] - P[j, k]) / (2 * dy)
    dxu_n = (P[j + 2, k + 2] - P[j, k + 2]) / (2 * dx)
    dxu_s = (P[j + 2, k] - P[j, k]) / (2 * dx)
    return (a12[jp, k] * dyu_e - a12[jm, k] * dyu_w) / (2 * dx) + (a12[j, kp] * dxu_n - a12[j, km] * dxu_s) / (2 * dy)


@njit(cache=True)
def _march_2d(u0, a11, a12, a22, b1, b2, g, frames, dx, dy, h, sub, implicit, cross, tol, max_iter, out):
    nt, n, m = a11.shape
    P = np.empty((n + 2, m + 2))
    P[1:n + 1, 1:m + 1] = u0
    res = np.empty((n, m))
    rhs = np.empty((n, m))
    step = 0
    for i in range(nt):
        fr = frames[i]
        P[0, :] = fr[0, :]
        P[n + 1, :] = fr[n + 1, :]
        P[:, 0] = fr[:, 0]
        P[:, m + 1] = fr[:, m + 1]
        for half in range(2):
            for s in range(sub):
                if implicit:
                    for j in range(n):
                        for k in range(m):
                            rhs[j, k] = P[j + 1, k + 1] + h * g[i, j, k]
                    scale = 1.0
                    for j in range(n):
                        for k in range(m):
                            scale = max(scale, abs(rhs[j, k]))
                    ok = False
                    for it in range(max_iter):
                        resid = 0.0
                        for j in range(n):
                            for k in range(m):
                                ce, cw, cn, cs = _coef_2d(a11[i], a22[i], b1[i], b2[i], j, k, dx, dy)
                                off = ce * P[j + 2, k + 1] + cw * P[j, k + 1] + cn * P[j + 1, k + 2] + cs * P[j + 1, k]
                                if cross:
                                    off += _cross_2d(P, a12[i], j, k, dx, dy)
                                diag = 1.0 + h * (ce + cw + cn + cs)
                                new = (rhs[j, k] + h * off) / diag
                                resid = max(resid, abs(new - P[j + 1, k + 1]) * diag)
                                P[j + 1, k + 1] = new
                        if resid <= tol * scale:
                            ok = True
                            break
                    if not ok:
                        return -(step + 1)
                else:
                    for j in range(n):
                        for k in range(m):
                            ce, cw, cn, cs = _coef_2d(a11[i], a22[i], b1[i], b2[i], j, k, dx, dy)
                            c = P[j + 1, k + 1]
                            v = (ce * (P[j + 2, k + 1] - c) + cw * (P[j, k + 1] - c)
                                 + cn * (P[j + 1, k + 2] - c) + cs * (P[j + 1, k] - c))
                            if cross:
                                v += _cross_2d(P, a12[i], j, k, dx, dy)
                            res[j, k] = v + g[i, j, k]
                    for j in range(n):
                        for k in range(m):
                            P[j + 1, k + 1] += h * res[j, k]
                step += 1
                for j in range(n):
                    for k in range(m):
                        if not np.isfinite(P[j + 1, k + 1]):
                            return step
            if half == 0:
                out[i] = P[1:n + 1, 1:m + 1]
    return 0


def solve(config: SolveConfig) -> GridField:
    """March the configured problem across the grid's time interval.

    Raises :class:`ConfigurationError` on a CFL violation and
    :class:`DivergenceError` (carrying the step number) on non-finite values.
    """
    c = config.coeffs
    spec = c.spec
    sub = config.resolved_substeps()
    h = spec.dt / (2 * sub)
    u0 = _initial_values(spec, config.initial)
    frames = _ghost_frames(spec, config.boundary)
    out = np.empty(spec.shape)
    implicit = config.scheme == "implicit-euler"
    if spec.d == 1:
        status = _march_1d(u0, np.ascontiguousarray(c.A[..., 0, 0]), np.ascontiguousarray(c.B[..., 0]),
                           np.ascontiguousarray(c.g), frames, spec.dx[0], h, sub, implicit, config.tol,
                           config.max_iter, out)
    else:
        A = c.A
        status = _march_2d(u0, np.ascontiguousarray(A[..., 0, 0]), np.ascontiguousarray(A[..., 0, 1]),
                           np.ascontiguousarray(A[..., 1, 1]), np.ascontiguousarray(c.B[..., 0]),
                           np.ascontiguousarray(c.B[..., 1]), np.ascontiguousarray(c.g), frames,
                           spec.dx[0], spec.dx[1], h, sub, implicit, not c.diagonal, config.tol,
                           config.max_iter, out)
    if status > 0:
        raise DivergenceError(f"non-finite value at step {status} (t = {spec.domain.t_lo + status * h:.6g})",
                              step=status)
    if status < 0:
        raise DivergenceError(f"implicit solve did not reach tolerance {config.tol} at step {-status}",
                              step=-status)
    return GridField(spec, out)


# -- serialisation ---------------------------------------------------------------------------

def sine_modes(spec: GridSpec, amplitudes: list[float]) -> np.ndarray:
    """``sum_m a_m sin(m pi (x + R) / (2R))`` (product over axes when d=2)."""
    R = spec.domain.radius
    out = np.zeros(spec.nx)
    for m, amp in enumerate(amplitudes, start=1):
        term = np.ones(spec.nx)
        for a, xa in enumerate(spec.mesh()):
            term = term * np.sin(m * np.pi * (xa - spec.domain.center[a] + R) / (2 * R))
        out = out + amp * term
    return out


def _profile_from_json(spec: GridSpec, obj: Any, what: str) -> Profile:
    if isinstance(obj, (int, float)):
        return float(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigurationError(f"{what} must be a number or an object with a 'kind'")
    kind = obj["kind"]
    if kind == "constant":
        return float(obj["value"])
    if kind == "sine_modes" and what == "initial":
        return sine_modes(spec, [float(a) for a in obj["amplitudes"]])
    if kind == "values" and what == "initial":
        return np.asarray(obj["values"], dtype=np.float64).reshape(spec.nx)
    if kind == "sides" and what == "boundary":
        if spec.d != 1:
            raise ConfigurationError("'sides' boundary data is one-dimensional")
        left, right = float(obj["left"]), float(obj["right"])
        mid = spec.domain.center[0]
        return lambda t, x: np.where(x < mid, left, right)
    raise ConfigurationError(f"unknown {what} kind {kind!r}")


def coefficients_from_json(obj: dict[str, Any]) -> CoefficientField:
    g = obj.get("grid", {})
    d = int(g.get("d", 1))
    dom = Cylinder(float(g.get("t_lo", -4.0)), float(g.get("t_hi", 0.0)), tuple(g.get("center", [0.0] * d)),
                   float(g.get("radius", 2.0)))
    spec = GridSpec(d, int(g["nt"]), tuple(g["nx"]) if isinstance(g["nx"], list) else int(g["nx"]), dom)
    return build_coefficients(
        spec,
        obj.get("kind", "identity"),
        obj.get("B_kind", "zero"),
        obj.get("g_kind", "zero"),
        lam=float(obj.get("lambda", 1.0)),
        Lam=float(obj.get("Lambda", 1.0)),
        q=float(obj.get("q", 4.0)),
        cell_size=float(obj.get("cell_size", 0.25)),
        seed=obj.get("seed"),
        B_value=obj.get("B_value", 0.0),
        g_value=float(obj.get("g_value", 0.0)),
    )


def config_from_json(obj: dict[str, Any], base_dir: str | Path = ".") -> SolveConfig:
    """Build a :class:`SolveConfig` from its JSON form.

    ``coefficients`` is either a path to a coefficient file (relative to
    ``base_dir``) or an inline generator description with a ``grid`` block.
    """
    from .io import read_coefficients

    try:
        src = obj["coefficients"]
        if isinstance(src, str):
            coeffs = read_coefficients(Path(base_dir) / src)
        else:
            coeffs = coefficients_from_json(src)
        spec = coeffs.spec
        return SolveConfig(
            coeffs=coeffs,
            initial=_profile_from_json(spec, obj.get("initial", 0.0), "initial"),
            boundary=_profile_from_json(spec, obj.get("boundary", 0.0), "boundary"),
            scheme=obj.get("scheme", "explicit"),
            cfl_safety=float(obj.get("cfl_safety", 0.9)),
            substeps=obj.get("substeps"),
            tol=float(obj.get("tol", 1e-10)),
            meta=dict(obj),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed solve configuration: {exc}") from exc


# -- verification inputs ---------------------------------------------------------------------

def corpus_config(seed: int, h: float = 1 / 64, dt: float | None = None, lam: float = 1.0, Lam: float = 2.0,
                  n_modes: int = 4, cell_size: float = 0.25) -> SolveConfig:
    """Seeded rough-coefficient problem on Q_2 (d=1): checkerboard A in {lam, Lam},
    no drift or source, random sine-mode initial data and random constant side values."""
    rng = np.random.default_rng(seed)
    spec = GridSpec.uniform(1, h, dt)
    coeffs = build_coefficients(spec, "checkerboard", lam=lam, Lam=Lam, cell_size=cell_size,
                                seed=int(rng.integers(2**63)))
    amps = rng.normal(size=n_modes) / np.arange(1, n_modes + 1)
    left, right = rng.uniform(-1.0, 1.0, size=2)
    init = sine_modes(spec, list(amps)) + left + (right - left) * (spec.x_centers() + 2) / 4
    meta = {"seed": seed, "h": h, "dt": spec.dt, "lambda": lam, "Lambda": Lam, "cell_size": cell_size,
            "amplitudes": [float(a) for a in amps], "left": float(left), "right": float(right)}
    return SolveConfig(coeffs=coeffs, initial=init,
                       boundary=lambda t, x: np.where(x < 0, left, right), meta=meta)


def normalize_on_q32(u: GridField) -> GridField:
    """Affine map sending the range of ``u`` on Q_{3/2} onto ``[-1, 1]``.

    Constants solve the homogeneous equation, so with ``g = 0`` the result is
    again a solution, and ``|u| <= 1`` on Q_{3/2}.
    """
    q32 = Cylinder.standard(1.5, d=u.spec.d)
    vals = u.values[u.spec.cylinder_mask(q32)]
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return u.affine(1.0, -lo)
    half = 0.5 * (hi - lo)
    return u.affine(1.0 / half, -(lo + half) / half)


def corpus_field(seed: int, **kw: Any) -> GridField:
    return normalize_on_q32(solve(corpus_config(seed, **kw)))

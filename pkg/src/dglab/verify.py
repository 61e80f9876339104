"""Numerical checks of the energy, intermediate-value and oscillation inequalities.

Every check returns a :class:`CheckReport` listing, per sample, the two
sides of the inequality and the margin ``rhs - lhs``.  A check passes when
no margin falls below ``-tolerance``; the tolerance models quadrature error
and is ``tol_factor * (dx + dt) * scale`` with the scale stated in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .constants import ConstantChain, DgParams, ball_volume, close_times_constants, ivl_constant
from .errors import ParameterError, PreconditionError
from .fields import (
    Cylinder,
    GridField,
    GridSpec,
    SpatialSlice,
    grad_sq,
    level_mask,
    masked_gradient,
)
from .io import dumps_csv, jsonable

PASS, FAIL, SKIPPED, INCONCLUSIVE = "pass", "fail", "skipped", "inconclusive"
DEFAULT_TOL_FACTOR = 10.0


@dataclass(frozen=True)
class Sample:
    params: dict[str, Any]
    lhs: float
    rhs: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lhs", float(self.lhs))
        object.__setattr__(self, "rhs", float(self.rhs))

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict[str, Any]:
        return {"params": self.params, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin}


@dataclass
class CheckReport:
    name: str
    samples: list[Sample]
    tolerance: float
    verdict: str
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def worst(self) -> Sample | None:
        if not self.samples:
            return None
        return min(self.samples, key=lambda s: s.margin)

    @property
    def min_margin(self) -> float:
        w = self.worst
        return math.inf if w is None else w.margin

    def to_dict(self) -> dict[str, Any]:
        w = self.worst
        return jsonable({
            "name": self.name,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "n_samples": len(self.samples),
            "worst": None if w is None else w.to_dict(),
            "details": self.details,
            "samples": [s.to_dict() for s in self.samples],
        })

    def to_csv(self) -> str:
        keys = sorted({k for s in self.samples for k in s.params})
        rows = [[s.params.get(k, "") for k in keys] + [s.lhs, s.rhs, s.margin] for s in self.samples]
        return dumps_csv(keys + ["lhs", "rhs", "margin"], rows)


def _verdict(samples: Sequence[Sample], tol: float) -> str:
    if not samples:
        return SKIPPED
    return PASS if min(s.margin for s in samples) >= -tol else FAIL


def _grid_scale(spec: GridSpec) -> float:
    return spec.h + spec.dt


@dataclass(frozen=True)
class IvlOrientation:
    """Where the low set ``{u<=k}`` and the high set ``{u>=l}`` are measured."""

    low_cylinder: Cylinder
    high_cylinder: Cylinder
    label: str = "custom"

    @classmethod
    def canonical(cls, d: int = 1) -> "IvlOrientation":
        """Low set on the early cylinder ``(-2,-1) x B1``, high set on the late ``Q1``."""
        return cls(Cylinder.q_bar_1(d), Cylinder.standard(1.0, d=d), "canonical")

    @classmethod
    def as_printed(cls, d: int = 1) -> "IvlOrientation":
        return cls(Cylinder.standard(1.0, d=d), Cylinder.q_bar_1(d), "as-printed")

    @classmethod
    def named(cls, name: str, d: int = 1) -> "IvlOrientation":
        if name == "canonical":
            return cls.canonical(d)
        if name in ("as-printed", "swapped"):
            return cls.as_printed(d)
        raise ParameterError(f"unknown orientation {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "low": _cyl_dict(self.low_cylinder), "high": _cyl_dict(self.high_cylinder)}


def _cyl_dict(c: Cylinder) -> dict[str, Any]:
    return {"t_lo": c.t_lo, "t_hi": c.t_hi, "center": list(c.center), "radius": c.radius}


def _measure(u: GridField, cyl: Cylinder, kind: str, k: float | None = None, l: float | None = None) -> float:
    mask = u.spec.cylinder_mask(cyl) & level_mask(u.values, kind, k, l)
    return int(np.count_nonzero(mask)) * u.spec.cell_volume


def _require_bounded(u: GridField, bound: float = 1.0) -> None:
    q32 = Cylinder.standard(1.5, d=u.spec.d)
    top = u.max_on(q32)
    if top > bound + 1e-12:
        raise PreconditionError(f"need u <= {bound} on Q_3/2, found max {top:.6g}")


# -- energy inequality -----------------------------------------------------------------------

def _dg_sample_values(u: GridField, dg: DgParams, k: float, i_s: int, i_t: int, r: float, R: float,
                      x0: tuple[float, ...], sign: str) -> tuple[float, float] | None:
    spec = u.spec
    small = spec.ball_mask(x0, r)
    big = spec.ball_mask(x0, R)
    if not small.any() or i_t <= i_s:
        return None
    block = u.values[i_s:i_t + 1]
    w = np.maximum(block - k, 0.0) if sign == "+" else np.maximum(k - block, 0.0)
    hx = spec.space_cell_volume
    wts = np.full(i_t - i_s + 1, spec.dt)
    wts[0] = wts[-1] = 0.5 * spec.dt
    w2 = w * w
    top = float(w2[-1][small].sum() * hx)
    g2 = grad_sq(w, small, spec.dx)
    grad = float(np.dot(wts, g2[:, small].sum(axis=1)) * hx)
    lhs = top + dg.gamma1 * grad
    start = float(w2[0][big].sum() * hx)
    l2 = float(np.dot(wts, w2[:, big].sum(axis=1)) * hx)
    rhs = start + dg.gamma2 / (R - r) ** 2 * l2
    if dg.gamma3 > 0:
        lp = float(np.dot(wts, (w[:, big] ** dg.p).sum(axis=1)) * hx)
        rhs += dg.gamma3 * lp ** (1.0 / dg.p)
    return lhs, rhs


def dg_sampler(spec: GridSpec, values: np.ndarray, rng: np.random.Generator) -> dict[str, Any]:
    """Draw one ``(k, s, t, r, R, x0)`` tuple covering the quantifier ranges of the energy inequality."""
    dom = spec.domain
    h = spec.h
    d = spec.d
    if d == 1:
        x0 = (float(rng.uniform(-1.0, 1.0)) + dom.center[0],)
    else:
        ang = rng.uniform(0, 2 * math.pi)
        rad = math.sqrt(rng.uniform(0, 1))
        x0 = tuple(dom.center[a] + rad * (math.cos(ang) if a == 0 else math.sin(ang)) for a in range(2))
    gap = math.dist(x0, dom.center)
    R = float(rng.uniform(0.25 + 2 * h, dom.radius - gap))
    r = float(rng.uniform(0.25, R - 2 * h))
    s, t = sorted(float(v) for v in rng.uniform(dom.t_lo, dom.t_hi, size=2))
    k = float(rng.uniform(values.min() - 0.5, values.max() + 0.5))
    return {"k": k, "s": s, "t": t, "r": r, "R": R, "x0": list(x0)}


def check_dg_membership(u: GridField, dg: DgParams, *, n_samples: int = 200, seed: int = 0, sign: str = "+",
                        samples: Iterable[dict[str, Any]] | None = None,
                        tol_factor: float = DEFAULT_TOL_FACTOR) -> CheckReport:
    """Sample the De Giorgi energy inequality on ``u``.

    Times are snapped to cell indices (``i_s < i_t``), the time integrals use
    the trapezoid rule over those slices, and the gradient is the masked
    finite difference inside ``B_r``.  Explicit ``samples`` (dicts with keys
    k, s, t, r, R, x0) bypass the random sampler.
    """
    if sign not in ("+", "-"):
        raise ParameterError(f"sign must be '+' or '-', got {sign!r}")
    spec = u.spec
    rng = np.random.default_rng(seed)
    if samples is None:
        draws = [dg_sampler(spec, u.values, rng) for _ in range(n_samples)]
    else:
        draws = [dict(s) for s in samples]
    out: list[Sample] = []
    skipped = 0
    for prm in draws:
        x0 = tuple(float(v) for v in np.broadcast_to(np.asarray(prm["x0"], dtype=float), (spec.d,)))
        i_s, i_t = spec.time_index(prm["s"]), spec.time_index(prm["t"])
        if not (prm["r"] < prm["R"]) or math.dist(x0, spec.domain.center) + prm["R"] > spec.domain.radius + 1e-12:
            skipped += 1
            continue
        vals = _dg_sample_values(u, dg, float(prm["k"]), i_s, i_t, float(prm["r"]), float(prm["R"]), x0, sign)
        if vals is None:
            skipped += 1
            continue
        p = dict(prm, x0=list(x0), t_s=float(spec.t_centers[i_s]), t_t=float(spec.t_centers[i_t]))
        out.append(Sample(p, vals[0], vals[1]))
    scale = max((abs(s.lhs) for s in out), default=0.0)
    tol = tol_factor * _grid_scale(spec) * scale
    return CheckReport(
        name=f"dg_membership{sign}",
        samples=out,
        tolerance=tol,
        verdict=_verdict(out, tol),
        details={"dg": dg.__dict__, "sign": sign, "skipped": skipped, "seed": seed, "tol_factor": tol_factor,
                 "tol_scale": "max |lhs| over samples", "lhs_scale": scale},
    )


# -- first lemma -----------------------------------------------------------------------------

def first_lemma_energies(u: GridField, K: int = 20) -> list[float]:
    """``U_k = int_{Q_{r_k}} (u - c_k)_+^2`` with ``r_k = (1 + 2^-k)/2`` and ``c_k = (1 - 2^-k)/2``."""
    d = u.spec.d
    out = []
    for k in range(K + 1):
        rk = 0.5 * (1 + 2.0**-k)
        ck = 0.5 * (1 - 2.0**-k)
        mask = u.spec.cylinder_mask(Cylinder.standard(rk, d=d))
        w = np.maximum(u.values[mask] - ck, 0.0)
        out.append(float(np.sum(w * w) * u.spec.cell_volume))
    return out


def check_first_lemma_iteration(u: GridField, chain: ConstantChain, K: int = 20,
                                tol_factor: float = DEFAULT_TOL_FACTOR) -> CheckReport:
    """Smallness of ``U_0`` against ``delta`` and the conclusion ``u <= 1/2`` on ``Q_1/2``.

    ``U_k`` is nonincreasing for every field (shrinking cylinders, rising
    levels); those comparisons are always recorded.  When ``U_0 > delta`` the
    verdict is ``skipped``.
    """
    U = first_lemma_energies(u, K)
    samples = [Sample({"what": "U_k <= U_{k-1}", "k": k}, U[k], U[k - 1]) for k in range(1, K + 1)]
    ratios = []
    for k in range(2, K + 1):
        if U[k] > 0 and U[k - 2] > 0:
            ratios.append({"k": k, "log2_ratio": math.log2(U[k]) - chain.alpha_iter * math.log2(U[k - 2]),
                           "log2_C_iter_pow_k": k * math.log2(chain.C_iter)})
    hyp = U[0] <= chain.delta
    tol = tol_factor * _grid_scale(u.spec) * 0.5
    details = {"U": U, "delta": chain.delta, "log2_delta": chain.log2_delta, "hypothesis": hyp,
               "two_step_ratios": ratios, "tol_factor": tol_factor, "tol_scale": 0.5}
    if hyp:
        top = u.max_on(Cylinder.standard(0.5, d=u.spec.d))
        samples.append(Sample({"what": "max over Q_1/2 <= 1/2"}, top, 0.5))
    verdict = _verdict(samples, tol)
    if verdict == PASS and not hyp:
        verdict = SKIPPED
    return CheckReport("first_lemma", samples, tol, verdict, details)


# -- intermediate value lemmas --------------------------------------------------------------

def check_ivl_h1(u_slice: SpatialSlice, k: float, l: float, R: float = 1.0,
                 center: Sequence[float] | None = None, tol_factor: float = DEFAULT_TOL_FACTOR) -> CheckReport:
    """``(l-k)|u<=k||u>=l| <= R |B_R| |k<u<l|^(1/2) ||grad (u-k)_+||_2`` on one time slice."""
    if not k < l:
        raise ParameterError(f"need k < l, got k={k}, l={l}")
    spec = u_slice.spec
    d = spec.d
    center = tuple(center) if center is not None else spec.domain.center
    if math.dist(center, spec.domain.center) + R > spec.domain.radius + 1e-12:
        raise ParameterError(f"B_{R}({center}) leaves the grid domain")
    ball = spec.ball_mask(center, R)
    v = u_slice.values
    hx = spec.space_cell_volume
    low = np.count_nonzero(ball & (v <= k)) * hx
    high = np.count_nonzero(ball & (v >= l)) * hx
    mid = np.count_nonzero(ball & (v > k) & (v < l)) * hx
    w = np.maximum(v - k, 0.0)
    grads = masked_gradient(w[None, ...], ball, spec.dx)
    g2 = float(sum((g[0] ** 2)[ball].sum() for g in grads) * hx)
    lhs = (l - k) * low * high
    rhs = R * ball_volume(d, R) * math.sqrt(mid) * math.sqrt(g2)
    tol = tol_factor * spec.h * lhs
    s = Sample({"k": k, "l": l, "R": R, "t": u_slice.t}, lhs, rhs)
    return CheckReport("ivl_h1", [s], tol, _verdict([s], tol),
                       {"low": low, "high": high, "mid": mid, "grad_l2_sq": g2, "tol_factor": tol_factor,
                        "tol_scale": "lhs"})


def _interval_measure(u: GridField, t_lo: float, t_hi: float, radius: float, mask_fn) -> float:
    spec = u.spec
    tm = spec.time_mask(t_lo, t_hi)
    bm = spec.ball_mask(spec.domain.center, radius)
    sel = mask_fn(u.values[tm])[:, bm]
    return int(np.count_nonzero(sel)) * spec.cell_volume


def check_close_times(u: GridField, dg: DgParams, k: float, l: float,
                      times: tuple[float, float, float] | Sequence[tuple[float, float, float]],
                      tol_factor: float = DEFAULT_TOL_FACTOR) -> CheckReport:
    """``(l-k)^2 |u>=l,(tau,t2)xB1| |u<=k,(t1,tau)xB1| <= C1 |k<u<l,(t1,tau)xB2|^(1/2) + C2 (t2-t1)^(2+1/p)``.

    The high set is measured on the later interval, the low set on the earlier one.
    """
    if not k < l <= 1:
        raise ParameterError(f"need k < l <= 1, got k={k}, l={l}")
    triples = [times] if np.isscalar(times[0]) else list(times)
    _require_bounded(u)
    c1, c2 = close_times_constants(u.spec.d, k, l, dg)
    out = []
    for t1, tau, t2 in triples:
        if not -2 < t1 < tau < t2 < 0:
            raise ParameterError(f"need -2 < t1 < tau < t2 < 0, got {(t1, tau, t2)}")
        hi = _interval_measure(u, tau, t2, 1.0, lambda v: v >= l)
        lo = _interval_measure(u, t1, tau, 1.0, lambda v: v <= k)
        mid = _interval_measure(u, t1, tau, 2.0, lambda v: (v > k) & (v < l))
        lhs = (l - k) ** 2 * hi * lo
        rhs = c1 * math.sqrt(mid) + c2 * (t2 - t1) ** (2 + 1 / dg.p)
        out.append(Sample({"t1": t1, "tau": tau, "t2": t2, "k": k, "l": l}, lhs, rhs))
    scale = max((s.lhs for s in out), default=0.0)
    tol = tol_factor * _grid_scale(u.spec) * scale
    return CheckReport("close_times", out, tol, _verdict(out, tol),
                       {"C1": c1, "C2": c2, "tol_factor": tol_factor, "tol_scale": "max lhs"})


def pigeonhole_trace(u: GridField, k: float, l: float, p: float) -> dict[str, Any] | None:
    """Replay the time-slab selection of the parabolic intermediate value proof.

    Slabs are ``I_j = (t_{j-1}, t_j]`` with ``t_j = -2 + j/n`` and
    ``n = floor(2 / m^(p/(4p+2))) + 1``, ``m = |k<u<l, Q2|``.  Returns the
    indices ``i`` (low-set slab in ``(-2,-1)``), ``j`` (high-set slab in
    ``(-1,0)``), the adjacent pair ``(p_sel, p_sel+1)`` and which case applied.
    """
    spec = u.spec
    d = spec.d
    m = _measure(u, spec.domain, "between", k, l)
    if m == 0:
        return None
    n = math.floor(2 / m ** (p / (4 * p + 2))) + 1
    tc = spec.t_centers
    ball = spec.ball_mask((0.0,) * d, 1.0)
    vol = spec.cell_volume
    slab = np.clip(np.ceil((tc + 2.0) * n).astype(int), 0, 2 * n + 1)  # I_j holds (t_{j-1}, t_j]

    def slab_measure(j: int, pred) -> float:
        sel = slab == j
        if not sel.any():
            return 0.0
        return int(np.count_nonzero(pred(u.values[sel])[:, ball])) * vol

    low_total = _measure(u, Cylinder.q_bar_1(d), "below", k)
    high_total = _measure(u, Cylinder.standard(1.0, d=d), "above", None, l)
    low = [slab_measure(j, lambda v: v <= k) for j in range(1, n + 1)]
    i = next((j + 1 for j, a in enumerate(low) if a >= low_total / n), None)
    high = {j: slab_measure(j + 1, lambda v: v >= l) for j in range(n, 2 * n)}
    jj = next((j for j in range(n, 2 * n) if high[j] >= high_total / n), None)
    below_l = {j: slab_measure(j, lambda v: v < l) for j in range(1, 2 * n + 1)}
    case, psel = None, None
    if i is not None:
        for mm in range(i, 2 * n):
            if below_l[mm + 1] < low_total / (2 * n):
                case, psel = 1, mm
                break
        if psel is None:
            case, psel = 2, jj
    out: dict[str, Any] = {"m": m, "n": n, "slab_times": "t_j = -2 + j/n, slabs (t_{j-1}, t_j]",
                           "low_total": low_total, "high_total": high_total, "i": i, "j": jj, "case": case,
                           "p": psel}
    if psel is not None:
        a = below_l[psel]
        b = slab_measure(psel + 1, lambda v: v >= l)
        out.update({"below_l_at_p": a, "above_l_at_p_plus_1": b,
                    "const1_holds": a >= low_total / (2 * n), "const2_holds": b >= high_total / (2 * n),
                    "close_times_triple": [-2 + (psel - 1) / n, -2 + psel / n, -2 + (psel + 1) / n]})
    return out


def check_ivl_parabolic(u: GridField, dg: DgParams, k: float = 0.0, l: float = 0.5,
                        orientation: IvlOrientation | None = None, chain: ConstantChain | None = None,
                        trace: bool = False, tol_factor: float = DEFAULT_TOL_FACTOR) -> CheckReport:
    """``(l-k)^2 |u<=k, low| |u>=l, high| <= C |k<u<l, Q2|^(1/(4p+2))``.

    With ``m = 0`` and a positive left side the violation is definitive and
    no tolerance applies.
    """
    if not k < l <= 1:
        raise ParameterError(f"need k < l <= 1, got k={k}, l={l}")
    d = u.spec.d
    orientation = orientation or IvlOrientation.canonical(d)
    _require_bounded(u)
    if chain is not None and (k, l) == (0.0, 0.5):
        C = chain.C_ivl
    else:
        C = ivl_constant(d, k, l, dg)
    low = _measure(u, orientation.low_cylinder, "below", k)
    high = _measure(u, orientation.high_cylinder, "above", None, l)
    mid = _measure(u, u.spec.domain, "between", k, l)
    lhs = (l - k) ** 2 * low * high
    rhs = C * mid ** (1.0 / (4 * dg.p + 2))
    s = Sample({"k": k, "l": l, "orientation": orientation.label}, lhs, rhs)
    definitive = mid == 0 and lhs > 0
    tol = 0.0 if definitive else tol_factor * _grid_scale(u.spec) * lhs
    details: dict[str, Any] = {"low": low, "high": high, "mid": mid, "C": C, "exponent": 1.0 / (4 * dg.p + 2),
                               "orientation": orientation.to_dict(), "definitive_violation": definitive,
                               "tol_factor": tol_factor, "tol_scale": "lhs"}
    if trace:
        details["pigeonhole"] = pigeonhole_trace(u, k, l, dg.p)
    return CheckReport(f"ivl_parabolic[{orientation.label}]", [s], tol, _verdict([s], tol), details)


# -- lowering the maximum and oscillation decay ----------------------------------------------

def lowering_inputs(u: GridField) -> GridField:
    """Affine rescaling ``(u - med) / (M - med)`` with ``med`` the median on ``(-2,-1) x B1``
    and ``M`` the grid maximum, so ``v <= 1`` and ``{v<=0}`` fills half of that cylinder."""
    qbar = u.spec.cylinder_mask(Cylinder.q_bar_1(u.spec.d))
    med = float(np.median(u.values[qbar]))
    top = float(u.values.max())
    if not top > med:
        raise PreconditionError("field is constant above its median; cannot rescale")
    return u.affine(1.0 / (top - med), -med / (top - med))


def run_lowering_max(v: GridField, dg: DgParams, chain: ConstantChain, *, k_cap: int = 1100,
                     tol_factor: float = DEFAULT_TOL_FACTOR) -> tuple[int | None, float | None, CheckReport]:
    """Find the first ``k`` with ``int_{Q1} (v_k)_+^2 <= delta``, ``v_k = 2^k (v - 1 + 2^-k)``,
    and compare ``max_{Q_1/2} v`` with the certified bound ``1 - 2^-(k+1)``."""
    d = v.spec.d
    _require_bounded(v)
    qbar = Cylinder.q_bar_1(d)
    qbar_mask = v.spec.cylinder_mask(qbar)
    qbar_vol = int(np.count_nonzero(qbar_mask)) * v.spec.cell_volume
    low = _measure(v, qbar, "below", 0.0)
    if low < qbar_vol / 2:
        raise PreconditionError(f"|v<=0 on (-2,-1)xB1| = {low:.6g} < half of {qbar_vol:.6g}")
    vals = v.values[v.spec.cylinder_mask(Cylinder.standard(1.0, d=d))] - 1.0
    limit = chain.k0_max if chain.k0_max is not None else math.inf
    stop = int(min(limit, k_cap))
    found = None
    energies = []
    for k in range(stop + 1):
        w = np.maximum(2.0**k * vals + 1.0, 0.0)  # 2^k (v - 1 + 2^-k)
        e = float(np.sum(w * w) * v.spec.cell_volume)
        energies.append(e)
        if e <= chain.delta:
            found = k
            break
    tol = tol_factor * _grid_scale(v.spec)
    details = {"delta": chain.delta, "k0_max": chain.k0_max, "log2_k0_max": chain.log2_k0_max, "k_cap": k_cap,
               "energies": energies, "tol_factor": tol_factor, "tol_scale": 1.0}
    if found is None:
        details["reason"] = "no k within the search range reached delta"
        verdict = FAIL if stop == limit else INCONCLUSIVE
        return None, None, CheckReport("lowering_max", [], tol, verdict, details)
    bound = 1.0 - 2.0 ** -(found + 1)
    top = v.max_on(Cylinder.standard(0.5, d=d))
    s = Sample({"k": found}, top, bound)
    details["k_found"] = found
    return found, bound, CheckReport("lowering_max", [s], tol, _verdict([s], tol), details)


def _holder_dominates(alpha_hat: float, chain: ConstantChain | None) -> bool:
    """``alpha_hat >= alpha_holder`` decided in log2 form, since the bound may underflow."""
    if chain is None:
        return alpha_hat >= 0
    if not alpha_hat > 0:
        return False
    if chain.log2_alpha_holder is None:  # symbolic chain: the bound is below 2^-1074
        return True
    return math.log2(alpha_hat) >= chain.log2_alpha_holder


def steepest_center(u: GridField, t0: float = 0.0, radius: float = 1.0) -> tuple[float, tuple[float, ...]]:
    """``(t0, x0)`` with ``x0`` the point of ``B_radius`` where the slice nearest ``t0`` is steepest."""
    spec = u.spec
    i = spec.time_index(t0 - 1e-12)
    ball = spec.ball_mask(spec.domain.center, radius)
    g2 = grad_sq(u.values[i][None, ...], ball, spec.dx)[0]
    g2 = np.where(ball, g2, -1.0)
    idx = np.unravel_index(int(np.argmax(g2)), g2.shape)
    mesh = spec.mesh()
    return t0, tuple(float(m[idx]) for m in mesh)


def holder_center(u: GridField, scale: float = 0.5) -> tuple[float, tuple[float, ...]]:
    """Center ``(t0, x0)`` with ``Q1(t0, x0)`` inside the domain maximizing the oscillation on
    ``Q_scale(t0, x0)``, searched over a lattice of step 1/2 in time and 1/8 in space."""
    spec = u.spec
    dom = spec.domain
    best, arg = -1.0, (dom.t_hi, dom.center)
    times = np.arange(dom.t_hi, dom.t_lo + 1.0 - 1e-12, -0.5)
    xs = np.arange(-(dom.radius - 1.0), dom.radius - 1.0 + 1e-12, 0.125)
    grids = np.meshgrid(*([xs] * spec.d), indexing="ij")
    for t0 in times:
        for pt in zip(*(g.ravel() for g in grids)):
            x0 = tuple(dom.center[a] + float(pt[a]) for a in range(spec.d))
            if math.dist(x0, dom.center) > dom.radius - 1.0 + 1e-12:
                continue
            vals = u.values[spec.cylinder_mask(Cylinder.standard(scale, float(t0), x0, spec.d))]
            if vals.size and vals.max() - vals.min() > best:
                best, arg = float(vals.max() - vals.min()), (float(t0), x0)
    return arg


def estimate_holder(u: GridField, center: tuple[float, Any] = (0.0, 0.0), n_scales: int = 4,
                    chain: ConstantChain | None = None, noise_factor: float = DEFAULT_TOL_FACTOR) -> tuple[
                        float, float, CheckReport]:
    """Oscillation over ``Q_{2^-n}(t0, x0)`` for ``n = 0..n_scales``.

    ``theta_hat`` is the largest ratio of successive oscillations among scales
    whose oscillations both exceed ``noise_factor * dx``; scales with fewer
    than four cells are dropped.  Passes when ``-log2(theta_hat)`` is at least
    the chain's Hölder exponent.
    """
    spec = u.spec
    t0, x0 = center
    x0 = tuple(np.broadcast_to(np.asarray(x0, dtype=float), (spec.d,)).tolist())
    noise = noise_factor * spec.h
    oscs = []
    for n in range(n_scales + 1):
        cyl = Cylinder.standard(2.0**-n, t0, x0, spec.d)
        mask = spec.cylinder_mask(cyl)
        if np.count_nonzero(mask) < 4:
            break
        vals = u.values[mask]
        oscs.append(float(vals.max() - vals.min()))
    ratios = [(n, oscs[n + 1] / oscs[n]) for n in range(len(oscs) - 1) if oscs[n] > noise and oscs[n + 1] > noise]
    target = chain.alpha_holder if chain is not None else 0.0
    details: dict[str, Any] = {"oscillations": oscs, "noise": noise, "center": [t0, list(x0)],
                               "alpha_holder": target, "ratios": [r for _, r in ratios]}
    if all(o == 0 for o in oscs) and oscs:
        theta_hat, alpha_hat = 0.0, math.inf
        verdict = PASS
    elif not ratios:
        theta_hat, alpha_hat = math.nan, math.nan
        verdict = INCONCLUSIVE
    else:
        theta_hat = max(r for _, r in ratios)
        alpha_hat = math.inf if theta_hat == 0 else -math.log2(theta_hat)
        verdict = PASS if _holder_dominates(alpha_hat, chain) else FAIL
    details.update({"theta_hat": theta_hat, "alpha_hat": alpha_hat})
    samples = [] if math.isnan(alpha_hat) else [Sample({"what": "alpha_hat >= alpha_holder"}, target, alpha_hat)]
    return theta_hat, alpha_hat, CheckReport("holder", samples, 0.0, verdict, details)

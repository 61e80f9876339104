"""Seeded solver corpus with the full check battery, and the jump counterexample suite."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .constants import ConstantChain, DgParams, PdeParams, dg_constants_from_pde, full_chain
from .fields import GridSpec, build_field, slice_from_profile
from .io import dumps_csv
from .solver import corpus_config, normalize_on_q32, solve
from .verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    CheckReport,
    IvlOrientation,
    check_close_times,
    check_dg_membership,
    check_first_lemma_iteration,
    check_ivl_h1,
    check_ivl_parabolic,
    estimate_holder,
    holder_center,
    lowering_inputs,
    run_lowering_max,
)

#: The energy class proved for the corpus equation (lambda=1, Lambda=2, q=4, g=0).
CORPUS_PDE = PdeParams(lam=1.0, Lam=2.0, q=4.0, g_norm=0.0, d=1)

CLOSE_TIME_TRIPLES = ((-1.9, -1.0, -0.1), (-1.5, -1.0, -0.5), (-1.2, -1.0, -0.8), (-1.75, -1.25, -0.25))


def corpus_seeds(n: int, seed: int) -> list[int]:
    """Independent 63-bit child seeds from one root seed."""
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in np.random.SeedSequence(seed).spawn(n)]


def _summary(r: CheckReport, **extra: Any) -> dict[str, Any]:
    w = r.worst
    out = {"verdict": r.verdict, "tolerance": r.tolerance, "n_samples": len(r.samples),
           "min_margin": None if w is None else w.margin,
           "worst": None if w is None else w.to_dict()}
    out.update(extra)
    return out


def check_battery(u, dg: DgParams, chain: ConstantChain, *, seed: int, n_samples: int = 200,
                  tol_factor: float = 10.0) -> dict[str, dict[str, Any]]:
    """Run every check on one normalized field; returns per-check summaries."""
    out: dict[str, dict[str, Any]] = {}
    r = check_dg_membership(u, dg, n_samples=n_samples, seed=seed, tol_factor=tol_factor)
    out["dg_membership"] = _summary(r, skipped=r.details["skipped"])
    r = check_ivl_parabolic(u, dg, 0.0, 0.5, IvlOrientation.canonical(u.spec.d), chain, trace=True,
                            tol_factor=tol_factor)
    out["ivl_parabolic"] = _summary(r, pigeonhole=r.details["pigeonhole"])
    r = check_close_times(u, dg, 0.0, 0.5, CLOSE_TIME_TRIPLES, tol_factor=tol_factor)
    out["close_times"] = _summary(r)
    r = check_first_lemma_iteration(u, chain, tol_factor=tol_factor)
    U = r.details["U"]
    out["first_lemma"] = _summary(r, U0=U[0], monotone=all(b <= a for a, b in zip(U, U[1:])))
    k, bound, r = run_lowering_max(lowering_inputs(u), dg, chain, tol_factor=tol_factor)
    out["lowering_max"] = _summary(r, k_found=k, bound=bound)
    center = holder_center(u)
    theta_hat, alpha_hat, r = estimate_holder(u, center, 4, chain, noise_factor=tol_factor)
    out["holder"] = _summary(r, theta_hat=theta_hat, alpha_hat=alpha_hat, center=[center[0], list(center[1])])
    return out


@dataclass(frozen=True)
class CorpusSettings:
    n: int
    seed: int
    n_samples: int = 200
    h: float = 1 / 64
    tol_factor: float = 10.0
    sobolev_constant: float | None = None
    threads: int = 1

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def run_corpus(settings: CorpusSettings) -> dict[str, Any]:
    """Generate ``n`` seeded solver fields and run the battery on each.

    Per-field work may run on several threads; results are assembled in
    seed order, so the report does not depend on scheduling.
    """
    dg = dg_constants_from_pde(CORPUS_PDE)
    chain = full_chain(1, dg, sobolev_constant=settings.sobolev_constant)
    seeds = corpus_seeds(settings.n, settings.seed)

    def one(s: int) -> dict[str, Any]:
        cfg = corpus_config(s, h=settings.h)
        u = normalize_on_q32(solve(cfg))
        checks = check_battery(u, dg, chain, seed=s, n_samples=settings.n_samples,
                               tol_factor=settings.tol_factor)
        return {"seed": s, "config": cfg.meta, "checks": checks}

    if settings.threads > 1:
        with ThreadPoolExecutor(settings.threads) as pool:
            fields = list(pool.map(one, seeds))
    else:
        fields = [one(s) for s in seeds]
    counts: dict[str, dict[str, int]] = {}
    for f in fields:
        for name, c in f["checks"].items():
            counts.setdefault(name, {}).setdefault(c["verdict"], 0)
            counts[name][c["verdict"]] += 1
    bad = sum(v for c in counts.values() for k, v in c.items() if k in (FAIL, INCONCLUSIVE))
    return {
        "settings": settings.to_dict(),
        "dg": dg.__dict__,
        "chain": chain.to_dict(),
        "fields": fields,
        "summary": counts,
        "all_pass": bad == 0,
    }


def corpus_csv(report: dict[str, Any]) -> str:
    rows = []
    for f in report["fields"]:
        for name, c in f["checks"].items():
            rows.append([f["seed"], name, c["verdict"], c["min_margin"] if c["min_margin"] is not None else "",
                         c["tolerance"]])
    return dumps_csv(["seed", "check", "verdict", "min_margin", "tolerance"], rows)


# -- counterexample suite --------------------------------------------------------------------

#: Class used for the jump checks; any positive gammas exclude upward jumps in time.
JUMP_DG = DgParams(gamma1=1.0, gamma2=1.0, gamma3=0.0, p=1.0)


def _expect(name: str, report: CheckReport, expected: str, **extra: Any) -> dict[str, Any]:
    w = report.worst
    ok = report.verdict == expected
    for key, want in extra.items():
        got = {"lhs": None if w is None else w.lhs, "rhs": None if w is None else w.rhs}[key]
        ok = ok and got == want
    return {"name": name, "expected": expected, "verdict": report.verdict, "ok": ok,
            "lhs": None if w is None else w.lhs, "rhs": None if w is None else w.rhs,
            "tolerance": report.tolerance, "expected_values": extra}


def counterexample_suite(resolutions: tuple[float, ...] = (1 / 32, 1 / 64, 1 / 128)) -> dict[str, Any]:
    """The jump field (1 up to t=-1, then 0) against the intermediate value and energy checks.

    Expected: canonical orientation passes with lhs 0, the as-printed
    orientation fails with lhs 4 and rhs 0 at every resolution; upward jumps
    break the energy inequality while downward jumps do not.
    """
    items = []
    for h in resolutions:
        spec = GridSpec.uniform(1, h)
        f = build_field(spec, "jump_counterexample")
        tag = f"h=1/{round(1 / h)}"
        r = check_ivl_parabolic(f, JUMP_DG, 0.0, 1.0, IvlOrientation.canonical(1), trace=True)
        items.append(_expect(f"ivl canonical {tag}", r, PASS, lhs=0.0))
        r = check_ivl_parabolic(f, JUMP_DG, 0.0, 1.0, IvlOrientation.as_printed(1))
        items.append(_expect(f"ivl as-printed {tag}", r, FAIL, lhs=4.0, rhs=0.0))

    spec = GridSpec.uniform(1, resolutions[0])
    f = build_field(spec, "jump_counterexample")
    lattice = -2 + (np.arange(10) + 0.5) * 0.2
    triples = [(a, b, c) for a in lattice for b in lattice for c in lattice if a < b < c]
    items.append(_expect("close times on jump, 10-point lattice", check_close_times(f, JUMP_DG, 0.0, 1.0, triples),
                         PASS))
    late = [{"k": 0.5, "s": s, "t": t, "r": 0.5, "R": 1.0, "x0": 0.0}
            for s in (-0.9, -0.5) for t in (-0.4, -0.1) if s < t]
    items.append(_expect("energy (+) on downward jump, k=1/2, t>-1",
                         check_dg_membership(f, JUMP_DG, samples=late), PASS))
    across = [{"k": -0.5, "s": -1.5, "t": -1.0 + spec.dt / 2, "r": 0.5, "R": 1.0, "x0": 0.0}]
    items.append(_expect("energy (+) on upward jump (-f), k=-1/2, s<-1<t",
                         check_dg_membership(-f, JUMP_DG, samples=across), FAIL))

    x = spec.x_centers()
    items.append(_expect("H1 intermediate value on u=x", check_ivl_h1(slice_from_profile(spec, x), -0.5, 0.5, 1.0),
                         PASS))
    h = spec.h
    ramp = np.clip(x / (2 * h) + 0.5, 0.0, 1.0)  # two intermediate cells between the plateaus
    items.append(_expect("H1 intermediate value on a resolved step",
                         check_ivl_h1(slice_from_profile(spec, ramp), 0.1, 0.9, 1.0), PASS))
    return {"resolutions": list(resolutions), "items": items, "ok": all(i["ok"] for i in items)}

"""Explicit constants of the quantitative De Giorgi chain.

Every constant is a pure function of the dimension and the De Giorgi class
parameters ``(gamma1, gamma2, gamma3, p)``.  Quantities that underflow in
binary64 (``mu``, ``beta``, ``1 - theta``, the Hölder exponent) are carried as
base-2 logarithms; when ``k0_max`` fits in ~1020 bits the exponents are exact
Python integers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import NonContractiveError, ParameterError

#: Sobolev embedding constants H^1 -> L^rho used when the caller gives none.
DEFAULT_SOBOLEV_CONSTANT = {1: 2.0, 2: 10.0, 3: 10.0}

#: Above this many bits ``k0_max`` is no longer materialised as an integer.
EXACT_K0_BITS = 1020

STAGES = (
    "rho",
    "alpha_iter",
    "energy_factor",
    "C_iter",
    "delta",
    "C_bar",
    "C_close",
    "C_ivl",
    "k0_max",
    "mu",
    "beta",
    "theta",
    "alpha_holder",
)

_LN2 = math.log(2.0)
_LOG2_LN2 = math.log2(_LN2)


def ball_volume(d: int, r: float) -> float:
    """Lebesgue measure of the radius-``r`` ball in R^d (length ``2r`` when d=1)."""
    if d == 1:
        return 2.0 * r
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


def _check_dim(d: int) -> None:
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParameterError(f"dimension must be an integer >= 1, got {d!r}")


@dataclass(frozen=True)
class PdeParams:
    lam: float
    Lam: float
    q: float
    g_norm: float
    d: int = 1

    def __post_init__(self) -> None:
        for name in ("lam", "Lam", "q", "g_norm"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_dim(self.d)
        if not (0 < self.lam <= self.Lam):
            raise ParameterError(f"need 0 < lambda <= Lambda, got {self.lam}, {self.Lam}")
        if not self.q > max(2.0, (self.d + 2) / 2):
            raise ParameterError(f"need q > max(2, (d+2)/2), got q={self.q} for d={self.d}")
        if not self.g_norm >= 0:
            raise ParameterError(f"source norm must be >= 0, got {self.g_norm}")


@dataclass(frozen=True)
class DgParams:
    gamma1: float
    gamma2: float
    gamma3: float
    p: float

    def __post_init__(self) -> None:
        for name in ("gamma1", "gamma2", "gamma3", "p"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ParameterError("gamma1 and gamma2 must be positive")
        if not self.gamma3 >= 0:
            raise ParameterError("gamma3 must be nonnegative")
        if not self.p >= 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")

    def check_dimension(self, d: int) -> None:
        """Reject ``p >= (d+2)/d``; the iteration needs the strict inequality."""
        if not self.p < (d + 2) / d:
            raise ParameterError(f"p={self.p} must be < (d+2)/d={(d + 2) / d} for d={d}")


def sobolev_exponent(d: int, q2: float | None = None) -> float:
    _check_dim(d)
    if d == 1:
        return math.inf
    if d == 2:
        if q2 is None or not (4 < q2 < math.inf):
            raise ParameterError(f"d=2 needs an exponent q2 in (4, inf), got {q2!r}")
        return float(q2)
    return 2.0 * d / (d - 2)


def iteration_exponent(p: float, rho: float) -> float:
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if not rho > 2:
        raise ParameterError(f"rho must be > 2, got {rho}")
    alpha = 2.0 / p if math.isinf(rho) else (2.0 - 2.0 / rho) / p
    # the endpoint p = (d+2)/d lands on 1 up to rounding
    if alpha <= 1.0 + 1e-12:
        raise NonContractiveError(f"iteration exponent {alpha!r} <= 1 (p={p}, rho={rho})")
    return alpha


def dg_constants_from_pde(params: PdeParams) -> DgParams:
    """De Giorgi class ``(lambda/2, 5 Lambda^2/lambda, |g|_q, q/(q-1))`` of a subsolution."""
    return DgParams(
        gamma1=params.lam / 2,
        gamma2=5 * params.Lam**2 / params.lam,
        gamma3=params.g_norm,
        p=params.q / (params.q - 1),
    )


def gradient_bound(d: int, k: float, dg: DgParams) -> float:
    """Universal bound on the space-time gradient energy of ``(u-k)_+`` over B_{5/4}.

    Valid for ``u <= 1`` on Q_{3/2}; every term carries a power of ``1-k``.
    """
    _check_dim(d)
    if k > 1:
        raise ParameterError(f"truncation level must be <= 1, got {k}")
    vol = ball_volume(d, 1.5)
    g1, g2, g3, p = dg.gamma1, dg.gamma2, dg.gamma3, dg.p
    return (
        (1 - k) ** 2 / g1 * vol
        + 32 * g2 / g1 * vol * (1 - k) ** 2
        + 2 ** (1 / p) * g3 / g1 * vol ** (1 / p) * (1 - k)
    )


def close_times_constants(d: int, k: float, l: float, dg: DgParams) -> tuple[float, float]:
    """Constants ``(C1, C2)`` of the close-times inequality

    ``(l-k)^2 |u>=l,(tau,t2)xB1| |u<=k,(t1,tau)xB1| <= C1 |k<u<l,(t1,tau)xB2|^(1/2) + C2 (t2-t1)^(2+1/p)``.

    C1 collects the intermediate-set term (bounded via ``M <= M^(1/2) (2|B_{5/4}|)^(1/2)``)
    and the H^1 intermediate value term with the gradient bound; C2 collects
    the ``gamma2`` and ``gamma3`` time terms after integrating over ``s`` and ``t``.
    """
    if not k < l <= 1:
        raise ParameterError(f"need k < l <= 1, got k={k}, l={l}")
    p = dg.p
    vol = ball_volume(d, 1.25)
    cbar = gradient_bound(d, k, dg)
    c1 = (l - k) ** 2 * 2 * vol * math.sqrt(2 * vol) + 2 * (1 - k) ** 2 * 1.25 * vol * math.sqrt(cbar) / (l - k)
    c2 = 2 * 2 ** (1 - 1 / p) * dg.gamma2 * (1 - k) ** 2 * vol**2 + dg.gamma3 * (1 - k) * vol ** (1 + 1 / p) / 4
    return c1, c2


def ivl_constant(d: int, k: float, l: float, dg: DgParams) -> float:
    """Constant of the parabolic intermediate value inequality at levels ``k < l <= 1``.

    Adjacent time intervals of length ``1/n`` are fed to the close-times
    inequality; the choice ``n = floor(2 m^(-p/(4p+2))) + 1`` gives
    ``4 n^2 C1' m^(1/2) + 4 C2 2^(2+1/p) n^(-1/p) <= (36 C1' + 16 C2) m^(1/(4p+2))``
    for ``m <= 1``; for ``m > 1`` the trivial bound ``(l-k)^2 |B1|^2`` applies.
    """
    c1, c2 = close_times_constants(d, k, l, dg)
    b1 = ball_volume(d, 1.0)
    # |u<l| = |u<=k| + |k<u<l| on the early interval
    c1_prime = c1 + (l - k) ** 2 * 2 * b1 * math.sqrt(2 * ball_volume(d, 2.0))
    return max(36 * c1_prime + 16 * c2, (l - k) ** 2 * b1**2)


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    formula: str
    citation: str
    value: Any = None
    log2_value: Any = None

    def to_dict(self) -> dict[str, Any]:
        out = {"name": self.name, "formula": self.formula, "citation": self.citation}
        if self.value is not None:
            out["value"] = self.value
        if self.log2_value is not None:
            out["log2_value"] = self.log2_value
        return out


@dataclass(frozen=True)
class ConstantChain:
    d: int
    dg: DgParams
    sobolev_constant: float
    rho: float
    alpha_iter: float
    C_iter: float
    log2_delta: float
    delta: float
    C_bar: float
    C_ivl: float
    log2_k0_max: float
    k0_max: int | None
    log2_mu: int | None
    log2_beta: int | None
    log2_one_minus_theta: int | None
    theta: float
    alpha_holder: float
    log2_alpha_holder: float | None
    log2_neg_log2_alpha_holder: float
    #: exact split ``alpha_holder = mantissa * 2**exponent`` (mantissa in [1, 2)), when the chain is exact
    alpha_holder_mantissa: float | None = None
    alpha_holder_exponent: int | None = None
    ledger: tuple[LedgerEntry, ...] = field(default_factory=tuple)

    @property
    def exact(self) -> bool:
        return self.k0_max is not None

    def to_dict(self) -> dict[str, Any]:
        values = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("ledger", "dg", "d")
        }
        return {
            "d": self.d,
            "dg": asdict(self.dg),
            "constants": values,
            "ledger": [e.to_dict() for e in self.ledger],
        }


def _k0_from_log2(log2_x: float) -> int:
    """``ceil(2**log2_x)`` as an exact integer, for ``log2_x`` beyond float range too."""
    if log2_x < 1000:
        return math.ceil(2.0**log2_x)
    whole = math.floor(log2_x)
    mantissa = 2.0 ** (log2_x - whole)  # in [1, 2)
    return int(mantissa * 2.0**52) << (whole - 52)


def full_chain(
    d: int,
    dg: DgParams,
    *,
    sobolev_constant: float | None = None,
    q2: float | None = None,
    c_ivl: float | None = None,
) -> ConstantChain:
    """Compose every constant from ``(d, dg)`` down to the Hölder exponent bound.

    ``c_ivl`` overrides the tracked intermediate-value constant (used to probe
    sensitivity); ``sobolev_constant`` overrides the dimension default.
    """
    _check_dim(d)
    dg.check_dimension(d)
    if sobolev_constant is None:
        sobolev_constant = DEFAULT_SOBOLEV_CONSTANT.get(d, 10.0)
    if not sobolev_constant > 0:
        raise ParameterError("Sobolev constant must be positive")
    ledger: list[LedgerEntry] = []

    def note(name: str, formula: str, citation: str, value: Any = None, log2_value: Any = None) -> None:
        ledger.append(LedgerEntry(name, formula, citation, value, log2_value))

    first_lemma = "first De Giorgi lemma (L2-Linf estimate)"
    rho = sobolev_exponent(d, q2)
    note("rho", "2d/(d-2) if d>2; q2 if d=2; inf if d=1", f"{first_lemma}: Sobolev exponent",
         value="inf" if math.isinf(rho) else rho)

    alpha = iteration_exponent(dg.p, rho)
    note("alpha_iter", "(1/p)(2 - 2/rho)", f"{first_lemma}: iteration exponent", value=alpha)

    energy = 2 + 4 * dg.gamma2 + 2 * dg.gamma3
    note("energy_factor", "E = 2 + 4 gamma2 + 2 gamma3 (sup_t energy <= E 4^k U_{k-2}^(1/p))",
         f"{first_lemma}: energy inequality averaged over s in (-r_{{k-1}}^2, -r_k^2)", value=energy)

    k_factor = 4 * energy * sobolev_constant**2 * (1 + energy / dg.gamma1)
    c_iter = 64 * max(k_factor, 1.0)
    note("C_iter",
         "64 max(1, 4 E C_S^2 (1 + E/gamma1)); U_k <= C_iter^k U_{k-2}^alpha_iter",
         f"{first_lemma}: Chebyshev factor 4^(k+1), Sobolev embedding, gradient energy", value=c_iter)

    expo = alpha**2 / (alpha - 1) ** 2
    log2_delta = -1.0 - expo * math.log2(c_iter**2)
    delta = 2.0**log2_delta if log2_delta > -1074 else 0.0
    note("delta", "(1/2) (C_iter^2)^(-alpha^2/(alpha-1)^2), V_k = U_{2k}",
         "recurrence convergence lemma: threshold C^(-alpha^2/(alpha-1)^2)",
         value=delta if delta > 0 else None, log2_value=log2_delta)

    c_bar = gradient_bound(d, 0.0, dg)
    note("C_bar", "(1-k)^2/g1 |B_3/2| + 32 g2/g1 |B_3/2| (1-k)^2 + 2^(1/p) g3/g1 |B_3/2|^(1/p) (1-k), k=0",
         "universal bound of the L2 norm of the gradient", value=c_bar)

    c1, c2 = close_times_constants(d, 0.0, 0.5, dg)
    note("C_close", "C1 |k<u<l|^(1/2) + C2 (t2-t1)^(2+1/p) at k=0, l=1/2",
         "key inequality for close times", value=[c1, c2])

    if c_ivl is None:
        c_ivl = ivl_constant(d, 0.0, 0.5, dg)
        how = "max(36 C1' + 16 C2, (l-k)^2 |B1|^2) at k=0, l=1/2"
    else:
        how = "caller override"
    if not c_ivl > 0:
        raise ParameterError("C_ivl must be positive")
    note("C_ivl", how, "parabolic intermediate value lemma (second De Giorgi lemma), pigeonhole in time",
         value=c_ivl)

    q1bar = ball_volume(d, 1.0)
    q2vol = 4 * ball_volume(d, 2.0)
    power = 4 * dg.p + 2
    log2_x = power * (math.log2(2 * c_ivl / q1bar) - log2_delta) + math.log2(q2vol)
    lowering = "lowering the maximum"
    if log2_x <= EXACT_K0_BITS:
        k0 = _k0_from_log2(log2_x) + 1
        log2_k0 = math.log2(k0)
        log2_mu = -(k0 + 2)
        log2_beta = log2_mu + 1
        log2_omt = log2_mu - 1
        note("k0_max", "ceil((2 C_ivl/(delta |Qbar_1|))^(4p+2) |Q_2|) + 1",
             f"{lowering}: bound on the number of disjoint intermediate sets", value=k0, log2_value=log2_k0)
        note("mu", "2^-(k0_max + 2)", f"{lowering}: choice of mu", log2_value=log2_mu)
        note("beta", "2^-(k0_max + 1) = 2 mu", "source-term rescaling constant beta", log2_value=log2_beta)
        if log2_omt > -1000:
            eps = 2.0**log2_omt
            theta = 1.0 - eps
            alpha_h = -math.log1p(-eps) / _LN2
            log2_alpha = math.log2(alpha_h)
            frac, ex = math.frexp(alpha_h)
            mant, expo = 2 * frac, ex - 1
        else:
            theta = 1.0
            # -log2(1 - eps) = eps/ln2 (1 + eps/2 + ...); the correction is below 2^-1000
            log2_alpha = float(log2_omt) - _LOG2_LN2
            alpha_h = 2.0**log2_alpha if log2_alpha > -1074 else 0.0
            mant, expo = 1.0 / _LN2, log2_omt
        log2_neg_log2_alpha = math.log2(-log2_alpha)
    else:
        k0 = log2_mu = log2_beta = log2_omt = log2_alpha = mant = expo = None
        log2_k0 = log2_x  # the ceil and +1 are invisible at this magnitude
        theta, alpha_h = 1.0, 0.0
        log2_neg_log2_alpha = log2_k0
        note("k0_max", "ceil((2 C_ivl/(delta |Qbar_1|))^(4p+2) |Q_2|) + 1 (symbolic)",
             f"{lowering}: bound on the number of disjoint intermediate sets", log2_value=log2_k0)
        note("mu", "2^-(k0_max + 2) (symbolic: log2 mu = -2^log2_k0_max - 2)", f"{lowering}: choice of mu",
             log2_value="-(2^%r + 2)" % log2_k0)
        note("beta", "2 mu (symbolic: log2 beta = -2^log2_k0_max - 1)", "source-term rescaling constant beta",
             log2_value="-(2^%r + 1)" % log2_k0)
    note("theta", "1 - mu/2", "local decrease of the oscillation",
         value=theta, log2_value=log2_omt if log2_omt is not None else None)
    note("alpha_holder", "-log2(theta), evaluated as -log1p(-mu/2)/ln 2",
         "translation of the definition: theta = 2^-alpha",
         value=alpha_h if alpha_h > 0 else None,
         log2_value=log2_alpha if log2_alpha is not None else "-2^%r" % log2_neg_log2_alpha)

    return ConstantChain(
        d=d,
        dg=dg,
        sobolev_constant=float(sobolev_constant),
        rho=rho,
        alpha_iter=alpha,
        C_iter=c_iter,
        log2_delta=log2_delta,
        delta=delta,
        C_bar=c_bar,
        C_ivl=c_ivl,
        log2_k0_max=log2_k0,
        k0_max=k0,
        log2_mu=log2_mu,
        log2_beta=log2_beta,
        log2_one_minus_theta=log2_omt,
        theta=theta,
        alpha_holder=alpha_h,
        log2_alpha_holder=log2_alpha,
        log2_neg_log2_alpha_holder=log2_neg_log2_alpha,
        alpha_holder_mantissa=mant,
        alpha_holder_exponent=expo,
        ledger=tuple(ledger),
    )

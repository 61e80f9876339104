"""The nonlinear recurrence ``V_k <= C^k V_{k-1}^alpha`` and its convergence threshold.

The worst case (equality) is simulated in base-2 logarithms, since the
sequence decays double-exponentially.  The exponent bound on
``S_k = sum_i i alpha^(k-i)`` is checked in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NonContractiveError, ParameterError
from .io import dumps_csv


@dataclass(frozen=True)
class RecurrenceSpec:
    C: float
    alpha: float
    V0: float
    kmax: int = 20

    def __post_init__(self) -> None:
        if not self.alpha > 1:
            raise NonContractiveError(f"alpha must exceed 1, got {self.alpha}")
        if not self.C > 0:
            raise ParameterError(f"C must be positive, got {self.C}")
        if not self.V0 >= 0 or math.isinf(self.V0):
            raise ParameterError(f"V0 must be finite and nonnegative, got {self.V0}")
        if self.kmax < 0:
            raise ParameterError("kmax must be nonnegative")


def threshold_exponent(alpha: float) -> float:
    if not alpha > 1:
        raise NonContractiveError(f"alpha must exceed 1, got {alpha}")
    return alpha**2 / (alpha - 1) ** 2


def recurrence_threshold(C: float, alpha: float) -> float:
    """``C^(-alpha^2/(alpha-1)^2)``: initial values below it make the recurrence collapse."""
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    return C ** (-threshold_exponent(alpha))


def _exp2(x: float) -> float:
    if x > 1024:
        return math.inf
    if x < -1100:
        return 0.0
    return 2.0**x


@dataclass(frozen=True)
class RecurrenceResult:
    spec: RecurrenceSpec
    log2_sequence: list[float]
    log2_envelope: list[float]
    verdict: str
    envelope_holds: bool
    sk_bound_holds: bool
    notes: list[str] = field(default_factory=list)

    @property
    def sequence(self) -> list[float]:
        return [_exp2(x) for x in self.log2_sequence]

    @property
    def envelope(self) -> list[float]:
        return [_exp2(x) for x in self.log2_envelope]

    def to_csv(self) -> str:
        rows = []
        for k, (lv, le) in enumerate(zip(self.log2_sequence, self.log2_envelope)):
            rows.append([k, _exp2(lv), _exp2(le), lv, le])
        return dumps_csv(["k", "V_k", "envelope_k", "log2_V_k", "log2_envelope_k"], rows)


def sk_exact(alpha: float | Fraction, k: int) -> Fraction:
    """``S_k = sum_{i=1}^k i alpha^(k-i)`` in exact arithmetic (``alpha`` taken as its exact binary value)."""
    a = Fraction(alpha)
    total = Fraction(0)
    for i in range(1, k + 1):
        total = total * a + i  # Horner: S_i = alpha S_{i-1} + i
    return total


def sk_bound_holds(alpha: float, kmax: int) -> bool:
    """Exactly check ``S_k <= alpha^2/(alpha-1)^2 alpha^(k-1)`` for ``1 <= k <= kmax``."""
    a = Fraction(alpha)
    if not a > 1:
        raise NonContractiveError(f"alpha must exceed 1, got {alpha}")
    e = a * a / ((a - 1) * (a - 1))
    s = Fraction(0)
    power = Fraction(1)  # alpha^(k-1)
    for k in range(1, kmax + 1):
        s = s * a + k
        if s > e * power:
            return False
        power *= a
    return True


def geometric_derivative_direct(X: float, k: int) -> float:
    return math.fsum(i * X ** (i - 1) for i in range(1, k + 1))


def geometric_derivative_closed(X: float, k: int) -> float:
    """Closed form of ``sum_{i=0}^k i X^(i-1)`` for ``X != 1``."""
    return (X**k * (k * X - (k + 1)) + 1) / (1 - X) ** 2


def simulate_recurrence(spec: RecurrenceSpec) -> RecurrenceResult:
    """Run the equality dynamics and compare with the closed-form envelope.

    The envelope ``(C^E V0)^(alpha^k)`` (``E = alpha^2/(alpha-1)^2``) only
    dominates the dynamics for ``C >= 1``; for ``C < 1`` the dynamics are
    dominated by those with ``C = 1``, so ``max(C, 1)`` is used for both the
    envelope and the verdict.
    """
    C, a = spec.C, spec.alpha
    E = threshold_exponent(a)
    c_env = max(C, 1.0)
    log2_c = math.log2(C)
    log2_v0 = math.log2(spec.V0) if spec.V0 > 0 else -math.inf
    base = E * math.log2(c_env) + log2_v0

    seq = [log2_v0]
    env = [base]
    for k in range(1, spec.kmax + 1):
        prev = seq[-1]
        seq.append(prev if prev == -math.inf else k * log2_c + a * prev)
        env.append(base * a**k if base != 0 else 0.0)

    notes = []
    overflow = any(x > 1024 for x in seq)
    if overflow:
        notes.append("sequence overflows binary64; values saturate to +inf")
    # rounding of the logarithms is the only slack allowed
    holds = all(s <= e or s <= e + 1e-12 * max(1.0, abs(e)) for s, e in zip(seq, env))
    threshold = recurrence_threshold(c_env, a)
    converges = spec.V0 < threshold and not overflow
    if spec.V0 <= threshold and not holds:
        notes.append("equality dynamics exceeded the envelope below the threshold")
    sk_ok = sk_bound_holds(a, max(spec.kmax, 1))
    return RecurrenceResult(
        spec=spec,
        log2_sequence=seq,
        log2_envelope=env,
        verdict="converges" if converges else "inconclusive",
        envelope_holds=holds,
        sk_bound_holds=sk_ok,
        notes=notes,
    )

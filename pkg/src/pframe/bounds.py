"""Closed-form lower bounds and minima of the p-frame potential."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

BOUND_NAMES = ("welch", "equiangular", "venkov", "onb_plus_repeat", "kcopies", "phase_p0")


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    applicable: bool
    sharpness_note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _even_order(p) -> int:
    """Return ``k`` for ``p = 2k``, or raise."""
    if isinstance(p, bool):
        raise ValueError("p must be an even integer")
    try:
        fp = float(p)
    except (TypeError, ValueError):
        raise ValueError("p must be an even integer") from None
    if not fp.is_integer() or int(fp) < 2 or int(fp) % 2:
        raise ValueError("Welch bound requires even integer p")
    return int(fp) // 2


def double_factorial_ratio(d: int, p: int) -> Fraction:
    """``(p-1)!! / (d (d+2) ... (d+p-2))`` for even ``p``, exactly."""
    k = _even_order(p)
    num = 1
    den = 1
    for j in range(k):
        num *= 2 * j + 1
        den *= d + 2 * j
    return Fraction(num, den)


def welch_bound(d: int, n: int, p) -> BoundReport:
    """``N^2 / C(d+k-1, k)`` for ``p = 2k``."""
    k = _even_order(p)
    value = Fraction(n * n, math.comb(d + k - 1, k))
    return BoundReport("welch", float(value), True, "not sharp for d < N <= C(d+k-1, k) when p > 2")


def equiangular_constant(d: int, n: int) -> float:
    """Common ``|<x_i, x_j>|`` of an equiangular unit norm tight frame."""
    if n < d:
        raise ValueError("equiangular constant needs N >= d")
    if n == d:
        return 0.0
    return math.sqrt((n - d) / (d * (n - 1)))


def equiangular_bound(d: int, n: int, p: float) -> BoundReport:
    """``N(N-1) ((N-d)/(d(N-1)))^(p/2) + N``, a lower bound for ``p > 2``."""
    note = "sharp iff an equiangular FUNTF with (N, d) exists"
    if n < d or n < 2:
        return BoundReport("equiangular", float(n), False, "requires N >= d; " + note)
    ratio = (n - d) / (d * (n - 1))
    value = n * (n - 1) * ratio ** (p / 2.0) + n
    if p < 2:
        note = "not a lower bound for p < 2; " + note
    return BoundReport("equiangular", value, p >= 2, note)


def venkov_bound(d: int, n: int, p) -> BoundReport:
    """``N^2 (p-1)!! / (d (d+2) ... (d+p-2))`` for symmetric configurations."""
    value = n * n * double_factorial_ratio(d, p)
    return BoundReport(
        "venkov", float(value), True,
        "for symmetric sets {x_i} = {-x_i}; equality iff spherical p-design",
    )


def kcopies_min(d: int, k: int, p: float) -> BoundReport:
    """Minimum ``k^2 d`` over ``N = kd`` points for ``0 < p < 2``."""
    ok = 0 < p < 2
    note = "attained exactly by k copies of an orthonormal basis (up to signs)"
    if not ok:
        note = "requires 0 < p < 2"
    return BoundReport("kcopies", float(k * k * d), ok, note)


def phase_p0(d: int) -> BoundReport:
    """``log(d(d+1)/2) / log(d)``, the crossover exponent for ``N = d + 1``."""
    if d < 2:
        return BoundReport("phase_p0", float("nan"), False, "requires d >= 2")
    value = math.log(d * (d + 1) / 2.0) / math.log(d)
    return BoundReport("phase_p0", value, True, "1 < p0 < 2")


def dplus1_min(d: int, p: float) -> BoundReport:
    """Minimum of the potential over ``N = d + 1`` points.

    Below ``p0`` the minimizer is an orthonormal basis plus one repeated vector
    (value ``N + 2``); between ``p0`` and 2 the Hoelder branch
    ``2^(p/p0) (Nd)^(1-p/p0) + N`` applies; from 2 on the equiangular value.
    For ``d > 2`` and ``p < 2`` this rests on an unproven hypothesis.
    """
    n = d + 1
    if d < 2:
        return BoundReport("onb_plus_repeat", float("nan"), False, "requires d >= 2")
    p0 = phase_p0(d).value
    conditional = "" if d == 2 else "conjectural for d > 2 (unproven hypothesis at p0); "
    if p <= p0:
        return BoundReport(
            "onb_plus_repeat", float(n + 2), True,
            conditional + "attained by an orthonormal basis plus one repeated vector",
        )
    if p < 2:
        value = 2.0 ** (p / p0) * (n * d) ** (1.0 - p / p0) + n
        return BoundReport(
            "onb_plus_repeat", value, True,
            conditional + "attained by an equiangular FUNTF (p0 < p < 2)",
        )
    if d == 2:
        return BoundReport("onb_plus_repeat", 6.0 / 2.0 ** p + 3.0, True,
                           "attained by the equiangular FUNTF of three vectors")
    eq = equiangular_bound(d, n, p)
    return BoundReport("onb_plus_repeat", eq.value, True,
                       "equals the equiangular bound; the simplex frame attains it")


@dataclass(frozen=True)
class BoundComparison:
    welch: BoundReport
    equiangular: BoundReport
    applicable: bool
    condition_met: bool
    equiangular_exceeds_welch: bool

    def to_dict(self) -> dict:
        return {
            "welch": self.welch.to_dict(),
            "equiangular": self.equiangular.to_dict(),
            "applicable": self.applicable,
            "condition_met": self.condition_met,
            "equiangular_exceeds_welch": self.equiangular_exceeds_welch,
        }


def compare_bounds(d: int, n: int, p) -> BoundComparison:
    """Compare the Welch and equiangular bounds for even ``p``.

    For ``p > 2`` and ``d < N <= C(d+k-1, k)`` the equiangular bound is
    strictly larger, so the Welch bound is not attained there.
    """
    k = _even_order(p)
    w = welch_bound(d, n, p)
    e = equiangular_bound(d, n, p)
    applicable = k > 1
    condition = applicable and d < n <= math.comb(d + k - 1, k)
    exceeds = e.value > w.value
    if condition and not exceeds:
        raise ArithmeticError("equiangular bound fails to exceed the Welch bound")
    return BoundComparison(w, e, applicable, condition, exceeds)


def applicable_bounds(d: int, n: int, p: float) -> list[BoundReport]:
    """Every bound that is a valid lower bound for ``FP_{p,N}`` on ``S^{d-1}``."""
    out = [BoundReport("diagonal", float(n), True,
                       "attained iff the points are orthonormal (needs N <= d)")]
    is_even = float(p).is_integer() and int(p) % 2 == 0 and p >= 2
    if is_even:
        out.append(welch_bound(d, n, p))
    if n >= d and n >= 2:
        out.append(equiangular_bound(d, n, p))
    if n >= d and p <= 2:
        out.append(BoundReport("frame_potential", n * n / d, True,
                               "p = 2 minimum N^2/d, valid for p <= 2 by monotonicity in p"))
    if n % d == 0:
        out.append(kcopies_min(d, n // d, p))
    if n == d + 1 and d >= 2:
        out.append(dplus1_min(d, p))
        out.append(phase_p0(d))
    return out

"""Growth of ``E[Z_n(x)**s1 Z_n(conj x)**s2]`` on the unit circle.

For ``|x| = 1`` and ``x`` not a root of unity the generating function
collapses to ``prod_{k=-s2..s1} (1 - x**k t)**S(k)`` with
``S(k) = (-1)**(k+1) binom(s1+s2, s2+k)``.  Poles sit at even ``k``; the
highest pole order ``M`` wins, and each dominant pole contributes
``C(k0) n**(M-1) x**(k0 n)`` where ``C(k0)`` is the residue of the top
partial-fraction term divided by ``(M-1)!``.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .errors import QueryError, RootOfUnityError
from .moments import gf_moment_integer
from .partitions import MomentQuery

__all__ = [
    "UNIT_TOL",
    "ROOT_EPS",
    "normalize_unit",
    "check_not_root_of_unity",
    "collapsed_exponent",
    "dominant_indices",
    "k0_case_table",
    "constant_C",
    "AsymptoticPrediction",
    "leading_terms",
    "predict_mixed_moment",
    "predict_abs_moment",
    "real_imag_expectations",
    "TrigPolynomialGrowth",
    "real_imag_moment_growth",
    "mixed_moment_exact",
    "RatioCheck",
    "verify_ratio",
    "prediction_table",
    "write_prediction_csv",
]

UNIT_TOL = 1e-12
ROOT_EPS = 1e-9
# (M-1)! must stay inside double range.
MAX_FACTORIAL_ARG = 170


def normalize_unit(x: complex) -> complex:
    """Project ``x`` onto the unit circle if it is within ``UNIT_TOL`` of it."""
    x = complex(x)
    r = abs(x)
    if abs(r - 1) > UNIT_TOL:
        raise QueryError(f"|x| must be 1 (within {UNIT_TOL}), got {r!r}")
    return x / r


def check_not_root_of_unity(x: complex, max_order: int, eps: float = ROOT_EPS) -> bool:
    """True iff ``|x**j - 1| > eps`` for every ``1 <= j <= max_order``."""
    phi = cmath.phase(normalize_unit(x))
    return all(abs(cmath.exp(1j * j * phi) - 1) > eps for j in range(1, max_order + 1))


def collapsed_exponent(s1: int, s2: int, k: int) -> int:
    """``S(k) = (-1)**(k+1) binom(s1+s2, s2+k)`` for ``-s2 <= k <= s1``."""
    if not -s2 <= k <= s1:
        raise QueryError(f"k={k} outside [-{s2}, {s1}]")
    sign = -1 if k % 2 == 0 else 1
    return sign * math.comb(s1 + s2, s2 + k)


def dominant_indices(s1: int, s2: int) -> tuple[int, tuple[int, ...]]:
    """``(M, k0s)``: the maximal pole order over even ``k`` and where it is attained."""
    if s1 < 0 or s2 < 0 or s1 + s2 < 1:
        raise QueryError("need nonnegative s1, s2 with s1 + s2 >= 1")
    orders = {k: -collapsed_exponent(s1, s2, k) for k in range(-s2, s1 + 1) if k % 2 == 0}
    M = max(orders.values())
    return M, tuple(k for k in sorted(orders) if orders[k] == M)


def k0_case_table(s1: int, s2: int) -> tuple[int, ...]:
    """Dominant indices read off from ``(s1 - s2) mod 4``."""
    d = s1 - s2
    r = d % 4
    if r == 0:
        return (d // 2,)
    if r == 1:
        return ((d - 1) // 2,)
    if r == 3:
        return ((d + 1) // 2,)
    return (d // 2 - 1, d // 2 + 1)


def _xpow(phi: float, k: int) -> complex:
    return cmath.exp(1j * k * phi)


def constant_C(s1: int, s2: int, k0: int, x: complex) -> complex:
    """``C(k0) = prod_{k != k0} (1 - x**k conj(x)**k0)**S(k) / (binom(s1+s2, s2+k0) - 1)!``."""
    if k0 % 2 or not -s2 <= k0 <= s1:
        raise QueryError(f"k0={k0} must be even and inside [-{s2}, {s1}]")
    phi = cmath.phase(normalize_unit(x))
    order = math.comb(s1 + s2, s2 + k0)
    if order - 1 > MAX_FACTORIAL_ARG:
        raise OverflowError(f"({order}-1)! exceeds double range")
    prod = 1.0 + 0j
    for k in range(-s2, s1 + 1):
        if k == k0:
            continue
        base = 1 - _xpow(phi, k - k0)
        if abs(base) < ROOT_EPS:
            raise RootOfUnityError(f"x**{k - k0} is within {ROOT_EPS} of 1")
        prod *= base ** collapsed_exponent(s1, s2, k)
    return prod / math.factorial(order - 1)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """``n**(M-1) * sum C(k0) x**(k0 n)`` over the dominant ``k0``."""

    s1: int
    s2: int
    x: complex
    M: int
    terms: tuple[tuple[int, complex], ...]

    @property
    def exponent(self) -> int:
        return self.M - 1

    def bracket(self, n: int) -> complex:
        phi = cmath.phase(self.x)
        return sum((C * _xpow(phi, k0 * n) for k0, C in self.terms), 0j)

    def __call__(self, n: int) -> complex:
        return float(n) ** self.exponent * self.bracket(n)


def leading_terms(s1: int, s2: int, x: complex) -> AsymptoticPrediction:
    x = normalize_unit(x)
    if s1 + s2 < 1:
        raise QueryError("need s1 + s2 >= 1")
    if not check_not_root_of_unity(x, s1 + s2):
        raise RootOfUnityError(f"x = {x} is within {ROOT_EPS} of a root of unity of order <= {s1 + s2}")
    M, k0s = dominant_indices(s1, s2)
    table = k0_case_table(s1, s2)
    if k0s != table:
        raise AssertionError(f"dominant indices {k0s} disagree with the case table {table}")
    terms = tuple((k0, constant_C(s1, s2, k0, x)) for k0 in k0s)
    return AsymptoticPrediction(s1, s2, x, M, terms)


def predict_mixed_moment(p: AsymptoticPrediction, n: int) -> complex:
    if n < 1:
        raise QueryError("n must be >= 1")
    return p(n)


def predict_abs_moment(s: int, x: complex, n: int) -> float:
    """Leading term of ``E|Z_n(x)|**(2s)``.

    ``n**(M-1) prod_{k=1..s} |1 - x**k|**(2 (-1)**(k+1) binom(2s, s+k)) / (M-1)!``
    with ``M = binom(2s, s)``; factors with even ``k`` come from poles and sit
    in the denominator.
    """
    x = normalize_unit(x)
    if s < 1:
        raise QueryError("s must be >= 1")
    if not check_not_root_of_unity(x, 2 * s):
        raise RootOfUnityError(f"x = {x} is too close to a root of unity")
    M = math.comb(2 * s, s)
    if M - 1 > MAX_FACTORIAL_ARG:
        raise OverflowError(f"({M}-1)! exceeds double range")
    prod = 1.0
    for k in range(1, s + 1):
        prod *= abs(1 - x**k) ** (2 * collapsed_exponent(s, s, k))
    return float(n) ** (M - 1) * prod / math.factorial(M - 1)


def real_imag_expectations(x: complex) -> tuple[float, float]:
    """``(E[Re Z_n], E[Im Z_n]) = (1 - cos phi, -sin phi)`` for every ``n >= 1``."""
    phi = cmath.phase(normalize_unit(x))
    return 1 - math.cos(phi), -math.sin(phi)


@dataclass(frozen=True)
class TrigPolynomialGrowth:
    """``E[part(Z_n)**s] ~ n**exponent * sum_f (cos_coeffs[f] cos(f n phi) + sin_coeffs[f] sin(f n phi))``.

    ``part`` is ``"real"`` or ``"imag"``; frequencies ``f`` are even.
    """

    s: int
    x: complex
    part: str
    exponent: int
    cos_coeffs: dict[int, float]
    sin_coeffs: dict[int, float]

    def __call__(self, n: int) -> float:
        phi = cmath.phase(self.x)
        total = sum(a * math.cos(f * n * phi) for f, a in self.cos_coeffs.items())
        total += sum(b * math.sin(f * n * phi) for f, b in self.sin_coeffs.items())
        return float(n) ** self.exponent * total


def _combine_growth(s: int, x: complex, part: str, weights: Sequence[complex]) -> TrigPolynomialGrowth:
    """Keep the pairs ``(k, s-k)`` of maximal order and fold ``x**(k0 n)`` into cos/sin."""
    pairs = [(k, s - k) for k in range(s + 1)]
    orders = {k: dominant_indices(k, s - k)[0] for k, _ in pairs}
    top = max(orders.values())
    D: dict[int, complex] = {}
    for (k, rest), w in zip(pairs, weights):
        if orders[k] != top or w == 0:
            continue
        for k0, C in leading_terms(k, rest, x).terms:
            D[k0] = D.get(k0, 0j) + w * C
    cos_c: dict[int, complex] = {}
    sin_c: dict[int, complex] = {}
    for k0, d in D.items():
        f = abs(k0)
        if k0 == 0:
            cos_c[0] = cos_c.get(0, 0j) + d
        elif k0 > 0:
            cos_c[f] = cos_c.get(f, 0j) + d
            sin_c[f] = sin_c.get(f, 0j) + 1j * d
        else:
            cos_c[f] = cos_c.get(f, 0j) + d
            sin_c[f] = sin_c.get(f, 0j) - 1j * d
    scale = max([abs(v) for v in D.values()] + [1e-300])
    out_cos, out_sin = {}, {}
    for src, dst in ((cos_c, out_cos), (sin_c, out_sin)):
        for f, v in sorted(src.items()):
            if abs(v.imag) > 1e-10 * scale:
                raise ArithmeticError(f"trig coefficient at frequency {f} is not real: {v}")
            dst[f] = v.real if abs(v.real) > 1e-12 * scale else 0.0
    coeffs = list(out_cos.values()) + list(out_sin.values())
    if not any(abs(c) > 1e-12 * scale for c in coeffs):
        raise ArithmeticError("all leading trig coefficients vanish")
    return TrigPolynomialGrowth(s, normalize_unit(x), part, top - 1, out_cos, out_sin)


def real_imag_moment_growth(s: int, x: complex) -> tuple[TrigPolynomialGrowth, TrigPolynomialGrowth]:
    """Leading growth of ``E[R_n**s]`` and ``E[I_n**s]`` with ``R = Re Z``, ``I = Im Z``.

    Uses ``Re(z)**s = 2**-s sum_k binom(s,k) z**k conj(z)**(s-k)`` and
    ``Im(z)**s = (2i)**-s sum_k (-1)**(s+k) binom(s,k) z**k conj(z)**(s-k)``.
    """
    if s < 1:
        raise QueryError("s must be >= 1")
    x = normalize_unit(x)
    if not check_not_root_of_unity(x, s):
        raise RootOfUnityError(f"x = {x} is too close to a root of unity")
    re_w = [math.comb(s, k) / 2**s for k in range(s + 1)]
    im_w = [(-1) ** (s + k) * math.comb(s, k) / (2j) ** s for k in range(s + 1)]
    return _combine_growth(s, x, "real", re_w), _combine_growth(s, x, "imag", im_w)


def mixed_moment_exact(s1: int, s2: int, x: complex, n: int) -> complex:
    """``E[Z_n(x)**s1 Z_n(conj x)**s2]`` by the rational-recurrence extraction."""
    x = normalize_unit(x)
    return complex(gf_moment_integer(MomentQuery(n, (x, x.conjugate()), (s1, s2))))


@dataclass(frozen=True)
class RatioCheck:
    n: int
    exact: complex
    predicted: complex
    flagged: bool

    @property
    def ratio(self) -> complex:
        return self.exact / self.predicted if self.predicted != 0 else complex("nan")

    @property
    def ratio_abs(self) -> float:
        return abs(self.ratio)


def verify_ratio(s1: int, s2: int, x: complex, n: int, prediction: AsymptoticPrediction | None = None) -> RatioCheck:
    """Exact moment against the leading-term prediction at ``n``.

    ``flagged`` marks ``n`` where the oscillating bracket nearly vanishes
    (``|prediction| < 1e-6 n**(M-1)``); the ratio is meaningless there.
    """
    p = leading_terms(s1, s2, x) if prediction is None else prediction
    exact = mixed_moment_exact(s1, s2, p.x, n)
    pred = predict_mixed_moment(p, n)
    flagged = abs(pred) < 1e-6 * float(n) ** p.exponent
    return RatioCheck(n, exact, pred, flagged)


def prediction_table(s1: int, s2: int, x: complex, ns: Iterable[int]) -> list[RatioCheck]:
    p = leading_terms(s1, s2, x)
    return [verify_ratio(s1, s2, x, n, p) for n in ns]


CSV_COLUMNS = ["n", "exact_re", "exact_im", "pred_re", "pred_im", "ratio_abs"]


def write_prediction_csv(rows: Iterable[RatioCheck], fh: TextIO, header: bool = True) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [r.n, repr(r.exact.real), repr(r.exact.imag), repr(r.predicted.real), repr(r.predicted.imag),
             "" if r.flagged else repr(r.ratio_abs)]
        )

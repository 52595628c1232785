"""Generating functions of ``E[Z_n^s(x)]`` and their ``n -> infinity`` limits.

Two representations of ``sum_n E[Z_n^s(x)] t**n`` are used:

* integer exponents: the finite product
  ``prod_{0 <= k <= s} (1 - x**k t)**(-binom(s, k) (-1)**|k|)`` over
  multi-indices ``k``, extracted in ``O(n)`` by first-order filters;
* exp-log: ``exp(sum_m a_m t**m / m)`` with ``a_m = prod_j (1 - x_j**m)**s_j``
  (principal branch, ``max|x| < 1``, unless all exponents are integers),
  extracted by the ``O(n**2)`` recurrence ``n g_n = sum_j a_j g_{n-j}``.

On ``|x| = 1`` the finite product has high-order poles and numerator
coefficients far larger than the result, so its extraction can lose every
digit (e.g. ``E|Z_n|**6`` near ``x = 1``).  The exp-log recurrence only
combines the bounded weights ``a_m`` and stays accurate, so
:func:`gf_moment_integer` uses it up to ``EXPLOG_MAX_N``.

The limits for ``max|x| < 1`` drop the ``k = 0`` factor ``1/(1 - t)`` and
evaluate the remaining product at ``t = 1``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QueryError, RootOfUnityError, TruncationError
from .partitions import MomentQuery, _as_exponent
from .series import (
    FactorList,
    TruncatedSeries,
    series_exp,
)

__all__ = [
    "COLLISION_EPS",
    "EXPLOG_MAX_N",
    "LATTICE_MAX_RADIUS",
    "GeneratingFunctionSpec",
    "generating_function",
    "integer_factor_list",
    "gf_moment_integer",
    "gf_moment_complex",
    "gf_moment",
    "limit_integer",
    "limit_complex",
    "ratio_limit",
    "mellin_fourier_limit",
    "abs_moment_limit_closed_form",
]

COLLISION_EPS = 1e-14
# O(n**2) exp-log extraction stays below a few seconds up to here.
EXPLOG_MAX_N = 20_000
LATTICE_MAX_RADIUS = 512
# Keeps the dense lattice evaluation in memory.
LATTICE_MAX_POINTS = 4_000_000


def _multi_indices(ss: Sequence[int]):
    return itertools.product(*(range(s + 1) for s in ss))


def _monomial(xs: Sequence[complex], k: Sequence[int]) -> complex:
    out = 1.0 + 0j
    for x, kj in zip(xs, k):
        out *= x**kj
    return out


def integer_factor_list(xs: Sequence[complex], ss: Sequence[int]) -> FactorList:
    """Factors ``(x**k, -binom(s, k) (-1)**|k|)`` for every multi-index ``k <= s``.

    The ``k = 0`` factor is ``(1, -1)``, i.e. the pole ``1/(1 - t)``.
    """
    factors = []
    for k in _multi_indices(ss):
        coeff = 1
        for s, kj in zip(ss, k):
            coeff *= math.comb(s, kj)
        e = -coeff * (-1) ** sum(k)
        factors.append((_monomial(xs, k), e))
    return FactorList(tuple(factors))


@dataclass(frozen=True)
class GeneratingFunctionSpec:
    """A moment query together with the representation used to expand it.

    ``representation`` is ``"integer-product"`` (``factors`` set) or
    ``"exp-log"`` (``factors`` is None).  The ``n`` of the query is ignored.
    """

    query: MomentQuery
    representation: str
    factors: FactorList | None = None

    def coefficient(self, n: int) -> complex:
        if self.representation == "integer-product":
            return complex(self.factors.coefficient(n))
        return complex(_explog_series(self.query, n)[n])


def generating_function(q: MomentQuery, representation: str | None = None) -> GeneratingFunctionSpec:
    if representation is None:
        representation = "integer-product" if q.integer_exponents else "exp-log"
    if representation == "integer-product":
        if not q.integer_exponents:
            raise QueryError("the finite product needs nonnegative integer exponents")
        factors = integer_factor_list(q.xs, q.ss)
        _check_pole_cancellation(q, factors)
        return GeneratingFunctionSpec(q, representation, factors)
    if representation == "exp-log":
        if q.norm >= 1 and not q.integer_exponents:
            raise QueryError(f"exp-log representation needs max|x| < 1, got {q.norm}")
        return GeneratingFunctionSpec(q, representation)
    raise QueryError(f"unknown representation {representation!r}")


def _check_pole_cancellation(q: MomentQuery, factors: FactorList) -> None:
    # A numerator factor (1 - x^k t) with x^k ~ 1 would cancel the 1/(1-t) pole:
    # x sits on a root of unity of order dividing the multi-index.
    for (a, e), k in zip(factors.factors, _multi_indices(q.ss)):
        if e > 0 and any(k) and abs(1 - a) < COLLISION_EPS:
            raise RootOfUnityError(
                f"factor x^{k} = {a} coincides with 1: the evaluation point is a root of unity"
            )


def gf_moment_integer(q: MomentQuery, representation: str | None = None) -> complex:
    """``[f^(s)(x, t)]_n`` for nonnegative integer exponents.

    By default the exp-log recurrence for ``n <= EXPLOG_MAX_N`` and the
    finite product (``O(n * 2**sum(s))``) beyond.  Root-of-unity points that
    cancel the ``1/(1 - t)`` pole are rejected either way.
    """
    if not q.integer_exponents:
        raise QueryError("gf_moment_integer needs nonnegative integer exponents")
    factors = integer_factor_list(q.xs, q.ss)
    _check_pole_cancellation(q, factors)
    if representation is None:
        representation = "exp-log" if q.n <= EXPLOG_MAX_N else "integer-product"
    return generating_function(q, representation).coefficient(q.n)


def _principal_power(base: complex, s) -> complex:
    if isinstance(s, int):
        return base**s
    return cmath.exp(s * cmath.log(base))


def _explog_series(q: MomentQuery, N: int) -> TruncatedSeries:
    inner = np.zeros(N + 1, dtype=complex)
    for m in range(1, N + 1):
        a = 1.0 + 0j
        for x, s in zip(q.xs, q.ss):
            a *= _principal_power(1 - x**m, s)
        inner[m] = a / m
    return series_exp(TruncatedSeries(inner))


def gf_moment_complex(q: MomentQuery) -> complex:
    """``[exp(sum_m a_m t**m / m)]_n`` with ``a_m = prod_j (1 - x_j**m)**s_j``."""
    if q.norm >= 1 and not q.integer_exponents:
        raise QueryError(f"gf_moment_complex needs max|x| < 1, got {q.norm}")
    return complex(_explog_series(q, q.n)[q.n])


def gf_moment(q: MomentQuery) -> complex:
    """Integer-product path when possible, exp-log otherwise."""
    if q.integer_exponents:
        return gf_moment_integer(q)
    return gf_moment_complex(q)


def _validate_points(xs, ss, strict: bool = True):
    xs = tuple(complex(x) for x in xs)
    ss = tuple(_as_exponent(s) for s in ss)
    if len(xs) == 0 or len(xs) != len(ss):
        raise QueryError(f"need 1 <= len(xs) == len(ss), got {len(xs)} and {len(ss)}")
    norm = max(abs(x) for x in xs)
    if strict and norm >= 1:
        raise QueryError(f"limits exist only for max|x| < 1, got {norm}")
    return xs, ss, norm


def limit_integer(xs: Sequence[complex], ss: Sequence[int]) -> complex:
    """``prod_{k != 0, k <= s} (1 - x**k)**(-binom(s, k) (-1)**|k|)``."""
    xs, ss, _ = _validate_points(xs, ss)
    if not all(isinstance(s, int) for s in ss):
        raise QueryError("limit_integer needs nonnegative integer exponents")
    out = 1.0 + 0j
    for a, e in integer_factor_list(xs, ss).factors[1:]:
        out *= (1 - a) ** e
    return out


def _binomial_row(s, K: int) -> np.ndarray:
    """``binom(s, k) (-1)**k`` for k = 0..K by the running product."""
    row = np.empty(K + 1, dtype=complex)
    row[0] = 1.0
    for k in range(1, K + 1):
        row[k] = row[k - 1] * -(s - k + 1) / k
    return row


def _box_tail_bound(ss, radii, K: int, norm: float) -> float:
    """Upper bound on ``sum_{k outside [0,K]^p} |binom(s,k) Log(1 - x^k)|``.

    Uses ``|Log(1 - w)| <= |w| / (1 - |w|) <= |w| / (1 - max|x|)`` and, per
    coordinate, the ratio bound ``|binom(s, k+1) / binom(s, k)| <= (|s| + k)/(k + 1)``
    which makes the tail past ``K`` geometric with rate
    ``rho = max(1, (|s| + K)/(K + 1)) |x|``.
    """
    inside = 1.0
    total = 1.0
    for s, r in zip(ss, radii):
        b = np.abs(_binomial_row(s, K)) * r ** np.arange(K + 1)
        t_in = float(b.sum())
        rho = max(1.0, (abs(s) + K) / (K + 1)) * r
        if b[-1] == 0:
            tail = 0.0
        elif rho >= 1:
            return math.inf
        else:
            tail = float(b[-1]) * rho / (1 - rho)
        inside *= t_in
        total *= t_in + tail
    return (total - inside) / (1 - norm)


def _lattice_terms(xs, ss, K: int) -> np.ndarray:
    """Array over ``[0, K]^p`` of ``-binom(s,k)(-1)^|k| Log(1 - x^k)`` (zero at k = 0)."""
    p = len(xs)
    expo = np.ones((1,) * p, dtype=complex)
    mono = np.ones((1,) * p, dtype=complex)
    ks = np.arange(K + 1)
    for j, (x, s) in enumerate(zip(xs, ss)):
        shape = [1] * p
        shape[j] = K + 1
        expo = expo * _binomial_row(s, K).reshape(shape)
        mono = mono * (complex(x) ** ks).reshape(shape)
    base = 1 - mono
    base.flat[0] = 1.0
    return -expo * np.log(base)


def limit_complex(
    xs: Sequence[complex],
    ss: Sequence[complex],
    tol: float = 1e-12,
    cancel: Callable[[], bool] | None = None,
) -> complex:
    """``prod_{k != 0} (1 - x**k)**(-binom(s,k)(-1)**|k|)`` over the lattice ``N^p``.

    Summed as ``exp(sum_k -binom(s,k)(-1)**|k| Log(1 - x**k))`` over the box
    ``[0, K]^p``.  ``K`` doubles from 8 until both the analytic bound on the
    omitted log-mass and the contribution of the outermost shell
    (``max_j k_j = K``) are below ``tol/2``; ``tol`` is therefore a bound on
    the relative error of the result.  ``K`` is capped at 512.

    ``cancel`` is polled between lattice sizes; returning True aborts with
    :class:`TruncationError`.
    """
    xs, ss, norm = _validate_points(xs, ss)
    if tol <= 0:
        raise QueryError("tol must be positive")
    radii = [abs(x) for x in xs]
    p = len(xs)
    K = 8
    while True:
        if cancel is not None and cancel():
            raise TruncationError("limit_complex cancelled")
        bound = _box_tail_bound(ss, radii, K, norm)
        if bound < tol / 2 and (K + 1) ** p <= LATTICE_MAX_POINTS:
            terms = _lattice_terms(xs, ss, K)
            inner = (slice(0, K),) * p
            shell = float(np.abs(terms).sum() - np.abs(terms[inner]).sum())
            if shell < tol / 2:
                return complex(cmath.exp(terms.sum()))
        if K >= LATTICE_MAX_RADIUS or (2 * K + 1) ** p > LATTICE_MAX_POINTS:
            raise TruncationError(
                f"lattice radius {K} did not reach tol={tol} (tail bound {bound:.3e}); "
                "max|x| too close to 1 for these exponents"
            )
        K = min(2 * K, LATTICE_MAX_RADIUS)


def ratio_limit(x1s, x2s, s1s, s2s, tol: float = 1e-12) -> complex:
    """Limit of ``E[Z_n^{s1}(x1) / Z_n^{s2}(x2)]``: the stacked query with ``-s2``."""
    x1s, x2s = tuple(x1s), tuple(x2s)
    s1s, s2s = tuple(s1s), tuple(s2s)
    if len(x1s) != len(s1s) or len(x2s) != len(s2s):
        raise QueryError("each x-vector needs an exponent vector of the same length")
    return limit_complex(x1s + x2s, s1s + tuple(-complex(s) for s in s2s), tol)


def mellin_fourier_limit(x: complex, s1: float, s2: float, tol: float = 1e-12) -> complex:
    """Limit of ``E[|Z_n(x)|**s1 exp(i s2 arg Z_n(x))]`` for ``|x| < 1``.

    ``|z|**s1 e^{i s2 arg z} = z**((s1+s2)/2) * conj(z)**((s1-s2)/2)`` and
    ``conj(Z_n(x)) = Z_n(conj x)``.
    """
    x = complex(x)
    return limit_complex((x, x.conjugate()), ((s1 + s2) / 2, (s1 - s2) / 2), tol)


def abs_moment_limit_closed_form(x: complex, s: int) -> float:
    """Limit of ``E|Z_n(x)|**(2s)`` written with moduli only (integer ``s``, ``|x| < 1``).

    Diagonal factors give ``prod_k (1 - |x|**(2k))**(-binom(s,k)**2)``; each
    off-diagonal pair ``k1 < k2`` merges with its mirror into a squared modulus.
    """
    x = complex(x)
    if abs(x) >= 1:
        raise QueryError("needs |x| < 1")
    diag = 1.0
    for k in range(1, s + 1):
        diag *= (1 - abs(x) ** (2 * k)) ** (-math.comb(s, k) ** 2)
    off = 1.0 + 0j
    for k1 in range(s + 1):
        for k2 in range(k1 + 1, s + 1):
            e = math.comb(s, k1) * math.comb(s, k2) * (-1) ** (k1 + k2 + 1)
            off *= (1 - x**k1 * x.conjugate() ** k2) ** e
    return diag * abs(off) ** 2

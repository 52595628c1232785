"""Truncated power series in one variable ``t`` with complex coefficients.

Dense ``O(N**2)`` arithmetic is enough for the orders used here (a few
thousand at most).  Single coefficients of a finite product of linear
factors at large ``n`` go through :func:`product_coefficient`.
"""
from __future__ import annotations

import cmath
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TruncatedSeries",
    "FactorList",
    "series_mul",
    "series_exp",
    "series_log",
    "generalized_binomial",
    "binomial_power_series",
    "poly_mul",
    "poly_power_of_linear",
    "rational_coefficient",
    "rational_series",
    "product_coefficient",
]


class TruncatedSeries:
    """``c_0 + c_1 t + ... + c_N t**N`` modulo ``t**(N+1)``.

    Binary operations truncate to the smaller order of the two operands.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex]):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a truncated series needs at least one coefficient")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def constant(cls, value: complex, order: int) -> "TruncatedSeries":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def from_polynomial(cls, poly: Sequence[complex], order: int) -> "TruncatedSeries":
        c = np.zeros(order + 1, dtype=complex)
        m = min(len(poly), order + 1)
        c[:m] = np.asarray(poly, dtype=complex)[:m]
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, n):
        return self.coeffs[n]

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self.coeffs[: order + 1])

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(complex(other), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order) + 1
        return TruncatedSeries(self.coeffs[:n] + other.coeffs[:n])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self.coeffs * complex(other))

    __rmul__ = __mul__

    def allclose(self, other: "TruncatedSeries", rtol=1e-12, atol=1e-12) -> bool:
        n = min(self.order, other.order) + 1
        return bool(np.allclose(self.coeffs[:n], other.coeffs[:n], rtol=rtol, atol=atol))

    def __repr__(self):
        return f"TruncatedSeries(order={self.order}, coeffs={self.coeffs!r})"


def series_mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    n = min(f.order, g.order) + 1
    return TruncatedSeries(np.convolve(f.coeffs[:n], g.coeffs[:n])[:n])


def series_exp(f: TruncatedSeries) -> TruncatedSeries:
    """``exp(f)`` for ``f(0) = 0`` via ``n g_n = sum_{j=1..n} j f_j g_{n-j}``."""
    if f.coeffs[0] != 0:
        raise ValueError("series_exp needs a zero constant term")
    N = f.order
    jf = np.arange(N + 1) * f.coeffs
    g = np.zeros(N + 1, dtype=complex)
    g[0] = 1.0
    for n in range(1, N + 1):
        g[n] = np.dot(jf[1 : n + 1], g[n - 1 :: -1]) / n
    return TruncatedSeries(g)


def series_log(f: TruncatedSeries) -> TruncatedSeries:
    """Principal ``log(f)`` for ``f(0) != 0``; inverse of :func:`series_exp`."""
    f0 = f.coeffs[0]
    if f0 == 0:
        raise ValueError("series_log needs a nonzero constant term")
    N = f.order
    c = f.coeffs
    h = np.zeros(N + 1, dtype=complex)
    h[0] = cmath.log(f0)
    jh = np.zeros(N + 1, dtype=complex)
    for n in range(1, N + 1):
        # n f_n = sum_{j=1..n} j h_j f_{n-j}
        acc = n * c[n] - np.dot(jh[1:n], c[n - 1 : 0 : -1])
        h[n] = acc / (n * f0)
        jh[n] = n * h[n]
    return TruncatedSeries(h)


def generalized_binomial(s: complex, k: int) -> complex:
    """``s (s-1) ... (s-k+1) / k!`` as a running product (valid for complex ``s``)."""
    out = 1.0 + 0j
    for m in range(1, k + 1):
        out *= (s - m + 1) / m
    return out


def binomial_power_series(a: complex, e: complex, N: int) -> TruncatedSeries:
    """Coefficients of ``(1 - a t)**e`` up to ``t**N``: ``binom(e, k) (-a)**k``.

    Nonnegative integer ``e`` terminates exactly, because the factor
    ``e - k + 1`` hits zero at ``k = e + 1``.
    """
    c = np.zeros(N + 1, dtype=complex)
    c[0] = 1.0
    for k in range(1, N + 1):
        c[k] = c[k - 1] * (e - k + 1) / k * (-a)
    return TruncatedSeries(c)


def poly_mul(p: Sequence[complex], q: Sequence[complex]) -> np.ndarray:
    return np.convolve(np.asarray(p, dtype=complex), np.asarray(q, dtype=complex))


def poly_power_of_linear(a: complex, e: int) -> np.ndarray:
    """Expanded polynomial ``(1 - a t)**e`` for integer ``e >= 0``."""
    if e < 0:
        raise ValueError("negative power of a linear factor is not a polynomial")
    return binomial_power_series(a, e, e).coeffs.copy()


def rational_coefficient(numer: Sequence[complex], denom: Sequence[complex], n: int) -> complex:
    """``[N(t)/D(t)]_n`` by ``d_0 c_m = N_m - sum_{j>=1} d_j c_{m-j}``.

    ``O(n deg D)`` time; only the last ``deg D`` coefficients are kept.
    Rounding noise is amplified like ``n**(r-1)`` for a pole of multiplicity
    ``r`` on the unit circle, so prefer :func:`product_coefficient` there.
    """
    denom = [complex(d) for d in denom]
    numer = [complex(v) for v in numer]
    if not denom or denom[0] == 0:
        raise ValueError("denominator must have a nonzero constant term")
    if n < 0:
        raise ValueError("coefficient index must be nonnegative")
    d0 = denom[0]
    tail = denom[1:]
    deg = len(tail)
    recent: deque[complex] = deque([0j] * deg, maxlen=deg) if deg else deque()
    c = 0j
    for m in range(n + 1):
        acc = numer[m] if m < len(numer) else 0j
        # recent[-1] is c_{m-1}, recent[-j] is c_{m-j}
        for j in range(1, deg + 1):
            acc -= tail[j - 1] * recent[-j]
        c = acc / d0
        if deg:
            recent.append(c)
    return c


def rational_series(numer: Sequence[complex], denom: Sequence[complex], N: int) -> TruncatedSeries:
    """Dense expansion of ``N(t)/D(t)`` to order ``N`` (same recurrence, all terms kept)."""
    d = np.asarray(denom, dtype=complex)
    if d.size == 0 or d[0] == 0:
        raise ValueError("denominator must have a nonzero constant term")
    num = np.zeros(N + 1, dtype=complex)
    m = min(len(numer), N + 1)
    num[:m] = np.asarray(numer, dtype=complex)[:m]
    c = np.zeros(N + 1, dtype=complex)
    for k in range(N + 1):
        j = min(k, d.size - 1)
        acc = num[k] - np.dot(d[1 : j + 1], c[k - 1 :: -1][:j]) if j else num[k]
        c[k] = acc / d[0]
    return TruncatedSeries(c)


def product_coefficient(factors: Iterable[tuple[complex, int]], n: int) -> complex:
    """``[prod (1 - a t)**e]_n`` for integer exponents ``e``.

    Positive powers are multiplied out as a polynomial; every negative power
    is applied as ``|e|`` passes of the first-order filter
    ``c_m <- a c_{m-1} + c_m``.  Each pass only accumulates, so unlike the
    expanded-denominator recurrence a high-order pole on ``|t| = 1`` does
    not amplify rounding errors.
    """
    if n < 0:
        raise ValueError("coefficient index must be nonnegative")
    numer = np.ones(1, dtype=complex)
    poles: list[complex] = []
    for a, e in factors:
        e = _exponent(e)
        if not isinstance(e, int):
            raise ValueError(f"non-integer exponent {e}")
        if e > 0:
            numer = poly_mul(numer, poly_power_of_linear(complex(a), e))
        elif e < 0:
            poles.extend([complex(a)] * (-e))
    c = [0j] * (n + 1)
    for j, v in enumerate(numer[: n + 1]):
        c[j] = complex(v)
    for a in poles:
        prev = 0j
        for m in range(n + 1):
            prev = a * prev + c[m]
            c[m] = prev
    return c[n]


@dataclass(frozen=True)
class FactorList:
    """The product ``prod (1 - a t)**e`` over ``(a, e)`` pairs."""

    factors: tuple[tuple[complex, complex], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "factors", tuple((complex(a), _exponent(e)) for a, e in self.factors)
        )

    def split(self) -> tuple["FactorList", "FactorList"]:
        """``(integer-exponent part, general-exponent part)``."""
        ints = tuple((a, e) for a, e in self.factors if isinstance(e, int))
        rest = tuple((a, e) for a, e in self.factors if not isinstance(e, int))
        return FactorList(ints), FactorList(rest)

    def to_rational(self) -> tuple[np.ndarray, np.ndarray]:
        """Numerator and denominator polynomials; integer exponents only."""
        numer = np.ones(1, dtype=complex)
        denom = np.ones(1, dtype=complex)
        for a, e in self.factors:
            if not isinstance(e, int):
                raise ValueError(f"non-integer exponent {e} has no rational form")
            if e > 0:
                numer = poly_mul(numer, poly_power_of_linear(a, e))
            elif e < 0:
                denom = poly_mul(denom, poly_power_of_linear(a, -e))
        return numer, denom

    def to_series(self, N: int) -> TruncatedSeries:
        out = TruncatedSeries.constant(1.0, N)
        for a, e in self.factors:
            out = series_mul(out, binomial_power_series(a, e, N))
        return out

    def coefficient(self, n: int) -> complex:
        return product_coefficient(self.factors, n)


def _exponent(e):
    if isinstance(e, (int, np.integer)):
        return int(e)
    z = complex(e)
    if z.imag == 0 and z.real == int(z.real):
        return int(z.real)
    return z

"""Integer partitions, conjugacy classes of S_n and exact moment sums.

The uniform measure on S_n gives the class of cycle type ``lam`` the
probability ``1/z(lam)`` with ``z(lam) = prod_r r**c_r * c_r!``.  Since
``det(I - x g)`` depends only on the cycle type of ``g``,

    E[prod_k Z_n(x_k)**s_k] = sum_{lam |- n} (1/z(lam)) prod_k prod_i (1 - x_k**lam_i)**s_k

which is what :func:`exact_moment_partition_sum` evaluates term by term.
:func:`brute_force_moment` ignores all of this and averages determinants of
the actual permutation matrices; it exists only as an oracle.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from numbers import Integral
from typing import Iterator, Sequence

import numpy as np

from .errors import QueryError

__all__ = [
    "PARTITION_SUM_MAX_N",
    "BRUTE_FORCE_MAX_N",
    "Partition",
    "MomentQuery",
    "partitions_of",
    "partition_count",
    "z_weight",
    "class_size",
    "exact_moment_partition_sum",
    "brute_force_moment",
]

# p(60) = 966467 leaves; beyond this a pure-Python walk gets slow.
PARTITION_SUM_MAX_N = 60
BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True)
class Partition:
    """A weakly decreasing tuple of positive parts."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise QueryError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise QueryError(f"partition parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def multiplicities(self) -> dict[int, int]:
        """``{r: c_r}`` for every part size r that occurs."""
        return dict(Counter(self.parts))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)


def _as_exponent(s):
    """Normalise an exponent: exact nonnegative integers become ``int``."""
    if isinstance(s, bool):
        raise QueryError("boolean exponent")
    if isinstance(s, Integral):
        return int(s)
    z = complex(s)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise QueryError(f"non-finite exponent {s!r}")
    if z.imag == 0 and z.real == int(z.real) and z.real >= 0:
        return int(z.real)
    return z


@dataclass(frozen=True)
class MomentQuery:
    """Arguments of ``E[prod_k Z_n(x_k)**s_k]``.

    Exponents that are exact nonnegative integers are stored as ``int``;
    anything else is stored as ``complex`` and evaluated on the principal
    branch, which requires ``max|x_k| < 1``.
    """

    n: int
    xs: tuple[complex, ...]
    ss: tuple

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, Integral) or self.n < 0:
            raise QueryError(f"n must be a nonnegative integer, got {self.n!r}")
        xs = tuple(complex(x) for x in self.xs)
        ss = tuple(_as_exponent(s) for s in self.ss)
        if len(xs) == 0 or len(xs) != len(ss):
            raise QueryError(f"need 1 <= len(xs) == len(ss), got {len(xs)} and {len(ss)}")
        if not all(math.isfinite(x.real) and math.isfinite(x.imag) for x in xs):
            raise QueryError("non-finite evaluation point")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ss", ss)
        if not self.integer_exponents and self.norm >= 1:
            raise QueryError(
                f"complex exponents need max|x| < 1 (principal branch), got {self.norm}"
            )

    @classmethod
    def single(cls, n: int, x, s) -> "MomentQuery":
        return cls(n, (x,), (s,))

    @property
    def p(self) -> int:
        return len(self.xs)

    @property
    def norm(self) -> float:
        return max(abs(x) for x in self.xs)

    @property
    def integer_exponents(self) -> bool:
        return all(isinstance(s, int) and s >= 0 for s in self.ss)

    def conjugate(self) -> "MomentQuery":
        ss = tuple(s if isinstance(s, int) else s.conjugate() for s in self.ss)
        return MomentQuery(self.n, tuple(x.conjugate() for x in self.xs), ss)


def partitions_of(n: int) -> Iterator[Partition]:
    """Yield every partition of ``n`` once, in descending lexicographic order.

    >>> [p.parts for p in partitions_of(3)]
    [(3,), (2, 1), (1, 1, 1)]
    """
    if n < 0:
        raise QueryError(f"n must be nonnegative, got {n}")
    if n == 0:
        yield Partition(())
        return
    a = [n]
    while True:
        yield Partition(tuple(a))
        rem = 0
        while a and a[-1] == 1:
            a.pop()
            rem += 1
        if not a:
            return
        top = a.pop()
        v = top - 1
        rem += top
        while rem >= v:
            a.append(v)
            rem -= v
        if rem:
            a.append(rem)


def partition_count(n: int) -> int:
    return sum(1 for _ in partitions_of(n))


def z_weight(lam: Partition | Sequence[int]) -> int:
    """``prod_r r**c_r * c_r!``, exact in Python integers (no overflow cap)."""
    if not isinstance(lam, Partition):
        lam = Partition(tuple(lam))
    z = 1
    for r, c in lam.multiplicities.items():
        z *= r**c * math.factorial(c)
    return z


def class_size(lam: Partition | Sequence[int]) -> int:
    """Number of permutations of cycle type ``lam``."""
    if not isinstance(lam, Partition):
        lam = Partition(tuple(lam))
    n_fact = math.factorial(lam.size)
    z = z_weight(lam)
    if n_fact % z:
        raise ArithmeticError(f"{lam.size}!/z is not an integer for {lam.parts}")
    return n_fact // z


def _cycle_weights(q: MomentQuery) -> list[complex]:
    """``w[r] = prod_k (1 - x_k**r)**s_k`` for r = 1..n (index 0 unused)."""
    w = [1.0 + 0j] * (q.n + 1)
    for r in range(1, q.n + 1):
        acc = 1.0 + 0j
        for x, s in zip(q.xs, q.ss):
            base = 1 - x**r
            if isinstance(s, int):
                acc *= base**s
            else:
                acc *= cmath.exp(s * cmath.log(base))
        w[r] = acc
    return w


def exact_moment_partition_sum(q: MomentQuery) -> complex:
    """Sum over all partitions of n of class probability times ``Z`` on that class.

    The walk visits partitions in descending lexicographic order, choosing the
    largest remaining part size and its multiplicity at each level, so every
    partition is one leaf and equal parts share one factor
    ``(w_r / r)**c / c!``.  Only ``n <= PARTITION_SUM_MAX_N`` is accepted.
    ``n = 0`` gives 1 by convention.
    """
    if q.n > PARTITION_SUM_MAX_N:
        raise QueryError(f"partition sum is capped at n <= {PARTITION_SUM_MAX_N}, got {q.n}")
    n = q.n
    if n == 0:
        return 1.0 + 0j
    w = _cycle_weights(q)
    # table[r][c] = (w_r / r)**c / c!
    table = [[1.0 + 0j]]
    for r in range(1, n + 1):
        u = w[r] / r
        row = [1.0 + 0j]
        for c in range(1, n // r + 1):
            row.append(row[-1] * u / c)
        table.append(row)

    def walk(rem: int, maxpart: int) -> complex:
        if rem == 0:
            return 1.0 + 0j
        if maxpart == 1:
            return table[1][rem]
        total = 0j
        for r in range(min(rem, maxpart), 0, -1):
            row = table[r]
            for c in range(rem // r, 0, -1):
                rest = rem - c * r
                if rest == 0:
                    total += row[c]
                elif r > 1:
                    total += row[c] * walk(rest, r - 1)
        return total

    return complex(walk(n, n))


@lru_cache(maxsize=None)
def _permutation_matrices(n: int) -> np.ndarray:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    mats = np.zeros((len(perms), n, n))
    rows = np.arange(len(perms))[:, None]
    cols = np.arange(n)[None, :]
    # g = (delta_{i, sigma(j)})
    mats[rows, perms, cols] = 1.0
    mats.setflags(write=False)
    return mats


@lru_cache(maxsize=64)
def _determinants(n: int, x: complex) -> np.ndarray:
    dets = np.linalg.det(np.eye(n) - x * _permutation_matrices(n))
    dets.setflags(write=False)
    return dets


def brute_force_moment(q: MomentQuery) -> complex:
    """Average ``prod_k det(I - x_k P)**s_k`` over all ``n!`` permutation matrices.

    Determinants come from LU factorisation of the matrices themselves, not
    from cycle types.  Integer exponents only, ``n <= 8``.
    """
    if not q.integer_exponents:
        raise QueryError("brute force supports nonnegative integer exponents only")
    if q.n > BRUTE_FORCE_MAX_N:
        raise QueryError(f"brute force is capped at n <= {BRUTE_FORCE_MAX_N}, got {q.n}")
    if q.n == 0:
        return 1.0 + 0j
    vals = np.ones(math.factorial(q.n), dtype=complex)
    for x, s in zip(q.xs, q.ss):
        if s:
            vals *= _determinants(q.n, x) ** s
    return complex(vals.mean())

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permmoments.errors import QueryError
from permmoments.partitions import (
    BRUTE_FORCE_MAX_N,
    PARTITION_SUM_MAX_N,
    MomentQuery,
    Partition,
    brute_force_moment,
    class_size,
    exact_moment_partition_sum,
    partition_count,
    partitions_of,
    z_weight,
)


def euler_partition_numbers(N):
    """p(0..N) from the pentagonal number recurrence."""
    p = [1] + [0] * N
    for n in range(1, N + 1):
        k, total = 1, 0
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return p


def test_small_partitions():
    assert [p.parts for p in partitions_of(0)] == [()]
    assert [p.parts for p in partitions_of(2)] == [(2,), (1, 1)]
    assert [p.parts for p in partitions_of(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_partition_counts_against_pentagonal_recurrence():
    expected = euler_partition_numbers(50)
    assert expected[50] == 204226
    for n in range(0, 26):
        assert partition_count(n) == expected[n]
    assert partition_count(50) == 204226


@pytest.mark.parametrize("n", range(1, 13))
def test_partitions_are_distinct_and_sorted(n):
    seen = [p.parts for p in partitions_of(n)]
    assert len(seen) == len(set(seen))
    assert seen == sorted(seen, reverse=True)
    for parts in seen:
        assert sum(parts) == n
        assert all(a >= b >= 1 for a, b in zip(parts, parts[1:]))


def test_partition_validation():
    with pytest.raises(QueryError):
        Partition((1, 2))
    with pytest.raises(QueryError):
        Partition((2, 0))
    lam = Partition((3, 3, 1))
    assert lam.size == 7 and lam.length == 3
    assert lam.multiplicities == {3: 2, 1: 1}
    assert sum(r * c for r, c in lam.multiplicities.items()) == lam.size


def test_z_weight_examples():
    assert z_weight((1,) * 6) == math.factorial(6)
    assert z_weight((7,)) == 7
    assert z_weight((2, 1, 1)) == 4
    assert class_size((2, 1, 1)) == 6


def test_class_sizes_in_s4_by_counting():
    counts = {}
    for perm in itertools.permutations(range(4)):
        seen, cycle_type = set(), []
        for i in range(4):
            if i in seen:
                continue
            j, length = i, 0
            while j not in seen:
                seen.add(j)
                j = perm[j]
                length += 1
            cycle_type.append(length)
        key = tuple(sorted(cycle_type, reverse=True))
        counts[key] = counts.get(key, 0) + 1
    for lam in partitions_of(4):
        assert class_size(lam) == counts[lam.parts]


@pytest.mark.parametrize("n", [0, 1, 5, 12, 20])
def test_class_probabilities_sum_to_one(n):
    assert sum(Fraction(1, z_weight(lam)) for lam in partitions_of(n)) == 1


def test_z_weight_needs_no_overflow_guard():
    # z for the identity class of S_60 is far beyond 64 bits
    assert z_weight((1,) * 60) == math.factorial(60)
    assert class_size((30, 30)) == math.factorial(60) // (30 * 30 * 2)


def test_moment_query_validation():
    with pytest.raises(QueryError):
        MomentQuery(3, (0.1,), (1, 2))
    with pytest.raises(QueryError):
        MomentQuery(-1, (0.1,), (1,))
    with pytest.raises(QueryError):
        MomentQuery(3, (1.0,), (0.5,))
    with pytest.raises(QueryError):
        MomentQuery(3, (float("nan"),), (1,))
    q = MomentQuery(3, (0.5,), (2.0,))
    assert q.ss == (2,) and q.integer_exponents
    assert not MomentQuery(3, (0.5,), (0.5,)).integer_exponents


def test_exact_small_cases():
    assert exact_moment_partition_sum(MomentQuery.single(1, 0.3, 1)) == pytest.approx(0.7)
    x = 0.37 - 0.21j
    assert abs(exact_moment_partition_sum(MomentQuery.single(2, x, 1)) - (1 - x)) < 1e-15
    # S_2: identity gives (1-x)^2, the transposition gives 1-x^2
    expected = ((1 - x) ** 4 + (1 - x**2) ** 2) / 2
    assert abs(exact_moment_partition_sum(MomentQuery.single(2, x, 2)) - expected) < 1e-15
    assert exact_moment_partition_sum(MomentQuery.single(0, x, 3)) == 1


def test_partition_sum_matches_brute_force_example():
    q = MomentQuery(5, (0.4, 0.2j), (2, 1))
    assert abs(exact_moment_partition_sum(q) - brute_force_moment(q)) < 1e-10
    q = MomentQuery.single(6, 0.3 + 0.1j, 2)
    a, b = exact_moment_partition_sum(q), brute_force_moment(q)
    assert abs(a - b) <= 1e-9 * abs(b)


def test_brute_force_first_moment():
    assert brute_force_moment(MomentQuery.single(1, 0.25, 1)) == pytest.approx(0.75)
    assert brute_force_moment(MomentQuery.single(3, 0.5, 1)) == pytest.approx(0.5, abs=1e-14)


def test_caps():
    with pytest.raises(QueryError):
        brute_force_moment(MomentQuery.single(BRUTE_FORCE_MAX_N + 1, 0.1, 1))
    with pytest.raises(QueryError):
        brute_force_moment(MomentQuery.single(3, 0.1, 0.5))
    with pytest.raises(QueryError):
        exact_moment_partition_sum(MomentQuery.single(PARTITION_SUM_MAX_N + 1, 0.1, 1))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 50),
    r=st.floats(0, 0.99),
    phi=st.floats(-math.pi, math.pi),
)
def test_first_moment_is_one_minus_x(n, r, phi):
    x = r * complex(math.cos(phi), math.sin(phi))
    assert abs(exact_moment_partition_sum(MomentQuery.single(n, x, 1)) - (1 - x)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(0, 15),
    r=st.floats(0, 0.9),
    phi=st.floats(-math.pi, math.pi),
    sre=st.floats(-2, 3),
    sim=st.floats(-2, 2),
)
def test_conjugation_symmetry(n, r, phi, sre, sim):
    x = r * complex(math.cos(phi), math.sin(phi))
    q = MomentQuery.single(n, x, complex(sre, sim))
    a = exact_moment_partition_sum(q)
    b = exact_moment_partition_sum(q.conjugate())
    assert abs(a - b.conjugate()) <= 1e-12 * max(1.0, abs(a))


def test_brute_force_uses_matrices_not_cycle_types():
    # det(I - xP) for a 3-cycle is 1 - x^3
    from permmoments.partitions import _determinants, _permutation_matrices

    mats = _permutation_matrices(3)
    dets = _determinants(3, 0.5)
    three_cycles = [i for i, m in enumerate(mats) if np.trace(m) == 0]
    assert len(three_cycles) == 2
    for i in three_cycles:
        assert dets[i] == pytest.approx(1 - 0.125)

import cmath
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permmoments.asymptotics import (
    check_not_root_of_unity,
    collapsed_exponent,
    constant_C,
    dominant_indices,
    k0_case_table,
    leading_terms,
    mixed_moment_exact,
    predict_abs_moment,
    predict_mixed_moment,
    prediction_table,
    real_imag_expectations,
    real_imag_moment_growth,
    verify_ratio,
    write_prediction_csv,
)
from permmoments.errors import QueryError, RootOfUnityError
from permmoments.series import FactorList, TruncatedSeries

X1 = cmath.exp(1j)


def direct_S(s1, s2, k):
    """Collect exponents of (1 - x^k1 conj(x)^k2 t) with k1 - k2 = k."""
    return sum(
        math.comb(s1, k1) * math.comb(s2, k1 - k) * (-1) ** (2 * k1 - k + 1)
        for k1 in range(s1 + 1)
        if 0 <= k1 - k <= s2
    )


def test_root_of_unity_check():
    assert check_not_root_of_unity(X1, 10)
    assert not check_not_root_of_unity(1j, 4)
    x = cmath.exp(2j * math.pi * 0.3)
    assert check_not_root_of_unity(x, 9)
    assert not check_not_root_of_unity(x, 10)
    with pytest.raises(QueryError):
        check_not_root_of_unity(1.1, 3)


def test_collapsed_exponent_examples():
    assert collapsed_exponent(1, 1, 0) == -2
    assert collapsed_exponent(2, 1, -1) == 1
    for s in range(1, 6):
        for k in range(s + 1):
            assert collapsed_exponent(s, 0, k) == (-1) ** (k + 1) * math.comb(s, k)
    with pytest.raises(QueryError):
        collapsed_exponent(2, 1, 3)


@pytest.mark.parametrize("s1", range(0, 5))
@pytest.mark.parametrize("s2", range(0, 5))
def test_collapsed_exponent_matches_direct_sum(s1, s2):
    for k in range(-s2, s1 + 1):
        assert collapsed_exponent(s1, s2, k) == direct_S(s1, s2, k)


def _full_and_collapsed(s1, s2, x):
    full = FactorList(tuple(
        (x**k1 * x.conjugate() ** k2, (-1) ** (k1 + k2 + 1) * math.comb(s1, k1) * math.comb(s2, k2))
        for k1 in range(s1 + 1) for k2 in range(s2 + 1)
    ))
    collapsed = FactorList(tuple((x**k, collapsed_exponent(s1, s2, k)) for k in range(-s2, s1 + 1)))
    return full, collapsed


def log_series(fl, N):
    """log prod (1 - a t)^e = -sum_m (sum e a^m) t^m / m."""
    c = np.zeros(N + 1, dtype=complex)
    for a, e in fl.factors:
        c[1:] -= e * a ** np.arange(1, N + 1) / np.arange(1, N + 1)
    return TruncatedSeries(c)


@settings(max_examples=40, deadline=None)
@given(s1=st.integers(0, 3), s2=st.integers(0, 3), phi=st.floats(0.01, math.pi - 0.01))
def test_collapsed_series_identity(s1, s2, phi):
    full, collapsed = _full_and_collapsed(s1, s2, cmath.exp(1j * phi))
    assert log_series(full, 50).allclose(log_series(collapsed, 50), rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("phi", [0.7, 1.0, 2.0, 2.9])
@pytest.mark.parametrize("s1,s2", [(1, 1), (2, 1), (2, 2), (3, 0), (1, 3)])
def test_collapsed_product_identity(s1, s2, phi):
    # the expanded product is well conditioned away from x = 1 at these sizes
    full, collapsed = _full_and_collapsed(s1, s2, cmath.exp(1j * phi))
    assert full.to_series(50).allclose(collapsed.to_series(50), rtol=1e-9, atol=1e-9)


def test_case_table_exhaustive():
    for s1 in range(9):
        for s2 in range(9):
            if s1 + s2 == 0:
                continue
            M, k0s = dominant_indices(s1, s2)
            assert k0s == k0_case_table(s1, s2)
            assert len(k0s) == (2 if (s1 - s2) % 4 == 2 else 1)
            assert all(k % 2 == 0 and -s2 <= k <= s1 for k in k0s)


def test_leading_terms_examples():
    p = leading_terms(1, 1, X1)
    assert p.M == 2 and [k for k, _ in p.terms] == [0]
    assert abs(p.terms[0][1] - abs(1 - X1) ** 2) < 1e-12
    p = leading_terms(2, 0, X1)
    assert p.M == 1 and [k for k, _ in p.terms] == [0, 2]
    p = leading_terms(1, 0, X1)
    for n in (1, 2, 50):
        assert abs(predict_mixed_moment(p, n) - (1 - X1)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(phi=st.floats(0.05, math.pi - 0.05))
def test_c11_closed_form(phi):
    x = cmath.exp(1j * phi)
    assert abs(constant_C(1, 1, 0, x) - abs(1 - x) ** 2) < 1e-12


def test_c_conjugation_symmetry():
    for x in (X1, cmath.exp(2j), cmath.exp(0.5j)):
        for s1 in range(5):
            for s2 in range(5):
                for k0 in range(-s1, s2 + 1):
                    if k0 % 2:
                        continue
                    a = constant_C(s1, s2, -k0, x)
                    b = constant_C(s2, s1, k0, x)
                    assert abs(a - b.conjugate()) <= 1e-12 * max(1.0, abs(a))


def test_abs_moment_prediction_s1_and_s2():
    n = 7
    assert predict_abs_moment(1, X1, n) == pytest.approx(n * abs(1 - X1) ** 2)
    expected = n**5 * abs(1 - X1) ** 8 / abs(1 - X1**2) ** 2 / 120
    assert predict_abs_moment(2, X1, n) == pytest.approx(expected, rel=1e-13)
    for s in (1, 2, 3):
        assert predict_abs_moment(s, X1, n) == pytest.approx(leading_terms(s, s, X1)(n).real, rel=1e-12)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_abs_moment_ratio(s):
    val = mixed_moment_exact(s, s, X1, 5000)
    assert abs(val / predict_abs_moment(s, X1, 5000) - 1) < 0.01


@pytest.mark.parametrize("pair", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (0, 2), (1, 3)])
@pytest.mark.parametrize("phi", [1.0, 2.0, 0.5])
def test_ratio_convergence(pair, phi):
    x = cmath.exp(1j * phi)
    rows = prediction_table(*pair, x, [1250, 2500, 5000])
    errs = [abs(r.ratio - 1) for r in rows if not r.flagged]
    assert errs[-1] < 0.05
    for a, b in zip(errs, errs[1:]):
        assert b < a + 0.01


def test_first_moment_ratio_is_exact():
    for n in (1, 3, 17):
        r = verify_ratio(1, 0, X1, n)
        assert abs(r.ratio - 1) < 1e-12


def test_two_term_prediction_vanishes_at_most_once():
    p = leading_terms(2, 0, X1)
    vals = np.array([abs(p(n)) for n in range(1, 2000)])
    assert (vals < 1e-6).sum() <= 1


def test_real_imag_expectations():
    assert real_imag_expectations(-1) == pytest.approx((2, 0), abs=1e-15)
    assert real_imag_expectations(1j) == pytest.approx((1, -1))
    x = X1
    er, ei = real_imag_expectations(x)
    for n in range(1, 21):
        z = mixed_moment_exact(1, 0, x, n)
        assert abs(z.real - er) < 1e-10 and abs(z.imag - ei) < 1e-10


def exact_part_moment(s, x, n, part):
    terms = [math.comb(s, k) * mixed_moment_exact(k, s - k, x, n) for k in range(s + 1)]
    if part == "real":
        return sum(terms) / 2**s
    return sum((-1) ** (s + k) * t for k, t in enumerate(terms)) / (2j) ** s


def test_second_moments_of_parts():
    R, I = real_imag_moment_growth(2, X1)
    half = abs(1 - X1) ** 2 / 2
    assert R.exponent == I.exponent == 1
    assert R.cos_coeffs == pytest.approx({0: half}) and I.cos_coeffs == pytest.approx({0: half})


@pytest.mark.parametrize("s", [3, 4, 6])
@pytest.mark.parametrize("phi", [1.0, 2.0])
def test_part_moments_growth(s, phi):
    x = cmath.exp(1j * phi)
    R, I = real_imag_moment_growth(s, x)
    assert R.exponent == math.comb(s, s // 2) - 1
    for g in (R, I):
        assert any(v != 0 for v in list(g.cos_coeffs.values()) + list(g.sin_coeffs.values()))
        exact = exact_part_moment(s, x, 5000, g.part)
        assert abs(exact.imag) < 1e-9 * abs(exact)
        assert abs(exact.real / g(5000) - 1) < 0.02


def test_rejections():
    with pytest.raises(RootOfUnityError):
        leading_terms(2, 1, cmath.exp(2j * math.pi / 3))
    with pytest.raises(QueryError):
        leading_terms(1, 1, 0.9)
    with pytest.raises(QueryError):
        leading_terms(0, 0, X1)
    with pytest.raises(OverflowError):
        constant_C(10, 10, 0, X1)


def test_prediction_csv():
    rows = prediction_table(1, 1, X1, [10, 20])
    buf = io.StringIO()
    write_prediction_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,exact_re,exact_im,pred_re,pred_im,ratio_abs"
    assert len(lines) == 3
    assert float(lines[2].split(",")[0]) == 20

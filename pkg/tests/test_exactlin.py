import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_forge.exactlin import (
    IntMatrix,
    IntPolynomial,
    NotIsolating,
    SquareFreeViolation,
    char_poly,
    companion_matrix,
    determinant,
    refine_root,
    sturm_isolate,
)

GOLDEN_PLUS = (3 + math.sqrt(5)) / 2  # 2.618033988749895
GOLDEN_MINUS = (3 - math.sqrt(5)) / 2  # 0.3819660112501051


def _sympy_charpoly(rows):
    m = sympy.Matrix(rows)
    x = sympy.symbols("x")
    poly = m.charpoly(x)
    coeffs = list(reversed(poly.all_coeffs()))  # ascending
    return tuple(int(c) for c in coeffs)


class TestCompanionMatrix:
    def test_n2(self):
        assert companion_matrix((3,)).to_lists() == [[0, -1], [1, 3]]

    def test_n3_signs(self):
        # (2,3) entry must carry the alternating sign: -k_1.
        k1, k2 = 4, 7
        assert companion_matrix((k1, k2)).to_lists() == [
            [0, 0, 1],
            [1, 0, -k1],
            [0, 1, k2],
        ]

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_zero_tuple_charpoly(self, n):
        # k = 0 collapses the characteristic polynomial to x^n + (-1)^n.
        a = companion_matrix((0,) * (n - 1))
        expected = [0] * (n + 1)
        expected[0] = (-1) ** n
        expected[n] = 1
        assert char_poly(a).coeffs == tuple(expected)

    def test_symbolic_roundtrip_n3_n4(self):
        # char_poly(companion(k)) must match the alternating-sign pattern,
        # cross-checked by symbolic expansion of det(xI - A).
        x = sympy.symbols("x")
        for k in [(2, 5), (-3, 1), (4, -2, 7), (1, 1, 1)]:
            a = companion_matrix(k)
            got = char_poly(a).coeffs
            assert got == _sympy_charpoly(a.to_lists())
            n = len(k) + 1
            expected = sympy.expand(
                x**n
                + sum(
                    (-1) ** i * k[n - i - 1] * x ** (n - i) for i in range(1, n)
                )
                + (-1) ** n
            )
            assert sympy.expand(sympy.Poly(list(reversed(got)), x).as_expr()) == expected

    @given(
        st.lists(st.integers(min_value=-20, max_value=20), min_size=1, max_size=4)
    )
    @settings(max_examples=60, deadline=None)
    def test_unit_determinant_and_roundtrip(self, k):
        a = companion_matrix(k)
        assert determinant(a) == 1
        n = len(k) + 1
        coeffs = char_poly(a).coeffs
        assert coeffs[n] == 1
        assert coeffs[0] == (-1) ** n
        for i in range(1, n):
            assert coeffs[n - i] == (-1) ** i * k[n - i - 1]


class TestCharPoly:
    def test_hand_example(self):
        a = IntMatrix.from_rows([[0, -1], [1, 3]])
        assert char_poly(a).coeffs == (1, -3, 1)  # x^2 - 3x + 1

    def test_identity(self):
        a = IntMatrix.from_rows([[1, 0], [0, 1]])
        assert char_poly(a).coeffs == (1, -2, 1)

    def test_random_vs_sympy(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(2, 6))
            rows = rng.integers(-9, 10, size=(n, n)).tolist()
            a = IntMatrix.from_rows(rows)
            assert char_poly(a).coeffs == _sympy_charpoly(rows)


class TestDeterminant:
    def test_examples(self):
        assert determinant(IntMatrix.from_rows([[1, 0], [0, 1]])) == 1
        assert determinant(IntMatrix.from_rows([[2, 1], [1, 1]])) == 1

    def test_random_vs_sympy(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            rows = rng.integers(-9, 10, size=(n, n)).tolist()
            assert determinant(IntMatrix.from_rows(rows)) == int(
                sympy.Matrix(rows).det()
            )

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_companion_always_unimodular(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            k = tuple(int(v) for v in rng.integers(-50, 51, size=n - 1))
            assert determinant(companion_matrix(k)) == 1


def _grid_root_count(poly: IntPolynomial) -> int:
    # Independent oracle: sign changes on a dense evaluation grid.
    xs = np.concatenate(
        [
            np.linspace(-1e6, -30, 2001),
            np.linspace(-30, 30, 600001),
            np.linspace(30, 1e6, 2001),
        ]
    )
    vals = np.polyval(list(reversed(poly.coeffs)), xs)
    signs = np.sign(vals)
    signs = signs[signs != 0]
    return int(np.sum(signs[:-1] != signs[1:]))


class TestSturmIsolate:
    def test_two_real_roots(self):
        p = IntPolynomial((1, -3, 1))
        iso = sturm_isolate(p)
        assert iso.count_real == 2 and iso.square_free
        (a1, b1), (a2, b2) = iso.intervals
        assert float(a1) < GOLDEN_MINUS < float(b1)
        assert float(a2) < GOLDEN_PLUS < float(b2)

    def test_no_real_roots(self):
        assert sturm_isolate(IntPolynomial((1, 0, 1))).count_real == 0

    def test_cubic_three_intervals(self):
        # x^3 - 5x^2 + 5x - 1 = (x - 1)(x^2 - 4x + 1): roots 1, 2 +/- sqrt(3).
        p = char_poly(companion_matrix((5, 5)))
        iso = sturm_isolate(p)
        assert iso.count_real == 3
        assert _grid_root_count(p) == 3
        roots = sorted(
            float(sum(refine_root(p, iv, 1e-10)) / 2) for iv in iso.intervals
        )
        assert roots[0] == pytest.approx(2 - math.sqrt(3), abs=1e-9)
        assert roots[1] == pytest.approx(1.0, abs=1e-9)
        assert roots[2] == pytest.approx(2 + math.sqrt(3), abs=1e-9)

    def test_repeated_root_flags(self):
        p = IntPolynomial((1, -2, 1))  # (x - 1)^2
        iso = sturm_isolate(p)
        assert not iso.square_free
        assert iso.count_real == 1
        assert iso.simple_flags == (False,)
        with pytest.raises(SquareFreeViolation):
            sturm_isolate(p, require_simple=True)

    def test_counts_match_grid_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            k = tuple(int(v) for v in rng.integers(-6, 7, size=n - 1))
            p = char_poly(companion_matrix(k))
            assert sturm_isolate(p).count_real == _grid_root_count(p)

    def test_intervals_sorted_disjoint(self):
        p = char_poly(companion_matrix((5, 5)))
        iso = sturm_isolate(p)
        for (a1, b1), (a2, b2) in zip(iso.intervals, iso.intervals[1:]):
            assert b1 <= a2


class TestRefineRoot:
    def test_quadratic(self):
        p = IntPolynomial((1, -3, 1))
        lo, hi = refine_root(p, (Fraction(2), Fraction(3)), 1e-12)
        assert float(hi - lo) < 1e-12
        assert lo <= Fraction(GOLDEN_PLUS) <= hi or abs(float(lo) - GOLDEN_PLUS) < 1e-11
        assert p(lo) <= 0 <= p(hi) or p(hi) <= 0 <= p(lo)

    def test_exact_hit(self):
        p = IntPolynomial((-1, 1))  # x - 1
        assert refine_root(p, (Fraction(0), Fraction(2)), 1e-12) == (
            Fraction(1),
            Fraction(1),
        )

    def test_not_isolating(self):
        p = IntPolynomial((1, -3, 1))
        with pytest.raises(NotIsolating):
            refine_root(p, (Fraction(5), Fraction(6)), 1e-6)

    def test_vieta_roundtrip(self):
        # Sum of refined roots matches the trace coefficient; product is 1.
        for k in [(3,), (5, 5), (4, 4)]:
            p = char_poly(companion_matrix(k))
            iso = sturm_isolate(p)
            if iso.count_real != p.degree:
                continue
            roots = [
                float(sum(refine_root(p, iv, 1e-13)) / 2) for iv in iso.intervals
            ]
            assert sum(roots) == pytest.approx(k[-1], abs=len(roots) * 1e-12)
            assert math.prod(roots) == pytest.approx(1.0, rel=len(roots) * 1e-12)

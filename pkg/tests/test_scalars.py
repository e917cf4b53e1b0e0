from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ_I

from borderline.errors import ScalarError
from borderline.scalars import (IMAG, VAR_V, VAR_Z, ExponentForm, NumericDomain, ScalarExpr,
                                SymbolicDomain, borderline_value, classical_limit, normalize, qnum,
                                random_point, specialize)

small = st.integers(min_value=-4, max_value=4)
half_integers = st.integers(min_value=-6, max_value=6).map(lambda k: Fraction(k, 2))


@st.composite
def scalars(draw):
    """Small Laurent polynomials in v and z1, possibly with an imaginary part."""
    total = ScalarExpr(draw(small))
    for _ in range(draw(st.integers(min_value=0, max_value=2))):
        term = VAR_V ** draw(small) * VAR_Z[0] ** draw(small) * draw(small)
        total = total + (IMAG * term if draw(st.booleans()) else term)
    return total


class TestExponentForm:
    def test_half_integers(self):
        e = ExponentForm.q(Fraction(3, 2))
        assert e.half_integer_part == 3
        assert e.constant == Fraction(3, 2)
        assert e.is_constant

    def test_rejects_quarter_exponents(self):
        with pytest.raises(ScalarError) as info:
            ExponentForm.q(Fraction(1, 4))
        assert info.value.code == 'bad_exponent'

    def test_block_arithmetic(self):
        e = ExponentForm.block(2) * 2 - 1
        assert e.coeff(2) == 2
        assert e.coeff(1) == 0
        assert e.constant == -1
        assert ExponentForm.block(1) - ExponentForm.block(1) == ExponentForm()


class TestFieldAxioms:
    @given(scalars(), scalars(), scalars())
    @settings(max_examples=25, deadline=None)
    def test_distributive(self, x, y, z):
        assert x * (y + z) == x * y + x * z

    @given(scalars(), scalars())
    @settings(max_examples=25, deadline=None)
    def test_division_inverts_multiplication(self, x, y):
        if y:
            assert (x * y) / y == x

    @given(scalars())
    @settings(max_examples=25, deadline=None)
    def test_subtraction_gives_zero(self, x):
        assert not (x - x)

    def test_division_by_zero(self):
        with pytest.raises(ScalarError) as info:
            ScalarExpr(0).inverse()
        assert info.value.code == 'division_by_zero'

    def test_normalize_cancels(self):
        assert normalize(VAR_V ** 2 - 1, VAR_V - 1) == VAR_V + 1

    def test_imaginary_unit(self):
        assert IMAG * IMAG == ScalarExpr(-1)


class TestBrackets:
    @given(half_integers)
    @settings(max_examples=20, deadline=None)
    def test_two_times_bracket(self, c):
        x = ExponentForm.block(1) + c
        assert qnum(2) * qnum(x) == qnum(x + 1) + qnum(x - 1)

    @given(half_integers, half_integers)
    @settings(max_examples=20, deadline=None)
    def test_product_difference(self, a, b):
        x = ExponentForm.block(1) + a
        assert qnum(x) * qnum(b) - qnum(x - 1) * qnum(b - 1) == qnum(x + b - 1)

    def test_integer_bracket_classical_limit(self):
        assert classical_limit(qnum(3)) == ScalarExpr(3)
        assert classical_limit(qnum(Fraction(3, 2)) / qnum(Fraction(1, 2))) == ScalarExpr(3)

    def test_block_bracket_has_pole_at_one(self):
        with pytest.raises(ScalarError) as info:
            classical_limit(qnum(ExponentForm.block(1)))
        assert info.value.code == 'pole_at_one'

    def test_classical_limit_keeps_block_variables(self):
        x = VAR_Z[0] ** 2 * VAR_V ** -4
        assert classical_limit(x) == VAR_Z[0] ** 2


class TestSerialization:
    def test_render_parse(self):
        x = qnum(ExponentForm.block(1) + Fraction(1, 2)) * IMAG + 3
        assert ScalarExpr.parse(x.render()) == x

    def test_parse_rejects_zero_denominator(self):
        with pytest.raises(ScalarError):
            ScalarExpr.parse({'re': ['1', '0'], 'im': ['0', '1']})


class TestDomains:
    def test_random_point_is_deterministic(self):
        assert random_point(5, 3) == random_point(5, 3)
        assert random_point(5, 3) != random_point(6, 3)

    def test_imposed_relation(self):
        point = random_point(1, 2, imposed=(2, 3))
        assert point.values()[2] == QQ_I(0, 1) * point.v ** -3

    def test_specialize_is_multiplicative(self):
        point = random_point(3, 2)
        x = qnum(ExponentForm.block(1) + 1)
        y = VAR_Z[1] * VAR_V ** 3 + IMAG
        assert specialize(x * y, point) == specialize(x, point) * specialize(y, point)

    def test_numeric_matches_symbolic(self):
        point = random_point(7, 2)
        domain = NumericDomain(point)
        e = ExponentForm.block(1) - ExponentForm.block(2) + Fraction(5, 2)
        assert domain.qnum(e) == specialize(qnum(e), point)
        assert domain.monomial(e) == specialize(SymbolicDomain().monomial(e), point)

    def test_borderline_substitution(self):
        domain = SymbolicDomain({1: borderline_value(3)})
        assert domain.monomial(ExponentForm.block(1, 2)) == -(VAR_V ** -6)
        assert domain.convert(VAR_Z[0] ** 2) == -(VAR_V ** -6)

    def test_numeric_point_rejects_missing_variable(self):
        domain = NumericDomain(random_point(0, 1))
        with pytest.raises(ScalarError) as info:
            domain.monomial(ExponentForm.block(2))
        assert info.value.code == 'unassigned_variable'

from fractions import Fraction

import pytest

from borderline import linalg
from borderline.errors import ModuleError
from borderline.rootdata import build_levi_profile
from borderline.scalars import ExponentForm, SymbolicDomain
from borderline.singvec import (CLOSED_FORM, CORRECTED, SOLVER_ONLY, TableEntry, build_generating,
                                c_gl_product, c_gl_sum, c_hat_special, c_hat_symmetric,
                                c_prime_closed_form, coeff_A, coeff_B_literal, coeff_B_solver,
                                dynamical_vectors, evaluate_table, gram_closed_form, phi_family,
                                principal_coeffs)
from borderline.verma import LambdaProfile


class TestPhiFamily:
    def test_so5_words(self, so5):
        family = phi_family(so5)
        assert family.phi == ((1, 2, 2, 1), (2, 1, 2, 1))
        assert family.phi_prime == ((2, 2, 1), (1, 2, 1))
        assert not family.level1

    def test_level_one_words_need_l(self, so7):
        family = phi_family(so7)
        assert family.base == 1
        assert family.level1[(1, 1)] == (1, 2, 3, 3, 2)
        assert family.level1[(3, 1)] == (2, 3, 3, 2, 1)


class TestLevelZero:
    @pytest.mark.parametrize('blocks, p', [((), 1), ((), 2), ((1,), 1)])
    def test_symmetric_coefficients_give_the_nullspace(self, blocks, p):
        levi = build_levi_profile(blocks, p, 'B')
        lam = LambdaProfile(levi, special=False)
        domain = lam.symbolic_domain()
        values = evaluate_table(coeff_A(levi, 0), lam, domain)
        result = coeff_B_literal(levi, values, lam, domain, 0)
        special = lam.lam(levi.l + 1)
        assert result[1] == domain.qnum(special + Fraction(levi.P, 2) - 1)
        assert all(not value for m, value in result.items() if m > 1)

    def test_so5_table(self, so5):
        values = evaluate_table(coeff_A(so5, 0), LambdaProfile(so5), SymbolicDomain())
        domain = SymbolicDomain()
        assert values[1] == domain.qnum(Fraction(3, 2))
        assert values[2] == -domain.qnum(Fraction(1, 2))

    def test_closed_form_needs_p_at_least_3(self, so6):
        lam = LambdaProfile(so6)
        domain = lam.symbolic_domain()
        with pytest.raises(ModuleError) as info:
            coeff_B_literal(so6, {1: domain.one}, lam, domain, 0)
        assert info.value.code == 'unsupported_rank'

    def test_solver_agrees_with_closed_form(self, so5_numeric):
        lam, domain, verma = so5_numeric
        levi = lam.levi
        values = {1: domain.from_int(2), 2: domain.from_int(-3)}
        literal = coeff_B_literal(levi, values, lam, domain, 0)
        solved = coeff_B_solver(verma, levi, values, 0)
        for m, value in literal.items():
            assert not (value - solved[m])


class TestGeneratingCoefficient:
    def test_unique_and_proportional(self, so5_numeric):
        lam, domain, verma = so5_numeric
        element = build_generating(lam.levi, 1)
        depth = element.depth(verma.root_system)
        basis = verma.solve_generating(depth)
        built = element.on_highest(verma)
        assert len(basis) == 1
        assert built.coords
        assert linalg.rank(domain, [basis[0].coords, built.coords]) == 1

    def test_bad_index(self, so5):
        with pytest.raises(ModuleError):
            build_generating(so5, 2)


class TestDynamicalVectors:
    def test_top_vector_is_simple(self, so5):
        vectors = dynamical_vectors(so5.with_variant('full'))
        assert vectors[2].terms[0][1] == (2,)

    def test_first_vector_has_weight_eps_1(self, so5):
        levi = so5.with_variant('full')
        first = dynamical_vectors(levi)[1]
        assert first.depth(levi.root_system) == (1, 1)
        assert sorted(word for _, word in first.terms) == [(1, 2), (2, 1)]

    def test_action_on_highest_vector(self, so5_full):
        lam, domain, verma = so5_full
        n = lam.levi.n
        vectors = {k: element.on_highest(verma) for k, element in dynamical_vectors(lam.levi).items()}
        vectors[n + 1] = verma.highest_vector()
        for i in range(1, n + 1):
            for k in range(1, n + 1):
                image = verma.act_e(k, vectors[i])
                if k == i:
                    expected = vectors[i + 1].scale(domain.qnum(lam.lam(i) + (n - i)))
                    assert not (image - expected).coords
                else:
                    assert not image.coords

    def test_series_d_unsupported(self, so6):
        with pytest.raises(ModuleError):
            dynamical_vectors(so6)


class TestClosedForms:
    @pytest.mark.parametrize('n', [1, 2])
    def test_gl_identity(self, n):
        domain = SymbolicDomain()
        exponents = [ExponentForm.block(k) for k in range(1, n + 2)]
        shifted = [e - exponents[-1] for e in exponents]
        assert c_gl_sum(domain, shifted) == c_gl_product(domain, exponents)

    def test_gl_sum_needs_the_shift(self):
        domain = SymbolicDomain()
        exponents = [ExponentForm.block(1), ExponentForm.block(1)]
        assert c_gl_sum(domain, exponents) != c_gl_product(domain, exponents)

    @pytest.mark.parametrize('series, p', [('B', 1), ('B', 2), ('D', 2)])
    def test_symmetric_leading_coefficient(self, series, p):
        levi = build_levi_profile((), p, series, variant='hat')
        lam = LambdaProfile(levi, special=False)
        domain = SymbolicDomain()
        assert c_hat_symmetric(lam, domain) == c_hat_special(lam, domain)

    def test_gram_determinant_m1(self, so7):
        lam = LambdaProfile(so7, special=False)
        domain = SymbolicDomain()
        matrix, det = gram_closed_form(lam, domain, 1)
        assert linalg.determinant(domain, matrix) == det

    def test_c_prime_l_plus_one(self, so7):
        lam = LambdaProfile(so7, special=False)
        domain = SymbolicDomain()
        values, overshoot = c_prime_closed_form(lam, domain)
        assert sorted(values) == [1, 2, 3, 4, 5, 6]
        assert overshoot == []
        expected = (-domain.monomial(ExponentForm.q(1)) * domain.qnum(Fraction(3, 2))
                    * domain.qnum(lam.lam(1) + lam.lam(2) + 3))
        assert values[2] == expected

    def test_d_series_overshoot_is_dropped(self, so6):
        lam = LambdaProfile(so6, special=False)
        coeffs = principal_coeffs(lam, SymbolicDomain())
        assert sorted(coeffs.c_prime) == [1, 2, 3, 4, 5]
        assert any('[6]' in note for note in coeffs.notes)


class TestTableEntry:
    def test_agreement_keeps_closed_form(self):
        entry = TableEntry(1, literal=3).reconcile(3)
        assert (entry.value, entry.provenance) == (3, CLOSED_FORM)

    def test_disagreement_takes_solver_value(self):
        entry = TableEntry(1, literal=3).reconcile(4)
        assert (entry.value, entry.provenance) == (4, CORRECTED)

    def test_missing_literal(self):
        entry = TableEntry(1).reconcile(5)
        assert (entry.value, entry.provenance) == (5, SOLVER_ONLY)

import pytest

from borderline.errors import DecompositionError
from borderline.qoperator import (Filtration, SpectralQ, build_tensor, check_direct_sum, decompose,
                                  eigenvalue_report, eigenvalues_closed_form, is_singular,
                                  principal_diag_global, principal_diag_local,
                                  principal_diag_solver, singular_tensor)
from borderline.rootdata import build_levi_profile
from borderline.scalars import VAR_V, VAR_Z, SymbolicDomain
from borderline.verma import LambdaProfile, build_verma, depth_height


@pytest.fixture
def so5_decomposition(so5_numeric):
    lam, domain, verma = so5_numeric
    natural, tensor = build_tensor(verma)
    decomposition = decompose(lam.levi, tensor, natural, verma)
    return lam, decomposition, SpectralQ(decomposition, eigenvalues_closed_form(lam, domain))


class TestEigenvalues:
    def test_so7_generic(self, so7):
        lam = LambdaProfile(so7, special=False)
        values = eigenvalues_closed_form(lam, SymbolicDomain())
        assert values[1] == VAR_Z[0] ** 2
        assert values[2] == VAR_Z[1] ** 2 * VAR_V ** -4
        assert values[3] == VAR_V ** -8
        assert values[4] == VAR_Z[1] ** -2 * VAR_V ** -16
        assert values[5] == VAR_Z[0] ** -2 * VAR_V ** -20

    def test_so7_borderline_values(self, so7):
        lam = LambdaProfile(so7)
        values = eigenvalues_closed_form(lam, lam.symbolic_domain())
        assert values[2] == -(VAR_V ** -10)
        assert values[4] == -(VAR_V ** -10)

    @pytest.mark.parametrize('special, coincident', [(True, [(2, 4)]), (False, [])])
    def test_report(self, so7, special, coincident):
        lam = LambdaProfile(so7, special=special)
        report = eigenvalue_report(lam, lam.symbolic_domain())
        assert report['casimir_mismatch'] == []
        assert report['coincident'] == coincident
        assert report['ok']


class TestPrincipalDiagonal:
    def test_first_edge(self, so5):
        lam = LambdaProfile(so5)
        domain = SymbolicDomain()
        assert principal_diag_global(lam, domain, 1, 2) == -(VAR_Z[0] ** -1)
        assert principal_diag_global(lam, domain, 3, 3) == domain.one

    @pytest.mark.parametrize('levi', [
        build_levi_profile((), 1, 'B', variant='full'),
        build_levi_profile((1,), 1, 'D', variant='full'),
        build_levi_profile((1,), 1, 'B', variant='full'),
    ])
    def test_local_matches_global(self, levi):
        lam = LambdaProfile(levi, special=False)
        domain = SymbolicDomain()
        poset = levi.poset
        for i in range(1, levi.N + 1):
            for j in range(i, levi.N + 1):
                if poset.leq(i, j):
                    assert (principal_diag_local(lam, domain, i, j)
                            == principal_diag_global(lam, domain, i, j))

    def test_solver_matches_global(self, so5_full):
        lam, domain, verma = so5_full
        natural, tensor = build_tensor(verma)
        filtration = Filtration(tensor, natural, verma)
        for i in range(1, 6):
            for j in range(i, 6):
                expected = principal_diag_global(lam, domain, i, j)
                assert not (principal_diag_solver(filtration, i, j) - expected)


class TestFiltration:
    def test_levi_node_is_not_a_step(self, so5_numeric):
        _, _, verma = so5_numeric
        natural, tensor = build_tensor(verma)
        filtration = Filtration(tensor, natural, verma)
        assert filtration.leading(filtration.top_vector(2), 2) == verma.domain.one
        with pytest.raises(DecompositionError) as info:
            filtration.leading(filtration.top_vector(3), 3)
        assert info.value.code == 'not_a_step'


class TestSingularVectors:
    def test_top_node_is_singular(self, so5_numeric):
        _, _, verma = so5_numeric
        natural, tensor = build_tensor(verma)
        u, components = singular_tensor(tensor, natural, verma.highest_vector())
        assert is_singular(tensor, u)
        assert list(components) == [1]


class TestDecomposition:
    def test_direct_sum(self, so5_decomposition):
        _, decomposition, _ = so5_decomposition
        assert sorted(decomposition.singular) == [1, 2, 3]
        assert not decomposition.skipped
        assert check_direct_sum(decomposition)['ok']

    def test_borderline_eigenvalues_collapse(self, so5_decomposition):
        _, _, spectral = so5_decomposition
        assert len(spectral.distinct_eigenvalues()) == 2

    def test_minimal_polynomial(self, so5_decomposition):
        _, decomposition, spectral = so5_decomposition
        tensor = decomposition.tensor
        for depth in tensor.keys():
            for index in range(tensor.dim(depth)):
                assert not spectral.min_poly_residual(tensor.basis_vector(depth, index)).coords

    def test_top_vector_eigenvalue(self, so5_decomposition):
        lam, decomposition, spectral = so5_decomposition
        top = decomposition.singular[1]
        assert not (spectral.apply(top) - top.scale(spectral.eigenvalues[1])).coords

    @pytest.mark.slow
    def test_equivariance(self, so5_decomposition):
        _, _, spectral = so5_decomposition
        assert spectral.equivariance_defects() == []

    def test_height_too_small(self, so5):
        lam = LambdaProfile(so5)
        domain = lam.numeric_domain(0)
        verma = build_verma(lam, 1, domain)
        natural, tensor = build_tensor(verma)
        with pytest.raises(DecompositionError) as info:
            decompose(so5, tensor, natural, verma)
        assert info.value.code == 'height_too_small'
        assert depth_height(natural.node_depth(5)) == 4

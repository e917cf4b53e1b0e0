import pytest

from borderline.errors import RootDataError
from borderline.rootdata import build_levi_profile, build_root_system, kostant_count


class TestRootSystem:
    @pytest.mark.parametrize('series, n, count', [('B', 2, 4), ('B', 3, 9), ('D', 3, 6), ('D', 4, 12)])
    def test_positive_root_count(self, series, n, count):
        assert len(build_root_system(series, n).positive_roots) == count

    def test_unsupported_rank(self):
        with pytest.raises(RootDataError) as info:
            build_root_system('D', 2)
        assert info.value.code == 'unsupported_rank'

    def test_root_coords_round_trip(self):
        rs = build_root_system('D', 4)
        for alpha in rs.positive_roots:
            assert rs.from_root_coords(rs.root_coords(alpha)) == alpha

    def test_root_coords_outside_lattice(self):
        with pytest.raises(RootDataError):
            build_root_system('D', 3).root_coords((1, 0, 0))

    def test_node_weights(self):
        rs = build_root_system('B', 2)
        assert rs.node_weight(1) == (1, 0)
        assert rs.node_weight(3) == (0, 0)
        assert rs.node_weight(5) == (-1, 0)

    def test_kostant_count(self):
        rs = build_root_system('B', 2)
        roots = [rs.root_coords(alpha) for alpha in rs.positive_roots]
        assert kostant_count((1, 1), roots) == 2
        assert kostant_count((1, 2), roots) == 3


class TestHassePoset:
    def test_b_principal_word(self, so5):
        poset = so5.poset
        assert poset.principal_word(1, 5) == (1, 2, 2, 1)
        assert poset.principal_word(2, 2) == ()
        assert not poset.leq(2, 1)

    def test_principal_word_application_order(self, so5):
        poset = so5.poset
        word = poset.principal_word(1, 3)
        assert word == (1, 2)
        node = 1
        for label in word:
            node = poset.natural_action('f', label, node)[1]
        assert node == 3

    def test_d_incomparable_middle(self, so6):
        poset = so6.poset
        assert not poset.comparable(3, 4)
        with pytest.raises(RootDataError) as info:
            poset.principal_word(3, 4)
        assert info.value.code == 'incomparable_nodes'
        assert poset.leq(2, 5)

    def test_d_special_edge_sign(self, so6):
        assert so6.poset.edge_sign(4, 2) == 1

    def test_natural_actions_are_inverse(self, so7):
        poset = so7.poset
        for i, targets in poset.edges.items():
            for j, k in targets:
                assert poset.natural_action('f', k, i)[1] == j
                assert poset.natural_action('e', k, j)[1] == i


class TestLeviProfile:
    def test_so7_blocks(self, so7):
        assert (so7.N, so7.P, so7.l, so7.ell) == (7, 3, 1, 1)
        assert so7.multiplicities == (1, 1, 3, 1, 1)
        assert so7.block_starts == (1, 2, 3, 6, 7)
        assert so7.block_starts[so7.special_index - 1] == so7.N - so7.l
        assert (so7.d0, so7.d1) == (2, 6)

    def test_levi_simple_roots(self, so7):
        assert so7.levi_simple_roots() == frozenset({3})
        so9 = build_levi_profile((2,), 1, 'B')
        assert so9.levi_simple_roots() == frozenset({1, 4})
        assert so7.with_variant('full').levi_simple_roots() == frozenset()

    def test_inconsistent_totals(self):
        with pytest.raises(RootDataError) as info:
            build_levi_profile((1,), 1, 'B', N=9)
        assert info.value.code == 'inconsistent_totals'

    def test_series_d_needs_p(self):
        with pytest.raises(RootDataError):
            build_levi_profile((2,), 0, 'D')

    def test_node_block(self, so6):
        assert [so6.node_block(j) for j in range(1, 7)] == [1, 2, 3, 3, 4, 5]

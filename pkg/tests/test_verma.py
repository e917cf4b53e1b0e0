import pytest

from borderline.errors import ModuleError
from borderline.scalars import ExponentForm
from borderline.verma import (LambdaProfile, StructureCache, VermaStructure, build_verma, depth_height,
                              depths_up_to, reference_defects)


def brackets_commute(module, x, k):
    """e_k f_k x - f_k e_k x - [(wt x, alpha_k)] x."""
    alpha = module.root_system.simple_roots[k - 1]
    ef = module.act_e(k, module.act_f(k, x))
    fe = module.act_f(k, module.act_e(k, x))
    return ef - fe - x.scale(module.domain.qnum(module.weight_exponent(x.depth, alpha)))


class TestLambdaProfile:
    def test_so7_weights(self, so7):
        lam = LambdaProfile(so7)
        assert lam.lam(1) == ExponentForm.block(1)
        assert lam.lam(2) == ExponentForm.block(2)
        assert lam.lam(3) == ExponentForm()
        assert lam.lam(4) == ExponentForm()
        assert lam.lam(7) == -ExponentForm.block(1)
        assert lam.imposed == (2, 3)

    def test_unknown_mode(self, so5):
        with pytest.raises(ModuleError):
            LambdaProfile(so5).domain('fast')


class TestVermaModule:
    def test_weight_spaces_match_kostant_counts(self, so5_numeric):
        _, _, verma = so5_numeric
        for depth in depths_up_to(2, 4):
            assert verma.dim(depth) == verma.kostant_dimension(depth)

    def test_levi_lowering_kills_highest_vector(self, so5_numeric):
        _, _, verma = so5_numeric
        assert not verma.word_vector((2,)).coords
        assert verma.word_vector((1,)).coords

    def test_shapovalov_norm(self, so5_numeric):
        lam, domain, verma = so5_numeric
        x = verma.word_vector((1,))
        alpha = verma.root_system.simple_roots[0]
        assert verma.shapovalov(x, x) == domain.qnum(lam.pairing(alpha))

    @pytest.mark.parametrize('fixture', ['so5_numeric', 'so5_full'])
    def test_chevalley_relations(self, fixture, request):
        _, _, verma = request.getfixturevalue(fixture)
        rank = verma.root_system.rank
        for depth in verma.keys():
            if depth_height(depth) > verma.height - 1:
                continue
            for index in range(verma.dim(depth)):
                x = verma.basis_vector(depth, index)
                for k in range(1, rank + 1):
                    assert not brackets_commute(verma, x, k).coords
                    for j in range(1, rank + 1):
                        if j == k:
                            continue
                        lowered = verma.act_e(k, verma.act_f(j, x))
                        raised = verma.act_e(k, x)
                        if raised.coords:
                            lowered = lowered - verma.act_f(j, raised)
                        assert not lowered.coords

    def test_height_exceeded(self, so5_numeric):
        _, _, verma = so5_numeric
        x = verma.word_vector((1, 2, 2, 1))
        with pytest.raises(ModuleError) as info:
            verma.act_f(1, x)
        assert info.value.code == 'height_exceeded'

    def test_shapovalov_is_symmetric(self, so5_numeric):
        _, _, verma = so5_numeric
        for depth in verma.keys():
            basis = [verma.basis_vector(depth, index) for index in range(verma.dim(depth))]
            for x in basis:
                for y in basis:
                    assert not (verma.shapovalov(x, y) - verma.shapovalov(y, x))

    def test_shapovalov_cross_weight(self, so5_numeric):
        _, _, verma = so5_numeric
        x = verma.word_vector((1,))
        y = verma.word_vector((2, 1))
        assert not verma.shapovalov(x, y)
        assert not verma.shapovalov(y, verma.highest_vector())

    def test_no_generating_coefficient(self, so5_numeric):
        _, _, verma = so5_numeric
        # f_2 f_1 v is not killed by e_2
        assert verma.dim((1, 1)) == 1
        assert verma.solve_generating((1, 1)) == []


class TestStructureCache:
    def test_store_and_reload(self, so5, tmp_path):
        lam = LambdaProfile(so5)
        domain = lam.numeric_domain(0)
        cache = StructureCache(tmp_path)
        first = build_verma(lam, 3, domain, cache=cache)
        assert list(tmp_path.glob('verma-*.pickle'))
        second = build_verma(lam, 3, domain, cache=cache)
        for depth in first.keys():
            assert first.dim(depth) == second.dim(depth)

    def test_corrupt_entry_is_rebuilt(self, so5, tmp_path):
        lam = LambdaProfile(so5)
        domain = lam.numeric_domain(0)
        cache = StructureCache(tmp_path)
        build_verma(lam, 3, domain, cache=cache)
        for path in tmp_path.glob('verma-*.pickle'):
            path.write_bytes(b'not a pickle')
        verma = build_verma(lam, 3, domain, cache=cache)
        assert verma.dim((1, 0)) == 1


class TestReferenceWeight:
    def test_structure_does_not_depend_on_reference(self, so5_numeric):
        _, _, verma = so5_numeric
        assert reference_defects(verma.structure, 3) == []

    @pytest.mark.slow
    def test_so7_structure(self, so7):
        lam = LambdaProfile(so7)
        verma = build_verma(lam, 4, lam.numeric_domain(0))
        assert reference_defects(verma.structure, 3) == []

    def test_differences_are_reported(self, so5_numeric):
        _, _, verma = so5_numeric
        structure = verma.structure
        other = VermaStructure(structure.levi, structure.height, structure.domain, 3)
        for depth in depths_up_to(2, structure.height):
            other.ensure(depth)
        key = next(key for key, columns in sorted(other.fmaps.items()) if any(columns))
        column = next(index for index, coords in enumerate(other.fmaps[key]) if coords)
        other.fmaps[key][column] = {i: c + c for i, c in other.fmaps[key][column].items()}
        assert structure.differences(other) == [('fmap', key[0], list(key[1]))]

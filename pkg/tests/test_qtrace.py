import copy
import json
from fractions import Fraction

import pytest

from borderline import qtrace
from borderline.config import RunConfig
from borderline.errors import PresentationError, TraceError
from borderline.qoperator import SpectralQ, build_tensor, decompose, eigenvalues_closed_form
from borderline.qtrace import (SCHEMA, FRTData, braid_defects, check_admissible, classical_check,
                               classical_factors, classical_trace, emit_ideal, kappa_idempotent,
                               re_check, tau_minus_check, trace_height, verify_presentation, write_ideal)
from borderline.rootdata import build_levi_profile
from borderline.scalars import SymbolicDomain
from borderline.suites import re_suite
from borderline.verma import LambdaProfile


class TestClassicalTrace:
    def test_formula(self):
        assert classical_trace([2], (1,), 3, 1) == Fraction(7, 2)
        assert classical_trace([], (), 3, 2) == 5

    def test_factors(self):
        assert classical_factors([2], (1,), 3) == [(Fraction(2), 1), (-1, 2), (1, 3), (Fraction(1, 2), 1)]

    @pytest.mark.parametrize('mus', [[1], [-1], [2, 2], [2, Fraction(1, 2)]])
    def test_inadmissible(self, mus):
        with pytest.raises(TraceError) as info:
            check_admissible([Fraction(mu) for mu in mus])
        assert info.value.code == 'inadmissible'

    def test_trace_height(self, so5, so6):
        assert trace_height(so5) == 4
        assert trace_height(so6) == 4


class TestClassicalLimit:
    def test_so5(self, so5):
        results = classical_check(LambdaProfile(so5), (1, 2, 3, 4))
        assert all(entry['ok'] for entry in results.values())

    @pytest.mark.slow
    def test_so7(self, so7):
        results = classical_check(LambdaProfile(so7), (1, 2))
        assert all(entry['ok'] for entry in results.values())


class TestTauMinus:
    def test_special_factor_vanishes(self, so5):
        report = tau_minus_check(LambdaProfile(so5))
        assert report['special_factor_vanishes']
        assert report['vanishes']

    def test_generic_weight(self, so5):
        report = tau_minus_check(LambdaProfile(so5, special=False))
        assert not report['vanishes']


class TestFRT:
    @pytest.fixture(scope='class')
    def frt(self):
        return FRTData(build_levi_profile((), 1, 'B').poset, SymbolicDomain())

    def test_braid_relation(self, frt):
        assert braid_defects(frt) == []

    def test_kappa_is_a_rank_one_projector(self, frt):
        assert kappa_idempotent(frt) == []
        assert frt.kappa_rank() == 1


class TestReflectionEquation:
    def test_re_check(self, so5_numeric):
        lam, domain, verma = so5_numeric
        natural, tensor = build_tensor(verma)
        decomposition = decompose(lam.levi, tensor, natural, verma)
        spectral = SpectralQ(decomposition, eigenvalues_closed_form(lam, domain))
        frt = FRTData(lam.levi.poset, domain)
        checked = re_check(spectral, frt, natural, verma, limit=100)
        assert checked['checked'] > 0
        assert checked['re_defects'] == []
        assert checked['kappa_defects'] == []

    @pytest.mark.slow
    def test_suite_gates_kappa_relation(self, so5, tmp_path):
        result = re_suite(RunConfig('verify-re', levi=so5, height=4, output=str(tmp_path)))
        checks = {check['name']: check for check in result.checks}
        assert checks['kappa_relation']['gate']
        assert checks['kappa_relation']['ok']
        assert result.ok

    def test_kappa_defect_fails_the_suite(self, so5, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            return {'checked': 1, 're_defects': [], 'kappa_defects': [(1, 1, [0, 0], 0)]}

        monkeypatch.setattr('borderline.suites.re_check', broken)
        result = re_suite(RunConfig('verify-re', levi=so5, height=4, output=str(tmp_path)))
        assert [check['name'] for check in result.failures()] == ['kappa_relation']
        assert not result.ok


class TestPresentation:
    def test_emit_and_verify(self, so5, tmp_path):
        payload = emit_ideal(LambdaProfile(so5))
        assert payload['schema'] == SCHEMA
        assert len(payload['roots']) == 3
        assert len(payload['minimal_polynomial']) == 2
        assert [entry['k'] for entry in payload['traces']] == [1, 2, 3, 4, 5]
        path = write_ideal(payload, tmp_path / 'out' / 'ideal.json')
        report = verify_presentation(path)
        assert report['roots_ok']
        assert report['ok']

    @pytest.fixture(scope='class')
    def payload(self):
        return emit_ideal(LambdaProfile(build_levi_profile((), 1, 'B')))

    @pytest.mark.parametrize('field, tamper', [
        ('minimal_polynomial_ok', lambda p: p.update(minimal_polynomial=p['minimal_polynomial'][:1])),
        ('minimal_polynomial_ok', lambda p: p['minimal_polynomial'].append(p['roots'][0]['value'])),
        ('classical_ok', lambda p: p['classical'].update(factors=[{'root': '7', 'multiplicity': 99}])),
        ('classical_ok', lambda p: p['classical']['traces'][0].update(value='12345')),
    ])
    def test_tampered_fields_fail(self, payload, tmp_path, field, tamper):
        tampered = copy.deepcopy(payload)
        tamper(tampered)
        report = verify_presentation(write_ideal(tampered, tmp_path / 'ideal.json'))
        assert report['roots_ok']
        assert not report[field]
        assert not report['ok']

    def test_coincidences_are_checked(self, so5, monkeypatch):
        monkeypatch.setattr(qtrace, 'eigenvalue_report', lambda lam, domain: {'coincident': []})
        with pytest.raises(PresentationError) as info:
            emit_ideal(LambdaProfile(so5))
        assert info.value.code == 'non_regular'

    def test_generic_weight_is_rejected(self, so5):
        with pytest.raises(PresentationError) as info:
            emit_ideal(LambdaProfile(so5, special=False))
        assert info.value.code == 'bad_profile'

    def test_bad_schema(self, tmp_path):
        path = tmp_path / 'ideal.json'
        path.write_text(json.dumps({'schema': 'other/1'}))
        with pytest.raises(PresentationError) as info:
            verify_presentation(path)
        assert info.value.code == 'bad_schema'

    def test_malformed(self, tmp_path):
        path = tmp_path / 'ideal.json'
        path.write_text(json.dumps({'schema': SCHEMA}))
        with pytest.raises(PresentationError) as info:
            verify_presentation(path)
        assert info.value.code == 'malformed'

    @pytest.mark.parametrize('content', [None, '{not json'])
    def test_unreadable(self, tmp_path, content):
        path = tmp_path / 'ideal.json'
        if content is not None:
            path.write_text(content)
        with pytest.raises(PresentationError) as info:
            verify_presentation(path)
        assert info.value.code == 'unreadable'

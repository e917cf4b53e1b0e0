import json

import pytest

from borderline.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main
from borderline.errors import TraceError
from borderline.report import REPORT_SCHEMA, SuiteResult, build_report, to_jsonable
from borderline.scalars import VAR_V


class TestMain:
    def test_missing_command(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2

    def test_height_too_small(self, capsys, tmp_path):
        code = main(['verify-decomposition', '--series', 'B', '--p', '1', '--height', '1',
                     '--output', str(tmp_path)])
        assert code == EXIT_CONFIG
        out = capsys.readouterr().out
        assert '✗ Error: height too small for target weights' in out
        assert 'Code: height_too_small' in out

    def test_inconsistent_rank(self, tmp_path):
        code = main(['all', '--series', 'B', '--n', '5', '--blocks', '1', '--p', '1',
                     '--output', str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_emit_ideal(self, tmp_path):
        code = main(['emit-ideal', '--series', 'B', '--n', '2', '--p', '1', '--height', '4',
                     '--output', str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / 'ideal-B5-none-p1.json').exists()
        report = json.loads((tmp_path / 'emit-ideal-B5-none-p1-numeric.json').read_text())
        assert report['schema'] == REPORT_SCHEMA
        assert report['ok']

    def test_presentation_round_trip(self, tmp_path):
        main(['emit-ideal', '--series', 'B', '--p', '1', '--output', str(tmp_path)])
        code = main(['verify-presentation', str(tmp_path / 'ideal-B5-none-p1.json'),
                     '--output', str(tmp_path)])
        assert code == EXIT_OK

    def test_bad_presentation_fails(self, tmp_path):
        bad = tmp_path / 'bad.json'
        bad.write_text('{"schema": "other/1"}')
        code = main(['verify-presentation', str(bad), '--output', str(tmp_path)])
        assert code == EXIT_FAILED
        report = json.loads((tmp_path / 'verify-presentation.json').read_text())
        assert report['suites'][0]['error']['code'] == 'bad_schema'

    def test_report_is_deterministic(self, tmp_path):
        args = ['emit-ideal', '--series', 'B', '--p', '1', '--output', str(tmp_path)]
        main(args)
        path = tmp_path / 'emit-ideal-B5-none-p1-numeric.json'
        first = path.read_text()
        main(args)
        assert path.read_text() == first


class TestSuiteResult:
    def test_gating(self):
        result = SuiteResult('demo')
        result.add('gated', True)
        result.add('informational', False, gate=False)
        result.skip('later', 'beyond height')
        assert result.ok
        result.add('broken', False, detail=1)
        assert not result.ok
        assert [check['name'] for check in result.failures()] == ['broken']

    def test_error_fails_the_suite(self):
        result = SuiteResult('demo')
        result.fail(TraceError('no trace', code='height_too_small'))
        assert not result.ok
        assert result.to_dict()['error']['code'] == 'height_too_small'

    def test_to_jsonable(self):
        value = to_jsonable({1: (VAR_V, True), 'x': None})
        assert value['1'][0] == VAR_V.render()
        assert value['1'][1] is True
        assert value['x'] is None

    def test_timing_is_optional(self):
        result = SuiteResult('demo', seconds=1.23456)
        assert 'seconds' not in result.to_dict()
        assert result.to_dict(timing=True)['seconds'] == 1.235

    def test_build_report(self):
        class Config:
            def describe(self):
                return {'subcommand': 'demo'}

        report = build_report(Config(), [SuiteResult('a'), SuiteResult('b')])
        assert report['ok']
        assert [suite['suite'] for suite in report['suites']] == ['a', 'b']

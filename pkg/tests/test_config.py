import pytest

from borderline.cli import build_parser
from borderline.config import build_run_config, load_settings, parse_blocks
from borderline.errors import ConfigError


@pytest.fixture
def settings(tmp_path):
    return load_settings(tmp_path / 'missing.env')


def run_config(settings, *argv):
    return build_run_config(build_parser().parse_args(list(argv)), settings)


class TestSettings:
    def test_defaults(self, settings):
        assert settings.mode == 'numeric'
        assert settings.height == 6
        assert settings.workers == 1
        assert settings.cache_dir == ''

    def test_env_file(self, tmp_path, monkeypatch):
        env = tmp_path / '.env'
        env.write_text('BORDERLINE_HEIGHT=5\nBORDERLINE_LOG_LEVEL=debug\n')
        for name in ('BORDERLINE_HEIGHT', 'BORDERLINE_LOG_LEVEL'):
            # registered so teardown also drops what load_dotenv sets
            monkeypatch.setenv(name, '')
            monkeypatch.delenv(name)
        loaded = load_settings(env)
        assert loaded.height == 5
        assert loaded.log_level == 'DEBUG'

    @pytest.mark.parametrize('name, value', [
        ('BORDERLINE_WORKERS', 'many'),
        ('BORDERLINE_WORKERS', '0'),
        ('BORDERLINE_MODE', 'fast'),
        ('BORDERLINE_LOG_LEVEL', 'loud'),
    ])
    def test_bad_values(self, tmp_path, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ConfigError) as info:
            load_settings(tmp_path / 'missing.env')
        assert info.value.code == 'bad_value'


class TestBlocks:
    @pytest.mark.parametrize('text, blocks', [('2,1', (2, 1)), ('2 1', (2, 1)), ('', ()), (None, ()),
                                              (['3'], (3,))])
    def test_parse(self, text, blocks):
        assert parse_blocks(text) == blocks

    def test_rejects_empty_block(self):
        with pytest.raises(ConfigError):
            parse_blocks('2,0')


class TestRunConfig:
    def test_profile(self, settings):
        config = run_config(settings, 'all', '--series', 'b', '--blocks', '1', '--p', '1', '--height', '4')
        assert (config.levi.series, config.levi.N) == ('B', 7)
        assert config.height == 4
        assert config.mode == 'numeric'
        assert config.cache_dir is None

    def test_flags_override_settings(self, settings):
        config = run_config(settings, 'verify-traces', '--series', 'D', '--blocks', '1', '--p', '1',
                            '--mode', 'symbolic', '--seed', '3', '--log-level', 'info')
        assert (config.mode, config.seed, config.log_level) == ('symbolic', 3, 'INFO')
        assert config.height == settings.height

    def test_inconsistent_rank(self, settings):
        with pytest.raises(ConfigError) as info:
            run_config(settings, 'all', '--series', 'B', '--n', '4', '--blocks', '1', '--p', '1')
        assert info.value.code == 'inconsistent_totals'

    def test_missing_p(self, settings):
        with pytest.raises(ConfigError) as info:
            run_config(settings, 'all', '--series', 'B')
        assert info.value.code == 'missing_value'

    def test_height_too_small(self, settings):
        with pytest.raises(ConfigError) as info:
            run_config(settings, 'verify-decomposition', '--series', 'B', '--p', '1', '--height', '1')
        assert info.value.code == 'height_too_small'

    def test_library_errors_become_config_errors(self, settings):
        with pytest.raises(ConfigError):
            run_config(settings, 'all', '--series', 'D', '--blocks', '2', '--p', '0')

    def test_presentation_needs_no_profile(self, settings):
        config = run_config(settings, 'verify-presentation', 'a.json', 'b.json')
        assert config.levi is None
        assert config.files == ('a.json', 'b.json')

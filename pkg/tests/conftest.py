import pytest

from borderline.rootdata import build_levi_profile
from borderline.verma import LambdaProfile, build_verma


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Keep a developer's .env or shell settings out of the tests."""
    for name in ('BORDERLINE_CACHE_DIR', 'BORDERLINE_MODE', 'BORDERLINE_HEIGHT', 'BORDERLINE_SEED',
                 'BORDERLINE_LOG_LEVEL', 'BORDERLINE_OUTPUT'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv('BORDERLINE_WORKERS', '1')
    monkeypatch.setenv('BORDERLINE_CACHE_DIR', '')


@pytest.fixture
def so5():
    """so(5): l = 0, P = 3."""
    return build_levi_profile((), 1, 'B')


@pytest.fixture
def so7():
    """so(7): one GL(1) block, P = 3."""
    return build_levi_profile((1,), 1, 'B')


@pytest.fixture
def so6():
    """so(6): one GL(1) block, P = 2."""
    return build_levi_profile((1,), 1, 'D')


@pytest.fixture
def so5_numeric(so5):
    lam = LambdaProfile(so5, special=True)
    domain = lam.numeric_domain(seed=0)
    return lam, domain, build_verma(lam, 4, domain)


@pytest.fixture
def so5_full():
    """so(5) with the Cartan subalgebra as Levi (every eps_i carries its own variable)."""
    levi = build_levi_profile((), 1, 'B', variant='full')
    lam = LambdaProfile(levi, special=False)
    domain = lam.numeric_domain(seed=1)
    return lam, domain, build_verma(lam, 4, domain)

"""Settings from .env and the environment, and the per-run configuration built from CLI flags."""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from .errors import BorderlineError, ConfigError
from .rootdata import SERIES, build_levi_profile

ENV_FILE = Path(__file__).parent.parent / '.env'
MODES = ('symbolic', 'numeric')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


@dataclass(frozen=True)
class Settings:
    cache_dir: str = '.borderline-cache'
    workers: int = 1
    mode: str = 'numeric'
    height: int = 6
    seed: int = 0
    log_level: str = 'WARNING'
    output: str = 'reports'


@dataclass(frozen=True)
class RunConfig:
    """Everything one subcommand needs; picklable so suites can run in worker processes."""

    subcommand: str
    levi: object = None
    height: int = 6
    mode: str = 'numeric'
    seed: int = 0
    output: str = 'reports'
    workers: int = 1
    cache_dir: str = None
    log_level: str = 'WARNING'
    timing: bool = False
    files: tuple = field(default_factory=tuple)

    def describe(self):
        return {
            'subcommand': self.subcommand,
            'levi': self.levi.describe() if self.levi is not None else None,
            'height': self.height,
            'mode': self.mode,
            'seed': self.seed,
        }


def _int(name, value, minimum):
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}", code='bad_value')
    if number < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {number}", code='bad_value')
    return number


def _choice(name, value, choices):
    if value not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}, got {value!r}",
                          code='bad_value')
    return value


def load_settings(env_file=None):
    """Read .env (when present), then the process environment."""
    load_dotenv(env_file or ENV_FILE)
    return Settings(
        cache_dir=os.getenv('BORDERLINE_CACHE_DIR', '.borderline-cache'),
        workers=_int('BORDERLINE_WORKERS', os.getenv('BORDERLINE_WORKERS', os.cpu_count() or 1), 1),
        mode=_choice('BORDERLINE_MODE', os.getenv('BORDERLINE_MODE', 'numeric'), MODES),
        height=_int('BORDERLINE_HEIGHT', os.getenv('BORDERLINE_HEIGHT', 6), 1),
        seed=_int('BORDERLINE_SEED', os.getenv('BORDERLINE_SEED', 0), 0),
        log_level=_choice('BORDERLINE_LOG_LEVEL',
                          os.getenv('BORDERLINE_LOG_LEVEL', 'WARNING').upper(), LOG_LEVELS),
        output=os.getenv('BORDERLINE_OUTPUT', 'reports'),
    )


def parse_blocks(text):
    """'2,1' or '2 1' -> (2, 1); the empty string means no GL blocks."""
    if text is None:
        return ()
    if isinstance(text, (list, tuple)):
        return tuple(_int('block size', b, 1) for b in text)
    parts = [part for part in text.replace(',', ' ').split() if part]
    return tuple(_int('block size', part, 1) for part in parts)


def build_run_config(args, settings):
    """CLI flags override settings; the Levi profile is validated here."""
    subcommand = args.command
    levi = None
    if subcommand != 'verify-presentation':
        series = _choice('--series', (args.series or 'B').upper(), SERIES)
        if args.p is None:
            raise ConfigError("--p is required", code='missing_value')
        blocks = parse_blocks(args.blocks)
        p = _int('--p', args.p, 0)
        try:
            levi = build_levi_profile(blocks, p, series)
        except BorderlineError as e:
            raise ConfigError(e.message, code=e.code, details=e.details)
        if args.n is not None and _int('--n', args.n, 1) != levi.n:
            raise ConfigError(
                f"inconsistent totals: blocks {blocks} and p = {p} give n = {levi.n}, not {args.n}",
                code='inconsistent_totals')

    height = _int('--height', args.height if args.height is not None else settings.height, 1)
    if height < 2 and subcommand != 'verify-presentation':
        raise ConfigError("height too small for target weights", code='height_too_small',
                          details={'height': height})

    return RunConfig(
        subcommand=subcommand,
        levi=levi,
        height=height,
        mode=_choice('--mode', args.mode or settings.mode, MODES),
        seed=_int('--seed', args.seed if args.seed is not None else settings.seed, 0),
        output=args.output or settings.output,
        workers=_int('--workers', args.workers or settings.workers, 1),
        cache_dir=settings.cache_dir or None,
        log_level=_choice('--log-level', (args.log_level or settings.log_level).upper(), LOG_LEVELS),
        timing=bool(args.timing),
        files=tuple(getattr(args, 'files', None) or ()),
    )

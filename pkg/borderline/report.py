"""Console output and the deterministic JSON report."""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from colorama import Fore, Style, init
from tqdm import tqdm

from .scalars import ScalarExpr

init()

REPORT_SCHEMA = 'borderline-report/1'


def success(message):
    print(f"{Fore.GREEN}✓ {message}{Style.RESET_ALL}")


def failure(message):
    print(f"{Fore.RED}✗ {message}{Style.RESET_ALL}")


def warning(message):
    print(f"{Fore.YELLOW}⚠️  {message}{Style.RESET_ALL}")


def step(message):
    print(f"→ {message}")


def heading(title):
    print(title)
    print("=" * max(len(title), 28))


def rule():
    print("-" * 50)


def print_error(error):
    """✗ Error: ... with the machine-readable code underneath."""
    print(f"\n{Fore.RED}✗ Error: {error.message}{Style.RESET_ALL}")
    print(f"  Code: {error.code}")
    for key, value in sorted(error.details.items()):
        print(f"  {key}: {value}")


def progress(iterable, desc, unit='check', total=None, disable=False):
    return tqdm(iterable, desc=desc, unit=unit, total=total, leave=False, disable=disable)


def format_time(seconds):
    """Format seconds to human readable time."""
    if seconds < 60:
        return f"{seconds:.1f} seconds"
    elif seconds < 3600:
        return f"{seconds/60:.1f} minutes"
    else:
        return f"{seconds/3600:.1f} hours"


@dataclass
class SuiteResult:
    """Outcome of one suite. Checks with gate=False are reported but never fail the run."""

    name: str
    checks: list = field(default_factory=list)
    error: dict = None
    seconds: float = None

    def add(self, name, ok, gate=True, **details):
        self.checks.append({'name': name, 'ok': bool(ok), 'gate': gate, 'details': details})
        return ok

    def skip(self, name, reason):
        self.checks.append({'name': name, 'ok': True, 'gate': False, 'skipped': reason})

    def fail(self, error):
        self.error = error.to_dict()

    @property
    def ok(self):
        return self.error is None and all(check['ok'] for check in self.checks if check['gate'])

    def failures(self):
        return [check for check in self.checks if check['gate'] and not check['ok']]

    def to_dict(self, timing=False):
        payload = {'suite': self.name, 'ok': self.ok, 'checks': self.checks}
        if self.error is not None:
            payload['error'] = self.error
        if timing and self.seconds is not None:
            payload['seconds'] = round(self.seconds, 3)
        return payload


def to_jsonable(value):
    """Scalars become canonical strings; tuples become lists; dict keys become strings."""
    if isinstance(value, ScalarExpr):
        return value.render()
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return str(value)


def build_report(config, results, timing=False, seconds=None):
    report = {
        'schema': REPORT_SCHEMA,
        'config': config.describe(),
        'ok': all(result.ok for result in results),
        'suites': [result.to_dict(timing) for result in results],
    }
    if timing and seconds is not None:
        report['seconds'] = round(seconds, 3)
    return to_jsonable(report)


def write_report(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + '\n')
    return path


def report_path(config):
    """reports/<subcommand>-<series><N>-<blocks>-p<p>-<mode>.json"""
    levi = config.levi
    if levi is None:
        return Path(config.output) / f"{config.subcommand}.json"
    blocks = '_'.join(str(b) for b in levi.blocks) or 'none'
    name = f"{config.subcommand}-{levi.series}{levi.N}-{blocks}-p{levi.p}-{config.mode}.json"
    return Path(config.output) / name


def print_summary(results):
    for result in results:
        if result.error is not None:
            failure(f"{result.name}: {result.error['message']} ({result.error['code']})")
            continue
        gated = [check for check in result.checks if check['gate']]
        passed = sum(1 for check in gated if check['ok'])
        if result.ok:
            success(f"{result.name}: {passed}/{len(gated)} checks passed")
        else:
            failure(f"{result.name}: {passed}/{len(gated)} checks passed")
            for check in result.failures():
                print(f"    {check['name']}")
        for check in result.checks:
            if 'skipped' in check:
                warning(f"{result.name}: {check['name']} skipped, {check['skipped']}")
            elif not check['gate'] and not check['ok']:
                warning(f"{result.name}: {check['name']} (reported only)")

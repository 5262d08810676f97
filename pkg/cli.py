#!/usr/bin/env python3
"""
Command-line front end: evaluate the function families and kernels, run the
identity catalog and the class suites, and dump kernel tables.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or domain error,
3 I/O error.
"""
import os
import sys
import csv
import json
import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from logging.handlers import RotatingFileHandler
from typing import Dict, List, Optional, Tuple

import click
import numpy as np
from dotenv import load_dotenv

load_dotenv()

import config
import families
import identities
import kernels
import monotonicity_lab
from errors import ConfigError, ConvergenceError, DomainError, GammaLabError
from models import Breakpoints, ParamPair, QuadratureSpec, in_omega, require_finite

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SUITE_NAMES = ('cm', 'bernstein', 'stieltjes', 'logconvex', 'logcm', 'closure', 'witness',
               'inequalities', 'kernels')
# Suites built on xi, eta or Phi, which need a > 1
OMEGA_SUITES = frozenset({'cm', 'stieltjes', 'logcm', 'kernels'})
WITNESS_DEFAULT_PARAMS = (ParamPair(3.5, 1.0),)


def configure_logging(level: str = None):
    """Log to stderr, and to a rotating file when GAMMA_LAB_LOG_FILE is set."""
    level = (level or config.LOG_LEVEL).upper()
    handlers = [logging.StreamHandler(sys.stderr)]
    if config.LOG_FILE:
        log_dir = os.path.dirname(config.LOG_FILE)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(RotatingFileHandler(config.LOG_FILE, maxBytes=config.LOG_MAX_BYTES,
                                            backupCount=config.LOG_BACKUP_COUNT))
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format=config.LOG_FORMAT,
                        handlers=handlers, force=True)


def fmt(value) -> str:
    """Fixed float formatting so identical runs give byte-identical files."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, f'.{config.FLOAT_DIGITS}g')
    return str(value)


class FixedFloatEncoder(json.JSONEncoder):
    """JSON encoder writing every finite float through fmt()."""

    def iterencode(self, o, _one_shot=False):
        def floatstr(value):
            if math.isnan(value):
                return 'NaN'
            if math.isinf(value):
                return 'Infinity' if value > 0 else '-Infinity'
            return fmt(value)

        markers = {} if self.check_circular else None
        return json.encoder._make_iterencode(markers, self.default, json.encoder.encode_basestring,
                                             self.indent, floatstr, self.key_separator,
                                             self.item_separator, self.sort_keys, self.skipkeys,
                                             False)(o, 0)


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def parse_grid(text: str) -> Tuple[float, ...]:
    """'0.3,1,5' or 'start:stop:count' (inclusive linspace)."""
    text = text.strip()
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3:
            raise ConfigError(f"grid range must be start:stop:count, got {text!r}")
        start, stop = require_finite('start', parts[0]), require_finite('stop', parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"grid count must be an integer, got {parts[2]!r}")
        if count < 1:
            raise ConfigError("grid count must be at least 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    values = tuple(require_finite('grid point', v) for v in text.split(',') if v.strip())
    if not values:
        raise ConfigError("grid is empty")
    return values


def parse_params(texts) -> Tuple[ParamPair, ...]:
    """Parse repeated or comma-separated 'a:b' pairs."""
    pairs = []
    for text in texts:
        pairs.extend(ParamPair.parse(part) for part in text.split(',') if part.strip())
    return tuple(pairs)


def parse_list(text: Optional[str]) -> Tuple[str, ...]:
    if not text:
        return ()
    return tuple(part.strip() for part in text.split(',') if part.strip())


def parse_tolerances(texts) -> Dict[str, float]:
    overrides = {}
    for text in texts:
        name, sep, value = text.partition('=')
        if not sep:
            raise ConfigError(f"tolerance override must look like ID=VALUE, got {text!r}")
        overrides[name.strip()] = require_finite('tolerance', value)
    return overrides


# ============================================================================
# SWEEP CONFIGURATION
# ============================================================================

@dataclass(frozen=True)
class SweepConfig:
    """Everything a verify run needs."""
    params_list: Tuple[ParamPair, ...] = ()
    x_grid: Tuple[float, ...] = identities.DEFAULT_GRID
    identities: Tuple[str, ...] = ()
    suites: Tuple[str, ...] = ()
    tolerances: Dict[str, float] = field(default_factory=dict)
    target: str = 'L'
    class_text: str = 'B1'
    seed: Optional[int] = None
    jitter: float = 0.0
    jobs: int = 1
    output: Optional[str] = None
    fmt: str = 'json'

    def validate(self):
        if not self.identities and not self.suites:
            raise ConfigError("select at least one identity or suite")
        for identity_id in self.identities:
            identity = identities.get_identity(identity_id)
            for pair in self.params_list:
                identity.check_domain(pair)
        for name in self.suites:
            if name not in SUITE_NAMES:
                raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
            if name in OMEGA_SUITES:
                for pair in self.params_list:
                    if not in_omega(pair.a, pair.b):
                        raise DomainError(f"suite {name}: params {pair} outside Omega (a must exceed 1)")
        if 'witness' in self.suites:
            monotonicity_lab.parse_class(self.class_text)
            if self.target not in monotonicity_lab.WITNESS_TARGETS:
                raise ConfigError(f"unknown witness target {self.target!r}")
        if min(self.x_grid) <= 0:
            raise ConfigError("identity grid points must be positive")
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if self.fmt not in ('json', 'csv'):
            raise ConfigError(f"unknown format {self.fmt!r}")

    def tasks(self) -> List[tuple]:
        """Picklable (kind, name, a, b) work items in config order."""
        items = []
        for identity_id in self.identities:
            pairs = self.params_list or identities.get_identity(identity_id).default_params()
            items.extend(('identity', identity_id, p.a, p.b) for p in pairs)
        for name in self.suites:
            if name == 'closure':
                items.append(('suite', name, None, None))
                continue
            default = WITNESS_DEFAULT_PARAMS if name == 'witness' else identities.DEFAULT_PARAMS
            items.extend(('suite', name, p.a, p.b) for p in (self.params_list or default))
        return items


def _failed_entry(check_id: str, pair: Optional[ParamPair], error: Exception) -> dict:
    return {
        'id': check_id,
        'params': None if pair is None else pair.as_dict(),
        'passed': False,
        'worst_violation': None,
        'worst_point': None,
        'details': {'error': str(error)},
    }


def run_task(task: tuple, sweep: SweepConfig) -> List[dict]:
    """Run one work item and return its report entries."""
    kind, name, a, b = task
    pair = None if a is None else ParamPair(a, b)
    try:
        if kind == 'identity':
            spec = QuadratureSpec(**config.get_quadrature_defaults())
            report = identities.check_identity(name, pair, sweep.x_grid, spec,
                                               sweep.tolerances.get(name))
            return [report.to_dict()]
        if name == 'closure':
            return [r.to_dict() for r in monotonicity_lab.closure_suite()]
        if name == 'witness':
            reports = monotonicity_lab.witness_suite(pair, sweep.target, sweep.class_text,
                                                     seed=sweep.seed, jitter=sweep.jitter)
            return [r.to_dict() for r in reports]
        if name == 'kernels':
            return [r.to_dict() for r in kernels.structure_checks(pair)]
        if name == 'inequalities':
            return [r.to_dict() for r in kernels.inequality_checks(pair)]
        return [r.to_dict() for r in monotonicity_lab.SUITES[name](pair)]
    except (ConvergenceError, DomainError) as e:
        logger.error("%s %s on %s did not complete: %s", kind, name, pair, e)
        return [_failed_entry(name, pair, e)]


def _run_in_worker(args):
    task, sweep = args
    configure_logging()
    return run_task(task, sweep)


def run_sweep(sweep: SweepConfig) -> List[dict]:
    """Run every task; results keep config order whatever the completion order."""
    tasks = sweep.tasks()
    logger.info("running %d checks with %d job(s)", len(tasks), sweep.jobs)
    if sweep.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=sweep.jobs) as pool:
            batches = list(pool.map(_run_in_worker, [(t, sweep) for t in tasks]))
    else:
        batches = [run_task(t, sweep) for t in tasks]
    return [entry for batch in batches for entry in batch]


# ============================================================================
# OUTPUT
# ============================================================================

def _open_output(path: Optional[str]):
    if path is None:
        return sys.stdout
    return open(path, 'w', newline='', encoding='utf-8')


def write_table(path: Optional[str], comments: List[str], header: List[str], rows):
    """CSV with '#' comment lines, a header row and '\\n' line endings."""
    stream = _open_output(path)
    try:
        for line in comments:
            stream.write(f"# {line}\n")
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    finally:
        if path is not None:
            stream.close()


def write_report(path: Optional[str], checks: List[dict], report_format: str = 'json'):
    if report_format == 'csv':
        rows = []
        for entry in checks:
            params = entry.get('params') or {}
            metric = entry.get('max_rel_err', entry.get('worst_violation'))
            rows.append([entry['id'], params.get('a'), params.get('b'), entry['passed'], metric,
                         entry.get('worst_point')])
        write_table(path, [f"version={config.REPORT_VERSION}"],
                    ['id', 'a', 'b', 'passed', 'metric', 'worst_point'], rows)
        return
    text = json.dumps({'version': config.REPORT_VERSION, 'checks': checks}, indent=2,
                      cls=FixedFloatEncoder) + '\n'
    stream = _open_output(path)
    try:
        stream.write(text)
    finally:
        if path is not None:
            stream.close()


def _fail(code: int, message: str):
    logger.error(message)
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


# ============================================================================
# COMMANDS
# ============================================================================

@click.group()
@click.option('--log-level', default=None, help='Override GAMMA_LAB_LOG_LEVEL.')
def cli(log_level):
    """Numerical laboratory for Gamma-function ratios and their kernels."""
    configure_logging(log_level)


@cli.command('eval')
@click.argument('function_name')
@click.option('--a', 'a', type=float, required=True)
@click.option('--b', 'b', type=float, required=True)
@click.option('--x', 'x', default=None, help="Point or comma list.")
@click.option('--grid', default=None, help="Comma list or start:stop:count.")
@click.option('--out', default=None, type=click.Path(dir_okay=False))
def cmd_eval(function_name, a, b, x, grid, out):
    """Evaluate FUNCTION_NAME at the given points and print (x, value) rows."""
    try:
        if function_name not in families.FUNCTION_NAMES:
            raise DomainError(f"unknown function {function_name!r}; choose from "
                              f"{', '.join(families.FUNCTION_NAMES)}")
        pair = ParamPair(a, b)
        if function_name in families.OMEGA_FUNCTIONS and not pair.in_omega:
            raise DomainError(f"{function_name} needs params in Omega (a must exceed 1), got {pair}")
        if (x is None) == (grid is None):
            raise ConfigError("give exactly one of --x or --grid")
        points = parse_grid(grid if grid is not None else x)
        rows = [(p, families.evaluate(function_name, pair, p)) for p in points]
    except GammaLabError as e:
        _fail(EXIT_USAGE, str(e))
    comments = [f"function={function_name} a={fmt(pair.a)} b={fmt(pair.b)}",
                f"points={','.join(fmt(p) for p in points)}"]
    try:
        write_table(out, comments, ['x', function_name], rows)
    except OSError as e:
        _fail(EXIT_IO, f"cannot write {out}: {e}")


@cli.command('verify')
@click.option('--identities', 'identity_text', default=None,
              help=f"Comma list from {','.join(identities.IDENTITY_IDS)}.")
@click.option('--suites', 'suite_text', default=None, help=f"Comma list from {','.join(SUITE_NAMES)}.")
@click.option('--params', 'params_text', multiple=True, help="a:b pair(s); repeat or comma-separate.")
@click.option('--grid', default=None, help="Identity grid: comma list or start:stop:count.")
@click.option('--target', default='L', show_default=True, help="Witness target function.")
@click.option('--class', 'class_text', default='B1', show_default=True, help="Witness class B<l> or S<rho>.")
@click.option('--tolerance', 'tolerance_texts', multiple=True, help="Per-identity override ID=VALUE.")
@click.option('--jobs', type=int, default=config.JOBS, show_default=True)
@click.option('--seed', type=int, default=None, help="Seed for witness grid jitter.")
@click.option('--jitter', type=float, default=0.0, show_default=True, help="Relative witness grid jitter.")
@click.option('--out', default=None, type=click.Path(dir_okay=False))
@click.option('--format', 'report_format', type=click.Choice(['json', 'csv']), default='json',
              show_default=True)
def cmd_verify(identity_text, suite_text, params_text, grid, target, class_text, tolerance_texts,
               jobs, seed, jitter, out, report_format):
    """Run identity checks and class suites; exit 0 iff everything passed."""
    try:
        sweep = SweepConfig(
            params_list=parse_params(params_text),
            x_grid=parse_grid(grid) if grid else identities.DEFAULT_GRID,
            identities=parse_list(identity_text),
            suites=parse_list(suite_text),
            tolerances=parse_tolerances(tolerance_texts),
            target=target, class_text=class_text, seed=seed, jitter=jitter,
            jobs=jobs, output=out, fmt=report_format)
        sweep.validate()
        checks = run_sweep(sweep)
    except GammaLabError as e:
        _fail(EXIT_USAGE, str(e))
    try:
        write_report(out, checks, report_format)
    except OSError as e:
        _fail(EXIT_IO, f"cannot write {out}: {e}")
    failed = [c for c in checks if not c['passed']]
    logger.info("%d of %d checks passed", len(checks) - len(failed), len(checks))
    sys.exit(EXIT_FAILED if failed else EXIT_OK)


def kernel_nodes(pair: ParamPair, s_max: float, n_points: int) -> np.ndarray:
    """Uniform nodes i*smax/(n-1) merged with every breakpoint <= smax."""
    uniform = np.array([i * s_max / (n_points - 1) for i in range(n_points)])
    kinks = Breakpoints.for_pair(pair, s_max).points
    merged = np.sort(np.concatenate([uniform, kinks[kinks <= s_max]]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-12])
    return merged[keep]


@cli.command('dump-kernels')
@click.option('--a', 'a', type=float, required=True)
@click.option('--b', 'b', type=float, required=True)
@click.option('--smax', type=float, default=10.0, show_default=True)
@click.option('--n', 'n_points', type=int, default=1001, show_default=True)
@click.option('--out', default=None, type=click.Path(dir_okay=False))
def cmd_dump_kernels(a, b, smax, n_points, out):
    """Write s, xi(s), eta(s) on [0, smax] with every kink included."""
    try:
        pair = ParamPair(a, b)
        if not pair.in_omega:
            raise DomainError(f"params {pair} outside Omega (a must exceed 1)")
        if not smax > 0 or n_points < 2:
            raise ConfigError("need smax > 0 and at least 2 points")
        nodes = kernel_nodes(pair, smax, n_points)
        xs, es = kernels.xi(pair, nodes), kernels.eta(pair, nodes)
    except GammaLabError as e:
        _fail(EXIT_USAGE, str(e))
    comments = [f"a={fmt(pair.a)} b={fmt(pair.b)} smax={fmt(float(smax))} n={n_points}"]
    rows = zip((float(s) for s in nodes), (float(v) for v in xs), (float(v) for v in es))
    try:
        write_table(out, comments, ['s', 'xi', 'eta'], rows)
    except OSError as e:
        _fail(EXIT_IO, f"cannot write {out}: {e}")


@cli.command('report')
@click.argument('path', type=click.Path(dir_okay=False))
def cmd_report(path):
    """Summarise a JSON report written by verify."""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as e:
        _fail(EXIT_IO, f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        _fail(EXIT_USAGE, f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict) or data.get('version') != config.REPORT_VERSION:
        _fail(EXIT_USAGE, f"{path} is not a version {config.REPORT_VERSION} report")
    checks = data.get('checks', [])
    click.echo(f"{'id':<28} {'a':>8} {'b':>8} {'result':>6} {'metric':>12}")
    for entry in checks:
        params = entry.get('params') or {}
        metric = entry.get('max_rel_err', entry.get('worst_violation'))
        click.echo(f"{entry.get('id', '?'):<28} {fmt(params.get('a')):>8} {fmt(params.get('b')):>8} "
                   f"{'PASS' if entry.get('passed') else 'FAIL':>6} "
                   f"{'' if metric is None else format(metric, '.3g'):>12}")
    failed = sum(1 for c in checks if not c.get('passed'))
    click.echo(f"{len(checks) - failed} passed, {failed} failed")
    sys.exit(EXIT_FAILED if failed else EXIT_OK)


def main():
    cli()


if __name__ == '__main__':
    main()

"""
Tests for the command-line interface (click's CliRunner).
"""
import csv
import io
import json

import pytest

import cli as lab_cli
from errors import ConfigError, ConvergenceError, DomainError
from models import ParamPair


def table_rows(text):
    """Data rows of a CSV table, comments and header removed."""
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    reader = csv.reader(io.StringIO('\n'.join(lines)))
    next(reader)
    return [row for row in reader]


def row_at(rows, s):
    for row in rows:
        if abs(float(row[0]) - s) < 1e-12:
            return row
    raise AssertionError(f"no row at s={s}")


class TestEval:
    """Test the eval command."""

    @pytest.mark.parametrize('args,expected', [
        (['M', '--a', '2', '--b', '1', '--x', '1'], 0.5),
        (['eta', '--a', '1.7', '--b', '1.6', '--x', '2.6'], 0.07),
        (['xi', '--a', '2', '--b', '1', '--x', '3.7'], 1.0),
    ])
    def test_documented_values(self, cli_runner, args, expected):
        """Test the single-point examples."""
        result = cli_runner.invoke(lab_cli.cli, ['eval'] + args)
        assert result.exit_code == 0, result.stderr
        rows = table_rows(result.stdout)
        assert float(rows[0][1]) == pytest.approx(expected, abs=1e-13)

    def test_header_echoes_inputs(self, cli_runner):
        """Test that the comment header repeats the function, params and points."""
        result = cli_runner.invoke(lab_cli.cli, ['eval', 'L', '--a', '3.5', '--b', '1', '--grid', '1:3:3'])
        assert result.exit_code == 0
        assert result.stdout.startswith('# function=L a=3.5 b=1\n# points=1,2,3\n')
        assert len(table_rows(result.stdout)) == 3

    @pytest.mark.parametrize('args', [
        ['zeta', '--a', '2', '--b', '1', '--x', '1'],
        ['M', '--a', '1', '--b', '2', '--x', '1'],
        ['xi', '--a', '0.9', '--b', '0.5', '--x', '1'],
        ['M', '--a', '2', '--b', '1'],
        ['M', '--a', '2', '--b', '1', '--x', '-1'],
    ])
    def test_usage_errors(self, cli_runner, args):
        """Test that bad names, params or points exit with 2."""
        result = cli_runner.invoke(lab_cli.cli, ['eval'] + args)
        assert result.exit_code == 2
        assert 'Error' in result.stderr

    def test_unwritable_output(self, cli_runner, tmp_path):
        """Test that an I/O failure exits with 3."""
        target = str(tmp_path / 'missing' / 'out.csv')
        result = cli_runner.invoke(lab_cli.cli, ['eval', 'M', '--a', '2', '--b', '1', '--x', '1',
                                                 '--out', target])
        assert result.exit_code == 3


class TestVerify:
    """Test the verify command and its report."""

    def test_kernel_identities(self, cli_runner, tmp_path):
        """Test R4, R5 and R6 for (1.7, 1.6)."""
        out = str(tmp_path / 'report.json')
        result = cli_runner.invoke(lab_cli.cli, ['verify', '--identities', 'R4,R5,R6',
                                                 '--params', '1.7:1.6', '--out', out])
        assert result.exit_code == 0, result.stderr
        with open(out, encoding='utf-8') as handle:
            data = json.load(handle)
        assert data['version'] == 1
        assert [c['id'] for c in data['checks']] == ['R4', 'R5', 'R6']
        assert all(c['params'] == {'a': 1.7, 'b': 1.6} for c in data['checks'])

    def test_witness_suite(self, cli_runner):
        """Test that the refutation of L in B_1 is recorded as a pass."""
        result = cli_runner.invoke(lab_cli.cli, ['verify', '--suites', 'witness', '--target', 'L',
                                                 '--class', 'B1', '--params', '3.5:1.0'])
        assert result.exit_code == 0, result.stderr
        check = json.loads(result.stdout)['checks'][0]
        assert check['details']['note'] == 'non-membership confirmed'
        assert check['details']['witness'] is not None

    def test_failed_check_exits_one(self, cli_runner):
        """Test that an impossible tolerance turns a pass into exit 1."""
        result = cli_runner.invoke(lab_cli.cli, ['verify', '--identities', 'R7', '--params', '2.5:0.5',
                                                 '--grid', '1', '--tolerance', 'R7=-1'])
        assert result.exit_code == 1

    @pytest.mark.parametrize('args', [
        ['--identities', 'R4', '--params', '1.0:0.5'],
        ['--identities', 'R99'],
        ['--suites', 'nope'],
        [],
        ['--suites', 'cm', '--params', '0.9:0.5'],
        ['--identities', 'R7', '--tolerance', 'R7'],
    ])
    def test_usage_errors(self, cli_runner, args):
        """Test that invalid selections exit with 2."""
        result = cli_runner.invoke(lab_cli.cli, ['verify'] + args)
        assert result.exit_code == 2

    def test_csv_report(self, cli_runner):
        """Test the CSV report layout."""
        result = cli_runner.invoke(lab_cli.cli, ['verify', '--suites', 'logconvex', '--params', '3:1',
                                                 '--format', 'csv'])
        assert result.exit_code == 0, result.stderr
        assert result.stdout.startswith('# version=1\nid,a,b,passed,metric,worst_point\n')
        rows = table_rows(result.stdout)
        assert rows and all(row[3] == 'true' for row in rows)

    def test_deterministic_output(self, cli_runner):
        """Test that identical runs give identical bytes."""
        args = ['verify', '--identities', 'R14', '--params', '3.2:1.1', '--grid', '0.5,2']
        first = cli_runner.invoke(lab_cli.cli, args)
        second = cli_runner.invoke(lab_cli.cli, args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout


class TestDumpKernels:
    """Test the dump-kernels command."""

    def test_figure_pair(self, cli_runner):
        """Test xi(1.0) = 0.1 and eta(1.7) = 0.16 for (1.7, 1.6)."""
        result = cli_runner.invoke(lab_cli.cli, ['dump-kernels', '--a', '1.7', '--b', '1.6', '--smax', '10'])
        assert result.exit_code == 0, result.stderr
        rows = table_rows(result.stdout)
        assert float(row_at(rows, 1.0)[1]) == pytest.approx(0.1, abs=1e-13)
        assert float(row_at(rows, 1.7)[2]) == pytest.approx(0.16, abs=1e-13)

    def test_breakpoints_included(self, cli_runner):
        """Test that every kink up to smax is a row even off the uniform grid."""
        result = cli_runner.invoke(lab_cli.cli, ['dump-kernels', '--a', '1.7', '--b', '1.6',
                                                 '--smax', '10', '--n', '11'])
        rows = table_rows(result.stdout)
        for kink in (1.6, 1.7, 2.6, 2.7, 9.6, 9.7):
            row_at(rows, kink)
        s_values = [float(r[0]) for r in rows]
        assert s_values == sorted(s_values)
        assert len(set(s_values)) == len(s_values)

    def test_closed_form_pair(self, cli_runner, tmp_path):
        """Test that the xi column is min(s, 1) for (2, 1)."""
        out = tmp_path / 'kernels.csv'
        result = cli_runner.invoke(lab_cli.cli, ['dump-kernels', '--a', '2', '--b', '1', '--smax', '5',
                                                 '--n', '101', '--out', str(out)])
        assert result.exit_code == 0
        for s, xi, eta in table_rows(out.read_text(encoding='utf-8')):
            assert float(xi) == pytest.approx(min(float(s), 1.0), abs=1e-12)
            assert float(eta) == pytest.approx(max(float(s) - 1.0, 0.0), abs=1e-12)

    def test_outside_omega(self, cli_runner):
        """Test that a <= 1 exits with 2."""
        result = cli_runner.invoke(lab_cli.cli, ['dump-kernels', '--a', '0.9', '--b', '0.5'])
        assert result.exit_code == 2

    def test_unwritable_output(self, cli_runner, tmp_path):
        """Test that an I/O failure exits with 3."""
        target = str(tmp_path / 'no' / 'such' / 'dir.csv')
        result = cli_runner.invoke(lab_cli.cli, ['dump-kernels', '--a', '2', '--b', '1', '--out', target])
        assert result.exit_code == 3


class TestReport:
    """Test the report command."""

    def write(self, tmp_path, data):
        path = tmp_path / 'report.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)

    def test_all_passed(self, cli_runner, tmp_path):
        """Test a passing report summary."""
        path = self.write(tmp_path, {'version': 1, 'checks': [
            {'id': 'R4', 'params': {'a': 1.7, 'b': 1.6}, 'passed': True, 'max_rel_err': 1e-13}]})
        result = cli_runner.invoke(lab_cli.cli, ['report', path])
        assert result.exit_code == 0
        assert '1 passed, 0 failed' in result.stdout

    def test_failure_exits_one(self, cli_runner, tmp_path):
        """Test that a failed entry gives exit 1."""
        path = self.write(tmp_path, {'version': 1, 'checks': [
            {'id': 'CM', 'params': None, 'passed': False, 'worst_violation': 0.5}]})
        result = cli_runner.invoke(lab_cli.cli, ['report', path])
        assert result.exit_code == 1
        assert 'FAIL' in result.stdout

    def test_wrong_version(self, cli_runner, tmp_path):
        """Test that an unknown report version exits with 2."""
        path = self.write(tmp_path, {'version': 2, 'checks': []})
        assert cli_runner.invoke(lab_cli.cli, ['report', path]).exit_code == 2

    def test_missing_file(self, cli_runner, tmp_path):
        """Test that an unreadable file exits with 3."""
        result = cli_runner.invoke(lab_cli.cli, ['report', str(tmp_path / 'absent.json')])
        assert result.exit_code == 3


class TestParsing:
    """Test the argument parsers."""

    def test_grid_forms(self):
        """Test comma lists and start:stop:count ranges."""
        assert lab_cli.parse_grid('0.3, 1,5') == (0.3, 1.0, 5.0)
        assert lab_cli.parse_grid('0:1:5') == (0.0, 0.25, 0.5, 0.75, 1.0)

    @pytest.mark.parametrize('text', ['', '1:2', '1:2:x', '1:2:0'])
    def test_bad_grid(self, text):
        """Test malformed grids."""
        with pytest.raises(ConfigError):
            lab_cli.parse_grid(text)

    def test_params(self):
        """Test repeated and comma-separated pairs."""
        pairs = lab_cli.parse_params(['1.7:1.6,2:1', '3.5:1'])
        assert pairs == (ParamPair(1.7, 1.6), ParamPair(2.0, 1.0), ParamPair(3.5, 1.0))

    def test_tasks_keep_config_order(self):
        """Test that work items follow identities then suites in the given order."""
        sweep = lab_cli.SweepConfig(params_list=(ParamPair(3.2, 1.1),), identities=('R7', 'R1'),
                                    suites=('closure', 'cm'))
        assert [t[:2] for t in sweep.tasks()] == [('identity', 'R7'), ('identity', 'R1'),
                                                 ('suite', 'closure'), ('suite', 'cm')]

    def test_parallel_matches_serial(self):
        """Test that --jobs gives the same entries in the same order."""
        base = dict(params_list=(ParamPair(2.5, 0.5), ParamPair(3.2, 1.1)), identities=('R14',),
                    x_grid=(1.0, 3.0))
        serial = lab_cli.run_sweep(lab_cli.SweepConfig(**base))
        parallel = lab_cli.run_sweep(lab_cli.SweepConfig(jobs=2, **base))
        assert serial == parallel

    def test_fmt(self):
        """Test the fixed float formatting."""
        assert lab_cli.fmt(0.1) == '0.10000000000000001'
        assert lab_cli.fmt(True) == 'true'
        assert lab_cli.fmt(None) == ''

    def test_report_floats_use_fixed_digits(self, tmp_path):
        """Test that JSON report floats are written with 17 significant digits."""
        out = str(tmp_path / 'report.json')
        entry = {'id': 'R1', 'passed': True, 'max_rel_err': 0.1, 'worst_point': 0.3}
        lab_cli.write_report(out, [entry])
        with open(out, encoding='utf-8') as handle:
            text = handle.read()
        assert '"max_rel_err": 0.10000000000000001' in text
        assert '"worst_point": 0.29999999999999999' in text
        assert json.loads(text)['checks'][0]['max_rel_err'] == 0.1

    @pytest.mark.parametrize('error', [ConvergenceError('series stalled'), DomainError('x out of range')])
    def test_task_error_becomes_failed_entry(self, monkeypatch, error):
        """Test that a convergence or domain error inside a sweep is reported, not raised."""
        def failing(*args, **kwargs):
            raise error

        monkeypatch.setattr(lab_cli.identities, 'check_identity', failing)
        sweep = lab_cli.SweepConfig(params_list=(ParamPair(3.2, 1.1),), identities=('R1',))
        entries = lab_cli.run_task(('identity', 'R1', 3.2, 1.1), sweep)
        assert len(entries) == 1
        assert entries[0]['passed'] is False
        assert entries[0]['params'] == {'a': 3.2, 'b': 1.1}
        assert str(error) in entries[0]['details']['error']


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run CLI tests from a scratch directory."""
    monkeypatch.chdir(tmp_path)

import codecs
import json
import math
import os
import unittest
from tempfile import TemporaryDirectory

from click.testing import CliRunner

from markov_ml.cli import cli
from markov_ml.sparse_core import read_matrix_market
from markov_ml.utils import fingerprint_file


def _read_lines(path):
    with codecs.open(path, 'rb', 'utf-8') as f:
        return f.read().rstrip('\n').split('\n')


def _read_json(path):
    with codecs.open(path, 'rb', 'utf-8') as f:
        return json.load(f)


def _read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


class GenerateTestCase(unittest.TestCase):

    def test_generate(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'out/uniform.mtx')
            result = runner.invoke(
                cli, ['generate', 'uniform-chain', '--n', '10', '-o', path])
            self.assertEqual(0, result.exit_code, result.output)
            self.assertEqual((10, 10), read_matrix_market(path).shape)

            sidecar = _read_json(path + '.json')
            self.assertEqual(10, sidecar['n'])
            self.assertEqual(28, sidecar['nnz'])
            self.assertEqual('uniform-chain', sidecar['spec']['kind'])
            self.assertEqual(fingerprint_file(path), sidecar['fingerprint'])
            self.assertTrue(sidecar['generated_at'].endswith('+00:00'))

            path2 = os.path.join(tempdir, 'lattice.mtx')
            result = runner.invoke(
                cli, ['generate', 'lattice2d', '--rows', '3', '--cols', '4',
                      '-o', path2])
            self.assertEqual(0, result.exit_code, result.output)
            sidecar = _read_json(path2 + '.json')
            self.assertEqual(12, sidecar['n'])
            self.assertEqual(46, sidecar['nnz'])

    def test_generate_errors(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'bad.mtx')
            result = runner.invoke(
                cli, ['generate', 'uniform-chain', '--n', '1', '-o', path])
            self.assertEqual(1, result.exit_code)
            self.assertFalse(os.path.exists(path))

            result = runner.invoke(cli, ['generate', 'ring', '--n', '8'])
            self.assertEqual(2, result.exit_code)


class SolveTestCase(unittest.TestCase):

    def test_solve_generated_problem(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            json_path = os.path.join(tempdir, 'report.json')
            csv_path = os.path.join(tempdir, 'table.csv')
            trace_path = os.path.join(tempdir, 'trace.csv')
            agg_path = os.path.join(tempdir, 'agg.csv')
            args = ['solve', '--problem', 'uniform-chain', '--n', '64',
                    '-m', 'dssm', '-c', 'max_cycles=3, pre_steps=20',
                    '-c', 'post_steps=20',
                    '--json-output', json_path, '--csv', csv_path,
                    '--trace-file', trace_path,
                    '--dump-aggregation', agg_path]
            result = runner.invoke(cli, args)
            doc = _read_json(json_path)
            self.assertEqual(0 if doc['converged'] else 2, result.exit_code,
                             result.output)
            self.assertEqual('dssm', doc['method'])
            self.assertEqual(64, doc['n'])
            self.assertEqual('uniform-chain', doc['problem']['kind'])
            self.assertGreaterEqual(doc['lev'], 2)
            self.assertEqual(0.5, doc['d_used'])
            cycles = len(doc['residual_trace']) - 1
            self.assertLessEqual(cycles, 3)

            trace = _read_lines(trace_path)
            self.assertEqual('cycle,phase,step,residual', trace[0])
            self.assertEqual(40 * cycles, len(trace) - 1)
            self.assertEqual('1,pre,1,', trace[1][:8])

            agg = _read_lines(agg_path)
            self.assertEqual('fine_index,aggregate_index', agg[0])
            self.assertEqual(65, len(agg))

            # the CSV report is appended to
            runner.invoke(cli, args)
            table = _read_lines(csv_path)
            self.assertEqual(3, len(table))
            self.assertTrue(table[0].startswith('problem,n,method,'))
            self.assertTrue(table[1].startswith('uniform-chain,64,dssm,'))

    def test_solve_matrix_file(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'weak.mtx')
            result = runner.invoke(
                cli, ['generate', 'weak-link', '--n', '40', '--epsilon',
                      '0.01', '-o', path])
            self.assertEqual(0, result.exit_code, result.output)

            json_path = os.path.join(tempdir, 'report.json')
            result = runner.invoke(
                cli, ['solve', '--matrix', path, '-m', 'ssm',
                      '--json-output', json_path])
            doc = _read_json(json_path)
            self.assertEqual(0 if doc['converged'] else 2, result.exit_code,
                             result.output)
            self.assertEqual('weak.mtx', doc['problem']['kind'])
            self.assertEqual('ssm', doc['method'])
            self.assertEqual(40, doc['n'])

    def test_relax_only(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            json_path = os.path.join(tempdir, 'report.json')
            result = runner.invoke(
                cli, ['solve', '--problem', 'uniform-chain', '--n', '32',
                      '-m', 'relax-only', '--steps', '15',
                      '--json-output', json_path])
            doc = _read_json(json_path)
            self.assertEqual(0 if doc['converged'] else 2, result.exit_code,
                             result.output)
            self.assertEqual(16, len(doc['residual_trace']))
            self.assertEqual(1, doc['lev'])

    def test_solve_errors(self):
        runner = CliRunner()
        result = runner.invoke(
            cli, ['solve', '--problem', 'uniform-chain', '--n', '64',
                  '-c', 'foo=1'])
        self.assertEqual(1, result.exit_code)
        self.assertIn('Unknown config keys: foo', result.output)

        result = runner.invoke(cli, ['solve', '-m', 'dssm'])
        self.assertEqual(1, result.exit_code)

        result = runner.invoke(
            cli, ['solve', '--problem', 'uniform-chain', '--n', '64',
                  '-c', 's=4,,theta=0.1'])
        self.assertEqual(1, result.exit_code)
        self.assertIn('Syntax error in config', result.output)


class ReproduceTestCase(unittest.TestCase):

    def test_no_rows(self):
        result = CliRunner().invoke(cli, ['reproduce', 'table1',
                                          '--max-n', '512'])
        self.assertEqual(2, result.exit_code)

    def test_unknown_table(self):
        result = CliRunner().invoke(cli, ['reproduce', 'table9'])
        self.assertEqual(1, result.exit_code)
        self.assertIn('Unknown preset', result.output)

    def test_smoothing_figure(self):
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'smoothing.csv')
            result = CliRunner().invoke(
                cli, ['reproduce', 'smoothing-figure', '--n', '32',
                      '-o', path])
            self.assertEqual(0, result.exit_code, result.output)
            lines = _read_lines(path)
            self.assertEqual(65, len(lines))
            self.assertEqual(
                'smoother,index,eigenvalue_real,eigenvalue_imag,error',
                lines[0])
            self.assertEqual(32, sum(1 for l in lines
                                     if l.startswith('jacobi,')))
            self.assertEqual(32, sum(1 for l in lines
                                     if l.startswith('power,')))

    def test_table_is_reproducible(self):
        runner = CliRunner()
        with TemporaryDirectory() as tempdir:
            outputs = []
            for name, env in (('a.csv', {}), ('b.csv', {}),
                              ('c.csv', {'MARKOV_ML_THREADS': '2'})):
                path = os.path.join(tempdir, name)
                result = runner.invoke(
                    cli, ['reproduce', 'table1', '--max-n', '1024',
                          '-c', 'max_cycles=2', '--no-timing', '-o', path],
                    env=env)
                self.assertEqual(0, result.exit_code, result.output)
                outputs.append(_read_bytes(path))
            self.assertEqual(outputs[0], outputs[1])
            self.assertEqual(outputs[0], outputs[2])

            lines = outputs[0].decode('utf-8').rstrip('\n').split('\n')
            self.assertEqual(3, len(lines))
            self.assertTrue(lines[1].startswith('uniform-chain,1024,dssm,'))
            self.assertTrue(lines[2].startswith('uniform-chain,1024,dam,'))
            self.assertEqual('', lines[1].split(',')[9])

            sidecar = _read_json(os.path.join(tempdir, 'a.csv.json'))
            self.assertEqual('table1', sidecar['table'])
            self.assertEqual(2, sidecar['rows'])
            self.assertEqual(2, sidecar['parameters']['max_cycles'])

    def test_bad_thread_count(self):
        result = CliRunner().invoke(
            cli, ['reproduce', 'table1', '--max-n', '1024'],
            env={'MARKOV_ML_THREADS': 'zero'})
        self.assertEqual(1, result.exit_code)


class SpectrumTestCase(unittest.TestCase):

    def test_spectrum(self):
        with TemporaryDirectory() as tempdir:
            csv_path = os.path.join(tempdir, 'spectrum.csv')
            json_path = os.path.join(tempdir, 'spectrum.json')
            result = CliRunner().invoke(
                cli, ['spectrum', '--problem', 'uniform-chain', '--n', '16',
                      '-o', csv_path, '--json-output', json_path])
            self.assertEqual(0, result.exit_code, result.output)

            lines = _read_lines(csv_path)
            self.assertEqual('index,real,imag,modulus', lines[0])
            self.assertEqual(17, len(lines))
            self.assertAlmostEqual(1., float(lines[1].split(',')[1]))

            summary = _read_json(json_path)
            self.assertEqual(16, summary['n'])
            self.assertAlmostEqual((1. + math.cos(math.pi / 16)) / 2.,
                                   summary['second_eigenvalue'])
            self.assertAlmostEqual(1., summary['largest_modulus'])

    def test_too_large(self):
        result = CliRunner().invoke(
            cli, ['spectrum', '--problem', 'uniform-chain', '--n', '64',
                  '--max-n', '32'])
        self.assertEqual(1, result.exit_code)
        self.assertIn('OracleSizeError', result.output)


if __name__ == '__main__':
    unittest.main()

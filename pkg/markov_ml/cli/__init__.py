import functools
import os
import sys
from logging import getLogger

import click

import markov_ml
from markov_ml.errors import MarkovMLError
from markov_ml.metrics_bench import (CSV_COLUMNS, format_csv_row,
                                     write_report_csv)
from markov_ml.presets import (BASE_CONFIG, DEFAULT_MAX_N, SMOOTHING_FIGURE,
                               table_rows)
from markov_ml.problem_gen import PROBLEM_KINDS
from markov_ml.schema import EXPERIMENT_METHODS, validate_problem_doc
from markov_ml.sparse_core import read_matrix_market

from .runner import (SMOOTHING_OMEGA, assemble_config, build_problem_spec,
                     dump_json, load_problem, log_dict, run_generate,
                     run_rows, run_smoothing_figure, run_solve, run_spectrum,
                     setup_logging, thread_count)

__all__ = ['cli', 'main']

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def problem_options(func):
    """Attach the flags describing a generated problem."""
    options = [
        click.option('--n', 'n', type=click.INT, default=None,
                     help='Problem size.'),
        click.option('--rows', type=click.INT, default=None,
                     help='Lattice rows (lattice2d).'),
        click.option('--cols', type=click.INT, default=None,
                     help='Lattice columns (lattice2d).'),
        click.option('--epsilon', type=click.FLOAT, default=None,
                     help='Weight of the weak link (weak-link).'),
        click.option('--wells', type=click.INT, default=None,
                     help='Number of wells (double-well, four-well).'),
        click.option('--mc-samples', type=click.INT, default=None,
                     help='Monte Carlo samples per state (multi-well).'),
        click.option('--seed', type=click.INT, default=None,
                     help='Seed of the randomized generators.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Report :class:`MarkovMLError` and I/O errors with exit code 1."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (MarkovMLError, OSError) as ex:
            click.echo('{}.{}: {}'.format(type(ex).__module__,
                                          type(ex).__name__, ex), err=True)
            sys.exit(EXIT_ERROR)
    return wrapper


def _problem_flags(problem, n, rows, cols, epsilon, wells, mc_samples, seed):
    if n is None and rows is not None and cols is not None:
        n = rows * cols
    return {'problem': problem, 'n': n, 'rows': rows, 'cols': cols,
            'epsilon': epsilon, 'wells': wells, 'mc_samples': mc_samples,
            'seed': seed}


@click.group()
@click.version_option(markov_ml.__version__)
def cli():
    """
    Multilevel aggregation eigensolvers for Markov chains.

    Computes the stationary distribution and the second eigenvector of
    column-stochastic matrices, and reproduces the benchmark tables.
    """


@cli.command()
@click.argument('problem', type=click.Choice(PROBLEM_KINDS))
@problem_options
@click.option('-o', '--output', default=None,
              help='Matrix Market output path (default "<problem>-<n>.mtx").')
@click.option('--debug', is_flag=True, default=False,
              help='Enable debug logging.')
@handle_errors
def generate(problem, n, rows, cols, epsilon, wells, mc_samples, seed,
             output, debug):
    """
    Generate a benchmark problem.

    Writes the matrix in Matrix Market format and a JSON sidecar (same path
    plus ".json") with the problem spec, the seed, the number of nonzeros
    and a fingerprint of the matrix file.
    """
    setup_logging(debug)
    doc = validate_problem_doc(dict(
        (k, v) for k, v in _problem_flags(
            problem, n, rows, cols, epsilon, wells, mc_samples, seed).items()
        if v is not None))
    spec = build_problem_spec(doc)
    output = output or '{}-{}.mtx'.format(spec.kind, spec.n)
    sidecar = run_generate(spec, output)
    click.echo('{}: n={}, nnz={}'.format(output, sidecar['n'],
                                         sidecar['nnz']))


@cli.command()
@click.option('--problem', type=click.Choice(PROBLEM_KINDS), default=None,
              help='Problem to generate.')
@problem_options
@click.option('--matrix', default=None, type=click.Path(exists=True),
              help='Solve a Matrix Market file instead of a generated '
                   'problem.')
@click.option('-m', '--method', type=click.Choice(EXPERIMENT_METHODS),
              default=None, help='Solver (default dssm).')
@click.option('--preset', default=None,
              help='Take the parameters of a table preset, e.g. "table1".')
@click.option('--steps', type=click.INT, default=None,
              help='Relaxation steps of the relax-only baseline.')
@click.option('-c', '--config', multiple=True,
              help='Configuration values, comma separated key-value pairs, '
                   'e.g. "s=4, theta=0.25".  This will override '
                   '"--config-file" and the preset.')
@click.option('--config-file', default=None,
              help='Load configuration values from a "key = value" file.')
@click.option('--csv', 'csv_path', default=None,
              help='Append the report as a CSV row to this file.')
@click.option('--json-output', default=None,
              help='Also write the JSON report to this file.')
@click.option('--trace-file', default=None,
              help='Write the fine-level residual after every relaxation '
                   'step as CSV.')
@click.option('--dump-aggregation', default=None,
              help='Write the finest-level aggregation of the last cycle '
                   'as CSV.')
@click.option('--debug', is_flag=True, default=False,
              help='Enable debug logging.')
@handle_errors
def solve(problem, n, rows, cols, epsilon, wells, mc_samples, seed, matrix,
          method, preset, steps, config, config_file, csv_path, json_output,
          trace_file, dump_aggregation, debug):
    """
    Run one solver on one problem and print its JSON report.

    The exit code is 0 if the solver converged, 2 if it did not converge
    within the cycle budget and 1 on errors.
    """
    setup_logging(debug)
    flags = _problem_flags(problem, n, rows, cols, epsilon, wells,
                           mc_samples, seed)
    flags.update({'method': method, 'steps': steps})
    experiment = assemble_config(preset, config_file, config, flags)
    log_dict('Experiment config', experiment)

    b = None
    if matrix is not None:
        b = read_matrix_market(matrix)
    report, _ = run_solve(
        experiment, matrix=b,
        matrix_name=os.path.basename(matrix) if matrix else None,
        trace_file=trace_file, dump_aggregation=dump_aggregation)

    doc = report.to_dict()
    click.echo(dump_json(doc))
    if json_output:
        dump_json(doc, json_output)
    if csv_path:
        write_report_csv([report], csv_path, append=True)
    sys.exit(EXIT_CONVERGED if report.converged else EXIT_NOT_CONVERGED)


@cli.command()
@click.argument('table')
@click.option('--max-n', type=click.INT, default=DEFAULT_MAX_N,
              help='Skip rows larger than this size.')
@click.option('--n', 'n', type=click.INT, default=256,
              help='Matrix size of the smoothing figure.')
@click.option('-c', '--config', multiple=True,
              help='Configuration values overriding the preset, comma '
                   'separated key-value pairs.')
@click.option('--config-file', default=None,
              help='Load configuration values from a "key = value" file.')
@click.option('-o', '--output', default=None,
              help='CSV output path (default: print to stdout).')
@click.option('--no-timing', is_flag=True, default=False,
              help='Leave the wall_ms column empty for byte-identical '
                   'output.')
@click.option('--debug', is_flag=True, default=False,
              help='Enable debug logging.')
@handle_errors
def reproduce(table, max_n, n, config, config_file, output, no_timing,
              debug):
    """
    Reproduce a benchmark table, or the smoothing figure data.

    TABLE is one of the presets (or aliases table1 .. table7), or
    "smoothing-figure".  Rows are solved concurrently when the
    MARKOV_ML_THREADS environment variable is larger than 1; the output
    order does not depend on it.  When an output path is given, a sidecar
    with the preset parameters is written next to it.
    """
    setup_logging(debug)
    if table == SMOOTHING_FIGURE:
        experiment = assemble_config(
            None, config_file, config,
            base=dict(BASE_CONFIG, omega=SMOOTHING_OMEGA))
        points = run_smoothing_figure(n, output, omega=experiment['omega'])
        if output is None:
            click.echo('smoother,index,eigenvalue_real,eigenvalue_imag,error')
            for p in points:
                click.echo('{},{},{!r},{!r},{!r}'.format(
                    p.smoother, p.index, p.eigenvalue.real,
                    p.eigenvalue.imag, p.error))
        return

    overrides = assemble_config(table, config_file, config)
    rows = table_rows(table, max_n, overrides)
    if not rows:
        raise click.UsageError('No rows of {} fit --max-n {}'.
                               format(table, max_n))
    log_dict('Table {}'.format(table), overrides)
    threads = thread_count()
    getLogger(__name__).info('Solving %d rows with %d thread(s)',
                             len(rows), threads)

    reports = run_rows(rows, threads, output, timing=not no_timing)
    if output is None:
        click.echo(','.join(CSV_COLUMNS))
        for report in reports:
            click.echo(format_csv_row(report, timing=not no_timing))
    else:
        dump_json({'table': table, 'max_n': max_n, 'parameters': overrides,
                   'rows': len(rows), 'version': markov_ml.__version__},
                  output + '.json')


@cli.command()
@click.option('--problem', type=click.Choice(PROBLEM_KINDS), default=None,
              help='Problem to generate.')
@problem_options
@click.option('--matrix', default=None, type=click.Path(exists=True),
              help='Matrix Market file instead of a generated problem.')
@click.option('--max-n', type=click.INT, default=2000,
              help='Refuse matrices larger than this.')
@click.option('-o', '--output', default=None,
              help='CSV output path of the eigenvalues.')
@click.option('--json-output', default=None,
              help='JSON output path of the summary.')
@click.option('--debug', is_flag=True, default=False,
              help='Enable debug logging.')
@handle_errors
def spectrum(problem, n, rows, cols, epsilon, wells, mc_samples, seed,
             matrix, max_n, output, json_output, debug):
    """Dump the dense spectrum of a small matrix."""
    setup_logging(debug)
    if matrix is not None:
        b = read_matrix_market(matrix)
    else:
        doc = validate_problem_doc(dict(
            (k, v) for k, v in _problem_flags(
                problem, n, rows, cols, epsilon, wells, mc_samples,
                seed).items()
            if v is not None))
        b = load_problem(build_problem_spec(doc))
    _, summary = run_spectrum(b, output, max_n)
    click.echo(dump_json(summary))
    if json_output:
        dump_json(summary, json_output)


def main():
    cli(prog_name='markov-ml')


if __name__ == '__main__':
    main()

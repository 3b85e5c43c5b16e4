import codecs
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from threading import Lock

import numpy as np
from cachetools import LRUCache

import markov_ml
from markov_ml.aggregation import AggregationConfig, write_aggregation_csv
from markov_ml.errors import InputError
from markov_ml.metrics_bench import (make_run_report, smoothing_diagnostic,
                                     write_report_csv, write_smoothing_csv)
from markov_ml.multilevel import (ABS_RESIDUAL_FLOOR, AM, SSM, CycleConfig,
                                  relax_only, solve_first_eigenvector,
                                  solve_second_eigenvector)
from markov_ml.presets import BASE_CONFIG, preset_config
from markov_ml.problem_gen import ProblemSpec, UNIFORM_CHAIN, generate_problem
from markov_ml.schema import (PROBLEM_KEYS, RELAX_ONLY,
                              validate_experiment_config)
from markov_ml.smoothers import JACOBI, POWER, SmootherConfig
from markov_ml.sparse_core import dense_eigen_oracle, write_matrix_market
from markov_ml.utils import (JsonEncoder, ensure_parent_dir, fingerprint_file,
                             parse_config, parse_config_file, utc_now)

__all__ = [
    'THREADS_ENV', 'SMOOTHING_OMEGA',
    'setup_logging', 'log_dict', 'assemble_config', 'thread_count',
    'build_problem_spec', 'build_cycle_config', 'load_problem',
    'run_generate', 'run_solve', 'run_rows', 'run_smoothing_figure',
    'run_spectrum', 'dump_json',
]

THREADS_ENV = 'MARKOV_ML_THREADS'
SMOOTHING_OMEGA = BASE_CONFIG['omega']

_problem_cache = LRUCache(16)
_problem_cache_lock = Lock()


def setup_logging(debug=False):
    logging.basicConfig(
        level='DEBUG' if debug else 'INFO',
        format='%(asctime)s [%(levelname)s]: %(message)s'
    )


def log_dict(title, var_dict):
    """
    Dump `var_dict` in logs.

    Args:
        title (str): Title of this log.
        var_dict (dict): The dict to log.
    """
    if var_dict:
        getLogger(__name__).info(
            '%s:\n  %s', title, '\n  '.join([
                '{}={}'.format(k, v) for k, v in sorted(var_dict.items())
            ])
        )


def assemble_config(preset=None, config_file=None, config_texts=(),
                    flags=None, base=None):
    """
    Merge the experiment config sources, later ones taking precedence:
    `base` (default :data:`BASE_CONFIG`), `preset`, `config_file`, each of
    `config_texts`, then the non-None `flags`.

    Returns:
        dict: The validated experiment config.
    """
    config = dict(BASE_CONFIG if base is None else base)
    if preset:
        config.update(preset_config(preset))
    if config_file:
        config.update(parse_config_file(config_file))
    for text in config_texts:
        config.update(parse_config(text))
    for key, value in (flags or {}).items():
        if value is not None:
            config[key] = value
    return validate_experiment_config(config)


def thread_count(environ=None):
    """Number of rows solved concurrently, from ``MARKOV_ML_THREADS``."""
    environ = os.environ if environ is None else environ
    text = environ.get(THREADS_ENV, '').strip()
    if not text:
        return 1
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise InputError('{} must be a positive integer: got {!r}'.
                         format(THREADS_ENV, text))
    return value


def build_problem_spec(config):
    if config.get('problem') is None or config.get('n') is None:
        raise InputError('Both "problem" and "n" must be configured.')
    fields = {k: config[k] for k in PROBLEM_KEYS[1:] if k in config}
    return ProblemSpec(kind=config['problem'], **fields)


def build_cycle_config(config):
    method = config.get('method')
    smoother = SmootherConfig(
        kind=config['smoother'], omega=config['omega'],
        steps=config['pre_steps'], cheb_roots=tuple(config['cheb_roots']))
    agg_cfg = AggregationConfig(target_size=config['s'],
                                theta=config['theta'])
    return CycleConfig(
        method='dam' if method in (None, RELAX_ONLY) else method,
        pre_steps=config['pre_steps'], post_steps=config['post_steps'],
        smoother=smoother, agg_cfg=agg_cfg,
        coarsest_size=config['coarsest_size'],
        coarsest_tol=config['coarsest_tol'],
        max_cycles=config['max_cycles'],
        residual_tol=config['residual_tol'],
        first_cycle_uses_v1=config['first_cycle_uses_v1'],
        scaled_correction=config.get('scaled_correction', True),
        d_policy=config['d_policy'], d_value=config['d_value'],
        shift_safety=config['shift_safety'],
        slow_process_patience=config['slow_process_patience'],
        seed=config['start_seed'],
    )


def load_problem(spec):
    """Generate the matrix of `spec`, sharing results through an LRU cache."""
    with _problem_cache_lock:
        if spec not in _problem_cache:
            start = time.time()
            _problem_cache[spec] = generate_problem(spec)
            getLogger(__name__).debug(
                'Generated %s (n=%s) in %.3fs', spec.kind, spec.n,
                time.time() - start)
        return _problem_cache[spec]


def dump_json(obj, path=None):
    """Write `obj` as JSON to `path`, or return the text when None."""
    text = json.dumps(obj, cls=JsonEncoder, sort_keys=True, indent=2)
    if path is None:
        return text
    with codecs.open(ensure_parent_dir(path), 'wb', 'utf-8') as f:
        f.write(text + '\n')


def run_generate(spec, output):
    """
    Write the matrix of `spec` to `output` in Matrix Market format, plus a
    JSON sidecar ``output + '.json'``.

    Returns:
        dict: The sidecar document.
    """
    m = load_problem(spec)
    write_matrix_market(m, ensure_parent_dir(output))
    sidecar = {
        'spec': dict(spec._asdict()),
        'seed': spec.seed,
        'n': m.shape[0],
        'nnz': m.nnz,
        'fingerprint': fingerprint_file(output),
        'version': markov_ml.__version__,
        'generated_at': utc_now(),
    }
    dump_json(sidecar, output + '.json')
    getLogger(__name__).info('Wrote %s: n=%d, nnz=%d', output, m.shape[0],
                             m.nnz)
    return sidecar


def _solve_matrix(b, config):
    method = config['method']
    cfg = build_cycle_config(config)
    if method in (AM, SSM):
        cfg = cfg._replace(
            method=method, smoother=SmootherConfig(JACOBI, config['omega']),
            first_cycle_uses_v1=False)
        return solve_first_eigenvector(b, cfg)
    if method == RELAX_ONLY:
        return relax_only(b, cfg, config.get('steps', 200))
    return solve_second_eigenvector(b, cfg,
                                    trace_relaxation=config.get('_trace'))


def run_solve(config, matrix=None, matrix_name=None, trace_file=None,
              dump_aggregation=None):
    """
    Run one experiment.

    Args:
        config (dict): The validated experiment config.
        matrix: Matrix to solve instead of the configured problem.
        matrix_name (str or None): Name of `matrix` in the report.
        trace_file (str or None): Where to write the relaxation trace CSV.
        dump_aggregation (str or None): Where to write the finest-level
            aggregation CSV.

    Returns:
        (RunReport, SolveResult): The report and the raw solver result.
    """
    if matrix is None:
        spec = build_problem_spec(config)
        b = load_problem(spec)
    else:
        b = matrix
        spec = ProblemSpec(kind=matrix_name or 'matrix', n=b.shape[0])
    method = config.get('method') or 'dssm'
    config = dict(config, method=method, _trace=trace_file is not None)

    start = time.perf_counter()
    result = _solve_matrix(b, config)
    wall_time = time.perf_counter() - start

    if method in (AM, SSM):
        report = make_run_report(spec, method, result, wall_time,
                                 atol=config['residual_tol'])
    else:
        report = make_run_report(spec, method, result, wall_time,
                                 target=config['residual_tol'],
                                 atol=ABS_RESIDUAL_FLOOR)

    if trace_file is not None and result.relaxation_trace is not None:
        with codecs.open(ensure_parent_dir(trace_file), 'wb', 'utf-8') as f:
            f.write('cycle,phase,step,residual\n')
            for cycle, phase, step, residual in result.relaxation_trace:
                f.write('{},{},{},{!r}\n'.format(cycle, phase, step,
                                                 residual))
    if dump_aggregation is not None:
        agg = result.hierarchy[0].agg
        if agg is None:
            getLogger(__name__).warning(
                'No aggregation on the finest level; nothing dumped.')
        else:
            write_aggregation_csv(agg, ensure_parent_dir(dump_aggregation))
    return report, result


def run_rows(configs, threads=1, output=None, timing=True):
    """
    Solve every config of `configs`, `threads` at a time.

    Reports keep the order of `configs` regardless of completion order.

    Returns:
        list[RunReport]: The reports.
    """
    def solve(config):
        getLogger(__name__).info('Solving %s n=%s with %s',
                                 config['problem'], config['n'],
                                 config['method'])
        return run_solve(config)[0]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            reports = list(executor.map(solve, configs))
    else:
        reports = [solve(config) for config in configs]
    if output is not None:
        write_report_csv(reports, ensure_parent_dir(output), timing=timing)
    return reports


def run_smoothing_figure(n=256, output=None, omega=SMOOTHING_OMEGA):
    """
    Smoothing-property data of Jacobi and power iteration on the uniform
    chain of size `n`.

    Returns:
        list[SmoothingPoint]: Jacobi points followed by power points.
    """
    b = load_problem(ProblemSpec(kind=UNIFORM_CHAIN, n=n))
    points = smoothing_diagnostic(b, JACOBI, omega=omega) + \
        smoothing_diagnostic(b, POWER)
    if output is not None:
        write_smoothing_csv(points, ensure_parent_dir(output))
    return points


def run_spectrum(b, output=None, max_n=2000):
    """
    Dense spectrum of `b` as CSV ``index,real,imag,modulus``.

    Returns:
        (SpectrumReport, dict): The oracle report and a JSON summary.
    """
    report = dense_eigen_oracle(b, max_n)
    if output is not None:
        with codecs.open(ensure_parent_dir(output), 'wb', 'utf-8') as f:
            f.write('index,real,imag,modulus\n')
            for i, lam in enumerate(report.eigenvalues):
                f.write('{},{!r},{!r},{!r}\n'.format(
                    i, float(lam.real), float(lam.imag), float(np.abs(lam))))
    summary = {
        'n': b.shape[0],
        'second_eigenvalue': report.second_eigenvalue,
        'spectral_gap_after_second': report.spectral_gap_after_second,
        'largest_modulus': float(np.abs(report.eigenvalues[0])),
    }
    return report, summary
from collections import OrderedDict

from .errors import InputError
from .multilevel import D_POLICIES, METHODS
from .problem_gen import PROBLEM_KINDS
from .smoothers import SMOOTHER_KINDS

__all__ = [
    'RELAX_ONLY', 'EXPERIMENT_METHODS',
    'validate_cheb_roots',
    'validate_problem_doc',
    'validate_experiment_config',
]

RELAX_ONLY = 'relax-only'
EXPERIMENT_METHODS = METHODS + [RELAX_ONLY]

PROBLEM_KEYS = ['problem', 'n', 'epsilon', 'rows', 'cols', 'wells',
                'mc_samples', 'seed', 'tau', 'beta', 'barrier', 'lag_steps']


def validate_cheb_roots(value):
    """
    Chebyshev roots given as a sequence or as text like ``-0.5 -0.25 0``
    (blanks, commas or semicolons between the roots).
    """
    if isinstance(value, str):
        value = value.replace(';', ' ').replace(',', ' ').split()
    elif isinstance(value, (int, float)):
        value = [value]
    roots = tuple(float(r) for r in value)
    if len(roots) > 3 or any(not -1. <= r <= 0. for r in roots):
        raise ValueError('at most three roots in [-1, 0] are allowed: got '
                         '{!r}'.format(roots))
    return roots


def _choices(type_, choices):
    def inner(value):
        value = type_(value)
        if value not in choices:
            raise ValueError('only {!r} are allowed: got {!r}'.
                             format(choices, value))
        return value
    return inner


def _bounded(type_, low=None, high=None, low_open=False):
    def inner(value):
        if isinstance(value, bool):
            raise ValueError('not a number: {!r}'.format(value))
        if type_ is int and isinstance(value, float):
            if not value.is_integer():
                raise ValueError('not an integer: {!r}'.format(value))
        value = type_(value)
        if low is not None and (value < low or (low_open and value == low)):
            raise ValueError('must be {} {!r}: got {!r}'.
                             format('>' if low_open else '>=', low, value))
        if high is not None and value > high:
            raise ValueError('must be <= {!r}: got {!r}'.format(high, value))
        return value
    return inner


def _boolean(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ('true', 'yes', 'on'):
        return True
    if isinstance(value, str) and value.lower() in ('false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: {!r}'.format(value))


def _validate_key(doc, key, validator, drop_None=True):
    if drop_None and doc.get(key, None) is None:
        doc.pop(key, None)
    if key in doc:
        try:
            doc[key] = validator(doc[key])
        except (ValueError, TypeError) as ex:
            raise InputError('Attribute {!r} error: {}'.format(key, ex))


def _require_dict(doc, what):
    if not isinstance(doc, (dict, OrderedDict)):
        raise InputError('{} must be a dict: got {!r}'.format(what, doc))
    return dict(doc)


def validate_problem_doc(doc):
    """
    Validate the problem part of an experiment config.

    Args:
        doc (dict): Config dict; keys other than the problem keys are
            left untouched.

    Returns:
        dict: The validated copy of `doc`.

    Raises:
        InputError: If the doc cannot pass validation.
    """
    doc = _require_dict(doc, 'Problem doc')
    _validate_key(doc, 'problem', _choices(str, PROBLEM_KINDS))
    _validate_key(doc, 'n', _bounded(int, 2))
    _validate_key(doc, 'epsilon', _bounded(float, 0., low_open=True))
    _validate_key(doc, 'rows', _bounded(int, 1))
    _validate_key(doc, 'cols', _bounded(int, 1))
    _validate_key(doc, 'wells', _bounded(int, 1))
    _validate_key(doc, 'mc_samples', _bounded(int, 1))
    _validate_key(doc, 'seed', _bounded(int, 0, 2 ** 64 - 1))
    _validate_key(doc, 'tau', _bounded(float, 0., low_open=True))
    _validate_key(doc, 'beta', _bounded(float, 0., low_open=True))
    _validate_key(doc, 'barrier', _bounded(float, 0.))
    _validate_key(doc, 'lag_steps', _bounded(int, 1))
    if 'rows' in doc and 'cols' in doc and 'n' in doc and \
            doc['rows'] * doc['cols'] != doc['n']:
        raise InputError('Lattice shape {}x{} does not match n={}'.
                         format(doc['rows'], doc['cols'], doc['n']))
    return doc


def validate_experiment_config(doc):
    """
    Validate an experiment config dict.

    Args:
        doc: Object to be validated, the merge of preset, config file,
            ``-c`` overrides and flags.

    Returns:
        dict: The validated experiment config, values typed.

    Raises:
        InputError: If the config cannot pass validation, including
            unknown keys.
    """
    doc = validate_problem_doc(doc)
    unknown = sorted(set(doc) - set(PROBLEM_KEYS) - set(_SOLVER_KEYS))
    if unknown:
        raise InputError('Unknown config keys: {}'.format(', '.join(unknown)))
    for key, validator in _SOLVER_KEYS.items():
        _validate_key(doc, key, validator)
    return doc


_SOLVER_KEYS = OrderedDict([
    ('method', _choices(str, EXPERIMENT_METHODS)),
    ('smoother', _choices(str, SMOOTHER_KINDS)),
    ('pre_steps', _bounded(int, 0)),
    ('post_steps', _bounded(int, 0)),
    ('steps', _bounded(int, 0)),
    ('omega', _bounded(float, 0., 1., low_open=True)),
    ('cheb_roots', validate_cheb_roots),
    ('s', _bounded(int, 2)),
    ('theta', _bounded(float, 0., 1., low_open=True)),
    ('d_policy', _choices(str, D_POLICIES)),
    ('d_value', _bounded(float, 0., 1.)),
    ('shift_safety', _bounded(float, 0.)),
    ('residual_tol', _bounded(float, 0., low_open=True)),
    ('max_cycles', _bounded(int, 1)),
    ('coarsest_size', _bounded(int, 2)),
    ('coarsest_tol', _bounded(float, 0., low_open=True)),
    ('first_cycle_uses_v1', _boolean),
    ('scaled_correction', _boolean),
    ('slow_process_patience', _bounded(int, 0)),
    ('start_seed', _bounded(int, 0, 2 ** 64 - 1)),
])

"""
Experiment presets for the benchmark tables.

Every table preset names a problem, the sizes of its rows and the solver
parameters.  Parameters not named here take their defaults from
:data:`BASE_CONFIG`.
"""
from collections import namedtuple

from .errors import InputError
from .multilevel import DAM, DSSM, FIXED, MEAN_DIAG
from .problem_gen import (COMPLEX_CHAIN, DELAUNAY, DOUBLE_WELL, FOUR_WELL,
                          LATTICE_2D, UNIFORM_CHAIN, WEAK_LINK)

__all__ = [
    'BASE_CONFIG', 'DEFAULT_MAX_N', 'SMOOTHING_FIGURE',
    'TablePreset', 'TABLE_PRESETS', 'PRESET_ALIASES',
    'resolve_preset', 'preset_config', 'table_rows',
]

DEFAULT_MAX_N = 16384
SMOOTHING_FIGURE = 'smoothing-figure'

BASE_CONFIG = {
    'smoother': 'chebyshev',
    'cheb_roots': (-0.5, -0.25, 0.),
    'omega': 0.7,
    'pre_steps': 100,
    'post_steps': 100,
    's': 2,
    'theta': 0.1,
    'd_policy': FIXED,
    'd_value': 0.5,
    'shift_safety': 0.5,
    'residual_tol': 1e-10,
    'max_cycles': 50,
    'coarsest_size': 16,
    'coarsest_tol': 1e-14,
    'first_cycle_uses_v1': True,
    'scaled_correction': True,
    'slow_process_patience': 0,
    'start_seed': 0,
    'seed': 0,
}

TablePreset = namedtuple(
    'TablePreset',
    ['name', 'problem', 'sizes', 'methods', 'config', 'row_config']
)
TablePreset.__new__.__defaults__ = ((),)
TablePreset.__doc__ = """
A benchmark table.

``row_config`` holds ``(sizes, methods, values)`` triples: `values` apply to
the rows whose size is in `sizes` and whose method is in `methods`, None
matching every row.
"""

TABLE_PRESETS = {
    'table-uniform-chain': TablePreset(
        'table-uniform-chain', UNIFORM_CHAIN,
        [1024, 4096, 16384, 65536, 262144], [DSSM, DAM], {}),
    'table-weak-link': TablePreset(
        'table-weak-link', WEAK_LINK,
        [1024, 4096, 16384, 65536, 262144], [DSSM, DAM],
        {'epsilon': 0.001}),
    'table-lattice2d': TablePreset(
        'table-lattice2d', LATTICE_2D,
        [1024, 4096, 16384, 32768, 65536, 262144], [DSSM, DAM], {'s': 4}),
    'table-delaunay': TablePreset(
        'table-delaunay', DELAUNAY,
        [1024, 4096, 16384, 65536, 262144], [DSSM, DAM],
        {'s': 4, 'theta': 0.25},
        [((262144,), None, {'theta': 0.1}),
         (None, (DSSM,), {'pre_steps': 300, 'post_steps': 300})]),
    'table-two-well': TablePreset(
        'table-two-well', DOUBLE_WELL,
        [512, 1024, 2048, 4096], [DSSM, DAM],
        {'pre_steps': 3, 'post_steps': 3, 'd_policy': MEAN_DIAG}),
    'table-four-well': TablePreset(
        'table-four-well', FOUR_WELL,
        [512, 1024, 2048, 4096], [DSSM, DAM],
        {'s': 3, 'pre_steps': 9, 'post_steps': 9, 'd_policy': MEAN_DIAG}),
    'table-complex-chain': TablePreset(
        'table-complex-chain', COMPLEX_CHAIN,
        [1024, 4096, 16384, 65536], [DSSM, DAM],
        {'s': 3, 'd_value': 0.46}),
}

PRESET_ALIASES = {
    'table1': 'table-uniform-chain',
    'table2': 'table-weak-link',
    'table3': 'table-lattice2d',
    'table4': 'table-delaunay',
    'table5': 'table-two-well',
    'table6': 'table-four-well',
    'table7': 'table-complex-chain',
}


def resolve_preset(name):
    """
    Get the :class:`TablePreset` called `name` (or one of its aliases).

    Raises:
        InputError: If no such preset exists.
    """
    name = PRESET_ALIASES.get(name, name)
    if name not in TABLE_PRESETS:
        raise InputError('Unknown preset: {!r}; choose from {}'.format(
            name, ', '.join(sorted(TABLE_PRESETS) + sorted(PRESET_ALIASES))))
    return TABLE_PRESETS[name]


def preset_config(name):
    """Experiment config of the preset `name`, without ``n`` or ``method``."""
    preset = resolve_preset(name)
    ret = dict(BASE_CONFIG)
    ret['problem'] = preset.problem
    ret.update(preset.config)
    return ret


def table_rows(name, max_n=DEFAULT_MAX_N, overrides=None):
    """
    Experiment configs of all rows of a table, in output order.

    Rows are ordered by size, then by the preset's method order.  Sizes
    above `max_n` are skipped.  The preset's per-row values apply on top of
    its table-wide ones; of `overrides`, only values differing from
    :func:`preset_config` replace them, so a merged experiment config can
    be passed as is.

    Args:
        name (str): Preset name or alias.
        max_n (int): Largest size to include.
        overrides (dict or None): Values replacing the preset's.

    Returns:
        list[dict]: One config dict per row.
    """
    preset = resolve_preset(name)
    table_config = preset_config(name)
    explicit = {k: v for k, v in (overrides or {}).items()
                if k not in table_config or table_config[k] != v}
    rows = []
    for n in preset.sizes:
        if n > max_n:
            continue
        for method in preset.methods:
            cfg = dict(table_config)
            for sizes, methods, values in preset.row_config:
                if (sizes is None or n in sizes) and \
                        (methods is None or method in methods):
                    cfg.update(values)
            cfg.update(explicit)
            cfg['n'] = n
            cfg['method'] = method
            rows.append(cfg)
    return rows

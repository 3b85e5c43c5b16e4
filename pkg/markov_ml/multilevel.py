"""
Multilevel aggregation V-cycles for stochastic eigenproblems.

* AM and SSM compute the stationary distribution ``Bx = x``, working on
  ``A = I - B`` with multiplicative coarse-level corrections.
* DAM and DSSM compute the second eigenvector ``Bx = lambda_2 x`` with
  Hotelling deflation, sign-constrained aggregation and (for DSSM) a
  shifted square-and-stretch of every level before coarsening.
"""
from collections import namedtuple
from logging import getLogger

import numpy as np
from scipy import sparse

from .aggregation import (AggregationConfig, aggregate_bottom_up, prolong,
                          proportions, restrict, strength_matrix)
from .errors import (BreakdownError, InputError, SignViolationError,
                     SlowProcessError, SolverError, StagnationError)
from .smoothers import (CHEBYSHEV, JACOBI, POWER, DeflatedOperator,
                        SmootherConfig, jacobi_step, normalize, power_step,
                        rayleigh_estimate, relax, validate_smoother_config)
from .sparse_core import (as_csr, column_sums, is_irreducible,
                          is_pattern_symmetric, spmv)

__all__ = [
    'AM', 'SSM', 'DAM', 'DSSM', 'METHODS',
    'MIN_DIAG_A', 'MEAN_DIAG', 'FIXED', 'D_POLICIES',
    'ABS_RESIDUAL_FLOOR', 'MAX_CORRECTION_SCALE',
    'CycleConfig', 'validate_cycle_config', 'first_vector_config',
    'Level', 'LevelHierarchy', 'SolveResult',
    'coarse_operator_am', 'coarse_operator_stochastic',
    'SquareStretchOperator', 'square_stretch_operator',
    'estimate_shift_p', 'choose_stretch_d', 'scaled_correction',
    'first_cycle', 'second_cycle',
    'solve_first_eigenvector', 'solve_second_eigenvector', 'relax_only',
]

AM = 'am'
SSM = 'ssm'
DAM = 'dam'
DSSM = 'dssm'
METHODS = [AM, SSM, DAM, DSSM]

MIN_DIAG_A = 'min-diag-A'
MEAN_DIAG = 'mean-diag'
FIXED = 'fixed'
D_POLICIES = [MIN_DIAG_A, MEAN_DIAG, FIXED]

#: residuals below this are at round-off level for unit l1 iterates
ABS_RESIDUAL_FLOOR = 1e-14

_SIGN_TOL = 1e-13
_NONSYMMETRIC_D_MAX = 0.49
_D_MAX = 0.5
_SWITCH_RATIO = 0.5
# smallest diagonal of the shifted level matrix squared by SSM
_SSM_MIN_DIAGONAL = 0.5

#: largest factor applied to a coarse-level correction
MAX_CORRECTION_SCALE = 4.
_MIN_COSINE = 0.5

CycleConfig = namedtuple(
    'CycleConfig',
    ['method', 'pre_steps', 'post_steps', 'smoother', 'agg_cfg',
     'coarsest_size', 'coarsest_tol', 'max_cycles', 'residual_tol',
     'first_cycle_uses_v1', 'd_policy', 'd_value', 'shift_safety',
     'coarsest_max_steps', 'slow_process_patience', 'seed',
     'scaled_correction']
)
CycleConfig.__new__.__defaults__ = (
    DSSM, 100, 100, SmootherConfig(), AggregationConfig(), 16, 1e-14, 50,
    1e-10, True, FIXED, 0.5, 0.5, 50, 3, 0, True)
CycleConfig.__doc__ = """
Parameters of a multilevel solve.

``residual_tol`` is absolute for AM/SSM (``||Ax||_1``) and a reduction
factor relative to the initial residual for DAM/DSSM.  The smoother's
``steps`` field is ignored in favor of ``pre_steps`` and ``post_steps``.
``slow_process_patience`` is the number of consecutive cycles with a
growing residual tolerated before :class:`SlowProcessError` (0 disables).
With ``scaled_correction`` the SSM and DSSM cycles replace the result of
every level by the residual-minimizing combination with the iterate
before its coarse-level correction (see :func:`scaled_correction`); AM
and DAM ignore it.
"""


def validate_cycle_config(cfg):
    if cfg.method not in METHODS:
        raise InputError('Unknown method: {!r}'.format(cfg.method))
    if cfg.pre_steps < 0 or cfg.post_steps < 0:
        raise InputError('Relaxation counts must be >= 0.')
    if cfg.coarsest_size < 2:
        raise InputError('coarsest_size must be >= 2: got {!r}'.
                         format(cfg.coarsest_size))
    if not cfg.residual_tol > 0:
        raise InputError('residual_tol must be > 0: got {!r}'.
                         format(cfg.residual_tol))
    if cfg.max_cycles < 1:
        raise InputError('max_cycles must be >= 1: got {!r}'.
                         format(cfg.max_cycles))
    if cfg.d_policy not in D_POLICIES:
        raise InputError('Unknown stretch policy: {!r}'.format(cfg.d_policy))
    validate_smoother_config(cfg.smoother)
    return cfg


def first_vector_config(cfg=None):
    """
    Configuration of the SSM solve that provides the first eigenvector for
    a DAM/DSSM run configured by `cfg`.
    """
    cfg = cfg or CycleConfig()
    return cfg._replace(
        method=SSM, pre_steps=10, post_steps=10,
        smoother=SmootherConfig(JACOBI, 0.7, 10),
        agg_cfg=cfg.agg_cfg._replace(sign_constrained=False),
        max_cycles=200, residual_tol=1e-12, d_policy=MIN_DIAG_A,
        slow_process_patience=0,
    )


class Level(object):
    """
    One level of a V-cycle.

    Args:
        b (scipy.sparse.csr_matrix): The level operator; the stochastic
            matrix on the DAM/DSSM path, ``A`` on the AM/SSM path.
        agg (Aggregation or None): Aggregation to the next coarser level.
        x_ref (np.ndarray or None): Reference vector defining ``P``.
        stretch_d (float or None): Stretching parameter used to coarsen.
        shift_p (float or None): Shifting parameter used to coarsen.
        correction_scale (float or None): Scale of the coarse-level
            correction, when it was scaled.
    """

    def __init__(self, b, agg=None, x_ref=None, stretch_d=None,
                 shift_p=None, correction_scale=None):
        self.b = b
        self.agg = agg
        self.x_ref = x_ref
        self.stretch_d = stretch_d
        self.shift_p = shift_p
        self.correction_scale = correction_scale

    @property
    def size(self):
        return self.b.shape[0]

    @property
    def nnz(self):
        return self.b.nnz

    def summary(self):
        return {'size': self.size, 'nnz': self.nnz,
                'stretch_d': self.stretch_d, 'shift_p': self.shift_p}


class LevelHierarchy(list):
    """Levels of one V-cycle, finest first."""

    def summary(self):
        return [level.summary() for level in self]

    def record(self, index, level):
        del self[index:]
        self.append(level)
        return level


SolveResult = namedtuple(
    'SolveResult',
    ['eigenvector', 'eigenvalue_estimate', 'residual_history',
     'cycles_used', 'hierarchy_summary', 'converged', 'spmv_count',
     'd_used', 'hierarchy', 'relaxation_trace']
)


def _check_positive(x_ref):
    if np.any(x_ref <= 0):
        raise InputError('Reference vector must be strictly positive.')


def coarse_operator_am(a, agg, x_ref):
    """
    Galerkin coarse operator ``A_c = Q^T A diag(x_ref) Q``.

    Raises:
        InputError: If `x_ref` has a nonpositive entry.
    """
    x_ref = np.asarray(x_ref, dtype=np.float64)
    _check_positive(x_ref)
    q = agg.q
    return as_csr(q.T.dot(a.dot(sparse.diags(x_ref))).dot(q))


def coarse_operator_stochastic(b, agg, x_ref, allow_negative_diagonal=False):
    """
    Coarse stochastic matrix ``B_c = Q^T B diag(x_ref) Q diag(Q^T x_ref)^-1``.

    Entries in ``(-1e-13, 0)`` are clamped to zero and the affected columns
    renormalized.  With `allow_negative_diagonal` (square-and-stretch
    operators) the diagonal is exempt from this rule.

    Args:
        b (scipy.sparse.csr_matrix): Fine matrix with unit column sums.
        agg (Aggregation): The aggregation.
        x_ref (np.ndarray): Reference vector, sign-homogeneous per
            aggregate.
        allow_negative_diagonal (bool): Whether negative diagonal entries
            are legitimate.

    Returns:
        scipy.sparse.csr_matrix: The coarse matrix.

    Raises:
        CancellationError: If an aggregate of `x_ref` sums to zero.
        SignViolationError: If an entry is below ``-1e-13``.
    """
    w = proportions(agg, x_ref)
    q = agg.q
    bc = sparse.coo_matrix(q.T.dot(b.dot(sparse.diags(w))).dot(q))
    checked = bc.row != bc.col if allow_negative_diagonal else \
        np.ones(bc.nnz, dtype=bool)
    negative = checked & (bc.data < 0)
    if np.any(negative):
        worst = int(np.argmin(np.where(negative, bc.data, 0.)))
        if bc.data[worst] < -_SIGN_TOL:
            raise SignViolationError(
                'Coarse operator entry ({}, {}) is {!r}: aggregates are not '
                'sign-homogeneous.'.format(int(bc.row[worst]),
                                           int(bc.col[worst]),
                                           float(bc.data[worst])))
        data = np.where(negative, 0., bc.data)
        bc = sparse.coo_matrix((data, (bc.row, bc.col)), shape=bc.shape)
        touched = np.unique(bc.col[negative])
        sums = column_sums(bc)
        scale = np.ones(bc.shape[1])
        scale[touched] = 1. / sums[touched]
        bc = sparse.coo_matrix(bc.tocsr().dot(sparse.diags(scale)))
    return as_csr(bc)


class SquareStretchOperator(object):
    """
    The operator ``(((B + pI) / (1 + p))^2 - dI) / (1 - d)``.

    Without squaring it is ``((B + pI) / (1 + p) - dI) / (1 - d)``, which
    for ``p = 0`` is the plain stretch ``B/(1-d) - dI/(1-d)``.  Both keep
    unit column sums and map the eigenvalue 1 to 1.
    """

    def __init__(self, b, d, p=0., square=True):
        if not 0. <= d < 1.:
            raise InputError('Stretch d must be in [0, 1): got {!r}'.
                             format(d))
        if not p >= 0.:
            raise InputError('Shift p must be >= 0: got {!r}'.format(p))
        self.b = b
        self.d = float(d)
        self.p = float(p)
        self.square = bool(square)

    def map_eigenvalue(self, lam):
        t = (np.asarray(lam) + self.p) / (1. + self.p)
        if self.square:
            t = t * t
        return (t - self.d) / (1. - self.d)

    def apply(self, x):
        y = (spmv(self.b, x) + self.p * x) / (1. + self.p)
        if self.square:
            y = (spmv(self.b, y) + self.p * y) / (1. + self.p)
        return (y - self.d * x) / (1. - self.d)

    def materialize(self):
        n = self.b.shape[0]
        eye = sparse.identity(n, format='csr')
        m = (self.b + self.p * eye) / (1. + self.p)
        if self.square:
            m = m.dot(m)
        return as_csr((m - self.d * eye) / (1. - self.d))


def square_stretch_operator(b, d, p=0., square=True):
    return SquareStretchOperator(b, d, p, square)


def estimate_shift_p(b, x, eigenvalue_estimate=None, safety=0.5):
    """
    Shift ``p = max(0, (1 - lambda_est) * (1 + safety))``.

    Args:
        b (scipy.sparse.csr_matrix): The level matrix, used for the
            least-squares estimate when `eigenvalue_estimate` is None.
        x (np.ndarray): The current iterate.
        eigenvalue_estimate (float or None): Estimate of ``lambda_2``.
        safety (float): Relative safety margin.
    """
    if eigenvalue_estimate is None:
        eigenvalue_estimate = rayleigh_estimate(spmv(b, x), x)
    if not np.isfinite(eigenvalue_estimate):
        raise InputError('Eigenvalue estimate is not finite.')
    return max(0., (1. - eigenvalue_estimate) * (1. + safety))


def choose_stretch_d(b_level, policy=FIXED, value=0.5):
    """
    Stretching parameter of a level.

    Policies: ``min-diag-A`` uses ``min(1 - diag(B))``, ``mean-diag`` the
    mean of ``diag(B)`` and ``fixed`` uses `value`.  The result is clamped
    to ``[0, 0.5]``, and to ``[0, 0.49]`` when `b_level` is not symmetric
    in pattern.
    """
    diag = b_level.diagonal()
    if policy == MIN_DIAG_A:
        d = float(np.min(1. - diag))
    elif policy == MEAN_DIAG:
        d = float(np.mean(diag))
    elif policy == FIXED:
        d = float(value)
    else:
        raise InputError('Unknown stretch policy: {!r}'.format(policy))
    upper = _D_MAX if is_pattern_symmetric(b_level) else _NONSYMMETRIC_D_MAX
    return min(max(d, 0.), upper)


def _best_scale(r_before, r_after, max_scale):
    delta = r_after - r_before
    den = float(np.dot(delta, delta))
    if not den > 0. or not np.isfinite(den):
        return 1.
    alpha = -float(np.dot(r_before, delta)) / den
    return min(max(alpha, 0.), max_scale)


def scaled_correction(op, before, after, max_scale=MAX_CORRECTION_SCALE):
    """
    Rescale a coarse-level correction to minimize the eigen-residual.

    The result is ``z = before + alpha (after - before)`` for the ``alpha``
    in ``[0, max_scale]`` minimizing ``||op z - lambda z||_2``, ``lambda``
    being the estimate at `after`.  `before` is first scaled onto `after`,
    so the two may be normalized differently.  ``alpha = 1`` returns
    `after` itself and ``alpha = 0`` the uncorrected iterate.  Iterates
    more than 60 degrees apart are not combined.

    Args:
        op: The level operator, with an ``apply(x)`` method.
        before (np.ndarray): The iterate before the correction.
        after (np.ndarray): The corrected iterate.
        max_scale (float): Largest ``alpha``.

    Returns:
        (np.ndarray, float): The l1-normalized ``z`` and ``alpha``.
    """
    before = np.asarray(before, dtype=np.float64)
    after = np.asarray(after, dtype=np.float64)
    overlap = float(np.dot(after, before))
    before_sq = float(np.dot(before, before))
    if overlap * overlap < _MIN_COSINE ** 2 * before_sq * \
            float(np.dot(after, after)):
        return normalize(after), 1.
    before = before * (overlap / before_sq)
    op_after = op.apply(after)
    lam = rayleigh_estimate(op_after, after)
    alpha = _best_scale(op.apply(before) - lam * before,
                        op_after - lam * after, max_scale)
    return normalize(before + alpha * (after - before)), alpha


def _scaled_kernel_correction(a, before, after, max_scale):
    # both iterates are positive with unit sum; the combination must stay so
    alpha = _best_scale(spmv(a, before), spmv(a, after), max_scale)
    z = before + alpha * (after - before)
    if np.any(z <= 0.):
        return after, None
    return z / z.sum(), alpha


class _Counter(list):

    def __init__(self):
        super(_Counter, self).__init__([0])

    @property
    def value(self):
        return self[0]


def _second_residual(b, x):
    bx = spmv(b, x)
    lam = rayleigh_estimate(bx, x)
    return float(np.sum(np.abs(bx - lam * x))), lam


def _first_residual(a, x):
    return float(np.sum(np.abs(spmv(a, x))))


def _check_chain(b):
    b = as_csr(b)
    if b.shape[0] != b.shape[1] or b.shape[0] < 2:
        raise InputError('Expected a square matrix with n >= 2: got {!r}'.
                         format(b.shape))
    err = np.max(np.abs(column_sums(b) - 1.))
    if err > 1e-10 or (b.nnz and b.data.min() < -1e-12):
        raise InputError('Matrix is not column-stochastic (max column-sum '
                         'error {!r}).'.format(float(err)))
    if not is_irreducible(b):
        raise InputError('Matrix is not irreducible.')
    return b


class _FirstCycle(object):
    """AM / SSM V-cycle on ``A x = 0``."""

    def __init__(self, cfg, counter):
        self.cfg = cfg
        self.counter = counter
        self.hierarchy = LevelHierarchy()

    def relax(self, a, x, steps):
        smoother = self.cfg.smoother
        for _ in range(steps):
            if smoother.kind == POWER:
                n = a.shape[0]
                x = power_step(sparse.identity(n, format='csr') - a, x)
            else:
                x = jacobi_step(a, x, smoother.omega)
            self.counter[0] += 1
        return x

    def kernel_solve(self, a):
        m = a.toarray()
        m[0, :] = 1.
        rhs = np.zeros(m.shape[0])
        rhs[0] = 1.
        try:
            x = np.linalg.solve(m, rhs)
        except np.linalg.LinAlgError as ex:
            raise SolverError('Coarsest kernel solve failed: {}'.format(ex))
        return normalize(x)

    def run(self, level, a, x):
        cfg = self.cfg
        n = a.shape[0]
        record = self.hierarchy.record(level, Level(a))
        if n <= cfg.coarsest_size:
            return self.kernel_solve(a)

        x = self.relax(a, x, cfg.pre_steps)
        eye = sparse.identity(n, format='csr')
        agg = aggregate_bottom_up(
            strength_matrix(as_csr(eye - a), x, False),
            cfg.agg_cfg._replace(sign_constrained=False))
        if agg.n_coarse >= n:
            return self.kernel_solve(a)

        if cfg.method == SSM:
            # the shift keeps the square irreducible and its pattern that
            # of B, so I - B_hat stays a singular M-matrix with kernel x
            b_level = as_csr(eye - a)
            p = max(0., _SSM_MIN_DIAGONAL - float(b_level.diagonal().min()))
            squared = square_stretch_operator(b_level, 0., p).materialize()
            d = choose_stretch_d(squared, cfg.d_policy, cfg.d_value)
            a_level = as_csr(eye - (squared - d * eye) / (1. - d))
            record.stretch_d, record.shift_p = d, p
        else:
            a_level = a
        record.agg = agg
        record.x_ref = x

        rx = restrict(agg, x)
        a_c = coarse_operator_am(a_level, agg, x)
        a_next = as_csr(a_c.dot(sparse.diags(1. / rx)))
        x_c = self.run(level + 1, a_next, rx / rx.sum())
        before = x
        x = normalize(prolong(agg, x, x_c))
        x = self.relax(a, x, cfg.post_steps)
        if cfg.method == SSM and cfg.scaled_correction:
            x, record.correction_scale = _scaled_kernel_correction(
                a, before, x, MAX_CORRECTION_SCALE)
            self.counter[0] += 2
        return x


def first_cycle(b, x, cfg=None):
    """
    Run one AM / SSM V-cycle from `x`.

    Returns:
        (np.ndarray, LevelHierarchy): The new iterate and the levels.
    """
    cfg = validate_cycle_config(cfg or CycleConfig(method=AM))
    b = as_csr(b)
    a = as_csr(sparse.identity(b.shape[0], format='csr') - b)
    cycle = _FirstCycle(cfg, _Counter())
    x = cycle.run(0, a, normalize(np.asarray(x, dtype=np.float64)))
    return x, cycle.hierarchy


def solve_first_eigenvector(b, cfg=None, x0=None):
    """
    Compute the stationary distribution of `b` with AM or SSM V-cycles.

    Args:
        b (scipy.sparse.spmatrix): Irreducible column-stochastic matrix.
        cfg (CycleConfig): Configuration with ``method`` AM or SSM;
            defaults to :func:`first_vector_config`.
        x0 (np.ndarray or None): Positive starting vector (uniform).

    Returns:
        SolveResult: ``x > 0`` with ``||x||_1 = 1``; the residual history
            holds ``||(I - B) x||_1`` before the first and after every
            cycle.

    Raises:
        InputError: If `b` is not irreducible column-stochastic.
        StagnationError: If no cycle reduced the residual.
    """
    cfg = validate_cycle_config(cfg or first_vector_config())
    if cfg.method not in (AM, SSM):
        raise InputError('First eigenvector needs method am or ssm: got '
                         '{!r}'.format(cfg.method))
    b = _check_chain(b)
    n = b.shape[0]
    a = as_csr(sparse.identity(n, format='csr') - b)
    x = np.full(n, 1. / n) if x0 is None else \
        normalize(np.asarray(x0, dtype=np.float64))
    counter = _Counter()
    history = [_first_residual(a, x)]
    cycle = None

    for i in range(cfg.max_cycles):
        if history[-1] <= cfg.residual_tol and i > 0:
            break
        cycle = _FirstCycle(cfg, counter)
        x = cycle.run(0, a, x)
        history.append(_first_residual(a, x))
        getLogger(__name__).debug('%s cycle %d: residual %.3e',
                                  cfg.method.upper(), i + 1, history[-1])

    converged = history[-1] <= cfg.residual_tol
    if not converged and min(history[1:]) >= history[0]:
        raise StagnationError(
            '{} made no progress in {} cycles (residual {!r}).'.
            format(cfg.method.upper(), cfg.max_cycles, history[-1]))
    if np.any(x <= 0):
        getLogger(__name__).warning(
            'Stationary vector has %d nonpositive entries.',
            int(np.count_nonzero(x <= 0)))
    getLogger(__name__).info(
        '%s finished: %d cycles, residual %.3e, %s', cfg.method.upper(),
        len(history) - 1, history[-1],
        'converged' if converged else 'not converged')
    hierarchy = cycle.hierarchy if cycle else LevelHierarchy([Level(a)])
    return SolveResult(
        eigenvector=x, eigenvalue_estimate=1.,
        residual_history=history, cycles_used=len(history) - 1,
        hierarchy_summary=hierarchy.summary(), converged=converged,
        spmv_count=counter.value, d_used=hierarchy[0].stretch_d,
        hierarchy=hierarchy, relaxation_trace=None,
    )


class _SecondCycle(object):
    """DAM / DSSM V-cycle on ``B x = lambda_2 x``."""

    def __init__(self, cfg, counter, trace=None):
        self.cfg = cfg
        self.counter = counter
        self.trace = trace
        self.hierarchy = LevelHierarchy()
        self.growth = {}

    def _relax(self, level, op, x, steps, phase):
        callback = None
        if self.trace is not None and level == 0:
            def callback(step, y):
                self.trace.append(
                    (phase, step + 1, _second_residual(op.base, y)[0]))
        return relax(op, x, self.cfg.smoother, steps, self.counter, callback)

    def _polynomial(self, values):
        smoother = self.cfg.smoother
        if smoother.kind != CHEBYSHEV:
            return values
        ret = np.ones_like(values)
        for r in smoother.cheb_roots:
            ret = ret * (values - r)
        return ret

    def coarsest(self, op, x):
        cfg = self.cfg
        single = cfg.smoother._replace(steps=1)
        for _ in range(cfg.coarsest_max_steps + 1):
            b1x = op.apply(x)
            self.counter[0] += 1
            lam = rayleigh_estimate(b1x, x)
            if np.sum(np.abs(b1x - lam * x)) <= cfg.coarsest_tol:
                return x
            x = relax(op, x, single, 1, self.counter)

        # the dominant mode of the smoothing polynomial, i.e. the limit of
        # the deflated iteration, by a dense eigen solve
        values, vectors = np.linalg.eig(op.materialize())
        score = np.abs(self._polynomial(values))
        best = int(np.lexsort((-values.real, -np.round(score, 12)))[0])
        y = normalize(np.real(vectors[:, best]))
        if np.dot(y, x) < 0:
            y = -y
        return normalize(y)

    def run(self, level, b, x, w, use_v1):
        cfg = self.cfg
        n = b.shape[0]
        record = self.hierarchy.record(level, Level(b))
        op = DeflatedOperator.hotelling(b, w, check=False)
        if n <= cfg.coarsest_size:
            return self.coarsest(op, x)

        x = self._relax(level, op, x, cfg.pre_steps, 'pre')
        before = x
        ref = w if use_v1 else x
        agg = aggregate_bottom_up(
            strength_matrix(b, ref, sign_constrained=not use_v1),
            cfg.agg_cfg._replace(sign_constrained=not use_v1,
                                 sign_vector=ref))
        if agg.n_coarse >= n:
            return self.coarsest(op, x)

        if cfg.method == DSSM:
            b1x = op.apply(x)
            self.counter[0] += 1
            p = estimate_shift_p(b, x, rayleigh_estimate(b1x, x),
                                 cfg.shift_safety)
            # B + pI must be nonnegative so that its square is
            p = max(p, -float(min(b.diagonal().min(), 0.)))
            d = choose_stretch_d(b, cfg.d_policy, cfg.d_value)
            b_hat = square_stretch_operator(b, d, p).materialize()
            b_c = coarse_operator_stochastic(
                b_hat, agg, ref, allow_negative_diagonal=True)
            record.stretch_d, record.shift_p = d, p
        else:
            b_c = coarse_operator_stochastic(b, agg, ref)
        record.agg = agg
        record.x_ref = ref

        w_c = restrict(agg, w)
        w_c = w_c / w_c.sum()
        y0 = restrict(agg, x)
        scale = float(np.sum(np.abs(y0)))
        if scale == 0.:
            raise BreakdownError('Restricted iterate vanished on level {}.'.
                                 format(level + 1))
        y = self.run(level + 1, b_c, y0 / scale, w_c, use_v1)
        if np.dot(y, y0) < 0:
            y = -y

        if cfg.slow_process_patience:
            r_before = _second_residual(b, x)[0]
            x = normalize(prolong(agg, ref, y * scale))
            r_after = _second_residual(b, x)[0]
            self.growth[level] = r_after / r_before if r_before > 0 else 1.
        else:
            x = normalize(prolong(agg, ref, y * scale))
        x = self._relax(level, op, x, cfg.post_steps, 'post')
        if cfg.method == DSSM and cfg.scaled_correction:
            x, record.correction_scale = scaled_correction(op, before, x)
            self.counter[0] += 2
        return x


def second_cycle(b, x, first_vec, cfg=None, use_v1=False):
    """
    Run one DAM / DSSM V-cycle from `x`.

    Args:
        b (scipy.sparse.spmatrix): Column-stochastic matrix.
        x (np.ndarray): Current iterate.
        first_vec (np.ndarray): Stationary vector of `b` (any vector with
            nonzero sum yields an exact Hotelling deflation).
        cfg (CycleConfig): DAM or DSSM configuration.
        use_v1 (bool): Aggregate and prolong with `first_vec` instead of
            the iterate.

    Returns:
        (np.ndarray, LevelHierarchy): The new iterate and the levels.
    """
    cfg = validate_cycle_config(cfg or CycleConfig())
    first_vec = np.asarray(first_vec, dtype=np.float64)
    cycle = _SecondCycle(cfg, _Counter())
    x = cycle.run(0, as_csr(b), normalize(np.asarray(x, dtype=np.float64)),
                  first_vec / first_vec.sum(), use_v1)
    return x, cycle.hierarchy


def _initial_second_iterate(n, first_vec, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    x = x - first_vec * x.sum()
    return normalize(x)


def _prepare_second(b, cfg, first_vec, x0, counter, first_cfg=None):
    b = _check_chain(b)
    if first_vec is None:
        first_cfg = first_cfg or first_vector_config(cfg)
        first = solve_first_eigenvector(b, first_cfg)
        if not first.converged:
            raise StagnationError(
                'First eigenvector did not reach residual {!r} in {} SSM '
                'cycles (residual {!r}); pass it in explicitly.'.format(
                    first_cfg.residual_tol, first.cycles_used,
                    first.residual_history[-1]))
        counter[0] += first.spmv_count
        first_vec = first.eigenvector
    first_vec = np.asarray(first_vec, dtype=np.float64)
    first_vec = first_vec / first_vec.sum()
    if x0 is None:
        x = _initial_second_iterate(b.shape[0], first_vec, cfg.seed)
    else:
        x = normalize(np.asarray(x0, dtype=np.float64))
    return b, first_vec, x


def solve_second_eigenvector(b, cfg=None, first_vec=None, x0=None,
                             trace_relaxation=False, first_cfg=None):
    """
    Compute the second eigenvector of `b` with DAM or DSSM V-cycles.

    Args:
        b (scipy.sparse.spmatrix): Irreducible, aperiodic column-stochastic
            matrix with real, simple ``lambda_2``.
        cfg (CycleConfig): DAM or DSSM configuration.
        first_vec (np.ndarray or None): Known stationary vector; computed
            by SSM when omitted.
        x0 (np.ndarray or None): Starting vector; a seeded random
            zero-sum vector when omitted.
        trace_relaxation (bool): Record the fine-level residual after
            every relaxation step.
        first_cfg (CycleConfig or None): Configuration of the SSM solve
            computing `first_vec`; defaults to :func:`first_vector_config`.

    Returns:
        SolveResult: The l1-normalized eigenvector and the least-squares
            eigenvalue estimate.  ``residual_history[i]`` is
            ``||Bx - lambda x||_1`` after cycle ``i`` (index 0 is the start).

    Raises:
        SlowProcessError: If the residual grew for
            ``cfg.slow_process_patience`` consecutive cycles.
        StagnationError: If the computed first eigenvector did not
            converge.
    """
    cfg = validate_cycle_config(cfg or CycleConfig())
    if cfg.method not in (DAM, DSSM):
        raise InputError('Second eigenvector needs method dam or dssm: got '
                         '{!r}'.format(cfg.method))
    counter = _Counter()
    b, first_vec, x = _prepare_second(b, cfg, first_vec, x0, counter,
                                      first_cfg)
    residual, lam = _second_residual(b, x)
    history = [residual]
    trace = [] if trace_relaxation else None
    relaxation_trace = [] if trace_relaxation else None
    use_v1 = cfg.first_cycle_uses_v1
    cycle = None
    growing = 0
    log = getLogger(__name__)

    for i in range(cfg.max_cycles):
        if history[-1] <= max(cfg.residual_tol * history[0],
                              ABS_RESIDUAL_FLOOR) and i > 0:
            break
        cycle = _SecondCycle(cfg, counter, trace)
        x = cycle.run(0, b, x, first_vec, use_v1)
        residual, lam = _second_residual(b, x)
        ratio = residual / history[-1] if history[-1] > 0 else 0.
        history.append(residual)
        log.debug('%s cycle %d: residual %.3e, ratio %.3e, levels %d',
                  cfg.method.upper(), i + 1, residual, ratio,
                  len(cycle.hierarchy))
        if trace is not None:
            relaxation_trace.extend((i + 1,) + t for t in trace)
            del trace[:]
        if use_v1 and ratio < _SWITCH_RATIO:
            use_v1 = False

        if ratio > 1. and residual > ABS_RESIDUAL_FLOOR:
            growing += 1
        else:
            growing = 0
        if cfg.slow_process_patience and \
                growing >= cfg.slow_process_patience:
            level = max(cycle.growth, key=lambda k: (cycle.growth[k], k)) \
                if cycle.growth else 0
            raise SlowProcessError(
                level, 'coarse correction increased the residual in {} '
                       'consecutive cycles (last growth {:.3g})'.
                format(growing, cycle.growth.get(level, float('nan'))))

    converged = history[-1] <= max(cfg.residual_tol * history[0],
                                   ABS_RESIDUAL_FLOOR)
    log.info('%s finished: %d cycles, residual %.3e, lambda_2 %.12g, %s',
             cfg.method.upper(), len(history) - 1, history[-1], lam,
             'converged' if converged else 'not converged')
    hierarchy = cycle.hierarchy if cycle else LevelHierarchy([Level(b)])
    return SolveResult(
        eigenvector=x, eigenvalue_estimate=lam,
        residual_history=history, cycles_used=len(history) - 1,
        hierarchy_summary=hierarchy.summary(), converged=converged,
        spmv_count=counter.value, d_used=hierarchy[0].stretch_d,
        hierarchy=hierarchy, relaxation_trace=relaxation_trace,
    )


def relax_only(b, cfg=None, steps=200, first_vec=None, x0=None,
               warmup=None):
    """
    Baseline: `steps` deflated relaxation steps on the finest level only.

    The measurement starts after `warmup` unrecorded steps (by default
    ``cfg.pre_steps``, the relaxation a V-cycle does before its first
    coarse-level correction), so the rough modes of the random start are
    gone and the history shows the decay of the smooth error.

    Args:
        b (scipy.sparse.spmatrix): Column-stochastic matrix.
        cfg (CycleConfig): Configuration; its smoother is used.
        steps (int): Number of recorded steps.
        first_vec (np.ndarray or None): Known stationary vector.
        x0 (np.ndarray or None): Starting vector.
        warmup (int or None): Number of unrecorded steps.

    Returns:
        SolveResult: ``residual_history`` has one entry per step (plus the
            residual after the warm-up); ``spmv_count`` excludes the
            warm-up and the first eigenvector.
    """
    cfg = validate_cycle_config(cfg or CycleConfig(method=DAM))
    warmup = cfg.pre_steps if warmup is None else warmup
    if warmup < 0 or steps < 0:
        raise InputError('Step counts must be >= 0.')
    b, first_vec, x = _prepare_second(b, cfg, first_vec, x0, _Counter())
    op = DeflatedOperator.hotelling(b, first_vec)
    x = relax(op, x, cfg.smoother, warmup, _Counter())
    counter = _Counter()
    history = [_second_residual(b, x)[0]]

    def on_step(step, y):
        history.append(_second_residual(b, y)[0])

    x = relax(op, x, cfg.smoother, steps, counter, on_step)
    residual, lam = _second_residual(b, x)
    converged = residual <= max(cfg.residual_tol * history[0],
                                ABS_RESIDUAL_FLOOR)
    hierarchy = LevelHierarchy([Level(b)])
    return SolveResult(
        eigenvector=x, eigenvalue_estimate=lam, residual_history=history,
        cycles_used=steps, hierarchy_summary=hierarchy.summary(),
        converged=converged, spmv_count=counter.value, d_used=None,
        hierarchy=hierarchy, relaxation_trace=None,
    )

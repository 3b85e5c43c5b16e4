"""
Relaxation methods for the eigenproblems ``Bx = x`` and ``Bx = lambda_2 x``.

Every step function returns a new iterate normalized by
:func:`normalize` (unit l1 norm, first non-negligible entry positive).
Deflated variants act through :class:`DeflatedOperator`, which applies
``B - mu * v u^T`` without forming the rank-one term.
"""
from collections import namedtuple

import numpy as np

from .errors import (BreakdownError, DimensionMismatchError, InputError,
                     SingularDiagonalError)
from .sparse_core import as_vector, column_sums, spmv

__all__ = [
    'POWER', 'JACOBI', 'DEFLATED_POWER', 'DEFLATED_JACOBI', 'CHEBYSHEV',
    'SMOOTHER_KINDS', 'DEFAULT_CHEB_ROOTS',
    'SmootherConfig', 'validate_smoother_config',
    'normalize', 'rayleigh_estimate', 'DeflatedOperator', 'apply_deflated',
    'power_step', 'jacobi_step', 'deflated_power_step',
    'deflated_jacobi_step', 'chebyshev_step', 'relax',
]

POWER = 'power'
JACOBI = 'jacobi'
DEFLATED_POWER = 'deflated-power'
DEFLATED_JACOBI = 'deflated-jacobi'
CHEBYSHEV = 'chebyshev'
SMOOTHER_KINDS = [POWER, JACOBI, DEFLATED_POWER, DEFLATED_JACOBI, CHEBYSHEV]

DEFAULT_CHEB_ROOTS = (-0.5, -0.25, 0.)

SmootherConfig = namedtuple(
    'SmootherConfig',
    ['kind', 'omega', 'steps', 'cheb_roots', 'jacobi_lambda']
)
SmootherConfig.__new__.__defaults__ = (
    CHEBYSHEV, 0.7, 100, DEFAULT_CHEB_ROOTS, None)


def validate_smoother_config(cfg):
    """
    Check the invariants of a :class:`SmootherConfig`.

    Returns:
        SmootherConfig: `cfg` itself.

    Raises:
        InputError: If any field is out of range.
    """
    if cfg.kind not in SMOOTHER_KINDS:
        raise InputError('Unknown smoother kind: {!r}'.format(cfg.kind))
    if not 0. < cfg.omega <= 1.:
        raise InputError('omega must be in (0, 1]: got {!r}'.
                         format(cfg.omega))
    if cfg.steps < 0:
        raise InputError('steps must be >= 0: got {!r}'.format(cfg.steps))
    roots = tuple(cfg.cheb_roots)
    if len(roots) > 3 or any(not -1. <= r <= 0. for r in roots):
        raise InputError('Chebyshev roots must be at most three values in '
                         '[-1, 0]: got {!r}'.format(roots))
    return cfg


def normalize(x):
    """
    Scale `x` to unit l1 norm, flipping the sign so that the first entry
    larger than ``1e-8 * max|x|`` is positive.

    Raises:
        BreakdownError: If `x` is zero or not finite.
    """
    scale = np.sum(np.abs(x))
    if not np.isfinite(scale) or scale == 0.:
        raise BreakdownError('Iterate vanished or became non-finite.')
    magnitudes = np.abs(x)
    first = int(np.argmax(magnitudes > 1e-8 * magnitudes.max()))
    if x[first] < 0:
        scale = -scale
    return x / scale


def rayleigh_estimate(bx, x):
    """Least-squares ``lambda`` minimizing ``||Bx - lambda x||_2``."""
    return float(np.dot(x, bx) / np.dot(x, x))


class DeflatedOperator(object):
    """
    Implicit Wielandt-deflated operator ``B_1 = B - mu * v u^T``.

    The spectrum of ``B_1`` is ``{lambda_1 - mu, lambda_2, ..., lambda_n}``.
    With ``u`` parallel to the all-ones vector (Hotelling deflation) the
    right eigenvectors ``v_2, ..., v_n`` of a column-stochastic ``B`` are
    preserved.

    Args:
        base (scipy.sparse.csr_matrix): The matrix ``B``, columns summing
            to one.
        first_vec (np.ndarray): The first eigenvector ``v``.
        deflation_vec (np.ndarray): The deflation vector ``u``.
        shift (float): The shift ``mu``.
        check (bool): Whether to verify ``(v, u) = 1`` and the column sums.
    """

    def __init__(self, base, first_vec, deflation_vec, shift=1., check=True):
        n = base.shape[0]
        if base.shape[1] != n:
            raise InputError('Deflated operator needs a square base: got {!r}'.
                             format(base.shape))
        self.base = base
        self.first_vec = as_vector(first_vec, n)
        self.deflation_vec = as_vector(deflation_vec, n)
        self.shift = float(shift)
        if check:
            inner = float(np.dot(self.first_vec, self.deflation_vec))
            if abs(inner - 1.) > 1e-10:
                raise InputError('(v, u) must be 1: got {!r}'.format(inner))
            err = np.max(np.abs(column_sums(base) - 1.)) if n else 0.
            if err > 1e-8:
                raise InputError('Deflation base is not column-stochastic: '
                                 'max column-sum error {!r}'.format(err))

    @classmethod
    def hotelling(cls, base, first_vec, check=True):
        """Deflation with ``u = 1 / sum(v)`` and ``mu = 1``."""
        first_vec = np.asarray(first_vec, dtype=np.float64)
        total = float(np.sum(first_vec))
        if total == 0.:
            raise InputError('First eigenvector must not sum to zero.')
        u = np.full(first_vec.shape[0], 1. / total)
        return cls(base, first_vec, u, 1., check=check)

    @property
    def size(self):
        return self.base.shape[0]

    def apply(self, x):
        """Compute ``B x - mu * v (u^T x)``."""
        if x.shape[0] != self.size:
            raise DimensionMismatchError(
                'Deflated operator of size {} applied to vector of length {}'.
                format(self.size, x.shape[0]))
        return spmv(self.base, x) - \
            (self.shift * np.dot(self.deflation_vec, x)) * self.first_vec

    def diagonal(self):
        """Diagonal of ``B_1``."""
        return self.base.diagonal() - \
            self.shift * self.first_vec * self.deflation_vec

    def materialize(self):
        """Dense ``B - mu * v u^T``, for small test problems."""
        return self.base.toarray() - \
            self.shift * np.outer(self.first_vec, self.deflation_vec)


def apply_deflated(op, x):
    return op.apply(np.asarray(x, dtype=np.float64))


def power_step(b, x):
    return normalize(spmv(b, x))


def jacobi_step(a, x, omega=0.7):
    """
    One damped Jacobi sweep ``x - omega * D^{-1} A x`` on ``Ax = 0``.

    Args:
        a (scipy.sparse.csr_matrix): The matrix ``A = I - B``.
        x (np.ndarray): The iterate.
        omega (float): Damping in ``(0, 1]``.

    Raises:
        SingularDiagonalError: If ``A`` has a zero diagonal entry.
    """
    d = a.diagonal()
    if np.any(d == 0.):
        raise SingularDiagonalError(
            'Jacobi needs a nonzero diagonal: zero at index {}'.
            format(int(np.nonzero(d == 0.)[0][0])))
    return normalize(x - omega * spmv(a, x) / d)


def deflated_power_step(op, x):
    return normalize(op.apply(x))


def deflated_jacobi_step(op, x, omega=0.7, lam=None):
    """
    One damped Jacobi sweep on ``E x = 0`` with ``E = lam I - B_1``.

    Args:
        op (DeflatedOperator): The deflated operator ``B_1``.
        x (np.ndarray): The iterate.
        omega (float): Damping in ``[0, 1]``.
        lam (float or None): The shift ``lam``; defaults to the
            least-squares estimate of ``x``, clamped to ``(0, 1]``.

    Raises:
        SingularDiagonalError: If ``diag(E)`` has a zero entry.
    """
    b1x = op.apply(x)
    if lam is None:
        lam = min(max(rayleigh_estimate(b1x, x), 1e-12), 1.)
    d = lam - op.diagonal()
    if np.any(d == 0.):
        raise SingularDiagonalError(
            'Deflated Jacobi needs a nonsingular diagonal: zero at index {}'.
            format(int(np.nonzero(d == 0.)[0][0])))
    return normalize(x - omega * (lam * x - b1x) / d)


def chebyshev_step(op, x, roots=DEFAULT_CHEB_ROOTS):
    """
    Apply ``p(B_1) x`` with ``p(t) = prod_i (t - r_i)``.

    Costs ``len(roots)`` operator applications.

    Args:
        op (DeflatedOperator): The deflated operator.
        x (np.ndarray): The iterate.
        roots (Sequence[float]): The roots of ``p``.

    Raises:
        InputError: If `roots` is empty.
    """
    if len(roots) == 0:
        raise InputError('Chebyshev step needs at least one root.')
    y = x
    for r in roots:
        y = op.apply(y) - r * y
    return normalize(y)


def relax(op, x, cfg, steps=None, counter=None, callback=None):
    """
    Run `steps` deflated relaxation steps of kind ``cfg.kind``.

    Args:
        op (DeflatedOperator): The deflated level operator.
        x (np.ndarray): The starting iterate.
        cfg (SmootherConfig): The smoother configuration.  Non-deflated
            kinds are mapped onto their deflated counterparts.
        steps (int or None): Override of ``cfg.steps``.
        counter (list[int] or None): One-element list incremented by the
            number of operator applications.
        callback ((int, np.ndarray) -> None): Called after every step.

    Returns:
        np.ndarray: The relaxed iterate.
    """
    steps = cfg.steps if steps is None else steps
    kind = cfg.kind
    for step in range(steps):
        if kind == CHEBYSHEV:
            x = chebyshev_step(op, x, cfg.cheb_roots)
            cost = len(cfg.cheb_roots)
        elif kind in (JACOBI, DEFLATED_JACOBI):
            x = deflated_jacobi_step(op, x, cfg.omega, cfg.jacobi_lambda)
            cost = 1
        else:
            x = deflated_power_step(op, x)
            cost = 1
        if counter is not None:
            counter[0] += cost
        if callback is not None:
            callback(step, x)
    return x

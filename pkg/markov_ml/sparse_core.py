"""
Sparse matrix helpers shared by every solver component.

All chain operators are stored as :class:`scipy.sparse.csr_matrix` in
canonical form: sorted column indices, no duplicates and no explicitly
stored zeros.  Vectors are one-dimensional float64 :class:`numpy.ndarray`.
"""
import codecs
from collections import namedtuple
from logging import getLogger

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import (DimensionMismatchError, InputError, MatrixMarketError,
                     OracleError, OracleSizeError)

__all__ = [
    'as_csr', 'as_vector', 'spmv', 'column_sums',
    'validate_column_stochastic', 'is_irreducible', 'is_pattern_symmetric',
    'SpectrumReport', 'dense_eigen_oracle', 'normalize_eigenvector',
    'read_matrix_market', 'write_matrix_market',
    'DEFAULT_ORACLE_MAX_N',
]

DEFAULT_ORACLE_MAX_N = 2000
_MM_HEADER = '%%MatrixMarket matrix coordinate real general'


def as_csr(m):
    """
    Convert `m` into a canonical float64 CSR matrix.

    Args:
        m: A scipy sparse matrix, a dense array or a nested list.

    Returns:
        scipy.sparse.csr_matrix: A new canonical CSR matrix.

    Raises:
        InputError: If `m` is not two-dimensional or has non-finite entries.
    """
    if sparse.issparse(m):
        ret = sparse.csr_matrix(m, dtype=np.float64, copy=True)
    else:
        arr = np.asarray(m, dtype=np.float64)
        if arr.ndim != 2:
            raise InputError('Matrix must be two-dimensional: got shape {!r}'.
                             format(arr.shape))
        ret = sparse.csr_matrix(arr)
    ret.sum_duplicates()
    ret.eliminate_zeros()
    ret.sort_indices()
    if not np.all(np.isfinite(ret.data)):
        raise InputError('Matrix contains non-finite entries.')
    return ret


def as_vector(x, length=None):
    """
    Convert `x` into a finite one-dimensional float64 array.

    Args:
        x: Array-like values.
        length (int or None): The required length, if specified.

    Returns:
        np.ndarray: The vector.

    Raises:
        InputError: If `x` is not one-dimensional or not finite.
        DimensionMismatchError: If `length` does not match.
    """
    ret = np.asarray(x, dtype=np.float64)
    if ret.ndim != 1:
        raise InputError('Vector must be one-dimensional: got shape {!r}'.
                         format(ret.shape))
    if length is not None and ret.shape[0] != length:
        raise DimensionMismatchError(
            'Vector length mismatch: expected {}, got {}'.
            format(length, ret.shape[0]))
    if not np.all(np.isfinite(ret)):
        raise InputError('Vector contains non-finite entries.')
    return ret


def spmv(m, x):
    """
    Compute the sparse matrix-vector product ``m @ x``.

    The CSR kernel accumulates each row in stored (ascending column) order,
    so the result is reproducible bit by bit.

    Args:
        m (scipy.sparse.csr_matrix): The matrix.
        x (np.ndarray): The vector, of length ``m.shape[1]``.

    Returns:
        np.ndarray: The product.

    Raises:
        DimensionMismatchError: If the dimensions do not match.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != m.shape[1]:
        raise DimensionMismatchError(
            'Cannot multiply a {}x{} matrix with a vector of shape {!r}'.
            format(m.shape[0], m.shape[1], x.shape))
    return np.asarray(m.dot(x), dtype=np.float64).ravel()


def column_sums(m):
    return np.asarray(m.sum(axis=0), dtype=np.float64).ravel()


def validate_column_stochastic(m, tol=1e-12):
    """
    Check whether `m` is column-stochastic up to `tol`.

    Args:
        m (scipy.sparse.spmatrix): A square matrix.
        tol (float): Tolerance for negative entries and column sums.

    Returns:
        bool: True iff all entries are ``>= -tol`` and every column sums
            to 1 within `tol`.

    Raises:
        InputError: If `m` is not square.
    """
    if m.shape[0] != m.shape[1]:
        raise InputError('Matrix must be square: got shape {!r}'.
                         format(m.shape))
    m = sparse.csr_matrix(m)
    if m.nnz and m.data.min() < -tol:
        return False
    return bool(np.all(np.abs(column_sums(m) - 1.) <= tol))


def is_irreducible(m):
    """Whether the directed graph of `m` is strongly connected."""
    n_components, _ = csgraph.connected_components(
        sparse.csr_matrix(m), directed=True, connection='strong')
    return n_components == 1


def is_pattern_symmetric(m):
    """Whether the sparsity pattern of the square matrix `m` is symmetric."""
    pattern = sparse.csr_matrix(m, dtype=bool)
    pattern.eliminate_zeros()
    return (pattern != pattern.T).nnz == 0


SpectrumReport = namedtuple(
    'SpectrumReport',
    ['eigenvalues', 'eigenvectors', 'second_eigenvalue',
     'spectral_gap_after_second']
)
SpectrumReport.__doc__ = """
Full spectrum of a small matrix.

``eigenvalues`` is a complex array sorted by descending modulus (ties by
descending real part); ``eigenvectors[:, i]`` is the l1-normalized right
eigenvector of ``eigenvalues[i]``.
"""


def normalize_eigenvector(v):
    """
    Scale `v` to unit l1 norm and rotate it so that its first
    non-negligible entry is real and positive.
    """
    v = np.asarray(v)
    scale = np.sum(np.abs(v))
    if scale == 0:
        return v
    v = v / scale
    magnitudes = np.abs(v)
    k = int(np.argmax(magnitudes > 1e-8 * magnitudes.max()))
    phase = v[k] / magnitudes[k]
    return v / phase


def dense_eigen_oracle(m, max_n=DEFAULT_ORACLE_MAX_N):
    """
    Compute the full spectrum of `m` by a dense method.

    Args:
        m (scipy.sparse.spmatrix or np.ndarray): A square real matrix.
        max_n (int): Refuse matrices larger than this.

    Returns:
        SpectrumReport: The spectrum and eigenvectors.

    Raises:
        OracleSizeError: If the matrix has more than `max_n` rows.
        OracleError: If the dense solver fails or an eigenpair does not
            satisfy ``||Bv - lambda v||_1 <= 1e-8 ||v||_1``.
    """
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise InputError('Matrix must be square: got shape {!r}'.
                         format(m.shape))
    if n > max_n:
        raise OracleSizeError(
            'Dense eigen-oracle refuses n={} (limit {})'.format(n, max_n))
    dense = m.toarray() if sparse.issparse(m) else np.asarray(m, dtype=float)
    try:
        values, vectors = np.linalg.eig(dense)
    except np.linalg.LinAlgError as ex:
        raise OracleError('Dense eigen-solver did not converge: {}'.
                          format(ex))

    order = np.lexsort((-np.round(values.real, 12),
                        -np.round(np.abs(values), 12)))
    values = values[order]
    vectors = vectors[:, order]
    for i in range(n):
        v = normalize_eigenvector(vectors[:, i])
        residual = np.sum(np.abs(dense.dot(v) - values[i] * v))
        if residual > 1e-8 * max(1., np.abs(dense).sum(axis=0).max()):
            raise OracleError(
                'Eigenpair {} failed the residual check: {!r}'.
                format(i, residual))
        vectors[:, i] = v

    second = float(values[1].real) if n >= 2 else float('nan')
    if n >= 3:
        gap = second - float(np.abs(values[2]))
    else:
        gap = second
    return SpectrumReport(values, vectors, second, gap)


def write_matrix_market(m, path):
    """
    Write `m` in Matrix Market coordinate real general format.

    Values are written with 17 significant digits, so that reading them
    back reproduces the exact binary values.

    Args:
        m (scipy.sparse.spmatrix): The matrix.
        path (str): Path of the output file.
    """
    m = as_csr(m)
    coo = m.tocoo()
    with codecs.open(path, 'wb', 'utf-8') as f:
        f.write(_MM_HEADER + '\n')
        f.write('{} {} {}\n'.format(m.shape[0], m.shape[1], m.nnz))
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write('{} {} {:.17g}\n'.format(i + 1, j + 1, float(v)))
    getLogger(__name__).debug('Wrote %dx%d matrix with %d entries to %s',
                              m.shape[0], m.shape[1], m.nnz, path)


def read_matrix_market(path):
    """
    Read a Matrix Market coordinate file.

    Real or integer fields with ``general`` or ``symmetric`` symmetry are
    supported.  Indices on disk are 1-based.

    Args:
        path (str): Path of the file.

    Returns:
        scipy.sparse.csr_matrix: The canonical CSR matrix.

    Raises:
        MatrixMarketError: If the file is malformed; the error carries the
            line number.
    """
    rows, cols, vals = [], [], []
    shape = None
    expected = None
    symmetric = False

    with codecs.open(path, 'rb', 'utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if lineno == 1:
                tokens = line.strip().lower().split()
                if len(tokens) != 5 or tokens[0] != '%%matrixmarket' or \
                        tokens[1] != 'matrix' or tokens[2] != 'coordinate':
                    raise MatrixMarketError(
                        path, lineno, 'not a coordinate Matrix Market header')
                if tokens[3] not in ('real', 'integer'):
                    raise MatrixMarketError(
                        path, lineno,
                        'unsupported field {!r}'.format(tokens[3]))
                if tokens[4] not in ('general', 'symmetric'):
                    raise MatrixMarketError(
                        path, lineno,
                        'unsupported symmetry {!r}'.format(tokens[4]))
                symmetric = tokens[4] == 'symmetric'
                continue

            line = line.strip()
            if not line or line.startswith('%'):
                continue
            parts = line.split()

            if shape is None:
                try:
                    n_rows, n_cols, expected = (int(p) for p in parts)
                except ValueError:
                    raise MatrixMarketError(
                        path, lineno, 'malformed size line {!r}'.format(line))
                if n_rows < 0 or n_cols < 0 or expected < 0:
                    raise MatrixMarketError(
                        path, lineno, 'negative size {!r}'.format(line))
                shape = (n_rows, n_cols)
                continue

            if len(parts) != 3:
                raise MatrixMarketError(
                    path, lineno, 'expected "row col value": {!r}'.
                    format(line))
            try:
                i, j, v = int(parts[0]) - 1, int(parts[1]) - 1, float(parts[2])
            except ValueError:
                raise MatrixMarketError(
                    path, lineno, 'malformed entry {!r}'.format(line))
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise MatrixMarketError(
                    path, lineno, 'index out of range {!r}'.format(line))
            if not np.isfinite(v):
                raise MatrixMarketError(
                    path, lineno, 'non-finite value {!r}'.format(line))
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if symmetric and i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)

    if shape is None:
        raise MatrixMarketError(path, 1, 'missing header or size line')
    count = len(vals) if not symmetric else \
        sum(1 for i, j in zip(rows, cols) if i >= j)
    if count != expected:
        raise MatrixMarketError(
            path, lineno, 'expected {} entries, found {}'.
            format(expected, count))
    return as_csr(sparse.coo_matrix((vals, (rows, cols)), shape=shape))

"""
Deterministic generators of the benchmark Markov chains.

Every generator returns a canonical column-stochastic CSR matrix ``B``,
acting on column probability vectors (``B[j, i]`` is the probability of
moving from state ``i`` to state ``j``).
"""
import math
from collections import namedtuple
from logging import getLogger

import numpy as np
from scipy import sparse

from .errors import GenerationError, InputError
from .sparse_core import as_csr, column_sums, is_irreducible
from .triangulation import delaunay_edges

__all__ = [
    'PROBLEM_KINDS', 'ProblemSpec', 'lattice_shape',
    'lazy_walk', 'gen_uniform_chain', 'gen_weak_link_chain',
    'gen_lattice_2d', 'gen_delaunay_walk', 'gen_multiwell',
    'gen_complex_chain', 'generate_problem',
]

UNIFORM_CHAIN = 'uniform-chain'
WEAK_LINK = 'weak-link'
LATTICE_2D = 'lattice2d'
DELAUNAY = 'delaunay'
DOUBLE_WELL = 'double-well'
FOUR_WELL = 'four-well'
COMPLEX_CHAIN = 'complex-chain'

PROBLEM_KINDS = [UNIFORM_CHAIN, WEAK_LINK, LATTICE_2D, DELAUNAY,
                 DOUBLE_WELL, FOUR_WELL, COMPLEX_CHAIN]
UNDIRECTED_KINDS = [UNIFORM_CHAIN, WEAK_LINK, LATTICE_2D, DELAUNAY]

_MAX_MC_ATTEMPTS = 3
_MC_CHUNK = 1 << 21


ProblemSpec = namedtuple(
    'ProblemSpec',
    ['kind', 'n', 'epsilon', 'rows', 'cols', 'wells', 'mc_samples', 'seed',
     'tau', 'beta', 'barrier', 'lag_steps']
)
ProblemSpec.__new__.__defaults__ = (
    0.001, None, None, None, 10000, 0, 1e-4, 1.0, 4.0, 4)
ProblemSpec.__doc__ = """
Description of one benchmark problem.

``kind`` is one of :data:`PROBLEM_KINDS`.  ``rows`` and ``cols`` are only
used by the 2D lattice (derived from ``n`` when omitted); ``wells``,
``mc_samples``, ``tau``, ``beta``, ``barrier`` and ``lag_steps`` only by
the multi-well chains; ``seed`` by the randomized generators.
"""


def lattice_shape(n):
    """
    Choose the most square ``(rows, cols)`` factorization of `n` with
    ``rows <= cols``, e.g. ``32768 -> (128, 256)``.
    """
    rows = int(math.isqrt(n))
    while rows > 1 and n % rows:
        rows -= 1
    return rows, n // rows


def lazy_walk(adjacency):
    """
    Lazy random walk ``B = I/2 + W/2`` on a weighted undirected graph.

    Args:
        adjacency (scipy.sparse.spmatrix): Symmetric nonnegative weights;
            diagonal entries are self-loops.

    Returns:
        scipy.sparse.csr_matrix: The column-stochastic walk matrix, where
            ``W`` is `adjacency` with every column divided by its sum.
    """
    adjacency = as_csr(adjacency)
    degree = column_sums(adjacency)
    if np.any(degree <= 0):
        raise InputError('Graph has isolated vertices.')
    w = adjacency.dot(sparse.diags(1. / degree))
    n = adjacency.shape[0]
    return as_csr(0.5 * sparse.identity(n, format='csr') + 0.5 * w)


def _chain_adjacency(n, weights):
    # endpoints carry a unit self-loop: the walk reflects at the boundary
    idx = np.arange(n - 1)
    rows = np.concatenate([idx, idx + 1, [0, n - 1]])
    cols = np.concatenate([idx + 1, idx, [0, n - 1]])
    vals = np.concatenate([weights, weights, [1., 1.]])
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))


def gen_uniform_chain(n):
    """
    Lazy walk on the path graph with uniform weights.

    Args:
        n (int): Number of states, ``n >= 2``.

    Returns:
        scipy.sparse.csr_matrix: Tridiagonal column-stochastic matrix with
            eigenvalues ``(1 + cos(k*pi/n)) / 2``, ``k = 0..n-1``.
    """
    if n < 2:
        raise InputError('Uniform chain needs n >= 2: got {}'.format(n))
    return lazy_walk(_chain_adjacency(n, np.ones(n - 1)))


def gen_weak_link_chain(n, epsilon=0.001):
    """
    Uniform chain whose middle edge ``(n/2 - 1, n/2)`` has weight `epsilon`.

    Args:
        n (int): Number of states, ``n >= 4``.
        epsilon (float): Weight of the weak link, ``> 0``.

    Returns:
        scipy.sparse.csr_matrix: The column-stochastic walk matrix.
    """
    if n < 4:
        raise InputError('Weak-link chain needs n >= 4: got {}'.format(n))
    if not epsilon > 0:
        raise InputError('Weak-link weight must be positive: got {!r}'.
                         format(epsilon))
    weights = np.ones(n - 1)
    weights[n // 2 - 1] = epsilon
    return lazy_walk(_chain_adjacency(n, weights))


def gen_lattice_2d(rows, cols):
    """
    Lazy walk on the ``rows x cols`` grid graph with 4-neighbor edges.

    State ``(r, c)`` has index ``r * cols + c``.
    """
    if rows < 2 or cols < 2:
        raise InputError('Lattice needs rows, cols >= 2: got {}x{}'.
                         format(rows, cols))
    index = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.stack([index[:, :-1].ravel(), index[:, 1:].ravel()])
    vertical = np.stack([index[:-1, :].ravel(), index[1:, :].ravel()])
    edges = np.hstack([horizontal, vertical])
    return _graph_walk(rows * cols, edges.T)


def _graph_walk(n, edges):
    edges = np.asarray(edges, dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adjacency = sparse.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return lazy_walk(adjacency)


def gen_delaunay_walk(n, seed=0):
    """
    Lazy walk on the Delaunay graph of `n` uniform random points in the
    unit square.

    Args:
        n (int): Number of points, ``n >= 3``.
        seed (int): Seed of the point generator.

    Returns:
        scipy.sparse.csr_matrix: The column-stochastic walk matrix.
    """
    if n < 3:
        raise InputError('Delaunay walk needs n >= 3: got {}'.format(n))
    points = np.random.default_rng(seed).random((n, 2))
    return _graph_walk(n, delaunay_edges(points))


def _reflect(x):
    return 1. - np.abs(1. - np.mod(np.abs(x), 2.))


def _sample_transitions(n, wells, samples, rng, tau, beta, barrier,
                        lag_steps):
    amplitude = 0.5 * barrier
    freq = 2. * np.pi * wells
    noise = math.sqrt(2. * tau / beta)
    chunk = max(1, _MC_CHUNK // samples)
    row_parts, col_parts, val_parts = [], [], []

    for start in range(0, n, chunk):
        boxes = np.arange(start, min(n, start + chunk))
        origin = np.repeat(boxes, samples)
        x = (origin + rng.random(origin.shape[0])) / n
        for _ in range(lag_steps):
            grad = -amplitude * freq * np.sin(freq * x)
            x = _reflect(x - tau * grad +
                         noise * rng.standard_normal(x.shape[0]))
        dest = np.minimum((x * n).astype(np.int64), n - 1)
        keys, counts = np.unique(dest * n + origin, return_counts=True)
        row_parts.append(keys // n)
        col_parts.append(keys % n)
        val_parts.append(counts.astype(np.float64))

    counts = sparse.coo_matrix(
        (np.concatenate(val_parts),
         (np.concatenate(row_parts), np.concatenate(col_parts))),
        shape=(n, n))
    return as_csr(counts.tocsr().dot(sparse.diags(
        np.full(n, 1. / samples))))


def gen_multiwell(n, wells=2, mc_samples=10000, seed=0, tau=1e-4, beta=1.0,
                  barrier=4.0, lag_steps=4):
    """
    Box discretization of overdamped Langevin dynamics in a multi-well
    potential on ``[0, 1]``.

    The potential is ``V(x) = barrier/2 * cos(2*pi*wells*x)``, so that
    ``wells`` minima are separated by barriers of height `barrier`.
    From each of the `n` equidistant boxes, `mc_samples` uniformly placed
    walkers are advanced by `lag_steps` Euler–Maruyama steps
    ``x' = x - tau * V'(x) + sqrt(2 * tau / beta) * xi`` with reflecting
    boundaries, and the box-to-box counts are column-normalized.

    Args:
        n (int): Number of boxes, ``n >= 8``.
        wells (int): 2 or 4.
        mc_samples (int): Walkers per box, ``>= 10**4``.
        seed (int): Seed of the Monte Carlo generator.

    Returns:
        scipy.sparse.csr_matrix: The column-stochastic transition matrix.

    Raises:
        GenerationError: If some box is never reached after three attempts
            with doubled sample counts.
    """
    if n < 8:
        raise InputError('Multi-well chain needs n >= 8: got {}'.format(n))
    if wells not in (2, 4):
        raise InputError('Only 2 or 4 wells are supported: got {!r}'.
                         format(wells))
    if mc_samples < 10000:
        raise InputError('mc_samples must be >= 10000: got {}'.
                         format(mc_samples))

    rng = np.random.default_rng(seed)
    samples = int(mc_samples)
    for attempt in range(_MAX_MC_ATTEMPTS):
        b = _sample_transitions(n, wells, samples, rng, tau, beta, barrier,
                                lag_steps)
        unvisited = np.count_nonzero(np.diff(b.indptr) == 0)
        if not unvisited and is_irreducible(b):
            getLogger(__name__).debug(
                'Multi-well chain: n=%d, wells=%d, nnz=%d', n, wells, b.nnz)
            return b
        getLogger(__name__).warning(
            'Multi-well attempt %d: %d unvisited boxes, retrying with %d '
            'samples per box', attempt + 1, unvisited, 2 * samples)
        samples *= 2
    raise GenerationError(
        'Multi-well chain still has unreachable boxes after {} attempts.'.
        format(_MAX_MC_ATTEMPTS))


def gen_complex_chain(n):
    """
    Directed chain with transitions ``i -> i-1``, ``i -> i+1`` and the skip
    transition ``i -> (i+2) mod n``, all choices equally likely.

    The end states have no ``-1``/``+1`` wrap, so states 0 and ``n-1`` have
    two successors and all others three.  There is no lazy part.
    Only the ``+2`` skip wraps modulo `n`: ``n-2 -> 0`` and ``n-1 -> 1``.
    """
    if n < 6:
        raise InputError('Complex chain needs n >= 6: got {}'.format(n))
    idx = np.arange(n)
    src = np.concatenate([idx[:-1], idx[1:], idx])
    dst = np.concatenate([idx[:-1] + 1, idx[1:] - 1, (idx + 2) % n])
    out_degree = np.bincount(src, minlength=n).astype(np.float64)
    return as_csr(sparse.coo_matrix(
        (1. / out_degree[src], (dst, src)), shape=(n, n)))


def generate_problem(spec):
    """
    Generate the matrix described by `spec`.

    Args:
        spec (ProblemSpec): The problem description.

    Returns:
        scipy.sparse.csr_matrix: The column-stochastic matrix.
    """
    kind = spec.kind
    if kind == UNIFORM_CHAIN:
        return gen_uniform_chain(spec.n)
    if kind == WEAK_LINK:
        return gen_weak_link_chain(spec.n, spec.epsilon)
    if kind == LATTICE_2D:
        if spec.rows is not None and spec.cols is not None:
            rows, cols = spec.rows, spec.cols
            if spec.n is not None and rows * cols != spec.n:
                raise InputError('Lattice shape {}x{} does not match n={}'.
                                 format(rows, cols, spec.n))
        else:
            rows, cols = lattice_shape(spec.n)
        return gen_lattice_2d(rows, cols)
    if kind == DELAUNAY:
        return gen_delaunay_walk(spec.n, spec.seed)
    if kind in (DOUBLE_WELL, FOUR_WELL):
        wells = spec.wells or (2 if kind == DOUBLE_WELL else 4)
        return gen_multiwell(spec.n, wells, spec.mc_samples, spec.seed,
                             tau=spec.tau, beta=spec.beta,
                             barrier=spec.barrier, lag_steps=spec.lag_steps)
    if kind == COMPLEX_CHAIN:
        return gen_complex_chain(spec.n)
    raise InputError('Unknown problem kind: {!r}'.format(kind))

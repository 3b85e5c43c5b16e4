"""
Strength of connection, greedy bottom-up aggregation and the transfer
operators induced by an aggregation.
"""
import codecs
from collections import namedtuple

import numpy as np
from scipy import sparse

from .errors import CancellationError, InputError
from .sparse_core import as_csr

__all__ = [
    'Aggregation', 'AggregationConfig', 'validate_aggregation_config',
    'strength_matrix', 'aggregate_bottom_up', 'restrict', 'prolong',
    'proportions', 'write_aggregation_csv',
]

AggregationConfig = namedtuple(
    'AggregationConfig',
    ['target_size', 'theta', 'sign_constrained', 'sign_vector']
)
AggregationConfig.__new__.__defaults__ = (2, 0.1, False, None)


def validate_aggregation_config(cfg):
    if cfg.target_size < 2:
        raise InputError('target_size must be >= 2: got {!r}'.
                         format(cfg.target_size))
    if not 0. < cfg.theta < 1.:
        raise InputError('theta must be in (0, 1): got {!r}'.
                         format(cfg.theta))
    return cfg


class Aggregation(object):
    """
    Partition of ``n_fine`` indices into ``n_coarse`` nonempty aggregates.

    Args:
        membership (np.ndarray): Aggregate index of every fine index; must
            cover ``0 .. n_coarse - 1``.
    """

    def __init__(self, membership):
        membership = np.asarray(membership, dtype=np.int64)
        if membership.ndim != 1:
            raise InputError('membership must be one-dimensional.')
        n_coarse = int(membership.max()) + 1 if len(membership) else 0
        if len(membership) and (membership.min() < 0 or np.any(
                np.bincount(membership, minlength=n_coarse) == 0)):
            raise InputError('membership must map onto 0 .. n_coarse-1.')
        self.membership = membership
        self.n_fine = len(membership)
        self.n_coarse = n_coarse
        self._q = None

    @classmethod
    def singletons(cls, n):
        return cls(np.arange(n))

    @property
    def sizes(self):
        return np.bincount(self.membership, minlength=self.n_coarse)

    @property
    def q(self):
        """The ``n_fine x n_coarse`` 0/1 aggregation matrix ``Q``."""
        if self._q is None:
            self._q = sparse.csr_matrix(
                (np.ones(self.n_fine), (np.arange(self.n_fine),
                                        self.membership)),
                shape=(self.n_fine, self.n_coarse))
        return self._q

    def members(self, j):
        return np.nonzero(self.membership == j)[0]

    def __eq__(self, other):
        return isinstance(other, Aggregation) and \
            np.array_equal(self.membership, other.membership)

    def __repr__(self):
        return 'Aggregation(n_fine={}, n_coarse={})'.format(
            self.n_fine, self.n_coarse)


def strength_matrix(b, x, sign_constrained=False):
    """
    Symmetric strength of connection derived from ``B diag(x)``.

    Without the sign constraint the columns are weighted by ``x^+``.  With
    it they are weighted by ``|x|`` and every entry ``(k, l)`` with
    ``x_k x_l <= 0`` is dropped, so that only nodes of equal sign connect.

    Args:
        b (scipy.sparse.csr_matrix): The level matrix.
        x (np.ndarray): The reference iterate.
        sign_constrained (bool): Whether to apply the sign rule.

    Returns:
        scipy.sparse.csr_matrix: ``(S + S^T) / 2`` with zero diagonal.
    """
    x = np.asarray(x, dtype=np.float64)
    weights = np.abs(x) if sign_constrained else np.maximum(x, 0.)
    s = sparse.csr_matrix(b.dot(sparse.diags(weights)))
    s = sparse.coo_matrix(s)
    keep = s.row != s.col
    if sign_constrained:
        keep &= x[s.row] * x[s.col] > 0
    keep &= s.data > 0
    s = sparse.csr_matrix((s.data[keep], (s.row[keep], s.col[keep])),
                          shape=b.shape)
    return as_csr(0.5 * (s + s.T))


def _row_max(s):
    n = s.shape[0]
    ret = np.zeros(n)
    nonempty = np.diff(s.indptr) > 0
    if s.nnz:
        ret[nonempty] = np.maximum.reduceat(
            s.data, s.indptr[:-1][nonempty])
    return ret


def aggregate_bottom_up(s, cfg):
    """
    Greedy bottom-up aggregation.

    Nodes are visited in descending order of their strongest incident
    strength (smallest index first on ties).  Each unassigned node seeds an
    aggregate, which repeatedly takes the unassigned neighbor most strongly
    connected to the aggregate while that strength is at least
    ``theta * (strongest strength of the seed)``, up to ``target_size``
    nodes.  Seeds left alone afterwards join the aggregate they are most
    strongly connected to; unconnected nodes stay singletons.

    Args:
        s (scipy.sparse.csr_matrix): Symmetric strength matrix.
        cfg (AggregationConfig): Target size and threshold.

    Returns:
        Aggregation: The partition, numbered by smallest member.
    """
    validate_aggregation_config(cfg)
    s = as_csr(s)
    n = s.shape[0]
    indptr, indices, data = s.indptr, s.indices, s.data
    strongest = _row_max(s)
    order = np.lexsort((np.arange(n), -strongest))

    membership = np.full(n, -1, dtype=np.int64)
    count = 0
    lonely = []

    for seed in order:
        if membership[seed] >= 0:
            continue
        membership[seed] = count
        size = 1
        threshold = cfg.theta * strongest[seed]
        if strongest[seed] > 0:
            candidates = {}

            def gather(node):
                lo, hi = indptr[node], indptr[node + 1]
                for nb, w in zip(indices[lo:hi], data[lo:hi]):
                    if membership[nb] < 0:
                        candidates[nb] = candidates.get(nb, 0.) + w

            gather(seed)
            while size < cfg.target_size:
                best, best_w = -1, 0.
                for nb, w in candidates.items():
                    if membership[nb] >= 0:
                        continue
                    if w > best_w or (w == best_w and 0 <= nb < best):
                        best, best_w = nb, w
                if best < 0 or best_w < threshold:
                    break
                membership[best] = count
                del candidates[best]
                size += 1
                gather(best)
        if size == 1:
            lonely.append(seed)
        count += 1

    for node in sorted(lonely):
        lo, hi = indptr[node], indptr[node + 1]
        if lo == hi:
            continue
        links = {}
        for nb, w in zip(indices[lo:hi], data[lo:hi]):
            agg = membership[nb]
            if agg != membership[node]:
                links[agg] = links.get(agg, 0.) + w
        if links:
            target = min(links, key=lambda a: (-links[a], a))
            membership[node] = target

    # renumber by smallest member
    _, first = np.unique(membership, return_index=True)
    relabel = np.empty(count, dtype=np.int64)
    relabel[membership[np.sort(first)]] = np.arange(len(first))
    return Aggregation(relabel[membership])


def restrict(agg, y):
    """Per-aggregate sums ``Q^T y``."""
    return np.bincount(agg.membership, weights=np.asarray(y, dtype=float),
                       minlength=agg.n_coarse)


def proportions(agg, x_ref):
    """
    Relative weight ``x_k / sum_{l in agg(k)} x_l`` of every fine node.

    Singleton aggregates always get weight 1.

    Raises:
        CancellationError: If a non-singleton aggregate sums to zero.
    """
    x_ref = np.asarray(x_ref, dtype=np.float64)
    sums = restrict(agg, x_ref)
    singleton = agg.sizes == 1
    bad = (sums == 0.) & ~singleton
    if np.any(bad):
        raise CancellationError(
            'Aggregate {} of the reference vector sums to zero.'.
            format(int(np.nonzero(bad)[0][0])))
    safe = np.where(singleton, 1., sums)
    ret = x_ref / safe[agg.membership]
    ret[singleton[agg.membership]] = 1.
    return ret


def prolong(agg, x_fine_ref, x_coarse):
    """
    Distribute coarse values over the aggregates in proportion to
    `x_fine_ref`, i.e. ``P diag(Q^T x_ref)^{-1} x_c`` with
    ``P = diag(x_ref) Q``.
    """
    x_coarse = np.asarray(x_coarse, dtype=np.float64)
    if x_coarse.shape[0] != agg.n_coarse:
        raise InputError('Coarse vector length {} does not match {} '
                         'aggregates.'.format(x_coarse.shape[0],
                                              agg.n_coarse))
    return proportions(agg, x_fine_ref) * x_coarse[agg.membership]


def write_aggregation_csv(agg, path):
    """Dump `agg` as ``fine_index,aggregate_index`` lines."""
    with codecs.open(path, 'wb', 'utf-8') as f:
        f.write('fine_index,aggregate_index\n')
        for i, j in enumerate(agg.membership):
            f.write('{},{}\n'.format(i, j))

"""Domain types for graph collections, labelings, parameters and the
sufficient statistics (block counts) every estimator consumes.

Labels are 0-based inside the library. Files and the command line use
1-based labels; conversion happens in :mod:`blockorder.graph_io` and the
``from_one_based`` / ``to_one_based`` helpers only.
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

SIMPLEX_TOL = 1e-12
FIXED_POINT_TOL = 1e-10


class ModelException(ValueError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    """Indicator matrix of a labeling.

    :param labels: 0-based labels, any leading shape
    :param k: Number of classes
    :return: Float array of shape ``labels.shape + (k,)``"""
    return (labels[..., None] == np.arange(k)).astype(np.float64)


def pair_counts(n_a: np.ndarray) -> np.ndarray:
    """Number of node pairs per block pair: ``n_a * n_b`` off the diagonal,
    ``n_a * (n_a - 1) / 2`` on it. Leading dimensions are broadcast."""
    n_a = np.asarray(n_a)
    pairs = n_a[..., :, None] * n_a[..., None, :]
    idx = np.arange(n_a.shape[-1])
    pairs[..., idx, idx] = n_a * (n_a - 1) // 2
    return pairs


def split_edge_matrix(full: np.ndarray):
    """Splits ordered-pair edge sums ``M = Zᵀ A Z`` into the upper-triangular
    edge counts ``o`` and the symmetric ``õ``.

    ``M`` counts every edge twice inside a block, once between blocks, so
    ``õ = M`` and ``o`` is the upper triangle of ``M`` with a halved diagonal.

    :param full: Array ``(..., k, k)``
    :return: (o, o_tilde)"""
    k = full.shape[-1]
    idx = np.arange(k)
    upper = np.triu(full)
    upper[..., idx, idx] = full[..., idx, idx] / 2
    return upper, full


class GraphCollection:
    """T symmetric binary adjacency matrices over the same n nodes,
    with zero diagonals."""

    def __init__(self, layers):
        """
        :param layers: Array-like of shape (T, n, n), or (n, n) for one layer
        :raises ModelException: If any layer is not a valid simple graph
        """
        arr = np.asarray(layers)
        if arr.ndim == 2:
            arr = arr[None, :, :]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ModelException("Layers must be square matrices, got shape %s"
                                 % str(arr.shape))
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ModelException("A graph collection needs n >= 1 and T >= 1")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ModelException("Adjacency entries must be exactly 0 or 1")
        arr = arr.astype(np.uint8)
        if not np.array_equal(arr, arr.transpose(0, 2, 1)):
            bad = int(np.argmax((arr != arr.transpose(0, 2, 1)).any(axis=(1, 2))))
            raise ModelException("Layer %d is not symmetric" % (bad + 1))
        if np.diagonal(arr, axis1=1, axis2=2).any():
            raise ModelException("Self-loops are not allowed "
                                 "(non-zero diagonal)")
        self.layers = _frozen(arr)

    @property
    def n(self) -> int:
        return int(self.layers.shape[1])

    @property
    def T(self) -> int:  # noqa: N802
        return int(self.layers.shape[0])

    @classmethod
    def empty(cls, n: int, T: int = 1) -> 'GraphCollection':  # noqa: N803
        return cls(np.zeros((T, n, n), dtype=np.uint8))

    def edge_counts(self) -> np.ndarray:
        """Number of edges E^t of every layer."""
        return self.layers.sum(axis=(1, 2), dtype=np.int64) // 2

    def aggregate(self) -> np.ndarray:
        """Sum of the layers as a float matrix."""
        return self.layers.sum(axis=0, dtype=np.float64)

    def layer(self, t: int) -> 'GraphCollection':
        """Single-layer collection holding layer ``t`` (0-based)."""
        return GraphCollection(self.layers[t])

    def permute(self, perm: Sequence[int]) -> 'GraphCollection':
        """Relabels nodes: node ``perm[i]`` of the result is node ``i``."""
        perm = np.asarray(perm)
        inverse = np.argsort(perm)
        return GraphCollection(self.layers[:, inverse][:, :, inverse])

    def __eq__(self, other):
        return isinstance(other, GraphCollection) and \
            np.array_equal(self.layers, other.layers)

    def __repr__(self):
        return "GraphCollection(n=%d, T=%d, edges=%s)" % (
            self.n, self.T, self.edge_counts().tolist())


class LabelAssignment:
    """Node-to-community map z in [k]^n (0-based internally)."""

    def __init__(self, labels, k: Optional[int] = None):
        arr = np.asarray(labels, dtype=np.int64).reshape(-1)
        if arr.size == 0:
            raise ModelException("A labeling needs at least one node")
        if k is None:
            k = int(arr.max()) + 1
        if k < 1:
            raise ModelException("k must be at least 1, got %d" % k)
        if arr.min() < 0 or arr.max() >= k:
            raise ModelException("Labels must lie in 1..%d" % k)
        self.k = int(k)
        self.labels = _frozen(arr.copy())

    @classmethod
    def from_one_based(cls, labels, k: Optional[int] = None) -> 'LabelAssignment':
        return cls(np.asarray(labels, dtype=np.int64) - 1, k)

    def to_one_based(self) -> list:
        return (self.labels + 1).tolist()

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def counts(self) -> np.ndarray:
        """Class sizes n_a."""
        return np.bincount(self.labels, minlength=self.k)

    def permute(self, perm: Sequence[int]) -> 'LabelAssignment':
        """Relabels nodes the same way :meth:`GraphCollection.permute` does."""
        inverse = np.argsort(np.asarray(perm))
        return LabelAssignment(self.labels[inverse], self.k)

    def __eq__(self, other):
        return isinstance(other, LabelAssignment) and self.k == other.k and \
            np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return "LabelAssignment(k=%d, labels=%s)" % (self.k, self.to_one_based())


class LabelPath:
    """Label trajectories z^{1:T} in [k]^{T x n} (0-based internally)."""

    def __init__(self, labels, k: Optional[int] = None):
        arr = np.asarray(labels, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.size == 0:
            raise ModelException("A label path must be a T x n array")
        if k is None:
            k = int(arr.max()) + 1
        if k < 1:
            raise ModelException("k must be at least 1, got %d" % k)
        if arr.min() < 0 or arr.max() >= k:
            raise ModelException("Labels must lie in 1..%d" % k)
        self.k = int(k)
        self.labels = _frozen(arr.copy())

    @classmethod
    def from_one_based(cls, labels, k: Optional[int] = None) -> 'LabelPath':
        return cls(np.asarray(labels, dtype=np.int64) - 1, k)

    def to_one_based(self) -> list:
        return (self.labels + 1).tolist()

    @property
    def T(self) -> int:  # noqa: N802
        return int(self.labels.shape[0])

    @property
    def n(self) -> int:
        return int(self.labels.shape[1])

    def at(self, t: int) -> LabelAssignment:
        """Labeling at time ``t`` (0-based)."""
        return LabelAssignment(self.labels[t], self.k)

    def __eq__(self, other):
        return isinstance(other, LabelPath) and self.k == other.k and \
            np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return "LabelPath(k=%d, T=%d, n=%d)" % (self.k, self.T, self.n)


def _check_connectivity(P) -> np.ndarray:
    arr = np.array(P, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ModelException("Connectivity must be T square k x k matrices, "
                             "got shape %s" % str(arr.shape))
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise ModelException("Edge probabilities must lie in [0, 1]")
    if not np.array_equal(arr, arr.transpose(0, 2, 1)):
        raise ModelException("Every connectivity matrix must be symmetric")
    return _frozen(arr)


def _check_simplex(vector, name: str, tol: float = SIMPLEX_TOL) -> np.ndarray:
    arr = np.array(vector, dtype=np.float64).reshape(-1)
    if arr.size == 0 or not np.isfinite(arr).all() or arr.min() < 0.0:
        raise ModelException("%s must be a non-negative vector" % name)
    if abs(arr.sum() - 1.0) > tol:
        raise ModelException("%s must sum to 1 (sums to %.17g)"
                             % (name, arr.sum()))
    return _frozen(arr)


class MlParams:
    """Multi-layer SBM parameters: class proportions ``pi`` and one
    connectivity matrix per layer."""

    def __init__(self, pi, P):  # noqa: N803
        self.pi = _check_simplex(pi, "pi")
        self.P = _check_connectivity(P)
        if self.P.shape[1] != self.pi.size:
            raise ModelException("pi has %d classes but P is %d x %d"
                                 % (self.pi.size, self.P.shape[1],
                                    self.P.shape[2]))

    @property
    def k(self) -> int:
        return int(self.pi.size)

    @property
    def T(self) -> int:  # noqa: N802
        return int(self.P.shape[0])

    def to_dict(self) -> dict:
        return {"model": "ml", "pi": self.pi.tolist(), "P": self.P.tolist()}

    def __repr__(self):
        return "MlParams(k=%d, T=%d)" % (self.k, self.T)


class DynParams:
    """Dynamic SBM parameters: transition matrix ``trans`` (Π), per-time
    connectivity ``P`` with time-constant diagonal, and the stationary
    distribution ``alpha``."""

    def __init__(self, trans, P, alpha=None):  # noqa: N803
        trans = np.array(trans, dtype=np.float64)
        if trans.ndim != 2 or trans.shape[0] != trans.shape[1]:
            raise ModelException("The transition matrix must be square")
        if not np.isfinite(trans).all() or trans.min() < 0.0:
            raise ModelException("Transition probabilities must be "
                                 "non-negative")
        if np.abs(trans.sum(axis=1) - 1.0).max() > SIMPLEX_TOL:
            raise ModelException("Every row of the transition matrix "
                                 "must sum to 1")
        self.trans = _frozen(trans)
        self.P = _check_connectivity(P)
        if self.P.shape[1] != self.k:
            raise ModelException("Transition matrix is %d x %d but P is "
                                 "%d x %d" % (self.k, self.k, self.P.shape[1],
                                              self.P.shape[2]))
        diagonal = np.diagonal(self.P, axis1=1, axis2=2)
        if np.abs(diagonal - diagonal[0]).max() > SIMPLEX_TOL:
            raise ModelException("Within-class probabilities P_aa must be "
                                 "equal at every time step")
        self._alpha = None
        if alpha is not None:
            alpha = _check_simplex(alpha, "alpha")
            if alpha.size != self.k:
                raise ModelException("alpha must have %d entries" % self.k)
            if np.abs(alpha @ self.trans - alpha).max() > FIXED_POINT_TOL:
                raise ModelException("alpha is not stationary for the "
                                     "transition matrix")
            self._alpha = alpha

    @property
    def k(self) -> int:
        return int(self.trans.shape[0])

    @property
    def T(self) -> int:  # noqa: N802
        return int(self.P.shape[0])

    @property
    def alpha(self) -> np.ndarray:
        """Stationary distribution, computed on first access."""
        if self._alpha is None:
            from blockorder.sampler import stationary_distribution
            self._alpha = _frozen(stationary_distribution(self.trans))
        return self._alpha

    def to_dict(self) -> dict:
        return {"model": "dyn", "trans": self.trans.tolist(),
                "P": self.P.tolist(), "alpha": self.alpha.tolist()}

    def __repr__(self):
        return "DynParams(k=%d, T=%d)" % (self.k, self.T)


class BlockCounts:
    """Sufficient statistics of a labeling and a graph collection.

    For a :class:`LabelAssignment` ``n_a`` has shape (k,) and ``n_ab`` (k, k),
    shared by every layer. For a :class:`LabelPath` both carry a leading time
    axis and ``c`` holds the k x k transition counts. ``o`` and ``o_tilde``
    are always (T, k, k)."""

    def __init__(self, n_a, n_ab, o, o_tilde, total_edges, c=None):
        self.n_a = _frozen(np.asarray(n_a, dtype=np.int64))
        self.n_ab = _frozen(np.asarray(n_ab, dtype=np.int64))
        self.o = _frozen(np.asarray(o, dtype=np.int64))
        self.o_tilde = _frozen(np.asarray(o_tilde, dtype=np.int64))
        self.total_edges = _frozen(np.asarray(total_edges, dtype=np.int64))
        self.c = None if c is None else _frozen(np.asarray(c, dtype=np.int64))

    @property
    def per_layer(self) -> bool:
        return self.n_a.ndim == 2

    @property
    def k(self) -> int:
        return int(self.n_a.shape[-1])

    def layer_pairs(self) -> np.ndarray:
        """Pair counts broadcast to (T, k, k)."""
        if self.per_layer:
            return self.n_ab
        return np.broadcast_to(self.n_ab, self.o.shape)

    def __repr__(self):
        return "BlockCounts(k=%d, n_a=%s)" % (self.k, self.n_a.tolist())


def _layer_edge_matrix(onehot: np.ndarray, layer: np.ndarray) -> np.ndarray:
    return np.rint(onehot.T @ (layer @ onehot)).astype(np.int64)


def block_counts(z: Union[LabelAssignment, LabelPath],
                 g: GraphCollection) -> BlockCounts:
    """Computes n_a, n_ab, o_ab, õ_ab, E^t and (for label paths) c_ab.

    :param z: Labeling shared by all layers, or one labeling per layer
    :param g: Observed graphs
    :return: The block counts
    :raises ModelException: On a node or layer count mismatch"""
    if z.n != g.n:
        raise ModelException("Labeling has %d nodes but the graphs have %d"
                             % (z.n, g.n))
    k = z.k
    if isinstance(z, LabelPath):
        if z.T != g.T:
            raise ModelException("Label path has %d time steps but there "
                                 "are %d layers" % (z.T, g.T))
        onehot = one_hot(z.labels, k)
        full = np.stack([_layer_edge_matrix(onehot[t], g.layers[t])
                         for t in range(g.T)])
        n_a = onehot.sum(axis=1).astype(np.int64)
        transitions = np.rint(np.einsum('tia,tib->ab', onehot[:-1],
                                        onehot[1:])).astype(np.int64)
    else:
        onehot = one_hot(z.labels, k)
        full = np.stack([_layer_edge_matrix(onehot, g.layers[t])
                         for t in range(g.T)])
        n_a = z.counts()
        transitions = None
    o, o_tilde = split_edge_matrix(full)
    return BlockCounts(n_a=n_a, n_ab=pair_counts(n_a), o=o, o_tilde=o_tilde,
                       total_edges=g.edge_counts(), c=transitions)


class ConfusionMatrix:
    """Joint label frequencies Q between two labelings of the same nodes."""

    def __init__(self, q):
        q = np.array(q, dtype=np.float64)
        if q.ndim != 2 or q.size == 0 or q.min() < 0.0:
            raise ModelException("A confusion matrix is a non-negative matrix")
        if abs(q.sum() - 1.0) > SIMPLEX_TOL:
            raise ModelException("Confusion matrix mass must be 1, got %.17g"
                                 % q.sum())
        self.q = _frozen(q)

    def column_counts(self, n: int) -> np.ndarray:
        """Class counts of the second labeling, n · Qᵀ1."""
        return np.rint(n * self.q.sum(axis=0)).astype(np.int64)

    def row_counts(self, n: int) -> np.ndarray:
        """Class counts of the first labeling, n · Q1."""
        return np.rint(n * self.q.sum(axis=1)).astype(np.int64)

    def __repr__(self):
        return "ConfusionMatrix(%s)" % self.q.tolist()


def confusion_matrix(zbar: LabelAssignment,
                     z: LabelAssignment) -> ConfusionMatrix:
    """Q_{aa'} = #{i : zbar_i = a, z_i = a'} / n.

    :raises ModelException: If the labelings have different lengths"""
    if zbar.n != z.n:
        raise ModelException("Labelings have different lengths (%d and %d)"
                             % (zbar.n, z.n))
    counts = np.zeros((zbar.k, z.k), dtype=np.int64)
    np.add.at(counts, (zbar.labels, z.labels), 1)
    logging.getLogger('model').debug("Confusion counts: %s", counts.tolist())
    return ConfusionMatrix(counts / float(z.n))

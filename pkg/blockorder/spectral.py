"""Spectral clustering of a graph collection and the Bethe-Hessian
order-selection baseline."""
import logging
import math
from typing import NamedTuple, Union

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigvalsh
from sklearn.cluster import KMeans

from blockorder.model import GraphCollection, LabelAssignment
from blockorder.utils import stream_seed

ZERO_EIGENVALUE_TOL = 1e-10


class SpectralException(ValueError):
    pass


class SpectralConfig:
    """k-means settings for spectral clustering."""

    def __init__(self, kmeans_restarts: int = 10, kmeans_iters: int = 100):
        if kmeans_restarts < 1 or kmeans_iters < 1:
            raise SpectralException("k-means restarts and iterations must "
                                    "be positive")
        self.kmeans_restarts = int(kmeans_restarts)
        self.kmeans_iters = int(kmeans_iters)

    def __repr__(self):
        return "SpectralConfig(kmeans_restarts=%d, kmeans_iters=%d)" % (
            self.kmeans_restarts, self.kmeans_iters)


class BhmcSelection(NamedTuple):
    k: int
    empty_graph: bool


def spectral_cluster(g: GraphCollection, k: int, cfg: SpectralConfig = None,
                     seed: int = 0) -> LabelAssignment:
    """Clusters the rows of the leading-k eigenvectors (by eigenvalue
    magnitude) of the aggregated adjacency matrix with k-means++.

    :raises SpectralException: If k is out of range or the eigensolver fails"""
    cfg = cfg or SpectralConfig()
    if not 1 <= k <= g.n:
        raise SpectralException("k must lie in 1..n (k=%d, n=%d)" % (k, g.n))
    if k == 1:
        return LabelAssignment(np.zeros(g.n, dtype=np.int64), 1)
    try:
        values, vectors = eigh(g.aggregate())
    except LinAlgError as err:
        raise SpectralException("Eigen-decomposition failed: %s" % err) from None
    order = np.argsort(-np.abs(values), kind='stable')[:k]
    logging.debug("Leading eigenvalues for k=%d: %s", k, values[order].tolist())
    kmeans = KMeans(n_clusters=k, init='k-means++',
                    n_init=cfg.kmeans_restarts, max_iter=cfg.kmeans_iters,
                    random_state=stream_seed(seed) % (2 ** 32))
    labels = kmeans.fit_predict(vectors[:, order])
    return LabelAssignment(labels, k)


def bethe_hessian(adjacency: np.ndarray, r: float) -> np.ndarray:
    """H(r) = (r^2 - 1) I - r A + D."""
    degrees = adjacency.sum(axis=1)
    return (r * r - 1.0) * np.eye(adjacency.shape[0]) - r * adjacency \
        + np.diag(degrees)


def bhmc_select(adjacency: Union[np.ndarray, GraphCollection],
                k_max: int) -> BhmcSelection:
    """Number of negative eigenvalues of the Bethe-Hessian at the
    moment-corrected radius r = sqrt(sum d^2 / sum d - 1), capped at k_max.

    :param adjacency: Single-layer adjacency matrix or one-layer collection
    :param k_max: Upper bound on the returned order
    :raises SpectralException: If there are fewer than two nodes"""
    if isinstance(adjacency, GraphCollection):
        if adjacency.T != 1:
            raise SpectralException("The Bethe-Hessian baseline works on a "
                                    "single layer, got T=%d" % adjacency.T)
        adjacency = adjacency.layers[0]
    adjacency = np.asarray(adjacency, dtype=np.float64)
    if adjacency.shape[0] < 2:
        raise SpectralException("The Bethe-Hessian baseline needs n >= 2")
    degrees = adjacency.sum(axis=1)
    if degrees.sum() == 0:
        logging.warning("Empty graph: the Bethe-Hessian baseline selects 0")
        return BhmcSelection(0, True)
    r = math.sqrt(max((degrees ** 2).sum() / degrees.sum() - 1.0, 0.0))
    try:
        values = eigvalsh(bethe_hessian(adjacency, r))
    except LinAlgError as err:
        raise SpectralException("Eigen-decomposition failed: %s" % err) from None
    negatives = int((values < -ZERO_EIGENVALUE_TOL).sum())
    logging.debug("Bethe-Hessian at r=%.4f has %d negative eigenvalues",
                  r, negatives)
    return BhmcSelection(min(negatives, k_max), False)

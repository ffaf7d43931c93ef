"""Seeded samplers for multi-layer and dynamic SBMs, plus the simulation
scenarios used by the experiment harness.

Every function takes a 64-bit ``seed`` and draws from a Philox generator
(see :func:`blockorder.utils.make_rng`). Edges of a layer are drawn row by
row over the strict upper triangle, so a given seed yields the same graph
on every platform.
"""
import logging
from typing import NamedTuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from blockorder.model import (DynParams, GraphCollection, LabelAssignment,
                              LabelPath, MlParams)
from blockorder.utils import make_rng, stream_seed

STATIONARY_MAX_ITERS = 100000
STATIONARY_TOL = 1e-12

FIG1_T = 5
FIG1_K = 6
SPARSE_N = 300
SPARSE_T = 4
SPARSE_K = 3
SPARSE_NOISE = 0.1


class SamplerException(ValueError):
    pass


class Scenario(NamedTuple):
    params: Union[MlParams, DynParams]
    labels: Union[LabelAssignment, LabelPath]
    graph: GraphCollection


class SparsityScaling:
    """Connectivity written as ``rho^t * S^t`` with ``S^t`` fixed."""

    def __init__(self, rho, S):  # noqa: N803
        S = np.array(S, dtype=np.float64)  # noqa: N806
        if S.ndim == 2:
            S = S[None, :, :]  # noqa: N806
        rho = np.broadcast_to(np.asarray(rho, dtype=np.float64),
                              (S.shape[0],)).copy()
        if not (np.isfinite(rho).all() and (rho > 0).all() and (rho <= 1).all()):
            raise SamplerException("Sparsity factors must lie in (0, 1], "
                                   "got %s" % rho.tolist())
        if S.min() < 0:
            raise SamplerException("Base matrices must be non-negative")
        if not np.array_equal(S, S.transpose(0, 2, 1)):
            raise SamplerException("Base matrices must be symmetric")
        scaled = rho[:, None, None] * S
        if scaled.max() > 1.0:
            raise SamplerException("rho * S exceeds 1 (max %.4f); lower rho"
                                   % scaled.max())
        self.rho = rho
        self.S = S

    @property
    def is_time_constant(self) -> bool:
        return bool(np.all(self.rho == self.rho[0]))

    def connectivity(self) -> np.ndarray:
        return self.rho[:, None, None] * self.S

    def to_ml_params(self, pi) -> MlParams:
        return MlParams(pi, self.connectivity())

    def to_dyn_params(self, trans, alpha=None) -> DynParams:
        """Dynamic parameters; sparsity may not vary over time.

        :raises SamplerException: If rho is not constant over time"""
        if not self.is_time_constant:
            raise SamplerException("A dynamic SBM needs the same sparsity "
                                   "factor at every time step")
        return DynParams(trans, self.connectivity(), alpha=alpha)


def _is_primitive(support: np.ndarray) -> bool:
    # Wielandt: an irreducible k x k matrix is primitive iff its
    # ((k-1)^2 + 1)-th power is positive.
    k = support.shape[0]
    power = support.copy()
    for _ in range((k - 1) ** 2):
        power = ((power @ support) > 0).astype(np.float64)
    return bool(power.all())


def stationary_distribution(trans) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix by power iteration.

    :param trans: k x k row-stochastic matrix, irreducible and aperiodic
    :return: Stationary distribution alpha
    :raises SamplerException: If the matrix looks reducible or periodic,
    or the iteration does not converge"""
    trans = np.asarray(trans, dtype=np.float64)
    k = trans.shape[0]
    support = (trans > 0).astype(np.float64)
    n_components, _ = connected_components(csr_matrix(support), directed=True,
                                           connection='strong')
    if n_components > 1:
        raise SamplerException("Transition matrix %s is reducible (%d "
                               "communicating classes)"
                               % (trans.tolist(), n_components))
    if not _is_primitive(support):
        raise SamplerException("Transition matrix %s is periodic"
                               % trans.tolist())
    alpha = np.full(k, 1.0 / k)
    for iteration in range(1, STATIONARY_MAX_ITERS + 1):
        updated = alpha @ trans
        updated /= updated.sum()
        delta = np.abs(updated - alpha).max()
        alpha = updated
        if delta <= STATIONARY_TOL:
            logging.debug("Stationary distribution converged after %d "
                          "iterations", iteration)
            return alpha
    raise SamplerException("Power iteration did not converge after %d "
                           "iterations; %s may be reducible or periodic"
                           % (STATIONARY_MAX_ITERS, trans.tolist()))


def _sample_layer(labels: np.ndarray, P_t: np.ndarray,  # noqa: N803
                  rng: np.random.Generator) -> np.ndarray:
    n = labels.size
    layer = np.zeros((n, n), dtype=np.uint8)
    for i in range(n - 1):
        probs = P_t[labels[i], labels[i + 1:]]
        layer[i, i + 1:] = rng.random(n - i - 1) < probs
    return layer | layer.T


def sample_mlsbm(n: int, params: MlParams, seed: int):
    """Draws labels i.i.d. from ``pi`` and every layer's edges given them.

    :return: (LabelAssignment, GraphCollection)"""
    if n < 1:
        raise SamplerException("n must be positive")
    rng = make_rng(seed)
    labels = rng.choice(params.k, size=n, p=params.pi)
    layers = np.stack([_sample_layer(labels, params.P[t], rng)
                       for t in range(params.T)])
    return LabelAssignment(labels, params.k), GraphCollection(layers)


def sample_dynsbm(n: int, params: DynParams, seed: int):
    """Draws independent stationary label chains and the layers given them.

    :return: (LabelPath, GraphCollection)"""
    if n < 1:
        raise SamplerException("n must be positive")
    rng = make_rng(seed)
    k, T = params.k, params.T  # noqa: N806
    cumulative = np.cumsum(params.trans, axis=1)
    labels = np.empty((T, n), dtype=np.int64)
    labels[0] = rng.choice(k, size=n, p=params.alpha)
    for t in range(1, T):
        draws = rng.random(n)
        step = (draws[:, None] >= cumulative[labels[t - 1]]).sum(axis=1)
        labels[t] = np.minimum(step, k - 1)
    layers = np.stack([_sample_layer(labels[t], params.P[t], rng)
                       for t in range(T)])
    return LabelPath(labels, k), GraphCollection(layers)


def fig1_connectivity(u) -> np.ndarray:
    """Six-class connectivity: an assortative block of three classes with
    diagonal ``u[0..2]`` and 0.4 off the diagonal, a disassortative block
    with diagonal 0.4 and ``u[3]`` off the diagonal, 0.2 across blocks."""
    P = np.full((FIG1_K, FIG1_K), 0.2)  # noqa: N806
    P[:3, :3] = 0.4
    P[3:, 3:] = u[3]
    P[[0, 1, 2], [0, 1, 2]] = u[:3]
    P[[3, 4, 5], [3, 4, 5]] = 0.4
    return P


def scenario_fig1(n: int, seed: int, T: int = FIG1_T,  # noqa: N803
                  iid_per_layer: bool = True) -> Scenario:
    """Six-class mixed assortative/disassortative multi-layer scenario with
    ``u1..u4 ~ U(0.6, 1)`` (redrawn per layer unless ``iid_per_layer`` is
    False)."""
    rng = make_rng(seed, 0)
    if iid_per_layer:
        draws = [rng.uniform(0.6, 1.0, size=4) for _ in range(T)]
    else:
        draws = [rng.uniform(0.6, 1.0, size=4)] * T
    params = MlParams(np.full(FIG1_K, 1.0 / FIG1_K),
                      np.stack([fig1_connectivity(u) for u in draws]))
    labels, graph = sample_mlsbm(n, params, stream_seed(seed, 1))
    return Scenario(params, labels, graph)


def sparse_base_matrices(rng: np.random.Generator, T: int = SPARSE_T,  # noqa: N803
                         k: int = SPARSE_K) -> np.ndarray:
    """``S^t = I + 11ᵀ + eps_t`` with symmetric ``eps_t ~ U(-0.1, 0.1)``."""
    base = np.eye(k) + np.ones((k, k))
    rows, cols = np.triu_indices(k)
    matrices = []
    for _ in range(T):
        noise = np.zeros((k, k))
        noise[rows, cols] = rng.uniform(-SPARSE_NOISE, SPARSE_NOISE,
                                        size=rows.size)
        noise[cols, rows] = noise[rows, cols]
        matrices.append(base + noise)
    return np.stack(matrices)


def scenario_sparse_table1(rho: float, seed: int, n: int = SPARSE_N,
                           T: int = SPARSE_T) -> Scenario:  # noqa: N803
    """Three-class sparse scenario with connectivity ``rho * S^t``.

    :raises SamplerException: If rho is not positive or rho * S^t exceeds 1"""
    if not rho > 0:
        raise SamplerException("rho must be positive, got %r" % rho)
    rng = make_rng(seed, 0)
    scaling = SparsityScaling(rho, sparse_base_matrices(rng, T))
    params = scaling.to_ml_params(np.full(SPARSE_K, 1.0 / SPARSE_K))
    labels, graph = sample_mlsbm(n, params, stream_seed(seed, 1))
    return Scenario(params, labels, graph)


def scenario_rate_study(n: int, T: int, seed: int) -> Scenario:  # noqa: N803
    """Two-class assortative scenario: per layer, each diagonal entry
    ``~ U(0.7, 1)`` and the off-diagonal entry ``~ U(0, 0.1)``."""
    rng = make_rng(seed, 0)
    matrices = []
    for _ in range(T):
        diag = rng.uniform(0.7, 1.0, size=2)
        off = rng.uniform(0.0, 0.1)
        matrices.append(np.array([[diag[0], off], [off, diag[1]]]))
    params = MlParams(np.array([0.5, 0.5]), np.stack(matrices))
    labels, graph = sample_mlsbm(n, params, stream_seed(seed, 1))
    return Scenario(params, labels, graph)

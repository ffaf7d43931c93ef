"""Exact KT evidence by conjugate integration and full enumeration.

For a fixed labeling the integral of the complete likelihood against the
Dirichlet(1/2) and Beta(1/2, 1/2) priors is a product of Dirichlet-
multinomial and Beta-Bernoulli masses. Summing it over all k^n labelings
(k^{n(T-1)} label extensions for the dynamic model) gives the KT evidence.
Enumeration is a mixed-radix counter over node labels (node 1 is the most
significant digit, so index order is lexicographic order), evaluated in
chunks with a streaming log-sum-exp; any partition of the index range into
chunks gives the same result.
"""
import logging
import math
from typing import Callable, Iterator, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.special import betaln, gammaln, logsumexp, xlogy

from blockorder.engines.engine import (BudgetExceeded, EngineException,
                                       EvidenceEngine, LogEvidence)
from blockorder.model import (GraphCollection, LabelAssignment, LabelPath,
                              ModelException, block_counts, one_hot,
                              pair_counts, split_edge_matrix)
from blockorder.utils import time_execution

DEFAULT_BUDGET = 10 ** 7
CHUNK_SIZE = 4096
TIE_TOL = 1e-9
LOG_BETA_HALF = betaln(0.5, 0.5)


def dirichlet_log_mass(counts: np.ndarray) -> np.ndarray:
    """log of the Dirichlet(1/2, ..., 1/2)-multinomial mass of ``counts``
    along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    k = counts.shape[-1]
    return gammaln(k / 2.0) - k * gammaln(0.5) \
        + gammaln(counts + 0.5).sum(axis=-1) \
        - gammaln(counts.sum(axis=-1) + k / 2.0)


def beta_log_mass(edges: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """log of the Beta(1/2, 1/2)-Bernoulli mass of ``edges`` successes in
    ``pairs`` trials."""
    return betaln(edges + 0.5, pairs - edges + 0.5) - LOG_BETA_HALF


def _bernoulli_profile(edges: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    # Bernoulli log-likelihood at the MLE, with 0 log 0 = 0
    edges = np.asarray(edges, dtype=np.float64)
    pairs = np.asarray(pairs, dtype=np.float64)
    p = np.divide(edges, pairs, out=np.zeros_like(edges), where=pairs > 0)
    return xlogy(edges, p) + xlogy(pairs - edges, 1.0 - p)


def _multinomial_profile(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=-1, keepdims=True)
    freq = np.divide(counts, totals, out=np.zeros_like(counts),
                     where=totals > 0)
    return xlogy(counts, freq).sum(axis=-1)


def _ml_log_mass(n_a, o, pairs) -> np.ndarray:
    # n_a (..., k), o (..., T, k, k), pairs (..., k, k)
    k = n_a.shape[-1]
    rows, cols = np.triu_indices(k)
    edge_terms = beta_log_mass(o[..., rows, cols],
                               pairs[..., None, rows, cols])
    return dirichlet_log_mass(n_a) + edge_terms.sum(axis=(-2, -1))


def _ml_profile(n_a, o, pairs) -> np.ndarray:
    k = n_a.shape[-1]
    rows, cols = np.triu_indices(k)
    edge_terms = _bernoulli_profile(o[..., rows, cols],
                                    pairs[..., None, rows, cols])
    return _multinomial_profile(n_a) + edge_terms.sum(axis=(-2, -1))


def _dyn_split(o, pairs):
    # Diagonal blocks are pooled over time, off-diagonal ones are not
    k = o.shape[-1]
    idx = np.arange(k)
    rows, cols = np.triu_indices(k, 1)
    pooled_edges = o[..., idx, idx].sum(axis=-2)
    pooled_pairs = pairs[..., idx, idx].sum(axis=-2)
    return (pooled_edges, pooled_pairs,
            o[..., rows, cols], pairs[..., rows, cols])


def _dyn_log_mass(c, o, pairs) -> np.ndarray:
    # c (..., k, k), o and pairs (..., T, k, k)
    pooled_edges, pooled_pairs, edges, off_pairs = _dyn_split(o, pairs)
    return dirichlet_log_mass(c).sum(axis=-1) \
        + beta_log_mass(pooled_edges, pooled_pairs).sum(axis=-1) \
        + beta_log_mass(edges, off_pairs).sum(axis=(-2, -1))


def _dyn_profile(c, o, pairs) -> np.ndarray:
    pooled_edges, pooled_pairs, edges, off_pairs = _dyn_split(o, pairs)
    return _multinomial_profile(c).sum(axis=-1) \
        + _bernoulli_profile(pooled_edges, pooled_pairs).sum(axis=-1) \
        + _bernoulli_profile(edges, off_pairs).sum(axis=(-2, -1))


def _with_order(z, k: int):
    try:
        if isinstance(z, LabelPath):
            return LabelPath(z.labels, k)
        return LabelAssignment(z.labels, k)
    except ModelException:
        raise ModelException("Labels exceed the model order k=%d" % k) from None


def log_complete_kt_ml(z: LabelAssignment, g: GraphCollection,
                       k: int) -> float:
    """log of the prior-integrated complete likelihood of (z, A) for the
    multi-layer model of order ``k``."""
    counts = block_counts(_with_order(z, k), g)
    return float(_ml_log_mass(counts.n_a, counts.o, counts.n_ab))


def log_complete_kt_dyn(zpath: LabelPath, g: GraphCollection,
                        k: int) -> float:
    """log of the prior-integrated likelihood of (z^{2:T}, A) given z^1 for
    the dynamic model of order ``k``."""
    counts = block_counts(_with_order(zpath, k), g)
    return float(_dyn_log_mass(counts.c, counts.o, counts.n_ab))


def log_profile_likelihood(z: Union[LabelAssignment, LabelPath],
                           g: GraphCollection) -> float:
    """Complete-data log-likelihood maximized over the parameters
    (multi-layer for a labeling, dynamic given z^1 for a label path)."""
    counts = block_counts(z, g)
    if isinstance(z, LabelPath):
        return float(_dyn_profile(counts.c, counts.o, counts.n_ab))
    return float(_ml_profile(counts.n_a, counts.o, counts.n_ab))


def _configurations(k: int, m: int, start: int, stop: int) -> np.ndarray:
    index = np.arange(start, stop, dtype=np.int64)
    place = k ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // place[None, :]) % k


def _check_budget(k: int, free_nodes: int, budget: int, hint: str) -> int:
    total = k ** free_nodes
    if total > budget:
        raise BudgetExceeded(total, budget, hint)
    return total


def _enumerate(k: int, m: int, total: int,
               evaluate: Callable[[np.ndarray], np.ndarray],
               chunk_size: int = CHUNK_SIZE
               ) -> Iterator[Tuple[int, np.ndarray]]:
    for start in range(0, total, chunk_size):
        stop = min(start + chunk_size, total)
        yield start, evaluate(_configurations(k, m, start, stop))


def _ml_batch(g: GraphCollection, k: int,
              statistic: Callable) -> Callable[[np.ndarray], np.ndarray]:
    layers = g.layers.astype(np.float64)

    def evaluate(labels):
        onehot = one_hot(labels, k)
        n_a = onehot.sum(axis=1)
        full = np.einsum('cia,ctib->ctab', onehot,
                         np.einsum('tij,cjb->ctib', layers, onehot))
        o, _ = split_edge_matrix(full)
        return statistic(n_a, o, pair_counts(n_a))
    return evaluate


def _dyn_batch(g: GraphCollection, z1: LabelAssignment, k: int,
               statistic: Callable) -> Callable[[np.ndarray], np.ndarray]:
    layers = g.layers.astype(np.float64)
    n, T = g.n, g.T  # noqa: N806

    def evaluate(labels):
        paths = np.concatenate(
            [np.broadcast_to(z1.labels, (labels.shape[0], 1, n)),
             labels.reshape(labels.shape[0], T - 1, n)], axis=1)
        onehot = one_hot(paths, k)
        full = np.einsum('ctia,ctib->ctab', onehot,
                         np.einsum('tij,ctjb->ctib', layers, onehot))
        o, _ = split_edge_matrix(full)
        transitions = np.einsum('ctia,ctib->cab', onehot[:, :-1],
                                onehot[:, 1:])
        return statistic(transitions, o, pair_counts(onehot.sum(axis=2)))
    return evaluate


def _stream_logsumexp(chunks) -> float:
    running = -np.inf
    for _, values in chunks:
        running = np.logaddexp(running, logsumexp(values))
    return float(running)


def _stream_argmax(chunks) -> Tuple[int, float]:
    # Smallest index among (near-)maximizers, i.e. lexicographic tie-break
    best_index, best_value = -1, -np.inf
    for start, values in chunks:
        top = values.max()
        if top > best_value + TIE_TOL:
            best_index = start + int(np.flatnonzero(values >= top - TIE_TOL)[0])
            best_value = float(top)
    return best_index, best_value


def _check_z1(g: GraphCollection, z1: LabelAssignment, k: int):
    if z1.n != g.n:
        raise ModelException("Initial labeling has %d nodes but the graphs "
                             "have %d" % (z1.n, g.n))
    if int(z1.labels.max()) >= k:
        raise EngineException("The initial labeling uses label %d, more than "
                              "the order k=%d" % (z1.labels.max() + 1, k))


@time_execution
def log_kt_ml_exact(g: GraphCollection, k: int,
                    budget: int = DEFAULT_BUDGET) -> LogEvidence:
    """Exact log KT evidence of order ``k`` for the multi-layer model.

    :raises BudgetExceeded: If k^n exceeds ``budget``"""
    total = _check_budget(k, g.n, budget, "use the vbem engine instead")
    value = _stream_logsumexp(_enumerate(k, g.n, total,
                                         _ml_batch(g, k, _ml_log_mass)))
    logging.debug("Exact ML evidence k=%d over %d configurations: %.6f",
                  k, total, value)
    return LogEvidence(value, k, 'exact', configs_enumerated=total)


@time_execution
def log_kt_dyn_exact(g: GraphCollection, z1: LabelAssignment, k: int,
                     budget: int = DEFAULT_BUDGET) -> LogEvidence:
    """Exact log KT evidence of order ``k`` for the dynamic model, given the
    labels ``z1`` at the first time step.

    :raises BudgetExceeded: If k^{n(T-1)} exceeds ``budget``"""
    _check_z1(g, z1, k)
    free = g.n * (g.T - 1)
    total = _check_budget(k, free, budget, "reduce n or T")
    value = _stream_logsumexp(_enumerate(k, free, total,
                                         _dyn_batch(g, z1, k, _dyn_log_mass)))
    logging.debug("Exact dynamic evidence k=%d over %d configurations: %.6f",
                  k, total, value)
    return LogEvidence(value, k, 'exact', configs_enumerated=total)


def profile_labels(g: GraphCollection, k: int,
                   z1: Optional[LabelAssignment] = None,
                   budget: int = DEFAULT_BUDGET
                   ) -> Union[LabelAssignment, LabelPath]:
    """Labeling maximizing the complete likelihood at the MLE parameters.

    Without ``z1`` the multi-layer model is used and a
    :class:`LabelAssignment` is returned; with ``z1`` the dynamic model is
    used and the returned :class:`LabelPath` starts with ``z1``. Ties go to
    the lexicographically smallest configuration.

    :raises BudgetExceeded: If the enumeration exceeds ``budget``"""
    if z1 is None:
        total = _check_budget(k, g.n, budget, "profile labels are only "
                                              "available at tiny n")
        index, _ = _stream_argmax(_enumerate(k, g.n, total,
                                             _ml_batch(g, k, _ml_profile)))
        return LabelAssignment(_configurations(k, g.n, index, index + 1)[0], k)
    _check_z1(g, z1, k)
    free = g.n * (g.T - 1)
    total = _check_budget(k, free, budget, "reduce n or T")
    index, _ = _stream_argmax(_enumerate(k, free, total,
                                         _dyn_batch(g, z1, k, _dyn_profile)))
    rest = _configurations(k, free, index, index + 1)[0].reshape(g.T - 1, g.n)
    return LabelPath(np.vstack([z1.labels[None, :], rest]), k)


def c_ml(k: int, T: int) -> float:  # noqa: N803
    """Constant of the multi-layer likelihood/KT sandwich, T k (k+1) + 1."""
    return T * k * (k + 1) + 1.0


def c_dyn(k: int, T: int) -> float:  # noqa: N803
    """Constant of the dynamic sandwich, k/(3T) [k(k-1) + 2] + T k(k-1) + 2k."""
    return k / (3.0 * T) * (k * (k - 1) + 2) + T * k * (k - 1) + 2.0 * k


def ml_gap_bound(k: int, n: int, T: int) -> float:  # noqa: N803
    return (T * k * (k + 1) + k - 1) / 2.0 * math.log(n) + c_ml(k, T)


def dyn_gap_bound(k: int, n: int, T: int) -> float:  # noqa: N803
    return k / 2.0 * math.log(n * n * T) \
        + k * (k - 1) / 2.0 * math.log(n * T) \
        + T * k * (k - 1) / 2.0 * math.log(n) + c_dyn(k, T)


class Prop1Gap(NamedTuple):
    gap: float
    bound: float


def prop1_gap(z: Union[LabelAssignment, LabelPath], g: GraphCollection,
              k: int) -> Prop1Gap:
    """Gap between the sup-likelihood and the complete KT mass of one
    labeling, with its upper bound. Valid instances satisfy
    ``0 <= gap <= bound``."""
    z = _with_order(z, k)
    sup = log_profile_likelihood(z, g)
    if isinstance(z, LabelPath):
        return Prop1Gap(sup - log_complete_kt_dyn(z, g, k),
                        dyn_gap_bound(k, g.n, g.T))
    return Prop1Gap(sup - log_complete_kt_ml(z, g, k),
                    ml_gap_bound(k, g.n, g.T))


class ExactEngine(EvidenceEngine):
    """Evidence by full enumeration of the labelings."""

    name = 'exact'

    def __init__(self, budget: int = DEFAULT_BUDGET):
        super(ExactEngine, self).__init__()
        self.budget = int(budget)

    def supports(self, g: GraphCollection, k: int) -> bool:
        return k <= g.n and k ** g.n <= self.budget

    def supports_dyn(self, g: GraphCollection, k: int) -> bool:
        return k ** (g.n * (g.T - 1)) <= self.budget

    def log_evidence(self, g: GraphCollection, k: int,
                     seed: int = 0) -> LogEvidence:
        return log_kt_ml_exact(g, k, budget=self.budget)

    def log_evidence_dyn(self, g: GraphCollection, z1: LabelAssignment,
                         k: int) -> LogEvidence:
        return log_kt_dyn_exact(g, z1, k, budget=self.budget)

    def __repr__(self):
        return "ExactEngine(budget=%d)" % self.budget

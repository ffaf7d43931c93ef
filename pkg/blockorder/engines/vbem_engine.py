"""Mean-field variational Bayes EM for the multi-layer SBM.

The variational family is q(z) q(pi) q(P) with q(z_i) categorical (tau),
q(pi) = Dirichlet(gamma) and q(P_ab^t) = Beta(eta, zeta). Every update is
an exact coordinate maximization of the ELBO: q(pi), then q(P), then one
tau row at a time in node order. The ELBO therefore never decreases and
is a lower bound on log KT_k(A).
"""
import logging
import math

import numpy as np
from scipy.special import betaln, digamma, gammaln, softmax, xlogy

from blockorder.engines.engine import (EngineException, EvidenceEngine,
                                       LogEvidence)
from blockorder.model import (GraphCollection, LabelAssignment, one_hot,
                              split_edge_matrix)
from blockorder.spectral import SpectralConfig, spectral_cluster
from blockorder.utils import make_rng, stream_seed, time_execution

TAU_FLOOR = 1e-12
MONOTONE_SLACK = 1e-9
SPECTRAL_WEIGHT = 0.9
LOG_BETA_HALF = betaln(0.5, 0.5)


class VbemException(EngineException):
    pass


class VbemConfig:
    """Settings of the variational fit."""

    def __init__(self, max_iters: int = 500, tol: float = 1e-7,
                 restarts: int = 5, init: str = 'spectral'):
        """
        :param max_iters: Iteration cap per restart
        :param tol: Relative ELBO change that ends a restart
        :param restarts: Number of initializations, best ELBO wins
        :param init: "spectral" (first restart spectral, others random)
        or "random"
        """
        if max_iters < 1 or restarts < 1 or not tol > 0:
            raise VbemException("max_iters, restarts and tol must be positive")
        if init not in ('spectral', 'random'):
            raise VbemException("Unknown initialization '%s'" % init)
        self.max_iters = int(max_iters)
        self.tol = float(tol)
        self.restarts = int(restarts)
        self.init = init

    def to_dict(self) -> dict:
        return {"max_iters": self.max_iters, "tol": self.tol,
                "restarts": self.restarts, "init": self.init}

    def __repr__(self):
        return "VbemConfig(%s)" % ", ".join(
            "%s=%r" % item for item in sorted(self.to_dict().items()))


class VariationalState:
    """Variational parameters of one fit. ``eta`` and ``zeta`` are stored as
    full symmetric (T, k, k) arrays."""

    def __init__(self, tau, gamma, eta, zeta, elbo=float('nan'),
                 iterations=0, history=None):
        self.tau = np.asarray(tau, dtype=np.float64)
        self.gamma = np.asarray(gamma, dtype=np.float64)
        self.eta = np.asarray(eta, dtype=np.float64)
        self.zeta = np.asarray(zeta, dtype=np.float64)
        self.elbo = float(elbo)
        self.iterations = int(iterations)
        self.history = list(history or [])

    @property
    def k(self) -> int:
        return int(self.tau.shape[1])

    def labels(self) -> LabelAssignment:
        """Most probable class of every node."""
        return LabelAssignment(np.argmax(self.tau, axis=1), self.k)

    def permuted(self, perm) -> 'VariationalState':
        """Same state with cluster ``a`` renamed ``perm[a]``."""
        inverse = np.argsort(np.asarray(perm))
        return VariationalState(self.tau[:, inverse], self.gamma[inverse],
                                self.eta[:, inverse][:, :, inverse],
                                self.zeta[:, inverse][:, :, inverse],
                                self.elbo, self.iterations, self.history)

    def __repr__(self):
        return "VariationalState(k=%d, elbo=%.6f, iterations=%d)" % (
            self.k, self.elbo, self.iterations)


def _symmetric(upper: np.ndarray) -> np.ndarray:
    return upper + np.triu(upper, 1).transpose(0, 2, 1)


def expected_block_stats(tau: np.ndarray, layers: np.ndarray):
    """Expected edge and pair counts per block pair under tau, as
    upper-triangular (T, k, k) arrays."""
    full = np.einsum('ia,tib->tab', tau, np.einsum('tij,jb->tib', layers, tau))
    edges, _ = split_edge_matrix(full)
    sizes = tau.sum(axis=0)
    ordered = np.outer(sizes, sizes) - tau.T @ tau
    pairs, _ = split_edge_matrix(np.broadcast_to(ordered, full.shape).copy())
    return edges, pairs


def _update_globals(tau: np.ndarray, layers: np.ndarray):
    gamma = 0.5 + tau.sum(axis=0)
    edges, pairs = expected_block_stats(tau, layers)
    eta = 0.5 + _symmetric(edges)
    zeta = 0.5 + _symmetric(np.maximum(pairs - edges, 0.0))
    return gamma, eta, zeta


def _sweep_tau(tau: np.ndarray, gamma: np.ndarray, eta: np.ndarray,
               zeta: np.ndarray, layers: np.ndarray):
    # In-place sequential update of every tau row given all the others
    log_pi = digamma(gamma) - digamma(gamma.sum())
    total = digamma(eta + zeta)
    log_edge = digamma(eta) - total
    log_gap = digamma(zeta) - total
    contrast = log_edge - log_gap
    gap_sum = log_gap.sum(axis=0)
    neighbours = np.einsum('tij,jb->tib', layers, tau)
    sizes = tau.sum(axis=0)
    for i in range(tau.shape[0]):
        logits = log_pi \
            + np.einsum('tb,tba->a', neighbours[:, i], contrast) \
            + (sizes - tau[i]) @ gap_sum
        row = np.maximum(softmax(logits), TAU_FLOOR)
        row /= row.sum()
        delta = row - tau[i]
        neighbours += layers[:, :, i][:, :, None] * delta
        sizes += delta
        tau[i] = row


def _elbo_terms(tau, gamma, eta, zeta, layers) -> float:
    k = tau.shape[1]
    sizes = tau.sum(axis=0)
    log_pi = digamma(gamma) - digamma(gamma.sum())
    pi_part = gammaln(k / 2.0) - k * gammaln(0.5) - gammaln(gamma.sum()) \
        + gammaln(gamma).sum() + ((sizes + 0.5 - gamma) * log_pi).sum()
    edges, pairs = expected_block_stats(tau, layers)
    total = digamma(eta + zeta)
    log_edge = digamma(eta) - total
    log_gap = digamma(zeta) - total
    terms = betaln(eta, zeta) - LOG_BETA_HALF \
        + (edges + 0.5 - eta) * log_edge \
        + (pairs - edges + 0.5 - zeta) * log_gap
    rows, cols = np.triu_indices(k)
    entropy = -xlogy(tau, tau).sum()
    return float(pi_part + terms[:, rows, cols].sum() + entropy)


def elbo(state: VariationalState, g: GraphCollection, k: int) -> float:
    """Evidence lower bound E_q[log p(A, z, pi, P)] - E_q[log q] of a state."""
    if state.k != k:
        raise VbemException("State has %d clusters, expected %d" % (state.k, k))
    return _elbo_terms(state.tau, state.gamma, state.eta, state.zeta,
                       g.layers.astype(np.float64))


def _initial_tau(g: GraphCollection, k: int, cfg: VbemConfig, restart: int,
                 seed: int, spectral_cfg: SpectralConfig) -> np.ndarray:
    if restart == 0 and cfg.init == 'spectral':
        hard = one_hot(spectral_cluster(g, k, spectral_cfg,
                                        stream_seed(seed, restart)).labels, k)
        return SPECTRAL_WEIGHT * hard + (1.0 - SPECTRAL_WEIGHT) / k
    return make_rng(seed, restart).dirichlet(np.ones(k), size=g.n)


def _coordinate_ascent(tau: np.ndarray, layers: np.ndarray,
                       cfg: VbemConfig) -> VariationalState:
    log = logging.getLogger('vbem')
    history = []
    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iters + 1):
        gamma, eta, zeta = _update_globals(tau, layers)
        _sweep_tau(tau, gamma, eta, zeta, layers)
        value = _elbo_terms(tau, gamma, eta, zeta, layers)
        if not math.isfinite(value):
            raise VbemException("ELBO is not finite at iteration %d" % iteration)
        if history and value < history[-1] - MONOTONE_SLACK:
            log.warning("ELBO decreased by %.3g at iteration %d",
                        history[-1] - value, iteration)
        history.append(value)
        if len(history) > 1 and \
                abs(value - history[-2]) <= cfg.tol * abs(history[-2]):
            converged = True
            break
    gamma, eta, zeta = _update_globals(tau, layers)
    value = _elbo_terms(tau, gamma, eta, zeta, layers)
    if not math.isfinite(value):
        raise VbemException("ELBO is not finite at iteration %d" % iteration)
    history.append(value)
    if not converged:
        log.debug("VBEM stopped at the iteration cap (%d)", cfg.max_iters)
    return VariationalState(tau, gamma, eta, zeta, value, iteration, history)


@time_execution
def vbem_fit(g: GraphCollection, k: int, cfg: VbemConfig = None,
             seed: int = 0, spectral_cfg: SpectralConfig = None):
    """Fits the variational posterior of order ``k`` from several starts.

    :return: (best VariationalState, LogEvidence with the best ELBO)
    :raises VbemException: If k > n or the ELBO becomes NaN"""
    cfg = cfg or VbemConfig()
    if not 1 <= k <= g.n:
        raise VbemException("k must lie in 1..n (k=%d, n=%d)" % (k, g.n))
    layers = g.layers.astype(np.float64)
    restarts = 1 if k == 1 else cfg.restarts
    best = None
    for restart in range(restarts):
        tau = _initial_tau(g, k, cfg, restart, seed, spectral_cfg)
        state = _coordinate_ascent(tau, layers, cfg)
        logging.debug("VBEM k=%d restart %d: ELBO %.6f after %d iterations",
                      k, restart, state.elbo, state.iterations)
        if best is None or state.elbo > best.elbo:
            best = state
    return best, LogEvidence(best.elbo, k, 'vbem', iters=best.iterations,
                             restarts_used=restarts)


class VbemEngine(EvidenceEngine):
    """Evidence approximated by the best ELBO over restarts."""

    name = 'vbem'

    def __init__(self, cfg: VbemConfig = None,
                 spectral_cfg: SpectralConfig = None):
        super(VbemEngine, self).__init__()
        self.cfg = cfg or VbemConfig()
        self.spectral_cfg = spectral_cfg or SpectralConfig()

    def fit(self, g: GraphCollection, k: int, seed: int = 0):
        return vbem_fit(g, k, self.cfg, seed, self.spectral_cfg)

    def log_evidence(self, g: GraphCollection, k: int,
                     seed: int = 0) -> LogEvidence:
        return self.fit(g, k, seed)[1]

    def __repr__(self):
        return "VbemEngine(%r)" % self.cfg

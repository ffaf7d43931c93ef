"""Penalized KT order selection: sweep k, subtract the penalty from the log
evidence and keep the smallest maximizer. Also the layer-wise baseline
that selects on every layer separately and keeps the largest order."""
import logging
import math
from typing import List, NamedTuple, Optional

import numpy as np
from tqdm import tqdm

from blockorder.engines import (EngineException, ExactEngine, VbemConfig,
                                VbemEngine)
from blockorder.engines.exact_engine import (DEFAULT_BUDGET, log_kt_dyn_exact,
                                             profile_labels)
from blockorder.model import GraphCollection, LabelAssignment, ModelException
from blockorder.penalty import PenaltyConfig, pen_dyn, pen_ml
from blockorder.utils import stream_seed

K_MAX_DEFAULT = 15
SELECTION_ENGINES = ('auto', 'exact', 'vbem')
CSV_HEADER = ['schema_version', 'k', 'log_evidence', 'penalty', 'score',
              'engine']
SCHEMA_VERSION = 1


class SelectionException(Exception):
    """Raised when the k sweep cannot be completed. ``report`` holds the
    orders evaluated before the failure (or None)."""

    def __init__(self, message: str, report: 'SelectionReport' = None):
        super(SelectionException, self).__init__(message)
        self.report = report


class KScore(NamedTuple):
    k: int
    log_evidence: Optional[float]
    penalty: float
    score: float
    engine: str


class SelectionReport:
    """Scores of every candidate order and the selected one."""

    def __init__(self, per_k: List[KScore], k_max: int, model: str,
                 epsilon: float, seed: int, labels: Optional[list] = None):
        self.per_k = list(per_k)
        self.k_max = int(k_max)
        self.model = model
        self.epsilon = float(epsilon)
        self.seed = int(seed)
        self.labels = labels
        self.k_hat = smallest_argmax(self.per_k)

    @property
    def complete(self) -> bool:
        return [s.k for s in self.per_k] == list(range(1, self.k_max + 1))

    def to_dict(self) -> dict:
        return {
            "model": self.model, "k_hat": self.k_hat, "k_max": self.k_max,
            "epsilon": self.epsilon, "seed": self.seed, "labels": self.labels,
            "per_k": [{"k": s.k, "log_evidence": s.log_evidence,
                       "penalty": s.penalty,
                       "score": s.score if math.isfinite(s.score) else None,
                       "engine": s.engine} for s in self.per_k]}

    def csv_rows(self) -> List[list]:
        """Header followed by one row per candidate order."""
        rows = [list(CSV_HEADER)]
        for s in self.per_k:
            rows.append([SCHEMA_VERSION, s.k,
                         '' if s.log_evidence is None else repr(s.log_evidence),
                         repr(s.penalty),
                         repr(s.score) if math.isfinite(s.score) else '',
                         s.engine])
        return rows

    def __repr__(self):
        return "SelectionReport(model=%s, k_hat=%s, k_max=%d)" % (
            self.model, self.k_hat, self.k_max)


def smallest_argmax(scores: List[KScore]) -> Optional[int]:
    """Smallest k attaining the maximum finite score, None without one."""
    best_k, best = None, -math.inf
    for s in scores:
        if s.score > best:
            best_k, best = s.k, s.score
    return best_k


def _resolve_k_max(g: GraphCollection, k_max: Optional[int]) -> int:
    if k_max is None:
        return min(g.n, K_MAX_DEFAULT)
    if not 1 <= k_max <= g.n:
        raise SelectionException("k_max must lie in 1..n (k_max=%d, n=%d)"
                                 % (k_max, g.n))
    return int(k_max)


def _pick_engine(name: str, g: GraphCollection, k: int, exact: ExactEngine,
                 vbem: VbemEngine):
    if name == 'auto':
        return exact if exact.supports(g, k) else vbem
    elif name == 'exact':
        return exact
    elif name == 'vbem':
        return vbem
    raise SelectionException("Invalid engine '%s' (choose from %s)"
                             % (name, ", ".join(SELECTION_ENGINES)))


def select_k_ml(g: GraphCollection, k_max: Optional[int] = None,
                cfg: PenaltyConfig = None, engine: str = 'auto',
                seed: int = 0, vbem_cfg: VbemConfig = None,
                budget: int = DEFAULT_BUDGET,
                progress: bool = False) -> SelectionReport:
    """Penalized KT estimate of the order of a multi-layer SBM.

    :param g: Observed graphs
    :param k_max: Largest candidate order (default min(n, 15))
    :param cfg: Penalty settings
    :param engine: "exact", "vbem", or "auto" (exact while k^n <= budget)
    :param seed: Seed of the vbem restarts (order k uses a derived stream)
    :param vbem_cfg: Settings of the vbem engine
    :param budget: Enumeration budget of the exact engine
    :param progress: Show a progress bar over k
    :return: The selection report, labels of the selected order included
    :raises SelectionException: If an order cannot be evaluated"""
    cfg = cfg or PenaltyConfig()
    k_max = _resolve_k_max(g, k_max)
    exact, vbem = ExactEngine(budget), VbemEngine(vbem_cfg)
    scores, states = [], {}
    for k in tqdm(range(1, k_max + 1), desc="Orders", unit="k",
                  disable=not progress, leave=False):
        chosen = _pick_engine(engine, g, k, exact, vbem)
        try:
            if chosen is vbem:
                states[k], evidence = vbem.fit(g, k, stream_seed(seed, k))
            else:
                evidence = chosen.log_evidence(g, k)
        except (EngineException, ModelException) as err:
            report = SelectionReport(scores, k_max, 'ml', cfg.epsilon, seed)
            raise SelectionException("Evidence of order k=%d failed: %s"
                                     % (k, err), report) from err
        pen = pen_ml(k, g.n, g.T, cfg)
        scores.append(KScore(k, evidence.value, pen, evidence.value - pen,
                             evidence.engine))
        logging.debug("k=%d: log evidence %.6f, penalty %.6f (%s)",
                      k, evidence.value, pen, evidence.engine)
    report = SelectionReport(scores, k_max, 'ml', cfg.epsilon, seed)
    if report.k_hat in states:
        report.labels = states[report.k_hat].labels().to_one_based()
    elif exact.supports(g, report.k_hat):
        report.labels = profile_labels(g, report.k_hat,
                                       budget=budget).to_one_based()
    logging.info("Selected k=%d for n=%d, T=%d", report.k_hat, g.n, g.T)
    return report


def compact_labels(z1: LabelAssignment) -> LabelAssignment:
    """Renames the classes used by ``z1`` to 0..m-1, keeping their order."""
    _, inverse = np.unique(z1.labels, return_inverse=True)
    return LabelAssignment(inverse)


def select_k_dyn(g: GraphCollection, z1: LabelAssignment,
                 k_max: Optional[int] = None, cfg: PenaltyConfig = None,
                 seed: int = 0,
                 budget: int = DEFAULT_BUDGET) -> SelectionReport:
    """Penalized KT estimate of the order of a dynamic SBM given the labels
    at the first time step, with the exact engine only.

    Orders smaller than the number of classes used by ``z1`` cannot explain
    it; they are reported without evidence and score -inf.

    :raises SelectionException: If the enumeration budget is exceeded"""
    cfg = cfg or PenaltyConfig()
    k_max = _resolve_k_max(g, k_max)
    if z1.n != g.n:
        raise SelectionException("Initial labeling has %d nodes but the "
                                 "graphs have %d" % (z1.n, g.n))
    z1 = compact_labels(z1)
    used = z1.k
    scores = []
    for k in range(1, k_max + 1):
        pen = pen_dyn(k, g.n, g.T, cfg)
        if k < used:
            scores.append(KScore(k, None, pen, -math.inf, 'exact'))
            continue
        try:
            evidence = log_kt_dyn_exact(g, LabelAssignment(z1.labels, k), k,
                                        budget)
        except EngineException as err:
            report = SelectionReport(scores, k_max, 'dyn', cfg.epsilon, seed)
            raise SelectionException("Evidence of order k=%d failed: %s; "
                                     "use a smaller n or T" % (k, err),
                                     report) from err
        scores.append(KScore(k, evidence.value, pen, evidence.value - pen,
                             'exact'))
    report = SelectionReport(scores, k_max, 'dyn', cfg.epsilon, seed)
    if report.k_hat is None:
        raise SelectionException("The initial labeling uses %d classes, more "
                                 "than k_max=%d" % (used, k_max), report)
    report.labels = profile_labels(g, report.k_hat,
                                   LabelAssignment(z1.labels, report.k_hat),
                                   budget).to_one_based()
    logging.info("Selected k=%d for the dynamic model (n=%d, T=%d)",
                 report.k_hat, g.n, g.T)
    return report


def layerwise_selections(g: GraphCollection, k_max: Optional[int] = None,
                         cfg: PenaltyConfig = None, engine: str = 'auto',
                         seed: int = 0, vbem_cfg: VbemConfig = None,
                         budget: int = DEFAULT_BUDGET) -> List[int]:
    """Single-layer penalized KT selection on every layer."""
    return [select_k_ml(g.layer(t), k_max, cfg, engine, stream_seed(seed, t),
                        vbem_cfg, budget).k_hat for t in range(g.T)]


def layerwise_max_baseline(g: GraphCollection, k_max: Optional[int] = None,
                           cfg: PenaltyConfig = None, engine: str = 'auto',
                           seed: int = 0, vbem_cfg: VbemConfig = None,
                           budget: int = DEFAULT_BUDGET) -> int:
    """Largest of the per-layer selections."""
    return max(layerwise_selections(g, k_max, cfg, engine, seed, vbem_cfg,
                                    budget))

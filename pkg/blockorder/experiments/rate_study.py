"""Convergence-rate study: accuracy over the number of layers T with the
per-layer size n shrunk so that either n*T or n^2*T stays constant."""
import math
from typing import List

from blockorder.experiments.experiment_base import (DESIGNS, Experiment,
                                                    ExperimentException,
                                                    GridPoint)
from blockorder.sampler import Scenario, scenario_rate_study

MIN_NODES = 2


def matched_n(base_n: int, T: int, design: str) -> int:  # noqa: N803
    """Nodes per layer at ``T`` layers for a design whose T=1 size is
    ``base_n``: n = base_n / T keeps n*T fixed, n = base_n / sqrt(T) keeps
    n^2*T fixed."""
    if design == 'nT':
        n = base_n / T
    elif design == 'n2T':
        n = base_n / math.sqrt(T)
    else:
        raise ExperimentException("Invalid design '%s' (choose from %s)"
                                  % (design, ", ".join(DESIGNS)))
    return max(MIN_NODES, int(round(n)))


def rate_grid(base_n: List[int], t_grid: List[int],
              design: str) -> List[GridPoint]:
    """Grid points of one design, ordered by T then base size."""
    return [GridPoint(matched_n(b, T, design), T, None, design, b)
            for T in t_grid for b in base_n]  # noqa: N806


class RateStudyExperiment(Experiment):
    """Two assortative communities, layers T in {1, 4, 9, 16} by default."""
    __version__ = '0.1.0'
    name = 'rate_study'

    def grid(self) -> List[GridPoint]:
        points = []
        for design in self.cfg.designs:
            points.extend(rate_grid(self.cfg.base_n_grid, self.cfg.t_grid,
                                    design))
        return points

    def simulate(self, point: GridPoint, seed: int) -> Scenario:
        return scenario_rate_study(point.n, point.T, seed)

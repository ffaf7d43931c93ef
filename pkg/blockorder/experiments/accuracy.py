"""Accuracy-versus-size experiments: the six-class mixed scenario, the
sparse three-class table and user-supplied parameters."""
from typing import List

import numpy as np

from blockorder.experiments.experiment_base import (Experiment,
                                                    ExperimentException,
                                                    GridPoint)
from blockorder.model import DynParams, ModelException, MlParams
from blockorder.sampler import (Scenario, sample_dynsbm, sample_mlsbm,
                                scenario_fig1, scenario_sparse_table1)


class Fig1Experiment(Experiment):
    """Six communities over five layers, half assortative and half
    disassortative, with connectivity redrawn in every replication."""
    __version__ = '0.1.0'
    name = 'fig1'

    def grid(self) -> List[GridPoint]:
        return [GridPoint(n, self.cfg.T) for n in self.cfg.n_grid]

    def simulate(self, point: GridPoint, seed: int) -> Scenario:
        return scenario_fig1(point.n, seed, point.T, self.cfg.iid_layers)


class SparseTableExperiment(Experiment):
    """Three communities with connectivity rho * S^t over a grid of rho."""
    __version__ = '0.1.0'
    name = 'sparse_table1'

    def grid(self) -> List[GridPoint]:
        return [GridPoint(n, self.cfg.T, rho) for n in self.cfg.n_grid
                for rho in self.cfg.rho_grid]

    def simulate(self, point: GridPoint, seed: int) -> Scenario:
        return scenario_sparse_table1(point.rho, seed, point.n, point.T)


def params_from_config(data: dict):
    """Multi-layer or dynamic parameters from a ``params`` config block.

    :raises ExperimentException: If the block does not describe valid
    parameters"""
    try:
        if data.get('model') == 'ml':
            return MlParams(data['pi'], data['P'])
        elif data.get('model') == 'dyn':
            return DynParams(data['trans'], data['P'], data.get('alpha'))
    except KeyError as err:
        raise ExperimentException("Parameter block is missing %s"
                                  % err) from None
    except ModelException as err:
        raise ExperimentException("Invalid parameters: %s" % err) from None
    raise ExperimentException("Parameter model must be 'ml' or 'dyn'")


class CustomExperiment(Experiment):
    """Fixed user-supplied multi-layer or dynamic parameters."""
    __version__ = '0.1.0'
    name = 'custom'

    def __init__(self, cfg):
        super(CustomExperiment, self).__init__(cfg)
        self.params = params_from_config(cfg.params)
        if isinstance(self.params, MlParams) and \
                np.count_nonzero(self.params.pi) < self.params.k:
            self._log.warning("Some classes have zero probability; the true "
                              "order is smaller than k=%d", self.params.k)

    def grid(self) -> List[GridPoint]:
        return [GridPoint(n, self.params.T) for n in self.cfg.n_grid]

    def simulate(self, point: GridPoint, seed: int) -> Scenario:
        if isinstance(self.params, DynParams):
            labels, graph = sample_dynsbm(point.n, self.params, seed)
        else:
            labels, graph = sample_mlsbm(point.n, self.params, seed)
        return Scenario(self.params, labels, graph)

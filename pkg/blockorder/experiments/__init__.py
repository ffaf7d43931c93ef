from .experiment_base import (AccuracyRecord, Experiment, ExperimentConfig,
                              ExperimentException, ExperimentResult,
                              GridPoint, run_experiment, write_results)
from .accuracy import CustomExperiment, Fig1Experiment, SparseTableExperiment
from .rate_study import RateStudyExperiment, rate_grid
from .concentration import concentration_check

__all__ = ['experiment_base', 'accuracy', 'rate_study', 'concentration',
           'Experiment', 'ExperimentConfig', 'ExperimentException',
           'ExperimentResult', 'AccuracyRecord', 'GridPoint',
           'run_experiment', 'write_results', 'make_experiment', 'rate_grid',
           'concentration_check']


def make_experiment(cfg: ExperimentConfig) -> Experiment:
    """Instantiates the experiment class of the configured scenario."""
    if cfg.scenario == 'fig1':
        return Fig1Experiment(cfg)
    elif cfg.scenario == 'sparse_table1':
        return SparseTableExperiment(cfg)
    elif cfg.scenario == 'rate_study':
        return RateStudyExperiment(cfg)
    elif cfg.scenario == 'custom':
        return CustomExperiment(cfg)
    raise ExperimentException("Invalid scenario: %s" % cfg.scenario)

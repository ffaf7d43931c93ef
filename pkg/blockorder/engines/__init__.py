from .engine import BudgetExceeded, EngineException, EvidenceEngine, \
    LogEvidence
from .exact_engine import ExactEngine
from .vbem_engine import VbemConfig, VbemEngine, VbemException

__all__ = ['engine', 'exact_engine', 'vbem_engine',
           'EvidenceEngine', 'LogEvidence', 'EngineException',
           'BudgetExceeded', 'ExactEngine', 'VbemEngine', 'VbemConfig',
           'VbemException', 'ENGINES', 'make_engine']

ENGINES = ('exact', 'vbem')


def make_engine(name: str, budget: int = None, vbem_cfg: VbemConfig = None,
                spectral_cfg=None) -> EvidenceEngine:
    """Instantiates the evidence engine called ``name``.

    :param name: "exact" or "vbem"
    :param budget: Enumeration budget of the exact engine
    :param vbem_cfg: Settings of the vbem engine
    :param spectral_cfg: Spectral initialization settings of the vbem engine
    :raises EngineException: For an unknown engine name"""
    if name == 'exact':
        return ExactEngine() if budget is None else ExactEngine(budget)
    elif name == 'vbem':
        return VbemEngine(vbem_cfg, spectral_cfg)
    raise EngineException("Invalid engine '%s' (choose from %s)"
                          % (name, ", ".join(ENGINES)))

import logging
from abc import ABC, abstractmethod

from blockorder.model import GraphCollection


class EngineException(Exception):
    pass


class BudgetExceeded(EngineException):
    """Raised when exact enumeration would need more configurations than
    the configured budget allows."""

    def __init__(self, required: int, budget: int, hint: str = ''):
        self.required = required
        self.budget = budget
        message = "Exact enumeration needs %d configurations but the budget " \
                  "is %d" % (required, budget)
        if hint:
            message += "; " + hint
        super(BudgetExceeded, self).__init__(message)


class LogEvidence:
    """Natural log of the KT evidence (or its variational lower bound)
    for one model order."""

    def __init__(self, value: float, k: int, engine: str, **diagnostics):
        """
        :param value: log KT_k(A), or the best ELBO for the vbem engine
        :param k: Model order evaluated
        :param engine: Engine tag ("exact" | "vbem")
        :param diagnostics: Engine-specific details (iterations, configs, ...)
        """
        self.value = float(value)
        self.k = int(k)
        self.engine = engine
        self.diagnostics = diagnostics

    def to_dict(self) -> dict:
        data = {"k": self.k, "log_evidence": self.value, "engine": self.engine}
        data.update(self.diagnostics)
        return data

    def __repr__(self):
        return "LogEvidence(k=%d, value=%.6f, engine=%s)" % (
            self.k, self.value, self.engine)

    def __eq__(self, other):
        return isinstance(other, LogEvidence) and self.k == other.k and \
            self.value == other.value and self.engine == other.engine


class EvidenceEngine(ABC):
    """Base class for all evidence engines."""

    name = ''

    def __init__(self):
        self._log = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def log_evidence(self, g: GraphCollection, k: int,
                     seed: int = 0) -> LogEvidence:
        """Log evidence of order ``k`` for the multi-layer model."""
        pass

    def supports(self, g: GraphCollection, k: int) -> bool:
        """If this engine can evaluate order ``k`` on ``g``."""
        return k <= g.n

    def __repr__(self):
        return "%s()" % self.__class__.__name__

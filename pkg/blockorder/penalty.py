"""Order penalties of the penalized Krichevsky-Trofimov estimators.

Both penalties are sums over the nested orders 1..k-1 of half the number
of free parameters added at each step, times the log of the number of
observations informing them, plus ``(1 + epsilon) log n``.
"""
import logging
import math

EPSILON_DEFAULT = 1e-3
EPSILON_RANGE = (1e-8, 0.1)


class PenaltyConfig:
    """Penalty settings. ``epsilon`` must be positive; results are known to
    be insensitive to it over [1e-8, 0.1]."""

    def __init__(self, epsilon: float = EPSILON_DEFAULT):
        epsilon = float(epsilon)
        if not epsilon > 0.0 or math.isinf(epsilon):
            raise ValueError("epsilon must be a positive number, got %r"
                             % epsilon)
        if not EPSILON_RANGE[0] <= epsilon <= EPSILON_RANGE[1]:
            logging.getLogger('PenaltyConfig').warning(
                "epsilon=%g is outside the tested range [%g, %g]",
                epsilon, EPSILON_RANGE[0], EPSILON_RANGE[1])
        self.epsilon = epsilon

    def __eq__(self, other):
        return isinstance(other, PenaltyConfig) and \
            self.epsilon == other.epsilon

    def __repr__(self):
        return "PenaltyConfig(epsilon=%g)" % self.epsilon


def _check_args(k: int, n: int, T: int):  # noqa: N803
    if k < 1 or n < 1 or T < 1:
        raise ValueError("k, n and T must be positive (got k=%d, n=%d, T=%d)"
                         % (k, n, T))


def pen_ml(k: int, n: int, T: int, cfg: PenaltyConfig = None) -> float:  # noqa: N803
    """Multi-layer penalty:
    sum_{i<k} [ (T i (i+1) + i - 1) / 2 + 1 + eps ] log n.

    >>> pen_ml(1, 100, 5)
    0.0
    """
    _check_args(k, n, T)
    eps = (cfg or PenaltyConfig()).epsilon
    log_n = math.log(n)
    total = 0.0
    for i in range(1, k):
        total += ((T * i * (i + 1) + i - 1) / 2.0 + 1.0 + eps) * log_n
    return total


def pen_dyn(k: int, n: int, T: int, cfg: PenaltyConfig = None) -> float:  # noqa: N803
    """Dynamic penalty:
    sum_{i<k} [ i/2 log(n^2 T) + i(i-1)/2 log(nT) + (T i(i-1)/2 + 1 + eps) log n ].
    """
    _check_args(k, n, T)
    eps = (cfg or PenaltyConfig()).epsilon
    log_n = math.log(n)
    log_n2t = math.log(n * n * T)
    log_nt = math.log(n * T)
    total = 0.0
    for i in range(1, k):
        total += (i / 2.0) * log_n2t \
            + (i * (i - 1) / 2.0) * log_nt \
            + (T * i * (i - 1) / 2.0 + 1.0 + eps) * log_n
    return total


def penalty(model: str, k: int, n: int, T: int,  # noqa: N803
            cfg: PenaltyConfig = None) -> float:
    """Dispatches to :func:`pen_ml` (``model='ml'``) or :func:`pen_dyn`."""
    if model == 'ml':
        return pen_ml(k, n, T, cfg)
    elif model == 'dyn':
        return pen_dyn(k, n, T, cfg)
    raise ValueError("Unknown model '%s' (expected 'ml' or 'dyn')" % model)

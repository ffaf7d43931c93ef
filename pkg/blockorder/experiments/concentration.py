"""Monte-Carlo check that normalized block edge counts concentrate around
their mean for the true labeling."""
import logging
from typing import NamedTuple, Union

import numpy as np
from tqdm import tqdm

from blockorder.model import MlParams, block_counts, confusion_matrix
from blockorder.sampler import SamplerException, sample_mlsbm
from blockorder.utils import stream_seed


class ConcentrationResult(NamedTuple):
    exceedance: np.ndarray
    replications: int
    xi: float

    def to_dict(self) -> dict:
        return {"exceedance": self.exceedance.tolist(),
                "replications": self.replications, "xi": self.xi}


def concentration_check(params: MlParams, n: int, replications: int,
                        xi: float, rho: Union[float, list] = 1.0,
                        seed: int = 0,
                        progress: bool = False) -> ConcentrationResult:
    """Fraction of replications where |õ_ab / (rho n^2) - [Q S Qᵀ]_ab| > xi,
    per layer and block pair, with ``S = P / rho`` and ``Q`` the confusion
    matrix of the true labeling with itself.

    :param params: Multi-layer parameters P = rho S
    :param n: Number of nodes
    :param replications: Number of simulated collections
    :param xi: Deviation threshold
    :param rho: Sparsity factor, scalar or one per layer
    :param seed: Master seed, replication r uses a derived stream
    :param progress: Show a progress bar
    :return: Exceedance rates of shape (T, k, k)"""
    if replications < 1 or n < 1 or not xi > 0:
        raise SamplerException("replications, n and xi must be positive")
    rho = np.broadcast_to(np.asarray(rho, dtype=np.float64),
                          (params.T,)).copy()
    if not (rho > 0).all():
        raise SamplerException("rho must be positive")
    base = params.P / rho[:, None, None]
    exceed = np.zeros(params.P.shape, dtype=np.int64)
    for r in tqdm(range(replications), desc="Concentration", unit="rep",
                  disable=not progress, leave=False):
        labels, graph = sample_mlsbm(n, params, stream_seed(seed, r))
        q = confusion_matrix(labels, labels).q
        expected = np.einsum('ab,tbc,dc->tad', q, base, q)
        observed = block_counts(labels, graph).o_tilde / (rho[:, None, None]
                                                          * n * n)
        exceed += np.abs(observed - expected) > xi
    rates = exceed / float(replications)
    logging.debug("Largest exceedance rate at n=%d, xi=%g: %.4f",
                  n, xi, rates.max())
    return ConcentrationResult(rates, replications, float(xi))

import numpy as np
import pytest


def test_stationary_distribution():
    from blockorder.sampler import stationary_distribution

    assert stationary_distribution([[0.9, 0.1], [0.1, 0.9]]) == \
        pytest.approx([0.5, 0.5], abs=1e-10)
    trans = np.array([[0.7, 0.3], [0.4, 0.6]])
    alpha = stationary_distribution(trans)
    assert alpha == pytest.approx([4 / 7, 3 / 7], abs=1e-10)
    assert np.abs(alpha @ trans - alpha).max() <= 1e-10
    assert alpha.sum() == pytest.approx(1.0)


def test_stationary_distribution_rejects_bad_chains():
    from blockorder.sampler import SamplerException, stationary_distribution

    with pytest.raises(SamplerException, match='reducible'):
        stationary_distribution([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(SamplerException, match='periodic'):
        stationary_distribution([[0.0, 1.0], [1.0, 0.0]])


def test_sample_mlsbm_degenerate():
    from blockorder.model import MlParams
    from blockorder.sampler import sample_mlsbm

    zeros = MlParams([0.5, 0.5], np.zeros((3, 2, 2)))
    _, g = sample_mlsbm(20, zeros, seed=1)
    assert g.T == 3 and not g.layers.any()

    ones = MlParams([0.5, 0.5], np.ones((2, 2, 2)))
    _, g = sample_mlsbm(20, ones, seed=2)
    assert g.edge_counts().tolist() == [190, 190]


def test_sample_mlsbm_reproducible():
    from blockorder.model import MlParams
    from blockorder.sampler import sample_mlsbm

    params = MlParams([0.3, 0.7], [[0.6, 0.2], [0.2, 0.5]])
    z1, g1 = sample_mlsbm(30, params, seed=99)
    z2, g2 = sample_mlsbm(30, params, seed=99)
    _, g3 = sample_mlsbm(30, params, seed=100)
    assert z1 == z2 and g1 == g2
    assert g1 != g3


def test_sample_mlsbm_edge_frequency():
    from blockorder.model import MlParams, block_counts
    from blockorder.sampler import sample_mlsbm

    P = np.stack([[[0.8, 0.1], [0.1, 0.8]]] * 3)  # noqa: N806
    labels, g = sample_mlsbm(200, MlParams([0.5, 0.5], P), seed=7)
    counts = block_counts(labels, g)
    within = counts.o[:, [0, 1], [0, 1]].sum() / \
        (3 * counts.n_ab[[0, 1], [0, 1]].sum())
    between = counts.o[:, 0, 1].sum() / (3 * counts.n_ab[0, 1])
    assert abs(within - 0.8) <= 0.02
    assert abs(between - 0.1) <= 0.02


def test_sample_dynsbm():
    from blockorder.model import DynParams, block_counts
    from blockorder.sampler import sample_dynsbm

    P = np.zeros((4, 2, 2))  # noqa: N806
    trans = [[0.8, 0.2], [0.3, 0.7]]
    path, g = sample_dynsbm(10, DynParams(trans, P), seed=4)
    assert path.T == 4 and path.n == 10
    assert not g.layers.any()

    path, g = sample_dynsbm(500, DynParams(trans, np.zeros((10, 2, 2))),
                            seed=5)
    counts = block_counts(path, g)
    freq = counts.c / counts.c.sum(axis=1, keepdims=True)
    assert np.abs(freq - np.array(trans)).max() <= 0.04


def test_sample_dynsbm_sticky_paths():
    from blockorder.model import DynParams
    from blockorder.sampler import sample_dynsbm

    # Nearly absorbing states still need an irreducible chain
    trans = [[1.0 - 1e-15, 1e-15], [1e-15, 1.0 - 1e-15]]
    path, _ = sample_dynsbm(40, DynParams(trans, np.zeros((5, 2, 2))),
                            seed=8)
    assert (path.labels == path.labels[0]).all()


def test_sample_dynsbm_marginals_match_alpha():
    from blockorder.model import DynParams
    from blockorder.sampler import sample_dynsbm

    trans = [[0.7, 0.3], [0.4, 0.6]]
    path, _ = sample_dynsbm(3000, DynParams(trans, np.zeros((6, 2, 2))),
                            seed=12)
    # Stationary start, so every layer has the same marginal
    for t in range(path.T):
        share = (path.labels[t] == 0).mean()
        assert abs(share - 4 / 7) <= 0.035, t


def test_sample_dynsbm_identity_transitions():
    from blockorder.model import DynParams
    from blockorder.sampler import SamplerException, sample_dynsbm

    trans = np.eye(2)
    params = DynParams(trans, np.zeros((4, 2, 2)), alpha=[0.3, 0.7])
    path, _ = sample_dynsbm(2000, params, seed=9)
    assert (path.labels == path.labels[0]).all()
    assert abs((path.labels[0] == 0).mean() - 0.3) <= 0.04

    # Without alpha the reducible chain has no unique stationary law
    with pytest.raises(SamplerException, match='reducible'):
        DynParams(trans, np.zeros((4, 2, 2))).alpha


def test_sparsity_scaling():
    from blockorder.sampler import SamplerException, SparsityScaling

    S = np.eye(2) + np.ones((2, 2))  # noqa: N806
    scaling = SparsityScaling(0.2, S)
    assert scaling.is_time_constant
    assert scaling.connectivity()[0].tolist() == [[0.4, 0.2], [0.2, 0.4]]
    assert scaling.to_ml_params([0.5, 0.5]).k == 2
    assert scaling.to_dyn_params([[0.9, 0.1], [0.1, 0.9]]).T == 1

    with pytest.raises(SamplerException, match='exceeds 1'):
        SparsityScaling(0.6, S)
    with pytest.raises(SamplerException):
        SparsityScaling(0.0, S)
    varying = SparsityScaling([0.1, 0.2], np.stack([S, S]))
    with pytest.raises(SamplerException, match='same sparsity'):
        varying.to_dyn_params([[0.9, 0.1], [0.1, 0.9]])


def test_scenario_fig1():
    from blockorder.sampler import FIG1_K, scenario_fig1

    scenario = scenario_fig1(60, seed=3)
    P = scenario.params.P  # noqa: N806
    assert P.shape == (5, FIG1_K, FIG1_K)
    assert (P[:, :3, 3:] == 0.2).all()
    assert (P[:, 3:, :3] == 0.2).all()
    assert (np.diagonal(P[:, 3:, 3:], axis1=1, axis2=2) == 0.4).all()
    u = np.concatenate([np.diagonal(P[:, :3, :3], axis1=1, axis2=2).ravel(),
                        P[:, 3, 4]])
    assert ((u > 0.6) & (u < 1.0)).all()
    # u is redrawn per layer
    assert not np.array_equal(P[0], P[1])
    assert scenario.graph.n == 60 and scenario.labels.k == FIG1_K

    shared = scenario_fig1(20, seed=3, iid_per_layer=False).params.P
    assert all(np.array_equal(shared[0], shared[t]) for t in range(5))


def test_scenario_sparse_table1():
    from blockorder.sampler import SamplerException, scenario_sparse_table1

    scenario = scenario_sparse_table1(0.45, seed=2, n=60)
    P = scenario.params.P  # noqa: N806
    assert P.shape == (4, 3, 3)
    diagonal = np.diagonal(P, axis1=1, axis2=2)
    assert (diagonal >= 0.45 * 1.9 - 1e-12).all()
    assert (diagonal <= 0.45 * 2.1 + 1e-12).all()
    assert np.array_equal(P, P.transpose(0, 2, 1))

    with pytest.raises(SamplerException):
        scenario_sparse_table1(0.0, seed=1)
    with pytest.raises(SamplerException):
        scenario_sparse_table1(0.6, seed=1, n=10)


def test_scenario_rate_study():
    from blockorder.sampler import scenario_rate_study

    scenario = scenario_rate_study(30, 4, seed=6)
    P = scenario.params.P  # noqa: N806
    assert P.shape == (4, 2, 2)
    assert (np.diagonal(P, axis1=1, axis2=2) >= 0.7).all()
    assert (P[:, 0, 1] <= 0.1).all()
    assert scenario.graph.T == 4


@pytest.mark.slow
def test_mlsbm_class_proportions():
    from blockorder.model import MlParams
    from blockorder.sampler import sample_mlsbm

    pi = np.array([0.2, 0.3, 0.5])
    params = MlParams(pi, np.zeros((1, 3, 3)))
    n = 10000
    hits = 0
    for seed in range(5):
        labels, _ = sample_mlsbm(n, params, seed)
        deviation = np.abs(labels.counts() / n - pi)
        hits += (deviation <= 4 * np.sqrt(pi * (1 - pi) / n)).all()
    assert hits >= 4

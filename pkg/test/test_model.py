import numpy as np
import pytest


def _two_cliques(size, T=1):  # noqa: N803
    n = 2 * size
    layer = np.zeros((n, n), dtype=np.uint8)
    layer[:size, :size] = 1
    layer[size:, size:] = 1
    np.fill_diagonal(layer, 0)
    return np.stack([layer] * T)


def test_graph_collection_validation():
    from blockorder.model import GraphCollection, ModelException

    g = GraphCollection([[0, 1], [1, 0]])
    assert g.n == 2 and g.T == 1
    assert g.edge_counts().tolist() == [1]

    with pytest.raises(ModelException, match='symmetric'):
        GraphCollection([[0, 1], [0, 0]])
    with pytest.raises(ModelException, match='Self-loops'):
        GraphCollection([[1, 0], [0, 0]])
    with pytest.raises(ModelException, match='0 or 1'):
        GraphCollection([[0, 2], [2, 0]])
    with pytest.raises(ModelException):
        GraphCollection(np.zeros((2, 3)))


def test_graph_collection_is_read_only():
    from blockorder.model import GraphCollection

    g = GraphCollection.empty(3, 2)
    with pytest.raises(ValueError):
        g.layers[0, 0, 1] = 1


def test_graph_collection_helpers():
    from blockorder.model import GraphCollection

    g = GraphCollection(_two_cliques(3, T=2))
    assert g.edge_counts().tolist() == [6, 6]
    assert g.aggregate()[0, 1] == 2.0
    assert g.layer(1).T == 1
    assert g.layer(1) == GraphCollection(g.layers[1])
    assert g.permute(list(range(6))) == g
    assert g.permute([5, 4, 3, 2, 1, 0]).edge_counts().tolist() == [6, 6]


def test_label_assignment():
    from blockorder.model import LabelAssignment, ModelException

    z = LabelAssignment.from_one_based([1, 1, 2])
    assert z.k == 2
    assert z.n == 3
    assert z.labels.tolist() == [0, 0, 1]
    assert z.to_one_based() == [1, 1, 2]
    assert z.counts().tolist() == [2, 1]
    assert LabelAssignment([0, 0], k=3).counts().tolist() == [2, 0, 0]

    with pytest.raises(ModelException):
        LabelAssignment([0, 3], k=2)
    with pytest.raises(ModelException):
        LabelAssignment([-1, 0])
    with pytest.raises(ModelException):
        LabelAssignment([])


def test_label_path():
    from blockorder.model import LabelPath, ModelException

    path = LabelPath.from_one_based([[1, 2], [2, 2]])
    assert path.T == 2 and path.n == 2 and path.k == 2
    assert path.at(1).labels.tolist() == [1, 1]
    with pytest.raises(ModelException):
        LabelPath([[0, 4]], k=2)


def test_ml_params():
    from blockorder.model import MlParams, ModelException

    params = MlParams([0.5, 0.5], [[0.8, 0.1], [0.1, 0.8]])
    assert params.k == 2 and params.T == 1
    assert params.to_dict()['model'] == 'ml'

    with pytest.raises(ModelException, match='sum to 1'):
        MlParams([0.5, 0.6], [[0.8, 0.1], [0.1, 0.8]])
    with pytest.raises(ModelException, match='symmetric'):
        MlParams([0.5, 0.5], [[0.8, 0.1], [0.2, 0.8]])
    with pytest.raises(ModelException, match=r'\[0, 1\]'):
        MlParams([0.5, 0.5], [[1.2, 0.1], [0.1, 0.8]])
    with pytest.raises(ModelException):
        MlParams([1.0], [[0.8, 0.1], [0.1, 0.8]])


def test_dyn_params():
    from blockorder.model import DynParams, ModelException

    P = [[[0.9, 0.1], [0.1, 0.8]], [[0.9, 0.3], [0.3, 0.8]]]  # noqa: N806
    params = DynParams([[0.7, 0.3], [0.4, 0.6]], P)
    assert params.T == 2
    assert params.alpha == pytest.approx([4 / 7, 3 / 7], abs=1e-10)
    assert DynParams([[0.7, 0.3], [0.4, 0.6]], P,
                     alpha=[4 / 7, 3 / 7]).k == 2

    with pytest.raises(ModelException, match='stationary'):
        DynParams([[0.7, 0.3], [0.4, 0.6]], P, alpha=[0.5, 0.5])
    with pytest.raises(ModelException, match='sum to 1'):
        DynParams([[0.7, 0.2], [0.4, 0.6]], P)
    with pytest.raises(ModelException, match='equal at every time'):
        DynParams([[0.7, 0.3], [0.4, 0.6]],
                  [[[0.9, 0.1], [0.1, 0.8]], [[0.5, 0.1], [0.1, 0.8]]])


def test_block_counts_labeling():
    from blockorder.model import (GraphCollection, LabelAssignment,
                                  block_counts)

    counts = block_counts(LabelAssignment.from_one_based([1, 1, 2]),
                          GraphCollection.empty(3))
    assert counts.n_a.tolist() == [2, 1]
    assert counts.n_ab.tolist() == [[1, 2], [2, 0]]
    assert not counts.o.any()
    assert counts.c is None

    complete = np.ones((4, 4), dtype=np.uint8) - np.eye(4, dtype=np.uint8)
    counts = block_counts(LabelAssignment.from_one_based([1, 1, 2, 2]),
                          GraphCollection(complete))
    assert counts.o[0].tolist() == [[1, 4], [0, 1]]
    assert counts.o_tilde[0].tolist() == [[2, 4], [4, 2]]
    assert counts.total_edges.tolist() == [6]


def test_block_counts_path():
    from blockorder.model import GraphCollection, LabelPath, block_counts

    counts = block_counts(LabelPath.from_one_based([[1, 2], [2, 2]]),
                          GraphCollection.empty(2, 2))
    assert counts.c.tolist() == [[0, 1], [0, 1]]
    assert counts.c.sum() == 2
    assert counts.n_a.tolist() == [[1, 1], [0, 2]]
    assert counts.n_ab[1].tolist() == [[0, 0], [0, 1]]
    assert counts.layer_pairs().shape == (2, 2, 2)


def test_block_counts_errors():
    from blockorder.model import (GraphCollection, LabelAssignment,
                                  LabelPath, ModelException, block_counts)

    with pytest.raises(ModelException, match='nodes'):
        block_counts(LabelAssignment([0, 1]), GraphCollection.empty(3))
    with pytest.raises(ModelException, match='time steps'):
        block_counts(LabelPath([[0, 1]]), GraphCollection.empty(2, 2))


def test_block_counts_invariants():
    from blockorder.model import (GraphCollection, LabelAssignment,
                                  block_counts)
    from blockorder.utils import make_rng

    rng = make_rng(11)
    upper = np.triu(rng.random((3, 12, 12)) < 0.4, 1).astype(np.uint8)
    g = GraphCollection(upper | upper.transpose(0, 2, 1))
    z = LabelAssignment(rng.integers(0, 3, size=12), 3)
    counts = block_counts(z, g)
    assert counts.n_a.sum() == 12
    assert (counts.o <= counts.layer_pairs()).all()
    assert counts.o.sum(axis=(1, 2)).tolist() == g.edge_counts().tolist()
    assert (counts.o_tilde.sum(axis=(1, 2)) == 2 * g.edge_counts()).all()

    perm = rng.permutation(12)
    moved = block_counts(z.permute(perm), g.permute(perm))
    assert np.array_equal(moved.o, counts.o)
    assert np.array_equal(moved.n_ab, counts.n_ab)


def test_confusion_matrix():
    from blockorder.model import (LabelAssignment, ModelException,
                                  confusion_matrix)
    from blockorder.utils import make_rng

    z = LabelAssignment.from_one_based([1, 1, 2, 3])
    q = confusion_matrix(z, z).q
    assert np.allclose(q, np.diag([0.5, 0.25, 0.25]))

    q = confusion_matrix(LabelAssignment([0, 0]), LabelAssignment([0, 1])).q
    assert q.tolist() == [[0.5, 0.5]]

    rng = make_rng(5)
    zbar = LabelAssignment(rng.integers(0, 4, size=50), 4)
    other = LabelAssignment(rng.integers(0, 3, size=50), 3)
    cm = confusion_matrix(zbar, other)
    assert abs(cm.q.sum() - 1.0) <= 1e-12
    assert cm.column_counts(50).tolist() == other.counts().tolist()
    assert cm.row_counts(50).tolist() == zbar.counts().tolist()

    with pytest.raises(ModelException):
        confusion_matrix(LabelAssignment([0, 1]), LabelAssignment([0]))

import math

import numpy as np
import pytest


def _cliques(sizes, T=1):  # noqa: N803
    from blockorder.model import GraphCollection

    n = sum(sizes)
    layer = np.zeros((n, n), dtype=np.uint8)
    start = 0
    for size in sizes:
        layer[start:start + size, start:start + size] = 1
        start += size
    np.fill_diagonal(layer, 0)
    return GraphCollection(np.stack([layer] * T))


def test_smallest_argmax():
    from blockorder.selector import KScore, smallest_argmax

    scores = [KScore(1, -5.0, 0.0, -5.0, 'exact'),
              KScore(2, -2.0, 1.0, -3.0, 'exact'),
              KScore(3, -1.0, 2.0, -3.0, 'exact')]
    assert smallest_argmax(scores) == 2
    assert smallest_argmax([KScore(1, None, 0.0, -math.inf, 'exact')]) is None
    assert smallest_argmax([]) is None


def test_select_k_ml_planted():
    from blockorder.selector import select_k_ml

    report = select_k_ml(_cliques([4, 4], T=2), k_max=4, engine='exact')
    assert report.k_hat == 2
    assert report.complete
    assert [s.k for s in report.per_k] == [1, 2, 3, 4]
    best = max(s.score for s in report.per_k)
    assert report.per_k[1].score == best
    for s in report.per_k:
        assert s.score == pytest.approx(s.log_evidence - s.penalty)
        assert s.engine == 'exact'
    labels = report.labels
    assert labels[:4] == [1] * 4 and labels[4:] == [2] * 4


def test_select_k_ml_degenerate():
    from blockorder.model import GraphCollection
    from blockorder.selector import select_k_ml

    empty = GraphCollection.empty(5, 2)
    report = select_k_ml(empty)
    assert report.k_max == 5
    assert report.k_hat == 1
    assert select_k_ml(_cliques([4, 4]), k_max=1).k_hat == 1


def test_select_k_ml_auto_engine():
    from blockorder.engines import VbemConfig
    from blockorder.selector import select_k_ml

    g = _cliques([5, 5])
    report = select_k_ml(g, k_max=3, budget=10 ** 3,
                         vbem_cfg=VbemConfig(restarts=2))
    # 2^10 exceeds the budget, so only k=1 is enumerated
    assert [s.engine for s in report.per_k] == ['exact', 'vbem', 'vbem']
    assert report.k_hat == 2
    assert len(set(report.labels[:5])) == 1
    assert report.labels[0] != report.labels[5]


def test_select_k_ml_errors():
    from blockorder.selector import SelectionException, select_k_ml

    g = _cliques([3, 3])
    with pytest.raises(SelectionException, match='k_max'):
        select_k_ml(g, k_max=7)
    with pytest.raises(SelectionException, match='Invalid engine'):
        select_k_ml(g, k_max=2, engine='mcmc')
    with pytest.raises(SelectionException) as info:
        select_k_ml(g, k_max=3, engine='exact', budget=10)
    assert [s.k for s in info.value.report.per_k] == [1]
    assert not info.value.report.complete


def test_selection_report_output():
    from blockorder.selector import CSV_HEADER, select_k_ml

    report = select_k_ml(_cliques([3, 3]), k_max=3, engine='exact', seed=4)
    data = report.to_dict()
    assert data['model'] == 'ml'
    assert data['k_hat'] == report.k_hat
    assert data['seed'] == 4
    assert len(data['per_k']) == 3
    rows = report.csv_rows()
    assert rows[0] == CSV_HEADER
    assert len(rows) == 4
    assert rows[1][:2] == [1, 1]


def _random_collection(n, T, seed):  # noqa: N803
    from blockorder.model import GraphCollection
    from blockorder.utils import make_rng

    upper = np.triu(make_rng(seed).random((T, n, n)) < 0.4, 1)
    upper = upper.astype(np.uint8)
    return GraphCollection(upper | upper.transpose(0, 2, 1))


def test_scores_invariant_under_node_permutation():
    from blockorder.selector import select_k_ml
    from blockorder.utils import make_rng

    g = _random_collection(7, 2, seed=21)
    report = select_k_ml(g, k_max=3, engine='exact')
    for seed in range(3):
        perm = make_rng(seed).permutation(g.n)
        permuted = select_k_ml(g.permute(perm), k_max=3, engine='exact')
        assert permuted.k_hat == report.k_hat
        for a, b in zip(report.per_k, permuted.per_k):
            assert b.log_evidence == pytest.approx(a.log_evidence, abs=1e-9)
            assert b.score == pytest.approx(a.score, abs=1e-9)


def test_exact_reports_ignore_seed():
    from blockorder.selector import select_k_ml

    g = _random_collection(6, 3, seed=5)
    first = select_k_ml(g, k_max=3, engine='exact', seed=1).to_dict()
    second = select_k_ml(g, k_max=3, engine='exact', seed=99).to_dict()
    assert first.pop('seed') == 1 and second.pop('seed') == 99
    assert first == second


def test_compact_labels():
    from blockorder.model import LabelAssignment
    from blockorder.selector import compact_labels

    z = compact_labels(LabelAssignment([3, 3, 0], k=5))
    assert z.labels.tolist() == [1, 1, 0]
    assert z.k == 2


def test_select_k_dyn_planted():
    from blockorder.model import LabelAssignment
    from blockorder.selector import select_k_dyn

    g = _cliques([2, 2], T=2)
    report = select_k_dyn(g, LabelAssignment([0, 0, 1, 1]), k_max=3)
    assert report.model == 'dyn'
    assert report.per_k[0].log_evidence is None
    assert report.per_k[0].score == -math.inf
    assert report.k_hat == 2
    assert report.labels == [[1, 1, 2, 2], [1, 1, 2, 2]]
    assert report.to_dict()['per_k'][0]['score'] is None
    assert report.csv_rows()[1][2] == ''


def test_select_k_dyn_empty():
    from blockorder.model import GraphCollection, LabelAssignment
    from blockorder.selector import select_k_dyn

    report = select_k_dyn(GraphCollection.empty(4, 2),
                          LabelAssignment([0, 0, 0, 0]), k_max=3)
    assert report.k_hat == 1


def test_select_k_dyn_errors():
    from blockorder.model import GraphCollection, LabelAssignment
    from blockorder.selector import SelectionException, select_k_dyn

    g = GraphCollection.empty(4, 2)
    with pytest.raises(SelectionException, match='more than k_max'):
        select_k_dyn(g, LabelAssignment([0, 1, 2, 2]), k_max=2)
    with pytest.raises(SelectionException, match='nodes'):
        select_k_dyn(g, LabelAssignment([0, 1]), k_max=2)
    with pytest.raises(SelectionException, match='smaller n or T'):
        select_k_dyn(GraphCollection.empty(4, 4),
                     LabelAssignment([0, 0, 1, 1]), k_max=3, budget=1000)


def test_layerwise_baseline():
    from blockorder.selector import (layerwise_max_baseline,
                                     layerwise_selections, select_k_ml)

    g = _cliques([4, 4], T=2)
    assert layerwise_selections(g, k_max=3, engine='exact') == [2, 2]
    assert layerwise_max_baseline(g, k_max=3, engine='exact') == 2

    single = _cliques([3, 4])
    assert layerwise_max_baseline(single, k_max=3, engine='exact') == \
        select_k_ml(single, k_max=3, engine='exact').k_hat

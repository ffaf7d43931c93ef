import math

import pytest


def test_penalty_config():
    from blockorder.penalty import EPSILON_DEFAULT, PenaltyConfig

    assert PenaltyConfig().epsilon == EPSILON_DEFAULT
    assert PenaltyConfig(0.01) == PenaltyConfig(0.01)
    for bad in (0, -1e-3, float('nan'), float('inf')):
        with pytest.raises(ValueError):
            PenaltyConfig(bad)


def test_penalty_config_warns_outside_range(caplog):
    from blockorder.penalty import PenaltyConfig

    PenaltyConfig(0.5)
    assert 'outside the tested range' in caplog.text


def test_pen_ml():
    from blockorder.penalty import PenaltyConfig, pen_ml

    cfg = PenaltyConfig(0.01)
    assert pen_ml(1, 100, 5, cfg) == 0.0
    assert pen_ml(2, 100, 5, cfg) == pytest.approx(6.01 * math.log(100))
    assert pen_ml(2, 100, 5, cfg) == pytest.approx(27.677, abs=1e-3)
    # Second step adds (T*6 + 1)/2 + 1 + eps
    assert pen_ml(3, 10, 1, cfg) - pen_ml(2, 10, 1, cfg) == \
        pytest.approx((7 / 2 + 1.01) * math.log(10))


def test_pen_dyn():
    from blockorder.penalty import PenaltyConfig, pen_dyn

    cfg = PenaltyConfig(0.01)
    assert pen_dyn(1, 50, 3, cfg) == 0.0
    expected = 0.5 * math.log(50 * 50 * 3) + 1.01 * math.log(50)
    assert pen_dyn(2, 50, 3, cfg) == pytest.approx(expected)


def test_penalties_increase_with_k():
    from blockorder.penalty import pen_dyn, pen_ml

    for pen in (pen_ml, pen_dyn):
        values = [pen(k, 40, 4) for k in range(1, 8)]
        assert all(b > a for a, b in zip(values, values[1:]))


def test_penalty_dispatch():
    from blockorder.penalty import pen_dyn, pen_ml, penalty

    assert penalty('ml', 3, 20, 2) == pen_ml(3, 20, 2)
    assert penalty('dyn', 3, 20, 2) == pen_dyn(3, 20, 2)
    with pytest.raises(ValueError):
        penalty('directed', 3, 20, 2)
    with pytest.raises(ValueError):
        penalty('ml', 0, 20, 2)

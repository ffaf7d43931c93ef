import os

import pytest

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(
    os.path.abspath(__file__))), 'blockorder', 'configs')


def _write(tmpdir, name, text):
    path = tmpdir.join(name)
    path.write(text)
    return str(path)


def test_parse_yaml(tmpdir):
    from blockorder.parser import parse_yaml

    assert parse_yaml(_write(tmpdir, 'a.yaml', 'n: 5\nT: [1, 2]\n')) == \
        {'n': 5, 'T': [1, 2]}
    assert parse_yaml(_write(tmpdir, 'a.json', '{"n": 5}')) == {'n': 5}
    assert parse_yaml(_write(tmpdir, 'bad.yaml', 'n: [1, 2\n')) is None
    assert parse_yaml(str(tmpdir.join('missing.yaml'))) is None


def test_parse_yaml_stdin(monkeypatch):
    import io
    from blockorder.parser import parse_yaml

    stream = io.StringIO('scenario: fig1\nreplications: 2\n')
    monkeypatch.setattr('sys.stdin', stream)
    assert parse_yaml('-') == {'scenario': 'fig1', 'replications': 2}
    assert not stream.closed


def test_checker():
    from blockorder.parser import _checker

    data = {'scenario': 'fig1', 'n_grid': [5]}
    assert _checker(['scenario', 'n_grid'], 'test', data, 'errors') == 0
    assert _checker(['scenario', 'name', 'seed'], 'test', data,
                    'warnings') == 2
    assert _checker(['name'], 'test', data, 'typo') == 1


@pytest.mark.parametrize('name', sorted(
    x for x in os.listdir(CONFIG_DIR) if x.endswith('.yaml')))
def test_bundled_configs_are_valid(name):
    from blockorder.experiments import ExperimentConfig
    from blockorder.parser import check_syntax

    spec = check_syntax(os.path.join(CONFIG_DIR, name), 'experiment')
    assert spec is not None
    assert ExperimentConfig.from_dict(spec).scenario == spec['scenario']


def test_verify_experiment_syntax():
    from blockorder.parser import verify_experiment_syntax

    good = {'name': 'x', 'scenario': 'sparse_table1', 'replications': 3,
            'master_seed': 1, 'rho_grid': [0.1, 0.2], 'n_grid': [50]}
    assert verify_experiment_syntax(good) == (0, 0)
    errors, warnings = verify_experiment_syntax({'scenario': 'fig1'})
    assert errors == 0 and warnings == 3
    assert verify_experiment_syntax(dict(good, engines=['exact', 'vbem'])) \
        == (0, 0)

    bad = [{'scenario': 'fig9'},
           dict(good, engines=['exact', 'mcmc']),
           dict(good, methods=['kt', 'pml']),
           dict(good, rho_grid=[0.0]),
           dict(good, n_grid=[]),
           dict(good, k_max=0),
           dict(good, epsilon='small'),
           dict(good, workers=True),
           dict(good, extra=1),
           dict(good, vbem={'restarts': 0}),
           dict(good, vbem={'init': 'kmeans'}),
           dict(good, vbem=[1]),
           dict(good, scenario='custom'),
           dict(good, scenario='custom', params={'model': 'ml', 'pi': [1]})]
    for spec in bad:
        assert verify_experiment_syntax(spec)[0] > 0, spec


def test_verify_simulation_syntax():
    from blockorder.parser import verify_simulation_syntax

    ml = {'model': 'ml', 'n': 20, 'pi': [0.5, 0.5],
          'P': [[[0.9, 0.1], [0.1, 0.9]]]}
    assert verify_simulation_syntax(ml) == (0, 0)
    assert verify_simulation_syntax({'scenario': 'fig1', 'n': 30}) == (0, 0)

    inferred = {'n': 5, 'trans': [[1.0]], 'P': [[[0.5]]]}
    assert verify_simulation_syntax(inferred) == (0, 1)

    bad = [{'n': 0, 'model': 'ml', 'pi': [1], 'P': [[[0.5]]]},
           {'scenario': 'sparse_table1', 'n': 30},
           {'scenario': 'fig2', 'n': 30},
           {'model': 'dyn', 'n': 5, 'P': [[[0.5]]]},
           dict(ml, pi='uniform'),
           dict(ml, seed=3),
           {'model': 'ml'}]
    for spec in bad:
        assert verify_simulation_syntax(spec)[0] > 0, spec


def test_check_syntax(tmpdir):
    from blockorder.parser import check_syntax

    path = _write(tmpdir, 'sim.yaml', 'scenario: fig1\nn: 30\n')
    assert check_syntax(path, 'simulation') == {'scenario': 'fig1', 'n': 30}
    assert check_syntax(path, 'experiment') is None
    assert check_syntax(path, 'exercise') is None
    assert check_syntax(_write(tmpdir, 'list.yaml', '- 1\n- 2\n')) is None
    assert check_syntax(str(tmpdir.join('missing.yaml'))) is None

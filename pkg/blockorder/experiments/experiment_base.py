"""Monte-Carlo experiment plumbing: typed configuration, the abstract
:class:`Experiment`, per-replication records, the accuracy summary and the
CSV/JSON writers."""
import csv
import logging
import math
import os
import timeit
from abc import ABC, abstractmethod
from multiprocessing import Pool
from typing import Dict, List, NamedTuple, Optional, Tuple

from scipy.stats import norm
from tqdm import tqdm

from blockorder.__about__ import __version__
from blockorder.engines import EngineException, VbemConfig
from blockorder.engines.exact_engine import DEFAULT_BUDGET
from blockorder.model import ModelException
from blockorder.penalty import PenaltyConfig
from blockorder.sampler import SamplerException, Scenario
from blockorder.selector import (SelectionException, layerwise_max_baseline,
                                 select_k_dyn, select_k_ml)
from blockorder.spectral import SpectralException, bhmc_select
from blockorder.utils import method_key, stream_seed, write_json

SCHEMA_VERSION = 1
SCENARIOS = ('fig1', 'sparse_table1', 'rate_study', 'custom')
METHODS = ('kt', 'kt-layerwise', 'kt-layermax', 'bhmc', 'kt-dyn')
KT_METHODS = ('kt', 'kt-layerwise', 'kt-layermax')
ENGINES = ('auto', 'exact', 'vbem')
DESIGNS = ('nT', 'n2T')
WILSON_LEVEL = 0.95

GRID_FIELDS = ['n', 'T', 'rho', 'design', 'base_n']
RECORD_FIELDS = ['schema_version', 'scenario', 'grid_point'] + GRID_FIELDS \
    + ['method', 'replication', 'layer', 'k_hat', 'k_true', 'correct', 'error']
TIMING_FIELDS = ['schema_version', 'grid_point'] + GRID_FIELDS \
    + ['method', 'replication', 'layer', 'wall_time']
SUMMARY_FIELDS = ['schema_version', 'scenario', 'grid_point'] + GRID_FIELDS \
    + ['method', 'graphs', 'failures', 'accuracy', 'wilson_low',
       'wilson_high', 'mean_wall_time', 'complete']

# Desk-scale defaults, and the settings of the published study
DEFAULTS = {
    'fig1': {'n_grid': [50, 100, 200, 300], 'T': 5, 'replications': 20,
             'methods': ['kt', 'bhmc']},
    'sparse_table1': {'n_grid': [300], 'T': 4, 'replications': 20,
                      'rho_grid': [0.05, 0.15, 0.25, 0.35, 0.45],
                      'methods': ['kt', 'bhmc']},
    'rate_study': {'base_n_grid': [40, 80, 120], 't_grid': [1, 4, 9, 16],
                   'designs': ['nT', 'n2T'], 'replications': 20,
                   'methods': ['kt']},
    'custom': {'replications': 20},
}
PAPER_SCALE = {
    'fig1': {'n_grid': [50, 75, 100, 125, 150, 175, 200, 300, 500, 700],
             'replications': 100},
    'sparse_table1': {'rho_grid': [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35,
                                   0.40, 0.45],
                      'replications': 100},
    'rate_study': {'base_n_grid': [50, 100, 150, 200, 300],
                   't_grid': [1, 4, 9, 16], 'replications': 100},
    'custom': {'replications': 100},
}

# Failures of a single replication that become records instead of errors
REPLICATION_ERRORS = (ModelException, SamplerException, EngineException,
                      SpectralException, SelectionException, ValueError,
                      ArithmeticError)


class ExperimentException(ValueError):
    pass


class GridPoint(NamedTuple):
    n: int
    T: int
    rho: Optional[float] = None
    design: Optional[str] = None
    base_n: Optional[int] = None


class AccuracyRecord(NamedTuple):
    scenario: str
    grid_point: int
    point: GridPoint
    method: str
    replication: int
    layer: Optional[int]
    k_hat: Optional[int]
    k_true: Optional[int]
    correct: bool
    error: str
    wall_time: float

    def sort_key(self) -> tuple:
        return (self.grid_point, self.replication, self.method,
                -1 if self.layer is None else self.layer)


class SummaryCell(NamedTuple):
    scenario: str
    grid_point: int
    point: GridPoint
    method: str
    graphs: int
    failures: int
    accuracy: Optional[float]
    wilson_low: Optional[float]
    wilson_high: Optional[float]
    mean_wall_time: float
    complete: bool


class ExperimentResult(NamedTuple):
    records: List[AccuracyRecord]
    summary: List[SummaryCell]


def _positive_ints(values, name: str) -> List[int]:
    values = [int(v) for v in values]
    if not values or min(values) < 1:
        raise ExperimentException("%s must be a non-empty list of positive "
                                  "integers" % name)
    return values


class ExperimentConfig:
    """Typed experiment configuration.

    Unset values take the desk-scale defaults of the scenario; with
    ``paper_scale`` the published grids and replication counts are used."""

    def __init__(self, scenario: str, n_grid=None, T=None,  # noqa: N803
                 replications=None, k_max=None, epsilon=1e-3,
                 engine='vbem', engines=None, methods=None, master_seed=0,
                 workers=1, out_dir='results', rho_grid=None,
                 base_n_grid=None, t_grid=None, designs=None, params=None,
                 iid_layers=True, vbem=None, budget=DEFAULT_BUDGET, name=None,
                 paper_scale=False):
        if scenario not in SCENARIOS:
            raise ExperimentException("Invalid scenario '%s' (choose from %s)"
                                      % (scenario, ", ".join(SCENARIOS)))
        settings = dict(DEFAULTS[scenario])
        if paper_scale:
            settings.update(PAPER_SCALE[scenario])
        explicit = {'n_grid': n_grid, 'T': T, 'replications': replications,
                    'methods': methods, 'rho_grid': rho_grid,
                    'base_n_grid': base_n_grid, 't_grid': t_grid,
                    'designs': designs}
        for key, value in explicit.items():
            # The published scale replaces the grids it defines
            if value is not None and not (paper_scale and
                                          key in PAPER_SCALE[scenario]):
                settings[key] = value

        self.scenario = scenario
        self.name = name or scenario
        self.paper_scale = bool(paper_scale)
        self.replications = int(settings.get('replications', 0))
        if self.replications < 0:
            raise ExperimentException("replications must be non-negative")
        self.k_max = None if k_max is None else int(k_max)
        if self.k_max is not None and self.k_max < 1:
            raise ExperimentException("k_max must be positive")
        self.penalty = PenaltyConfig(epsilon)
        if engines is None:
            engines = [engine]
        engines = [engines] if isinstance(engines, str) else list(engines)
        bad = [e for e in engines if e not in ENGINES]
        if bad or not engines:
            raise ExperimentException("Invalid engines %s (choose from %s)"
                                      % (bad, ", ".join(ENGINES)))
        self.engines = sorted(set(engines), key=engines.index)
        self.engine = self.engines[0]
        self.master_seed = int(master_seed)
        if self.master_seed < 0:
            raise ExperimentException("master_seed must be non-negative")
        self.workers = max(1, int(workers))
        self.out_dir = out_dir
        self.budget = int(budget)
        self.vbem = VbemConfig(**(vbem or {}))
        self.iid_layers = bool(iid_layers)
        self.params = params

        methods = settings.get('methods')
        if methods is None:
            methods = ['kt-dyn'] if (params or {}).get('model') == 'dyn' \
                else ['kt']
        unknown = [m for m in methods if m not in METHODS]
        if unknown or not methods:
            raise ExperimentException("Invalid methods %s (choose from %s)"
                                      % (unknown, ", ".join(METHODS)))
        self.methods = sorted(set(methods))

        self.n_grid = self.T = self.rho_grid = None
        self.base_n_grid = self.t_grid = self.designs = None
        if scenario == 'rate_study':
            self.base_n_grid = _positive_ints(settings['base_n_grid'],
                                              'base_n_grid')
            self.t_grid = _positive_ints(settings['t_grid'], 't_grid')
            self.designs = list(settings['designs'])
            if not self.designs or any(d not in DESIGNS for d in self.designs):
                raise ExperimentException("designs must be taken from %s"
                                          % ", ".join(DESIGNS))
        else:
            if settings.get('n_grid') is None:
                raise ExperimentException("Scenario '%s' needs an n_grid"
                                          % scenario)
            self.n_grid = _positive_ints(settings['n_grid'], 'n_grid')
            if scenario != 'custom':
                self.T = _positive_ints([settings['T']], 'T')[0]
        if scenario == 'sparse_table1':
            self.rho_grid = [float(r) for r in settings['rho_grid']]
            if not self.rho_grid or min(self.rho_grid) <= 0:
                raise ExperimentException("rho_grid must hold positive values")
        if scenario == 'custom':
            if not params or params.get('model') not in ('ml', 'dyn'):
                raise ExperimentException("A custom scenario needs params "
                                          "with model 'ml' or 'dyn'")
        if 'kt-dyn' in self.methods and \
                (params or {}).get('model') != 'dyn':
            raise ExperimentException("Method kt-dyn needs a dynamic "
                                      "custom scenario")

    @property
    def method_labels(self) -> List[str]:
        """Methods as recorded. With several engines each KT method runs once
        per engine, labelled 'method@engine'."""
        if len(self.engines) == 1:
            return list(self.methods)
        labels = []
        for method in self.methods:
            if method in KT_METHODS:
                labels.extend('%s@%s' % (method, e) for e in self.engines)
            else:
                labels.append(method)
        return labels

    @classmethod
    def from_dict(cls, data: dict,
                  paper_scale: bool = False) -> 'ExperimentConfig':
        """Builds a configuration from a parsed YAML or JSON document.

        :raises ExperimentException: On unknown keys or invalid values"""
        data = dict(data)
        keys = ('scenario', 'n_grid', 'T', 'replications', 'k_max', 'epsilon',
                'engine', 'engines', 'methods', 'master_seed', 'workers',
                'out_dir', 'rho_grid', 'base_n_grid', 't_grid', 'designs',
                'params', 'iid_layers', 'vbem', 'budget', 'name')
        unknown = sorted(set(data) - set(keys))
        if unknown:
            raise ExperimentException("Unknown configuration keys: %s"
                                      % ", ".join(unknown))
        if 'scenario' not in data:
            raise ExperimentException("The configuration has no scenario")
        try:
            return cls(paper_scale=paper_scale, **data)
        except ExperimentException:
            raise
        except (TypeError, ValueError, EngineException) as err:
            raise ExperimentException("Invalid configuration: %s"
                                      % err) from None

    def to_dict(self) -> dict:
        data = {'scenario': self.scenario, 'name': self.name,
                'replications': self.replications, 'k_max': self.k_max,
                'epsilon': self.penalty.epsilon, 'engine': self.engine,
                'methods': self.methods, 'master_seed': self.master_seed,
                'workers': self.workers, 'out_dir': self.out_dir,
                'budget': self.budget, 'vbem': self.vbem.to_dict(),
                'paper_scale': self.paper_scale}
        optional = {'n_grid': self.n_grid, 'T': self.T,
                    'rho_grid': self.rho_grid,
                    'base_n_grid': self.base_n_grid, 't_grid': self.t_grid,
                    'designs': self.designs, 'params': self.params}
        data.update({k: v for k, v in optional.items() if v is not None})
        if len(self.engines) > 1:
            data['engines'] = self.engines
        if self.scenario == 'fig1':
            data['iid_layers'] = self.iid_layers
        return data

    def __repr__(self):
        return "ExperimentConfig(scenario=%s, replications=%d, methods=%s)" % (
            self.scenario, self.replications, self.methods)


def data_seed(master_seed: int, grid_point: int, replication: int) -> int:
    return stream_seed(master_seed, grid_point, replication, 0)


def method_seed(master_seed: int, grid_point: int, replication: int,
                method: str) -> int:
    return stream_seed(master_seed, grid_point, replication, 1,
                       method_key(method))


class Experiment(ABC):
    """Base class for all simulation experiments."""
    __version__ = '0.1.0'
    name = ''

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._log = logging.getLogger(self.name)

    @classmethod
    def get_ver(cls) -> str:
        return cls.name.capitalize() + ' ' + cls.__version__

    @abstractmethod
    def grid(self) -> List[GridPoint]:
        """Grid points of the experiment, in canonical order."""
        pass

    @abstractmethod
    def simulate(self, point: GridPoint, seed: int) -> Scenario:
        """Draws one data set at a grid point."""
        pass

    def k_true(self, scenario: Scenario) -> int:
        return scenario.params.k

    def _k_max(self, n: int) -> int:
        return min(n, 15) if self.cfg.k_max is None else min(self.cfg.k_max, n)

    def run_method(self, method: str, scenario: Scenario,
                   seed: int) -> List[Tuple[Optional[int], int, float]]:
        """Runs one order-selection method, optionally labelled
        'method@engine' to pick the evidence engine of a KT method.

        :return: (layer or None, selected order, wall time) per result"""
        g = scenario.graph
        k_max = self._k_max(g.n)
        cfg = self.cfg
        method, _, engine = method.partition('@')
        engine = engine or cfg.engine
        results = []
        if method in ('bhmc', 'kt-layerwise'):
            # Scored per layer, each layer counts as one graph
            for t in range(g.T):
                start = timeit.default_timer()
                if method == 'bhmc':
                    k_t = bhmc_select(g.layer(t), k_max).k
                else:
                    k_t = select_k_ml(g.layer(t), k_max, cfg.penalty,
                                      engine, stream_seed(seed, t),
                                      cfg.vbem, cfg.budget).k_hat
                results.append((t + 1, k_t, timeit.default_timer() - start))
            return results
        start = timeit.default_timer()
        if method == 'kt':
            k_hat = select_k_ml(g, k_max, cfg.penalty, engine, seed,
                                cfg.vbem, cfg.budget).k_hat
        elif method == 'kt-layermax':
            k_hat = layerwise_max_baseline(g, k_max, cfg.penalty, engine,
                                           seed, cfg.vbem, cfg.budget)
        elif method == 'kt-dyn':
            k_hat = select_k_dyn(g, scenario.labels.at(0), k_max,
                                 cfg.penalty, seed, cfg.budget).k_hat
        else:
            raise ExperimentException("Invalid method '%s'" % method)
        return [(None, k_hat, timeit.default_timer() - start)]

    def run_replication(self, grid_index: int,
                        replication: int) -> List[AccuracyRecord]:
        """Simulates one data set and applies every method to it. Failures
        are recorded, never raised."""
        point = self.grid()[grid_index]
        seed = self.cfg.master_seed

        def record(method, layer, k_hat, k_true, error='', wall_time=0.0):
            return AccuracyRecord(self.cfg.scenario, grid_index, point, method,
                                  replication, layer, k_hat, k_true,
                                  k_hat is not None and k_hat == k_true,
                                  error, wall_time)
        try:
            scenario = self.simulate(point, data_seed(seed, grid_index,
                                                      replication))
        except REPLICATION_ERRORS as err:
            self._log.warning("Simulation failed at grid point %d, "
                              "replication %d: %s", grid_index, replication,
                              err)
            return [record(m, None, None, None, "simulation: %s" % err)
                    for m in self.cfg.method_labels]
        k_true = self.k_true(scenario)
        records = []
        for method in self.cfg.method_labels:
            # Engines of one method share its seed
            try:
                results = self.run_method(
                    method, scenario,
                    method_seed(seed, grid_index, replication,
                                method.partition('@')[0]))
            except REPLICATION_ERRORS as err:
                self._log.warning("%s failed at grid point %d, replication "
                                  "%d: %s", method, grid_index, replication,
                                  err)
                records.append(record(method, None, None, k_true, str(err)))
                continue
            records.extend(record(method, layer, k_hat, k_true,
                                  wall_time=wall_time)
                           for layer, k_hat, wall_time in results)
        return records

    def __str__(self):
        return self.__doc__

    def __repr__(self):
        return self.get_ver()


def _run_task(task: Tuple[ExperimentConfig, int, int]) -> List[AccuracyRecord]:
    from blockorder.experiments import make_experiment
    cfg, grid_index, replication = task
    return make_experiment(cfg).run_replication(grid_index, replication)


def run_experiment(cfg: ExperimentConfig,
                   progress: bool = True) -> ExperimentResult:
    """Runs every (grid point, replication) task, on a process pool when
    ``cfg.workers > 1``. Records come back in canonical order whatever the
    completion order.

    :return: Records and the per-cell accuracy summary"""
    from blockorder.experiments import make_experiment
    experiment = make_experiment(cfg)
    grid = experiment.grid()
    tasks = [(cfg, g, r) for g in range(len(grid))
             for r in range(cfg.replications)]
    logging.info("Running %s: %d grid points x %d replications, methods %s",
                 experiment.get_ver(), len(grid), cfg.replications,
                 ", ".join(cfg.method_labels))
    bar = tqdm(total=len(tasks), desc=cfg.name, unit="rep",
               disable=not progress)
    records = []
    if cfg.workers > 1 and len(tasks) > 1:
        with Pool(processes=min(cfg.workers, len(tasks))) as pool:
            for batch in pool.imap_unordered(_run_task, tasks):
                records.extend(batch)
                bar.update()
    else:
        for task in tasks:
            records.extend(_run_task(task))
            bar.update()
    bar.close()
    records.sort(key=AccuracyRecord.sort_key)
    return ExperimentResult(records, summarize(records, cfg.scenario, grid,
                                               cfg.method_labels,
                                               cfg.replications))


def wilson_interval(successes: int, trials: int,
                    level: float = WILSON_LEVEL) -> Tuple[float, float]:
    """Wilson score interval of a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + level / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials
                         + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def summarize(records: List[AccuracyRecord], scenario: str,
              grid: List[GridPoint], methods: List[str],
              replications: int) -> List[SummaryCell]:
    """Accuracy per (grid point, method): correct selections divided by the
    number of graphs judged, one per collection for pooled methods and one
    per layer for per-layer methods."""
    if replications == 0:
        return []
    cells: Dict[Tuple[int, str], List[AccuracyRecord]] = {}
    for rec in records:
        cells.setdefault((rec.grid_point, rec.method), []).append(rec)
    summary = []
    for index, point in enumerate(grid):
        for method in methods:
            group = cells.get((index, method), [])
            judged = [r for r in group if not r.error]
            correct = sum(r.correct for r in judged)
            failures = len(group) - len(judged)
            if judged:
                accuracy = correct / len(judged)
                low, high = wilson_interval(correct, len(judged))
            else:
                accuracy = low = high = None
            replicated = {r.replication for r in group}
            complete = failures == 0 and len(replicated) == replications
            wall = sum(r.wall_time for r in judged) / len(judged) \
                if judged else 0.0
            summary.append(SummaryCell(scenario, index, point, method,
                                       len(group), failures, accuracy, low,
                                       high, wall, complete))
    return summary


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _grid_row(point: GridPoint) -> dict:
    return {name: getattr(point, name) for name in GRID_FIELDS}


def _write_csv(path: str, fields: List[str], rows: List[dict]):
    with open(path, 'w', encoding='utf-8', newline='') as outfile:
        writer = csv.DictWriter(outfile, fieldnames=fields,
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            row['schema_version'] = SCHEMA_VERSION
            writer.writerow({k: _cell(row.get(k)) for k in fields})


def write_records(path: str, records: List[AccuracyRecord]):
    """Writes records.csv. Wall times are left out so identical runs give
    identical files."""
    rows = []
    for rec in records:
        row = _grid_row(rec.point)
        row.update(scenario=rec.scenario, grid_point=rec.grid_point,
                   method=rec.method, replication=rec.replication,
                   layer=rec.layer, k_hat=rec.k_hat, k_true=rec.k_true,
                   correct=rec.correct, error=rec.error)
        rows.append(row)
    _write_csv(path, RECORD_FIELDS, rows)


def write_timings(path: str, records: List[AccuracyRecord]):
    rows = []
    for rec in records:
        row = _grid_row(rec.point)
        row.update(grid_point=rec.grid_point, method=rec.method,
                   replication=rec.replication, layer=rec.layer,
                   wall_time=rec.wall_time)
        rows.append(row)
    _write_csv(path, TIMING_FIELDS, rows)


def write_summary(path: str, summary: List[SummaryCell]):
    rows = []
    for cell in summary:
        row = _grid_row(cell.point)
        row.update(scenario=cell.scenario, grid_point=cell.grid_point,
                   method=cell.method, graphs=cell.graphs,
                   failures=cell.failures, accuracy=cell.accuracy,
                   wilson_low=cell.wilson_low, wilson_high=cell.wilson_high,
                   mean_wall_time=cell.mean_wall_time, complete=cell.complete)
        rows.append(row)
    _write_csv(path, SUMMARY_FIELDS, rows)


def write_manifest(path: str, cfg: ExperimentConfig, grid: List[GridPoint]):
    """Config echo, data seeds of every task and library versions."""
    import platform
    import numpy
    import scipy
    import sklearn
    seeds = [{'grid_point': g, 'replication': r,
              'data_seed': data_seed(cfg.master_seed, g, r)}
             for g in range(len(grid)) for r in range(cfg.replications)]
    write_json(path, {
        'schema_version': SCHEMA_VERSION,
        'config': cfg.to_dict(),
        'grid': [p._asdict() for p in grid],
        'seeds': seeds,
        'versions': {'blockorder': __version__, 'numpy': numpy.__version__,
                     'scipy': scipy.__version__,
                     'scikit-learn': sklearn.__version__,
                     'python': platform.python_version()}})


def write_results(out_dir: str, cfg: ExperimentConfig, grid: List[GridPoint],
                  result: ExperimentResult) -> Dict[str, str]:
    """Writes records.csv, timings.csv, summary.csv and manifest.json.

    :return: Paths of the written files by name"""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name)
             for name in ('records.csv', 'timings.csv', 'summary.csv',
                          'manifest.json')}
    write_records(paths['records.csv'], result.records)
    write_timings(paths['timings.csv'], result.records)
    write_summary(paths['summary.csv'], result.summary)
    write_manifest(paths['manifest.json'], cfg, grid)
    logging.info("Wrote %d records to %s", len(result.records), out_dir)
    return paths

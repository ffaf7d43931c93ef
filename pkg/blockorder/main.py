import json
import logging
import os
import sys
import timeit
from os.path import basename, dirname, exists, join

from humanfriendly import format_timespan

from blockorder.args import parse_cli_args
from blockorder.engines import (EngineException, ExactEngine, VbemConfig,
                                VbemEngine)
from blockorder.engines.exact_engine import DEFAULT_BUDGET
from blockorder.experiments import (ExperimentConfig, ExperimentException,
                                    concentration_check, make_experiment,
                                    run_experiment, write_results)
from blockorder.graph_io import load_graph, load_labels, save_graph
from blockorder.model import LabelPath, MlParams, ModelException
from blockorder.parser import check_syntax, parse_yaml
from blockorder.penalty import PenaltyConfig
from blockorder.sampler import (SamplerException, Scenario, sample_dynsbm,
                                sample_mlsbm, scenario_fig1,
                                scenario_rate_study, scenario_sparse_table1)
from blockorder.selector import (SelectionException, layerwise_selections,
                                 select_k_dyn, select_k_ml)
from blockorder.spectral import SpectralException, bhmc_select
from blockorder.utils import handle_keyboard_interrupt, setup_logging, \
    write_json

CONFIG_DIR = join(dirname(__file__), 'configs')
SPEC_DIR = join(dirname(__file__), 'specifications')

# Errors that end a command with exit status 1
COMMAND_ERRORS = (ModelException, SamplerException, EngineException,
                  SpectralException, SelectionException, ExperimentException,
                  ValueError, OSError)


def run_cli():
    """Parse command line interface arguments and run blockorder."""
    args = parse_cli_args()
    exit_status = main(args=args)
    sys.exit(exit_status)


def _emit(data: dict, out: str = None):
    """Writes a JSON result to a file, or to stdout without one."""
    if out:
        write_json(out, data)
        logging.info("Wrote %s", out)
    else:
        print(json.dumps(data, indent=2, sort_keys=True))  # noqa: T001


def _bundled_configs() -> list:
    return sorted(x[:-5] for x in os.listdir(CONFIG_DIR) if x.endswith('.yaml'))


def _initial_labels(path: str):
    z1 = load_labels(path)
    return z1.at(0) if isinstance(z1, LabelPath) else z1


def _scenario_from_config(config: dict, n: int, seed: int,
                          model: str = None) -> Scenario:
    """Samples the scenario a simulation config names, or its parameters."""
    scenario = config.get('scenario', 'custom')
    if scenario == 'fig1':
        return scenario_fig1(n, seed, config.get('T', 5),
                             config.get('iid_layers', True))
    elif scenario == 'sparse_table1':
        return scenario_sparse_table1(config['rho'], seed, n,
                                      config.get('T', 4))
    elif scenario == 'rate_study':
        return scenario_rate_study(n, config.get('T', 1), seed)
    from blockorder.experiments.accuracy import params_from_config
    model = model or config.get('model') or \
        ('dyn' if 'trans' in config else 'ml')
    params = params_from_config(dict(config, model=model))
    if model == 'dyn':
        labels, graph = sample_dynsbm(n, params, seed)
    else:
        labels, graph = sample_mlsbm(n, params, seed)
    return Scenario(params, labels, graph)


def simulate(args) -> int:
    config = check_syntax(args.config, 'simulation')
    if config is None:
        return 1
    scenario = config.get('scenario', 'custom')
    result = _scenario_from_config(config, config['n'], args.seed, args.model)
    save_graph(result.graph, args.out)
    # Same layout as a label file, so it can be passed to --z1
    truth = args.out + '.truth.json'
    write_json(truth, {'k': result.labels.k,
                       'labels': result.labels.to_one_based(),
                       'params': result.params.to_dict(), 'seed': args.seed,
                       'scenario': scenario})
    logging.info("Saved the true labels and parameters to %s", truth)
    return 0


def evidence(args) -> int:
    g = load_graph(args.graph)
    if args.engine == 'vbem':
        if args.z1:
            logging.error("The vbem engine has no dynamic model; use "
                          "--engine exact with --z1")
            return 1
        engine = VbemEngine(VbemConfig(max_iters=args.max_iters, tol=args.tol,
                                       restarts=args.restarts))
        result = engine.log_evidence(g, args.k, args.seed)
    else:
        engine = ExactEngine(args.budget or DEFAULT_BUDGET)
        if args.z1:
            result = engine.log_evidence_dyn(g, _initial_labels(args.z1),
                                             args.k)
        else:
            result = engine.log_evidence(g, args.k)
    _emit(result.to_dict())
    return 0


def select(args) -> int:
    g = load_graph(args.graph)
    k_max = g.n if args.full_sweep else args.kmax
    cfg = PenaltyConfig(args.epsilon)
    budget = args.budget or DEFAULT_BUDGET
    if args.model == 'dyn':
        if not args.z1:
            logging.error("The dynamic model needs the initial labels (--z1)")
            return 1
        report = select_k_dyn(g, _initial_labels(args.z1), k_max, cfg,
                              args.seed, budget)
    else:
        report = select_k_ml(g, k_max, cfg, args.engine, args.seed,
                             VbemConfig(restarts=args.restarts), budget,
                             progress=True)
    if args.csv:
        import csv
        with open(args.csv, 'w', encoding='utf-8', newline='') as outfile:
            csv.writer(outfile, lineterminator='\n').writerows(
                report.csv_rows())
        logging.info("Wrote %s", args.csv)
    _emit(report.to_dict(), args.out)
    return 0


def baseline(args) -> int:
    g = load_graph(args.graph)
    k_max = args.kmax or min(g.n, 15)
    if args.method == 'bhmc':
        per_layer = [bhmc_select(g.layer(t), k_max) for t in range(g.T)]
        result = {'method': 'bhmc',
                  'per_layer': [s.k for s in per_layer],
                  'empty_graph': [s.empty_graph for s in per_layer]}
    else:
        per_layer = layerwise_selections(g, k_max, engine=args.engine,
                                         seed=args.seed)
        result = {'method': 'layerwise-kt', 'per_layer': per_layer}
    result['k_hat'] = max(result['per_layer'])
    _emit(result)
    return 0


def experiment(args) -> int:
    path = args.config
    if not exists(path) and args.config in _bundled_configs():
        path = join(CONFIG_DIR, args.config + '.yaml')
    data = check_syntax(path, 'experiment')
    if data is None:
        return 1
    overrides = {'workers': args.workers, 'out_dir': args.out_dir,
                 'master_seed': args.master_seed}
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig.from_dict(data, paper_scale=args.paper_scale)
    start = timeit.default_timer()
    result = run_experiment(cfg)
    grid = make_experiment(cfg).grid()
    write_results(cfg.out_dir, cfg, grid, result)
    for cell in result.summary:
        logging.info("%-14s n=%-5d T=%-3d %s accuracy %s (%d graphs%s)",
                     cell.method, cell.point.n, cell.point.T,
                     '' if cell.point.rho is None else 'rho=%g' % cell.point.rho,
                     'n/a' if cell.accuracy is None else
                     '%.3f' % cell.accuracy, cell.graphs,
                     '' if cell.complete else ', incomplete')
    logging.info("Finished %s in %s", cfg.name,
                 format_timespan(timeit.default_timer() - start))
    return 0


def concentration(args) -> int:
    config = check_syntax(args.config, 'simulation')
    if config is None:
        return 1
    n = args.n or config['n']
    params = _scenario_from_config(config, n, args.seed).params
    if not isinstance(params, MlParams):
        logging.error("The concentration check needs multi-layer parameters")
        return 1
    rho = config.get('rho', 1.0) \
        if config.get('scenario') == 'sparse_table1' else 1.0
    result = concentration_check(params, n, args.replications, args.xi, rho,
                                 args.seed, progress=True)
    logging.info("Largest exceedance rate over %d replications: %.4f",
                 result.replications, result.exceedance.max())
    _emit(dict(result.to_dict(), n=n, rho=rho), args.out)
    return 0


def _print_listing(args) -> int:
    if args.list_configs:
        print("Experiment configs that can be printed "  # noqa: T001
              "using --print-config <name>")
        print("Name".ljust(25) + "Scenario".ljust(16) + "Replications")  # noqa: T001
        for name in _bundled_configs():
            data = parse_yaml(join(CONFIG_DIR, name + '.yaml')) or {}
            print(name.ljust(25) + str(data.get('scenario')).ljust(16)  # noqa: T001
                  + str(data.get('replications', '')))
    elif args.print_config:
        if args.print_config not in _bundled_configs():
            logging.error("Invalid config: %s", args.print_config)
            return 1
        with open(join(CONFIG_DIR, args.print_config + '.yaml'),
                  encoding='utf-8') as file:
            print(file.read())  # noqa: T001
    else:
        filename = join(SPEC_DIR, args.print_spec + '-specification.yaml')
        with open(filename, encoding='utf-8') as file:
            print(file.read())  # noqa: T001
    return 0


COMMANDS = {
    'simulate': simulate,
    'evidence': evidence,
    'select': select,
    'baseline': baseline,
    'experiment': experiment,
    'concentration': concentration,
}


@handle_keyboard_interrupt
def main(args) -> int:
    """
    :param args: Parsed command line arguments
    :return: The exit status of the program
    """
    colors = (False if args.no_color else True)
    setup_logging(filename=args.log_file, colors=colors,
                  console_verbose=args.verbose)

    command = args.command
    try:
        # Just validate syntax, run nothing
        if command == 'validate':
            spec = check_syntax(args.spec, args.validate_type)
            if spec is None:
                return 1
            if args.validate_type == 'experiment':
                ExperimentConfig.from_dict(spec)
            logging.info("%s is a valid %s config", basename(args.spec),
                         args.validate_type)
        elif command in COMMANDS:
            return COMMANDS[command](args)
        elif args.list_configs or args.print_config or args.print_spec:
            return _print_listing(args)
        else:
            logging.error("Invalid arguments. Argument dump:\n%s",
                          str(vars(args)))
            return 1
    except COMMAND_ERRORS as err:
        logging.error("%s failed: %s", command, err)
        return 1

    # Finished successfully
    return 0

import argparse
import sys
from typing import List, Optional

from blockorder.__about__ import __version__

description = """
blockorder: penalized Krichevsky-Trofimov estimation of the number of
communities in multi-layer and dynamic stochastic block models.

Examples:
    blockorder --list-configs
    blockorder --print-config fig1 | blockorder validate -
    blockorder simulate --model ml --config params.yaml --seed 7 --out g.json
    blockorder evidence --engine exact --k 2 --graph g.json
    blockorder select --model ml --graph g.json --kmax 6 --out report.json
    blockorder select --model dyn --graph g.json --z1 z1.json --kmax 3
    blockorder baseline --method bhmc --graph g.json --kmax 15
    blockorder -v experiment --config sparse.yaml --workers 4 --out-dir out/
    blockorder concentration --config params.yaml --n 500 --xi 0.05
"""


epilog = """
License:    Apache 2.0
Project:    https://github.com/blockorder/blockorder
"""


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('--seed', type=int, default=0, metavar='SEED',
                        help='Random seed (default: %(default)s)')


def parse_cli_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    main_parser = argparse.ArgumentParser(
        prog='blockorder', formatter_class=argparse.RawDescriptionHelpFormatter,
        description=description, epilog=epilog
    )
    main_parser.set_defaults(command='main')
    main_parser.add_argument('--version', action='version',
                             version='blockorder %s' % __version__)
    main_parser.add_argument('-v', '--verbose', action='store_true',
                             help='Emit debugging logs to terminal')
    main_parser.add_argument('--no-color', action='store_true',
                             help='Do not color terminal output')
    main_parser.add_argument('--log-file', type=str, metavar='FILE',
                             help='Also save DEBUG logs to a file')

    # Config/spec printing
    configs = main_parser.add_argument_group(title='Print configs and specs')
    configs.add_argument('--list-configs', action='store_true',
                         help='Prints the list of bundled experiment configs')
    configs.add_argument('--print-config', type=str, metavar='NAME',
                         help='Prints the named experiment config')
    configs.add_argument('--print-spec', type=str, metavar='NAME',
                         choices=['experiment', 'simulation'],
                         help='Prints the named configuration specification')

    subs = main_parser.add_subparsers(title='blockorder Subcommands')

    # Simulate
    simulate = subs.add_parser(name='simulate',
                               help='Sample a graph collection')
    simulate.set_defaults(command='simulate')
    simulate.add_argument('--model', choices=['ml', 'dyn'],
                          help='Model of a parameter config (default: '
                               'inferred from the config)')
    simulate.add_argument('--config', required=True,
                          help='Simulation config (YAML or JSON)')
    simulate.add_argument('--out', required=True,
                          help='Output graph file (.json for JSON, '
                               'anything else for BOGC)')
    _add_common(simulate)

    # Evidence
    evidence = subs.add_parser(name='evidence',
                               help='Log KT evidence of one order')
    evidence.set_defaults(command='evidence')
    evidence.add_argument('--engine', choices=['exact', 'vbem'],
                          default='exact', help='Evidence engine')
    evidence.add_argument('--k', type=int, required=True,
                          help='Number of communities')
    evidence.add_argument('--graph', required=True, help='Graph file')
    evidence.add_argument('--z1', help='Initial labels (dynamic model, '
                                       'exact engine only)')
    evidence.add_argument('--restarts', type=int, default=5,
                          help='VBEM restarts')
    evidence.add_argument('--tol', type=float, default=1e-7,
                          help='VBEM relative tolerance')
    evidence.add_argument('--max-iters', type=int, default=500,
                          help='VBEM iteration cap')
    evidence.add_argument('--budget', type=int,
                          help='Exact enumeration budget')
    _add_common(evidence)

    # Select
    select = subs.add_parser(name='select',
                             help='Estimate the number of communities')
    select.set_defaults(command='select')
    select.add_argument('--model', choices=['ml', 'dyn'], default='ml',
                        help='Model (default: %(default)s)')
    select.add_argument('--graph', required=True, help='Graph file')
    select.add_argument('--z1', help='Initial labels (dynamic model)')
    select.add_argument('--kmax', type=int,
                        help='Largest candidate order (default: min(n, 15))')
    select.add_argument('--full-sweep', action='store_true',
                        help='Sweep every order 1..n')
    select.add_argument('--engine', choices=['auto', 'exact', 'vbem'],
                        default='auto', help='Evidence engine')
    select.add_argument('--epsilon', type=float, default=1e-3,
                        help='Penalty epsilon (default: %(default)s)')
    select.add_argument('--restarts', type=int, default=5,
                        help='VBEM restarts')
    select.add_argument('--budget', type=int,
                        help='Exact enumeration budget')
    select.add_argument('--out', help='Write the JSON report to a file')
    select.add_argument('--csv', help='Write the per-k scores as CSV')
    _add_common(select)

    # Baseline
    baseline = subs.add_parser(name='baseline',
                               help='Run a baseline order selector')
    baseline.set_defaults(command='baseline')
    baseline.add_argument('--method', choices=['bhmc', 'layerwise-kt'],
                          required=True, help='Baseline method')
    baseline.add_argument('--graph', required=True, help='Graph file')
    baseline.add_argument('--kmax', type=int,
                          help='Largest order (default: min(n, 15))')
    baseline.add_argument('--engine', choices=['auto', 'exact', 'vbem'],
                          default='auto', help='Engine of layerwise-kt')
    _add_common(baseline)

    # Experiment
    experiment = subs.add_parser(name='experiment',
                                 help='Run a Monte-Carlo experiment')
    experiment.set_defaults(command='experiment')
    experiment.add_argument('--config', required=True,
                            help='Experiment config file or bundled '
                                 'config name')
    experiment.add_argument('--paper-scale', action='store_true',
                            help='Use the full published grids')
    experiment.add_argument('--out-dir', help='Output directory')
    experiment.add_argument('--workers', type=int,
                            help='Number of worker processes')
    experiment.add_argument('--master-seed', type=int,
                            help='Override the master seed')

    # Concentration
    concentration = subs.add_parser(
        name='concentration',
        help='Check that block edge counts concentrate')
    concentration.set_defaults(command='concentration')
    concentration.add_argument('--config', required=True,
                               help='Multi-layer simulation config')
    concentration.add_argument('--n', type=int,
                               help='Number of nodes (default: n of the '
                                    'config)')
    concentration.add_argument('--replications', type=int, default=100,
                               help='Simulated collections '
                                    '(default: %(default)s)')
    concentration.add_argument('--xi', type=float, required=True,
                               help='Deviation threshold')
    concentration.add_argument('--out', help='Write the JSON result to a file')
    _add_common(concentration)

    # Validate
    validate = subs.add_parser(name='validate',
                               help='Validate the syntax of a config')
    validate.set_defaults(command='validate')
    validate.add_argument('-t', '--validate-type', type=str,
                          metavar='TYPE', default='experiment',
                          choices=['experiment', 'simulation'],
                          help='Type of config to validate')
    validate.add_argument('spec', help='The config file to validate '
                                       '("-" for stdin)')

    argv = sys.argv[1:] if argv is None else argv
    # Default to printing usage if no arguments are provided
    if not argv:
        main_parser.print_usage()
        sys.exit(1)

    return main_parser.parse_args(argv)

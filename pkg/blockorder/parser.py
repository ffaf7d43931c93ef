import logging
import os
import sys
from typing import Optional, Tuple

import yaml

from blockorder.experiments.experiment_base import (DESIGNS, ENGINES,
                                                    METHODS, SCENARIOS)

# libyaml bindings are much faster on large parameter blocks
YamlLoader = getattr(yaml, 'CSafeLoader', yaml.SafeLoader)

EXPERIMENT_KEYS = ('scenario', 'n_grid', 'T', 'replications', 'k_max',
                   'epsilon', 'engine', 'engines', 'methods', 'master_seed',
                   'workers', 'out_dir', 'rho_grid', 'base_n_grid', 't_grid',
                   'designs', 'params', 'iid_layers', 'vbem', 'budget', 'name')
SIMULATION_KEYS = ('scenario', 'model', 'n', 'T', 'rho', 'pi', 'trans', 'P',
                   'alpha', 'iid_layers')
VBEM_KEYS = ('max_iters', 'tol', 'restarts', 'init')


def parse_yaml(filename: str) -> Optional[dict]:
    """Loads a YAML document. JSON documents load too, being valid YAML.

    :param filename: Path of the document, or '-' to read stdin
    :return: The document, or None if it can't be read or parsed"""
    try:
        # stdin stays open for the rest of the process
        if filename == '-':
            return yaml.load(sys.stdin, Loader=YamlLoader)
        with open(filename, encoding='utf-8') as stream:
            return yaml.load(stream, Loader=YamlLoader)
    except FileNotFoundError:
        logging.critical("Config file %s does not exist", filename)
    except yaml.YAMLError as exc:
        logging.critical("Invalid YAML in %s", filename)
        mark = getattr(exc, 'problem_mark', None)
        if mark is not None:
            logging.error("Problem at line %d, column %d: %s", mark.line + 1,
                          mark.column + 1, getattr(exc, 'problem', exc))
        else:
            logging.error("%s", exc)
    return None


def _checker(value_list: list, source: str, data: dict, flag: str) -> int:
    """Counts the keys of ``value_list`` absent from ``data``, logging each
    one at the level named by ``flag``.

    :param value_list: Keys that should be present
    :param source: Name of the block being checked, for the log
    :param data: Block being checked
    :param flag: "errors" for required keys, "warnings" for recommended ones
    :return: Number of absent keys"""
    missing = [key for key in value_list if key not in data]
    if flag not in ("errors", "warnings"):
        logging.error("_checker called with unknown flag '%s'", flag)
    for key in missing:
        if flag == "warnings":
            logging.warning("%s has no '%s'", source, key)
        else:
            logging.error("%s is missing the required key '%s'", source, key)
    if missing:
        logging.info("%d %s in %s", len(missing), flag, source)
    return len(missing)


def _unknown_keys(data: dict, allowed: tuple, source: str) -> int:
    unknown = sorted(set(data) - set(allowed))
    for key in unknown:
        logging.error("Unknown key '%s' in %s", key, source)
    return len(unknown)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_positive_int(data: dict, key: str, source: str,
                        minimum: int = 1) -> int:
    if key in data and not (_is_int(data[key]) and data[key] >= minimum):
        logging.error("%s in %s must be an integer >= %d", key, source,
                      minimum)
        return 1
    return 0


def _check_int_list(data: dict, key: str, source: str) -> int:
    if key not in data:
        return 0
    values = data[key]
    if not isinstance(values, list) or not values or \
            not all(_is_int(v) and v >= 1 for v in values):
        logging.error("%s in %s must be a non-empty list of positive "
                      "integers", key, source)
        return 1
    return 0


def _check_choices(data: dict, key: str, source: str, choices) -> int:
    if key not in data:
        return 0
    values = data[key] if isinstance(data[key], list) else [data[key]]
    bad = [v for v in values if v not in choices]
    if bad or not values:
        logging.error("Invalid %s in %s: %s (choose from %s)", key, source,
                      bad, ", ".join(choices))
        return 1
    return 0


def _check_matrix_block(params: dict, source: str) -> Tuple[int, int]:
    num_errors = 0
    model = params.get("model")
    if model == "dyn":
        num_errors += _checker(["trans", "P"], source, params, "errors")
    elif model == "ml":
        num_errors += _checker(["pi", "P"], source, params, "errors")
    else:
        logging.error("model in %s must be 'ml' or 'dyn', got %r",
                      source, model)
        num_errors += 1
    for key in ("pi", "trans", "P", "alpha"):
        if key in params and not isinstance(params[key], list):
            logging.error("%s in %s must be a list", key, source)
            num_errors += 1
    return num_errors, 0


def verify_experiment_syntax(spec: dict) -> Tuple[int, int]:
    """Verifies that an experiment configuration matches its specification.

    :param spec: Experiment configuration
    :return: Number of errors, Number of warnings"""
    source = "experiment"
    num_errors = _checker(["scenario"], source, spec, "errors")
    num_warnings = _checker(["name", "replications", "master_seed"], source,
                            spec, "warnings")
    num_errors += _unknown_keys(spec, EXPERIMENT_KEYS, source)
    num_errors += _check_choices(spec, "scenario", source, SCENARIOS)
    num_errors += _check_choices(spec, "methods", source, METHODS)
    num_errors += _check_choices(spec, "designs", source, DESIGNS)
    for key in ("engine", "engines"):
        num_errors += _check_choices(spec, key, source, ENGINES)
    for key in ("n_grid", "base_n_grid", "t_grid"):
        num_errors += _check_int_list(spec, key, source)
    for key in ("T", "k_max", "workers", "budget"):
        num_errors += _check_positive_int(spec, key, source)
    for key in ("replications", "master_seed"):
        num_errors += _check_positive_int(spec, key, source, minimum=0)
    if "epsilon" in spec and not (_is_number(spec["epsilon"]) and
                                  spec["epsilon"] > 0):
        logging.error("epsilon must be a positive number")
        num_errors += 1
    if "rho_grid" in spec:
        rho = spec["rho_grid"]
        if not isinstance(rho, list) or not rho or \
                not all(_is_number(r) and 0 < r <= 1 for r in rho):
            logging.error("rho_grid must be a list of values in (0, 1]")
            num_errors += 1

    scenario = spec.get("scenario")
    if scenario in ("fig1", "sparse_table1", "custom") and \
            "n_grid" not in spec:
        if scenario == "custom":
            logging.error("Missing n_grid in %s", source)
            num_errors += 1
        else:
            logging.info("No n_grid given, using the default grid")
    if scenario == "custom":
        if not isinstance(spec.get("params"), dict):
            logging.error("A custom experiment needs a params block")
            num_errors += 1
        else:
            e, w = _check_matrix_block(spec["params"], "params")
            num_errors += e
            num_warnings += w
    elif "params" in spec:
        logging.warning("params is only used by custom experiments")
        num_warnings += 1
    if "vbem" in spec:
        if not isinstance(spec["vbem"], dict):
            logging.error("vbem must be a mapping")
            num_errors += 1
        else:
            num_errors += _unknown_keys(spec["vbem"], VBEM_KEYS, "vbem")
            for key in ("max_iters", "restarts"):
                num_errors += _check_positive_int(spec["vbem"], key, "vbem")
            num_errors += _check_choices(spec["vbem"], "init", "vbem",
                                         ("spectral", "random"))
    return num_errors, num_warnings


def verify_simulation_syntax(spec: dict) -> Tuple[int, int]:
    """Verifies that a simulation configuration matches its specification.

    :param spec: Simulation configuration
    :return: Number of errors, Number of warnings"""
    source = "simulation"
    num_errors = _checker(["n"], source, spec, "errors")
    num_warnings = 0
    num_errors += _unknown_keys(spec, SIMULATION_KEYS, source)
    num_errors += _check_positive_int(spec, "n", source)
    num_errors += _check_positive_int(spec, "T", source)
    scenario = spec.get("scenario", "custom")
    num_errors += _check_choices({"scenario": scenario}, "scenario", source,
                                 ("custom", "fig1", "sparse_table1",
                                  "rate_study"))
    if scenario == "custom":
        if "model" not in spec:
            num_warnings += _checker(["model"], source, spec, "warnings")
            spec = dict(spec, model="dyn" if "trans" in spec else "ml")
        e, w = _check_matrix_block(spec, source)
        num_errors += e
        num_warnings += w
    elif scenario == "sparse_table1":
        num_errors += _checker(["rho"], source, spec, "errors")
    return num_errors, num_warnings


CHECKERS = {"experiment": verify_experiment_syntax,
            "simulation": verify_simulation_syntax}


def check_syntax(specfile_path: str,
                 spec_type: str = "experiment") -> Optional[dict]:
    """Loads a configuration file and checks it against its schema.

    :param specfile_path: Path to the YAML or JSON configuration file
    :param spec_type: Type of configuration file (experiment | simulation)
    :return: The configuration, or None if it has errors"""
    name = os.path.basename(specfile_path)
    verify = CHECKERS.get(spec_type)
    if verify is None:
        logging.error("No syntax checker for configuration type '%s'",
                      spec_type)
        return None
    spec = parse_yaml(specfile_path)
    if not isinstance(spec, dict):
        if spec is not None:
            logging.error("%s must hold a mapping of keys to values", name)
        return None
    logging.info("Checking %s syntax of '%s'", spec_type, name)
    errors, warnings = verify(spec)
    if errors:
        logging.error("%s has %d errors and %d warnings", name, errors,
                      warnings)
        return None
    if warnings:
        logging.warning("%s is usable but has %d warnings", name, warnings)
    else:
        logging.info("%s is valid", name)
    return spec

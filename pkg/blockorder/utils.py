import functools
import json
import logging
import os
import sys
import timeit
import zlib
from typing import Callable, List, Optional

import numpy as np
from colorlog import ColoredFormatter
from humanfriendly import format_timespan
from tqdm import tqdm

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)-12s %(message)s"
TIME_FORMAT = "%H:%M:%S"

# Root handlers installed by setup_logging
_HANDLERS: List[logging.Handler] = []


class TqdmHandler(logging.StreamHandler):
    """Console handler that cooperates with active tqdm progress bars.

    Records go to stderr since stdout carries command output (JSON reports)."""

    def emit(self, record):
        try:
            tqdm.write(self.format(record), file=sys.stderr)
            self.flush()
        except (KeyboardInterrupt, SystemExit):
            raise
        except Exception:  # noqa: B902
            self.handleError(record)


def time_execution(func: Callable) -> Callable:
    """Decorator that logs the wall time of each call at DEBUG.

    :param func: Function to time
    :return: The wrapped function"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        started = timeit.default_timer()
        try:
            return func(*args, **kwargs)
        finally:
            logging.debug("%s took %s", func.__name__,
                          format_timespan(timeit.default_timer() - started,
                                          detailed=True))
    return wrapper


def stream_seed(master_seed: int, *keys: int) -> int:
    """Derives a 64-bit seed for an independent random stream.

    The derivation is ``SeedSequence(master_seed, spawn_key=keys)``, whose
    first 64-bit output word becomes the new seed. Distinct key tuples give
    statistically independent streams, so replications and methods can be
    addressed by ``(grid point, replication, method)`` without coordination.

    >>> stream_seed(7, 0, 1) == stream_seed(7, 0, 1)
    True

    :param master_seed: Non-negative master seed
    :param keys: Non-negative integers naming the stream
    :return: Derived seed in [0, 2**64)"""
    seq = np.random.SeedSequence(int(master_seed),
                                 spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def method_key(name: str) -> int:
    """Stable integer key for a method name (CRC32 of its UTF-8 bytes)."""
    return zlib.crc32(name.encode('utf-8'))


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Creates the Philox counter-based generator used for all randomness.

    :param seed: 64-bit seed
    :param keys: Optional stream keys, see :func:`stream_seed`
    :return: Seeded generator"""
    seq = np.random.SeedSequence(int(seed),
                                 spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def read_json(filename: str) -> Optional[dict]:
    """Loads a JSON document, logging the problem instead of raising.

    :param filename: Path of the document
    :return: The decoded document, or None if it can't be read"""
    try:
        with open(filename, encoding='utf-8') as handle:
            return json.load(handle)
    except FileNotFoundError:
        logging.error("JSON file %s does not exist", filename)
    except ValueError as err:
        logging.error("Malformed JSON in '%s': %s", filename, err)
    except OSError as err:
        logging.error("Failed to read JSON file '%s': %s", filename, err)
    return None


def write_json(filename: str, data: dict):
    """Writes data to a JSON file with sorted keys and a trailing newline."""
    with open(filename, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write('\n')


def handle_keyboard_interrupt(func: Callable) -> Callable:
    """Decorator that turns Ctrl-C into a clean exit with status 0."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KeyboardInterrupt:
            print(file=sys.stderr)  # noqa: T001
            logging.info("Interrupted, stopping")
            sys.exit(0)
    return wrapper


def _log_environment(filename: Optional[str]):
    import platform
    from datetime import date

    import scipy
    import sklearn

    from blockorder import __version__
    logging.debug("Log file           %s", filename)
    logging.debug("Date               %s", date.today())
    logging.debug("Platform           %s", platform.platform())
    logging.debug("Working directory  %s", os.getcwd())
    logging.debug("Python version     %s", platform.python_version())
    for name, version in (("blockorder", __version__),
                          ("numpy", np.__version__),
                          ("scipy", scipy.__version__),
                          ("scikit-learn", sklearn.__version__)):
        logging.debug("%-18s %s", name, version)


def setup_logging(filename: Optional[str] = None, colors: bool = True,
                  console_verbose: bool = False,
                  show_progress: bool = True):
    """Sets up the root logger for the command line tool.

    :param filename: Optional file receiving every DEBUG record
    :param colors: Color console records (ignored when NO_COLOR is set)
    :param console_verbose: Show DEBUG records on the console
    :param show_progress: Route console records through tqdm so they
    don't break progress bars"""
    root = logging.getLogger()
    # Repeated calls replace the handlers of the previous one
    while _HANDLERS:
        handler = _HANDLERS.pop()
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG)
    plain = logging.Formatter(fmt=LOG_FORMAT, datefmt=TIME_FORMAT)

    if filename is not None:
        # Blank lines between runs appended to the same file
        with open(filename, 'a', encoding='utf-8') as handle:
            handle.write('\n\n')
        file_handler = logging.FileHandler(filename, mode='a',
                                           encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(plain)
        root.addHandler(file_handler)
        _HANDLERS.append(file_handler)

    console = TqdmHandler() if show_progress \
        else logging.StreamHandler(stream=sys.stderr)
    if colors and "NO_COLOR" not in os.environ:
        console.setFormatter(ColoredFormatter(
            fmt="%(log_color)s" + LOG_FORMAT, datefmt=TIME_FORMAT,
            reset=True))
    else:
        console.setFormatter(plain)
    console.setLevel(logging.DEBUG if console_verbose else logging.INFO)
    root.addHandler(console)
    _HANDLERS.append(console)

    # numpy, scipy and scikit-learn report numerical trouble as warnings
    logging.captureWarnings(True)
    _log_environment(filename)

"""Graph collection and label serialization.

Two graph formats round-trip exactly:

* JSON: ``{"n": n, "T": T, "layers": [[[0, 1, ...], ...], ...]}``
* BOGC binary: the magic bytes ``BOGC``, then ``n`` and ``T`` as
  little-endian unsigned 32-bit integers, then for every layer the strict
  upper triangle read row-major (pairs (0,1), (0,2), ..., (n-2,n-1)),
  packed 8 edges per byte, most significant bit first. Each layer is padded
  with zero bits to a whole byte.

Label files are JSON with 1-based labels: ``{"labels": [...]}`` for a
labeling, or a list of T lists for a label path.
"""
import json
import logging
import struct
from typing import Union

import numpy as np

from blockorder.model import (GraphCollection, LabelAssignment, LabelPath,
                              ModelException)
from blockorder.utils import read_json, write_json

MAGIC = b"BOGC"
_HEADER = struct.Struct("<4sII")


def graph_to_dict(g: GraphCollection) -> dict:
    return {"n": g.n, "T": g.T, "layers": g.layers.tolist()}


def graph_from_dict(data: dict) -> GraphCollection:
    """Builds a graph collection from its JSON document.

    :raises ModelException: If the document is malformed"""
    for key in ("n", "T", "layers"):
        if key not in data:
            raise ModelException("Graph document is missing '%s'" % key)
    g = GraphCollection(np.asarray(data["layers"], dtype=np.int64))
    if g.n != int(data["n"]) or g.T != int(data["T"]):
        raise ModelException("Graph document declares n=%s, T=%s but holds "
                             "n=%d, T=%d" % (data["n"], data["T"], g.n, g.T))
    return g


def to_bogc(g: GraphCollection) -> bytes:
    rows, cols = np.triu_indices(g.n, k=1)
    chunks = [_HEADER.pack(MAGIC, g.n, g.T)]
    for t in range(g.T):
        chunks.append(np.packbits(g.layers[t][rows, cols]).tobytes())
    return b"".join(chunks)


def from_bogc(blob: bytes) -> GraphCollection:
    """Decodes the BOGC binary form.

    :raises ModelException: On a bad magic number or a truncated payload"""
    if len(blob) < _HEADER.size:
        raise ModelException("BOGC payload is too short for its header")
    magic, n, T = _HEADER.unpack_from(blob)  # noqa: N806
    if magic != MAGIC:
        raise ModelException("Not a BOGC payload (magic %r)" % magic)
    pairs = n * (n - 1) // 2
    layer_bytes = (pairs + 7) // 8
    expected = _HEADER.size + T * layer_bytes
    if len(blob) != expected:
        raise ModelException("BOGC payload has %d bytes, expected %d"
                             % (len(blob), expected))
    rows, cols = np.triu_indices(n, k=1)
    layers = np.zeros((T, n, n), dtype=np.uint8)
    offset = _HEADER.size
    for t in range(T if pairs else 0):
        packed = np.frombuffer(blob, dtype=np.uint8, count=layer_bytes,
                               offset=offset)
        bits = np.unpackbits(packed)[:pairs]
        layers[t, rows, cols] = bits
        layers[t, cols, rows] = bits
        offset += layer_bytes
    return GraphCollection(layers)


def save_graph(g: GraphCollection, path: str):
    """Writes a graph collection; ``.json`` paths get JSON, anything else BOGC."""
    if path.lower().endswith(".json"):
        write_json(path, graph_to_dict(g))
    else:
        with open(path, "wb") as handle:
            handle.write(to_bogc(g))
    logging.info("Saved graph collection (n=%d, T=%d) to %s", g.n, g.T, path)


def load_graph(path: str) -> GraphCollection:
    """Reads a graph collection in either format (detected by magic bytes).

    :raises ModelException: If the file cannot be read or decoded"""
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as err:
        raise ModelException("Could not read graph file %s: %s"
                             % (path, err)) from None
    if blob[:4] == MAGIC:
        g = from_bogc(blob)
    else:
        try:
            data = json.loads(blob.decode("utf-8"))
        except ValueError as err:
            raise ModelException("Graph file %s is neither BOGC nor JSON: %s"
                                 % (path, err)) from None
        g = graph_from_dict(data)
    logging.debug("Loaded %r from %s", g, path)
    return g


def load_labels(path: str, k: int = None) -> Union[LabelAssignment, LabelPath]:
    """Reads 1-based labels written by :func:`save_labels` or the simulator.

    :raises ModelException: If the file is missing or malformed"""
    data = read_json(path)
    if data is None:
        raise ModelException("Could not read label file %s" % path)
    if isinstance(data, dict):
        if "labels" not in data:
            raise ModelException("Label file %s has no 'labels' entry" % path)
        data = data["labels"]
    if data and isinstance(data[0], list):
        return LabelPath.from_one_based(data, k)
    return LabelAssignment.from_one_based(data, k)


def save_labels(z: Union[LabelAssignment, LabelPath], path: str):
    write_json(path, {"k": z.k, "labels": z.to_one_based()})

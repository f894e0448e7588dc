"""Trace formulae and spectral tools for d-regular graphs."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .exceptions import *  # noqa: E402,F401,F403
from .graph_model import (RegularGraph, build_graph, complete_graph,  # noqa: E402,F401
                          petersen_graph, read_graph, write_graph)

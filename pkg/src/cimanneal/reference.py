"""Best-known cut values for the standard benchmark graphs and a file locator.

The graph files themselves are not bundled.  Point ``CIMANNEAL_DATA_DIR``
(or the ``data_dir`` argument) at a directory holding them in GSet format,
named e.g. ``G1``, ``G1.txt`` or ``g1.txt``.
"""

import os
from pathlib import Path

from .graph import read_gset

# Breakout local search (Benlic & Hao, 2013) best-known cuts.
BEST_KNOWN_CUTS = {
    "G1": 11624,
    "G2": 11620,
    "G3": 11622,
    "G4": 11646,
    "G5": 11631,
    "G6": 2178,
    "G7": 2006,
    "G8": 2005,
    "G9": 2054,
    "G10": 2000,
    "G22": 13359,
    "G39": 2408,
    "K2000": 33337,
}

GSET_800 = [f"G{k}" for k in range(1, 11)]
LARGE_GRAPHS = ["G22", "G39", "K2000"]

DATA_ENV = "CIMANNEAL_DATA_DIR"


def data_dirs(data_dir=None):
    dirs = []
    if data_dir is not None:
        dirs.append(Path(data_dir))
    if os.environ.get(DATA_ENV):
        dirs.extend(Path(p) for p in os.environ[DATA_ENV].split(os.pathsep) if p)
    dirs.append(Path.cwd() / "data")
    return dirs


def find_graph_file(name, data_dir=None):
    """Return the path of benchmark graph ``name`` or None if it is not available."""
    candidates = [name, f"{name}.txt", name.lower(), f"{name.lower()}.txt", f"{name}.gset"]
    for d in data_dirs(data_dir):
        for c in candidates:
            p = d / c
            if p.is_file():
                return p
    return None


def load_graph(name, data_dir=None):
    path = find_graph_file(name, data_dir)
    if path is None:
        searched = ", ".join(str(d) for d in data_dirs(data_dir))
        raise FileNotFoundError(f"benchmark graph {name} not found (searched: {searched}; set {DATA_ENV})")
    return read_gset(path, name=name)

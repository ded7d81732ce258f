"""Ising problem instances: storage, GSet I/O, random generation and evaluation.

Sign conventions used throughout the package::

    H(sigma)   = -1/2 * sum_{i,j} J_ij sigma_i sigma_j
    cut(sigma) = -1/2 * sum_{i<j} J_ij (1 - sigma_i sigma_j)

so that a GSet edge of weight ``w`` is stored as ``J_ij = -w`` and maximizing
the cut is the same as minimizing the energy.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import GSetParseError

DENSE_THRESHOLD = 0.10


class IsingProblem:
    """Immutable symmetric, zero-diagonal coupling matrix.

    Parameters
    ----------
    couplings : array-like or scipy sparse matrix, shape (n, n)
        Must be exactly symmetric with a zero diagonal.
    name : str
    storage : {"dense", "sparse"} or None
        ``None`` picks dense when at least 10% of the off-diagonal entries are
        nonzero.
    """

    __slots__ = ("_J", "n", "storage", "name", "_pair_sum", "_nnz")

    def __init__(self, couplings, name="", storage=None):
        if sp.issparse(couplings):
            J = sp.csr_matrix(couplings, dtype=np.float64)
            J.sum_duplicates()
            J.eliminate_zeros()
        else:
            J = np.array(couplings, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError(f"couplings must be a square matrix, got shape {J.shape}")
        n = J.shape[0]
        if n < 1:
            raise ValueError("problem needs at least one node")

        if sp.issparse(J):
            if not np.all(np.isfinite(J.data)):
                raise ValueError("couplings must be finite")
            if J.diagonal().any():
                raise ValueError("couplings must have a zero diagonal")
            if (J != J.T).nnz:
                raise ValueError("couplings must be symmetric")
            nnz = J.nnz
        else:
            if not np.all(np.isfinite(J)):
                raise ValueError("couplings must be finite")
            if np.any(np.diag(J) != 0):
                raise ValueError("couplings must have a zero diagonal")
            if not np.array_equal(J, J.T):
                raise ValueError("couplings must be symmetric")
            nnz = int(np.count_nonzero(J))

        if storage is None:
            density = nnz / (n * (n - 1)) if n > 1 else 1.0
            storage = "dense" if density >= DENSE_THRESHOLD else "sparse"
        if storage == "dense":
            J = J.toarray() if sp.issparse(J) else J
            J.setflags(write=False)
        elif storage == "sparse":
            J = sp.csr_matrix(J)
            J.sort_indices()
            for arr in (J.data, J.indices, J.indptr):
                arr.setflags(write=False)
        else:
            raise ValueError(f"storage must be 'dense' or 'sparse', got {storage!r}")

        self._J = J
        self.n = n
        self.storage = storage
        self.name = name
        self._nnz = nnz
        self._pair_sum = None

    @classmethod
    def from_edges(cls, n, rows, cols, values, name="", storage=None):
        """Build from unordered pairs; each pair may appear at most once."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows, cols and values must have the same length")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or max(rows.max(), cols.max()) >= n):
            raise ValueError("edge index out of range")
        if np.any(rows == cols):
            raise ValueError("self-loops are not allowed")
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate edge")
        J = sp.coo_matrix(
            (np.concatenate([values, values]), (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
            shape=(n, n),
        )
        return cls(J.tocsr(), name=name, storage=storage)

    @property
    def couplings(self):
        """The stored matrix (read-only ndarray or CSR matrix)."""
        return self._J

    @property
    def nnz(self):
        """Number of nonzero entries counting both orientations."""
        return self._nnz

    @property
    def n_edges(self):
        return self._nnz // 2

    @property
    def pair_sum(self):
        """sum_{i<j} J_ij."""
        if self._pair_sum is None:
            self._pair_sum = float(self._J.sum()) / 2.0
        return self._pair_sum

    def toarray(self):
        if self.storage == "dense":
            return np.array(self._J)
        return self._J.toarray()

    def with_storage(self, storage):
        return IsingProblem(self._J, name=self.name, storage=storage)

    def matmul(self, x):
        """``J @ x`` for a vector (n,) or a column block (n, k)."""
        return self._J @ x

    def edges(self):
        """Upper-triangle pairs ``(i, j, J_ij)`` with i < j in row-major order."""
        if self.storage == "dense":
            i, j = np.nonzero(np.triu(self._J, 1))
            return i, j, self._J[i, j]
        upper = sp.triu(self._J, 1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order], upper.col[order], upper.data[order]

    def __repr__(self):
        return f"IsingProblem(name={self.name!r}, n={self.n}, edges={self.n_edges}, storage={self.storage!r})"


def check_spins(problem, config):
    """Validate a +-1 spin vector against ``problem`` and return it as float64."""
    s = np.asarray(config)
    if s.ndim != 1 or s.shape[0] != problem.n:
        raise ValueError(f"spin configuration has shape {s.shape}, expected ({problem.n},)")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spin entries must be +1 or -1")
    return s.astype(np.float64)


def energy(problem, config):
    """Ising energy -1/2 sum_{i,j} J_ij s_i s_j of a spin configuration."""
    s = check_spins(problem, config)
    return -0.5 * float(s @ problem.matmul(s))


def energy_relaxed(problem, x):
    """Same quadratic form evaluated at real-valued amplitudes."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise ValueError(f"amplitude vector has shape {x.shape}, expected ({problem.n},)")
    return -0.5 * float(x @ problem.matmul(x))


def cut_value(problem, config):
    """Weight -sum J_ij over pairs i<j whose spins differ."""
    s = check_spins(problem, config)
    i, j, w = problem.edges()
    return -float(np.sum(w[s[i] != s[j]]))


def batch_energy_cut(problem, spins):
    """Energies and cuts of column configurations ``spins`` with shape (n, k)."""
    S = np.asarray(spins, dtype=np.float64)
    quad = np.einsum("ik,ik->k", S, problem.matmul(S))
    energies = -0.5 * quad
    cuts = problem.pair_sum * -0.5 - 0.5 * energies
    return energies, cuts


def spins_from_amplitudes(x):
    """Sign readout; zero (of either sign) maps to +1."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("amplitudes contain NaN")
    return np.where(x >= 0, 1, -1).astype(np.int8)


# -- GSet text format -------------------------------------------------------


def _parse_number(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        val = float(tok)
    except ValueError:
        raise GSetParseError(f"cannot parse weight {tok!r}", lineno) from None
    if not math.isfinite(val):
        raise GSetParseError(f"non-finite weight {tok!r}", lineno)
    return val


def parse_gset(text, name="", storage=None):
    """Parse GSet text (``n m`` header, then ``i j w`` lines with 1-based nodes).

    Each edge weight ``w`` becomes ``J_ij = J_ji = -w``.  Lines starting with
    ``#`` and blank lines are ignored.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    lines = ((k, ln.strip()) for k, ln in enumerate(io.StringIO(text), start=1))
    lines = [(k, ln) for k, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GSetParseError("empty input: missing 'n m' header")

    hdr_no, hdr = lines[0]
    parts = hdr.split()
    if len(parts) != 2:
        raise GSetParseError("header must be 'n m'", hdr_no)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GSetParseError("header must contain two integers", hdr_no) from None
    if n < 1 or m < 0:
        raise GSetParseError(f"invalid header n={n} m={m}", hdr_no)

    body = lines[1:]
    if len(body) != m:
        lineno = body[m][0] if len(body) > m else (body[-1][0] if body else hdr_no)
        raise GSetParseError(f"header declares {m} edges but {len(body)} edge lines found", lineno)

    rows = np.empty(m, dtype=np.int64)
    cols = np.empty(m, dtype=np.int64)
    weights = np.empty(m, dtype=np.float64)
    seen = set()
    for k, (lineno, ln) in enumerate(body):
        parts = ln.split()
        if len(parts) != 3:
            raise GSetParseError("edge line must be 'i j w'", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GSetParseError("node indices must be integers", lineno) from None
        w = _parse_number(parts[2], lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise GSetParseError(f"node index out of range [1, {n}]", lineno)
        if i == j:
            raise GSetParseError(f"self-loop on node {i}", lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GSetParseError(f"duplicate edge {key[0]} {key[1]}", lineno)
        seen.add(key)
        rows[k], cols[k], weights[k] = i - 1, j - 1, w

    keep = weights != 0
    return IsingProblem.from_edges(n, rows[keep], cols[keep], -weights[keep], name=name, storage=storage)


def _format_weight(w):
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def format_gset(problem):
    """Serialize to GSet text with canonical i<j ordering."""
    i, j, J = problem.edges()
    out = [f"{problem.n} {len(i)}"]
    out.extend(f"{a + 1} {b + 1} {_format_weight(-v)}" for a, b, v in zip(i.tolist(), j.tolist(), J.tolist()))
    return "\n".join(out) + "\n"


def read_gset(path, storage=None, name=None):
    with open(path, "rb") as fh:
        data = fh.read()
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return parse_gset(data, name=name, storage=storage)


def write_gset(problem, path):
    with open(path, "w") as fh:
        fh.write(format_gset(problem))


# -- random instances -------------------------------------------------------


@dataclass(frozen=True)
class GraphGenSpec:
    """Recipe for a random fully connected instance.

    ``distribution`` is ``"gaussian"`` (couplings ~ N(mean, stddev^2)) or
    ``"discrete"`` (each pair coupled with probability ``p``, value +1 or -1
    with equal odds).
    """

    n: int
    distribution: str = "gaussian"
    mean: float = 0.0
    stddev: float = 1.0
    p: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.distribution == "gaussian":
            if not self.stddev > 0:
                raise ValueError("gaussian stddev must be > 0")
        elif self.distribution == "discrete":
            if not 0 < self.p <= 1:
                raise ValueError("discrete edge probability must be in (0, 1]")
        else:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def label(self):
        if self.distribution == "gaussian":
            return f"gaussian_n{self.n}_s{self.seed}"
        return f"discrete_n{self.n}_p{self.p:g}_s{self.seed}"


def generate_random(spec, storage=None):
    """Draw the i<j couplings i.i.d. from ``spec.distribution`` and mirror them."""
    n = spec.n
    if n < 2:
        raise ValueError("random instances need n >= 2")
    rng = np.random.default_rng(spec.seed)
    m = n * (n - 1) // 2
    if spec.distribution == "gaussian":
        vals = rng.normal(spec.mean, spec.stddev, size=m)
    else:
        present = rng.random(m) < spec.p
        vals = np.where(rng.random(m) < 0.5, 1.0, -1.0) * present
    iu, ju = np.triu_indices(n, 1)
    J = np.zeros((n, n))
    J[iu, ju] = vals
    J[ju, iu] = vals
    return IsingProblem(J, name=spec.label, storage=storage)

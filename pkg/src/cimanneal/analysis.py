"""Spectral diagnostics, exhaustive oracle and batch statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import batch_energy_cut

BRUTE_FORCE_MAX_N = 24


@dataclass
class SpectralInfo:
    lambda_max: float
    dominant_vector: np.ndarray
    iterations_used: int
    residual: float
    converged: bool
    zero_matrix: bool = False


def _power_loop(apply, v, tol, max_iter, shift):
    lam = 0.0
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = apply(v) + shift * v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        v = w / norm
        jv = apply(v)
        lam = float(v @ jv)
        res = float(np.linalg.norm(jv - lam * v))
        if res < tol:
            break
    return v, lam, res, it


def power_iteration(problem, tol=1e-8, max_iter=10_000, seed=0):
    """Largest algebraic eigenvalue of J and its eigenvector.

    The iteration runs on ``J + mu*I`` with ``mu`` the infinity norm of J, so
    every shifted eigenvalue is non-negative and the dominant shifted mode is
    the top of J's spectrum even when J's largest-magnitude eigenvalue is
    negative.  The eigenvalue is the Rayleigh quotient; ``residual`` is
    ``||Jv - lambda v||`` for the returned unit vector.
    """
    n = problem.n
    J = problem.couplings
    mu = float(np.max(np.abs(J).sum(axis=1))) if n else 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    if mu == 0.0:
        return SpectralInfo(0.0, v, 0, 0.0, True, zero_matrix=True)
    v, lam, res, it = _power_loop(problem.matmul, v, tol, max_iter, mu)
    return SpectralInfo(lam, v, it, res, res < tol)


def dominant_eigenvalue(problem, rtol=1e-3, max_iter=1000, seed=0):
    """Cheap estimate of the largest eigenvalue for coupling normalization."""
    J = problem.couplings
    scale = float(np.max(np.abs(J).sum(axis=1)))
    if scale == 0.0:
        return 0.0
    return power_iteration(problem, tol=rtol * scale, max_iter=max_iter, seed=seed).lambda_max


def proximity_from_product(x, jx):
    """||x/||x|| - jx/||jx||||, NaN when either vector is zero."""
    nx = np.linalg.norm(x)
    nj = np.linalg.norm(jx)
    if nx == 0.0 or nj == 0.0:
        return np.nan
    return float(np.linalg.norm(x / nx - jx / nj))


def eig_proximity(problem, x):
    """Distance between the normalized amplitude vector and its normalized image under J.

    Zero exactly when ``x`` is an eigenvector with a positive eigenvalue, two
    for a negative one.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise ValueError(f"vector has shape {x.shape}, expected ({problem.n},)")
    val = proximity_from_product(x, problem.matmul(x))
    if np.isnan(val):
        raise ZeroDivisionError("eig_proximity undefined for a zero vector or a vector in the null space of J")
    return val


def brute_force_optimum(problem, chunk_bits=16):
    """Exact ground state by enumeration of 2^(n-1) configurations.

    The last spin is pinned to +1 (spin-flip symmetry).  Returns
    ``(spins, max_cut, min_energy)``; ties resolve to the lowest enumeration
    index.
    """
    n = problem.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force refused for n={n} > {BRUTE_FORCE_MAX_N}")
    total = 1 << (n - 1)
    J = problem.toarray()
    best_e = np.inf
    best_idx = 0
    step = 1 << chunk_bits
    bits = np.arange(n - 1, dtype=np.int64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        S = np.ones((idx.size, n))
        S[:, : n - 1] = 1 - 2 * ((idx[:, None] >> bits) & 1)
        e = -0.5 * np.einsum("ki,ki->k", S, S @ J)
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e = float(e[k])
            best_idx = int(idx[k])
    spins = np.ones(n, dtype=np.int8)
    spins[: n - 1] = 1 - 2 * ((best_idx >> bits) & 1)
    e, c = batch_energy_cut(problem, spins[:, None])
    return spins, float(c[0]), float(e[0])


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def to_dict(self):
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist()}


def default_bin_width(cuts):
    cuts = np.asarray(cuts, dtype=np.float64)
    if np.all(cuts == np.round(cuts)):
        return 1.0
    q75, q25 = np.percentile(cuts, [75, 25])
    width = 2.0 * (q75 - q25) * cuts.size ** (-1.0 / 3.0)
    return float(width) if width > 0 else 1.0


def build_histogram(cuts, bin_width=None):
    """Bins of ``bin_width`` starting at floor(min(cuts)) and covering max(cuts).

    Every value lands in the bin ``floor((c - start) / width)``, so the
    counts always sum to ``len(cuts)``.  ``bin_width=None`` uses 1 for
    integer data and the Freedman-Diaconis width otherwise.
    """
    cuts = np.asarray(cuts, dtype=np.float64)
    if cuts.size == 0:
        raise ValueError("cannot build a histogram of no values")
    if bin_width is None:
        bin_width = default_bin_width(cuts)
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    start = np.floor(cuts.min())
    idx = np.floor((cuts - start) / bin_width).astype(np.int64)
    nbins = int(idx.max()) + 1
    counts = np.bincount(idx, minlength=nbins)
    edges = start + bin_width * np.arange(nbins + 1)
    return Histogram(edges=edges, counts=counts)


@dataclass
class RunBatchResult:
    cuts: np.ndarray
    energies: np.ndarray
    seeds: np.ndarray
    spins: np.ndarray  # (n_runs, n) int8
    wall_times_ms: np.ndarray
    total_wall_time_s: float = 0.0
    bin_width: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_runs(self):
        return self.cuts.size

    @property
    def best_index(self):
        return int(np.argmax(self.cuts))

    @property
    def best_config(self):
        return self.spins[self.best_index]

    @property
    def best_cut(self):
        return float(self.cuts.max())

    @property
    def stats(self):
        c = self.cuts
        return {
            "min": float(c.min()),
            "max": float(c.max()),
            "mean": float(c.mean()),
            "std": float(c.std()),
            "n_runs": int(c.size),
        }

    @property
    def histogram(self):
        return build_histogram(self.cuts, self.bin_width)

"""Panel-based batch execution shared by all solvers.

Runs are laid out as columns of fixed-width panels (``block_size`` columns,
zero-padded).  A run's arithmetic depends only on its own column, its slot
in the panel and the panel width, never on how panels are spread over
workers, so batches are bit-reproducible for any ``n_jobs``.  BLAS is pinned
to one thread while a batch runs; parallelism comes from running panels
concurrently.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from threadpoolctl import threadpool_limits

from .analysis import RunBatchResult
from .exceptions import DivergenceError
from .graph import batch_energy_cut, spins_from_amplitudes

DEFAULT_BLOCK_SIZE = 32


def derive_seed(master_seed, run_index):
    """64-bit per-run seed mixed from the master seed and the run index."""
    if master_seed < 0 or run_index < 0:
        raise ValueError("seeds and run indices must be non-negative")
    ss = np.random.SeedSequence([int(master_seed), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class NoiseSource:
    """Per-column Gaussian streams for one panel.

    Column ``k`` draws from its own generator so a run's noise is independent
    of its panel neighbours.  Inactive (padding) columns get zeros.
    """

    def __init__(self, seeds, width, n, rows=1):
        self.gens = [np.random.default_rng(s) for s in seeds]
        self.width = width
        self.n = n
        self.rows = rows
        self.buf = np.zeros((rows, n, width)) if rows > 1 else np.zeros((n, width))

    def draw(self):
        buf = self.buf
        if self.rows == 1:
            for k, g in enumerate(self.gens):
                buf[:, k] = g.standard_normal(self.n)
        else:
            for k, g in enumerate(self.gens):
                buf[:, :, k] = g.standard_normal((self.rows, self.n))
        return buf


def check_finite(X, what, first_run, t, n_active):
    if np.isfinite(X).all():
        return
    bad = np.nonzero(~np.isfinite(X[:, :n_active]).all(axis=0))[0]
    col = int(bad[0]) if bad.size else 0
    raise DivergenceError(
        f"{what} (run {first_run + col}, iteration {t})",
        run_index=first_run + col,
        iteration=t,
    )


def run_batch_panels(problem, panel_fn, master_seed, n_runs, block_size=None, n_jobs=1, trace=False):
    """Execute ``n_runs`` runs through ``panel_fn`` and collect a RunBatchResult.

    ``panel_fn(seeds, width, first_run, trace)`` must return the final
    readout amplitudes with shape (n, len(seeds)) plus a trace object (or
    None) for the panel's first column.  Only the panel holding run 0 is
    asked for a trace.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    width = int(block_size or DEFAULT_BLOCK_SIZE)
    if width < 1:
        raise ValueError("block_size must be >= 1")
    seeds = [derive_seed(master_seed, k) for k in range(n_runs)]
    starts = list(range(0, n_runs, width))

    def job(start):
        t0 = time.perf_counter()
        amps, tr = panel_fn(seeds[start : start + width], width, start, trace and start == 0)
        return amps, tr, time.perf_counter() - t0

    t0 = time.perf_counter()
    with threadpool_limits(limits=1):
        if n_jobs is None or n_jobs == 1 or len(starts) == 1:
            outs = [job(s) for s in starts]
        else:
            workers = len(starts) if n_jobs < 0 else min(n_jobs, len(starts))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outs = list(pool.map(job, starts))
    total = time.perf_counter() - t0

    amps = np.concatenate([o[0] for o in outs], axis=1)
    spins = spins_from_amplitudes(amps)
    energies, cuts = batch_energy_cut(problem, spins)
    per_run_ms = np.concatenate([np.full(o[0].shape[1], 1000.0 * o[2] / o[0].shape[1]) for o in outs])
    result = RunBatchResult(
        cuts=cuts,
        energies=energies,
        seeds=np.array(seeds, dtype=np.uint64),
        spins=np.ascontiguousarray(spins.T),
        wall_times_ms=per_run_ms,
        total_wall_time_s=total,
    )
    return result, outs[0][1]

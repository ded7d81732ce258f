"""Noisy mean-field annealing (NMFA) baseline.

Soft spins relax toward the mean-field value of their noisy local field::

    x <- (1 - alpha) * x + alpha * tanh(zeta * s(t) * (J @ x + eta)),   eta ~ N(0, noise^2)

where ``s(t)`` is an inverse-temperature schedule.  Runs start from x = 0 and
are read out by sign, exactly like SimCIM, so the two solvers share the
batch protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import _engine
from .exceptions import DivergenceError
from .graph import batch_energy_cut, spins_from_amplitudes
from .simcim import PumpSchedule, RunResult, _TraceRecorder, effective_zeta


def _default_schedule():
    return PumpSchedule.linear(0.5, 8.0, 1000)


@dataclass(frozen=True)
class NmfaParams:
    """NMFA hyperparameters.

    ``schedule`` multiplies the field; ``None`` means a constant factor of
    one.  ``zeta_auto`` divides ``zeta`` by the largest eigenvalue of J so the
    mean-field transition sits at ``zeta * s(t) = 1``.
    """

    alpha: float = 0.8
    zeta: float = 1.0
    noise_amplitude: float = 1.0
    schedule: PumpSchedule | None = field(default_factory=_default_schedule)
    iterations: int = 1000
    seed: int = 0
    zeta_auto: bool = True

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if not (self.zeta > 0 and math.isfinite(self.zeta)):
            raise ValueError("zeta must be a positive finite number")
        if not (self.noise_amplitude >= 0 and math.isfinite(self.noise_amplitude)):
            raise ValueError("noise_amplitude must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.schedule is not None and self.schedule.duration != self.iterations:
            raise ValueError("schedule duration must equal iterations")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def schedule_values(self):
        if self.schedule is None:
            return np.ones(self.iterations)
        return self.schedule.values()

    def with_iterations(self, iterations):
        sched = None if self.schedule is None else replace(self.schedule, duration=int(iterations))
        return replace(self, iterations=int(iterations), schedule=sched)


def _update(X, JX, alpha, gain, eta):
    field = JX if eta is None else JX + eta
    X *= 1.0 - alpha
    X += alpha * np.tanh(gain * field)


def nmfa_step(problem, x, params, t, rng=None, zeta=None):
    """One NMFA iteration on a single amplitude vector; returns a new vector.

    ``rng`` supplies the field noise and is required when
    ``params.noise_amplitude > 0``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise ValueError(f"amplitude vector has shape {x.shape}, expected ({problem.n},)")
    if not np.isfinite(x).all():
        raise DivergenceError("non-finite input amplitudes", iteration=t)
    if not 0 <= t < params.iterations:
        raise IndexError(f"iteration {t} outside [0, {params.iterations})")
    if zeta is None:
        zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    s = 1.0 if params.schedule is None else float(params.schedule_values()[t])
    eta = None
    if params.noise_amplitude > 0:
        if rng is None:
            raise ValueError("a random generator is required for noisy steps")
        eta = params.noise_amplitude * rng.standard_normal(problem.n)
    out = x.copy()
    _update(out, problem.matmul(x), params.alpha, zeta * s, eta)
    return out


def _panel(problem, params, zeta, seeds, width, first_run, trace):
    n = problem.n
    X = np.zeros((n, width))
    noise = _engine.NoiseSource(seeds, width, n) if params.noise_amplitude > 0 else None
    ss = params.schedule_values()
    rec = _TraceRecorder(problem, ss) if trace else None
    amp, alpha = params.noise_amplitude, params.alpha
    for t in range(ss.size):
        JX = problem.matmul(X)
        if rec is not None:
            rec.before_step(t, X[:, 0], JX[:, 0])
        eta = amp * noise.draw() if noise is not None else None
        _update(X, JX, alpha, zeta * ss[t], eta)
        if rec is not None:
            rec.after_step(t, X[:, 0])
        _engine.check_finite(X, f"NMFA produced non-finite amplitudes (zeta={zeta})", first_run, t, len(seeds))
    out_trace = rec.finish(problem, X[:, 0]) if rec is not None else None
    return X[:, : len(seeds)].copy(), out_trace


def nmfa_run(problem, params, trace=False, block_size=None):
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    width = int(block_size or _engine.DEFAULT_BLOCK_SIZE)
    with threadpool_limits(limits=1):
        amps, tr = _panel(problem, params, zeta, [params.seed], width, 0, trace)
    spins = spins_from_amplitudes(amps[:, 0])
    e, c = batch_energy_cut(problem, spins[:, None])
    return RunResult(spins, float(e[0]), float(c[0]), tr, amps[:, 0])


def nmfa_run_batch(problem, params, n_runs, block_size=None, n_jobs=1, trace=False):
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)

    def panel_fn(seeds, width, first_run, want_trace):
        return _panel(problem, params, zeta, seeds, width, first_run, want_trace)

    result, tr = _engine.run_batch_panels(problem, panel_fn, params.seed, n_runs, block_size, n_jobs, trace)
    result.extra["zeta_effective"] = zeta
    return result, tr

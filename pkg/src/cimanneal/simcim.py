"""SimCIM: real-amplitude CIM dynamics with a hard saturation bound.

Each iteration computes the raw increment

    dx = v(t) * x + zeta * J @ x + f,        f ~ N(0, noise_amplitude^2)

smooths it with momentum, ``m <- beta * m + (1 - beta) * dx``, and moves the
amplitudes to ``clip(x + m, -x_sat, x_sat)``.  Spins are read out by sign
after the last iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from threadpoolctl import threadpool_limits

from . import _engine
from .analysis import dominant_eigenvalue, proximity_from_product
from .exceptions import DivergenceError
from .graph import batch_energy_cut, spins_from_amplitudes

SCHEDULE_FORMS = ("tanh", "constant", "linear")


@dataclass(frozen=True)
class PumpSchedule:
    """Iteration-dependent gain-loss value ``v(t)`` for ``t`` in ``[0, duration)``.

    ``tanh`` ramps from ``start`` to ``end`` along
    ``start + (end - start) * (1 + tanh(steepness * (2t/(T-1) - 1))) / 2``;
    ``linear`` interpolates the two endpoints exactly; ``constant`` holds
    ``start``.
    """

    form: str = "tanh"
    start: float = -1.0
    end: float = 0.0
    steepness: float = 3.0
    duration: int = 1000

    def __post_init__(self):
        if self.form not in SCHEDULE_FORMS:
            raise ValueError(f"schedule form must be one of {SCHEDULE_FORMS}, got {self.form!r}")
        if int(self.duration) != self.duration or self.duration < 1:
            raise ValueError("schedule duration must be a positive integer")
        if not (math.isfinite(self.start) and math.isfinite(self.end) and math.isfinite(self.steepness)):
            raise ValueError("schedule values must be finite")

    @classmethod
    def tanh(cls, start, end, steepness, duration):
        return cls("tanh", float(start), float(end), float(steepness), int(duration))

    @classmethod
    def constant(cls, value, duration):
        return cls("constant", float(value), float(value), 0.0, int(duration))

    @classmethod
    def linear(cls, start, end, duration):
        return cls("linear", float(start), float(end), 0.0, int(duration))

    def _frac(self, t):
        T = self.duration
        return t / (T - 1) if T > 1 else np.zeros_like(t, dtype=np.float64)

    def values(self):
        """All ``duration`` schedule values as an array."""
        t = np.arange(self.duration, dtype=np.float64)
        if self.form == "constant":
            return np.full(self.duration, self.start)
        u = self._frac(t)
        if self.form == "linear":
            return self.start + (self.end - self.start) * u
        return self.start + (self.end - self.start) * (1.0 + np.tanh(self.steepness * (2.0 * u - 1.0))) / 2.0


def pump_value(schedule, t):
    if not (0 <= t < schedule.duration) or int(t) != t:
        raise IndexError(f"iteration {t} outside schedule of length {schedule.duration}")
    if schedule.form == "constant":
        return schedule.start
    u = t / (schedule.duration - 1) if schedule.duration > 1 else 0.0
    if schedule.form == "linear":
        return schedule.start + (schedule.end - schedule.start) * u
    return schedule.start + (schedule.end - schedule.start) * (1.0 + math.tanh(schedule.steepness * (2.0 * u - 1.0))) / 2.0


def activation(x, x_sat):
    """Clamp to ``[-x_sat, x_sat]`` keeping the sign."""
    if not x_sat > 0:
        raise ValueError("x_sat must be positive")
    if np.ndim(x) == 0:
        return float(min(max(x, -x_sat), x_sat))
    return np.clip(x, -x_sat, x_sat)


def _default_schedule():
    # with zeta auto-scaling the threshold sits at v = -zeta, so the ramp starts just below it
    return PumpSchedule.tanh(-1.05, 0.0, 1.0, 1000)


@dataclass(frozen=True)
class SimCimParams:
    """SimCIM hyperparameters.

    With ``zeta_auto`` the feedforward strength actually used is
    ``zeta / lambda_max(J)``, i.e. ``zeta`` becomes a graph-independent scale.
    """

    zeta: float = 1.0
    noise_amplitude: float = 0.2
    x_sat: float = 1.0
    momentum_beta: float = 0.8
    schedule: PumpSchedule = field(default_factory=_default_schedule)
    seed: int = 0
    zeta_auto: bool = True

    def __post_init__(self):
        if not (self.zeta > 0 and math.isfinite(self.zeta)):
            raise ValueError("zeta must be a positive finite number")
        if not (self.noise_amplitude >= 0 and math.isfinite(self.noise_amplitude)):
            raise ValueError("noise_amplitude must be >= 0")
        if not (self.x_sat > 0 and math.isfinite(self.x_sat)):
            raise ValueError("x_sat must be positive")
        if not 0 <= self.momentum_beta < 1:
            raise ValueError("momentum_beta must be in [0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def iterations(self):
        return self.schedule.duration

    def with_iterations(self, iterations):
        return replace(self, schedule=replace(self.schedule, duration=int(iterations)))


def effective_zeta(problem, zeta, zeta_auto):
    """Feedforward strength after optional spectral normalization.

    Graphs whose largest eigenvalue is not positive (e.g. all-zero
    couplings) keep the raw ``zeta``.
    """
    if not zeta_auto:
        return float(zeta)
    lam = dominant_eigenvalue(problem)
    return float(zeta) / lam if lam > 0 else float(zeta)


@dataclass
class SolverState:
    x: np.ndarray
    momentum: np.ndarray
    iteration: int
    rng: np.random.Generator

    @classmethod
    def initial(cls, n, seed):
        return cls(np.zeros(n), np.zeros(n), 0, np.random.default_rng(seed))


@dataclass
class SolverTrace:
    """Per-iteration record of one run, taken after each update."""

    pump: np.ndarray
    eig_proximity: np.ndarray
    amplitudes: np.ndarray  # (iterations, len(indices))
    indices: np.ndarray

    @property
    def iterations(self):
        return np.arange(self.pump.size)


class _TraceRecorder:
    def __init__(self, problem, schedule_values, max_amplitudes=32):
        n = problem.n
        k = min(n, max_amplitudes)
        self.indices = np.unique(np.linspace(0, n - 1, k).round().astype(np.int64))
        self.pump = np.asarray(schedule_values, dtype=np.float64).copy()
        T = self.pump.size
        self.prox = np.full(T, np.nan)
        self.amps = np.zeros((T, self.indices.size))
        self._prev = None

    def before_step(self, t, x, jx):
        # proximity of the state produced by step t-1, whose J-image is jx
        if t > 0:
            self.prox[t - 1] = proximity_from_product(x, jx)

    def after_step(self, t, x):
        self.amps[t] = x[self.indices]

    def finish(self, problem, x):
        self.prox[-1] = proximity_from_product(x, problem.matmul(x))
        return SolverTrace(self.pump, self.prox, self.amps, self.indices)


# overflow surfaces as a DivergenceError from the finiteness check
@np.errstate(over="ignore", invalid="ignore")
def _update(X, M, JX, v, zeta, beta, x_sat, F, noise_amplitude):
    dX = v * X + zeta * JX
    if F is not None:
        dX += noise_amplitude * F
    M *= beta
    M += (1.0 - beta) * dX
    X += M
    np.clip(X, -x_sat, x_sat, out=X)


def step(problem, state, params, zeta=None):
    """Advance one run by one iteration and return the new state.

    ``zeta`` is the feedforward strength actually applied; when omitted it
    is derived from ``params`` (with spectral normalization if requested).
    """
    if state.x.shape != (problem.n,) or state.momentum.shape != (problem.n,):
        raise ValueError("state vectors do not match the problem size")
    if state.iteration >= params.iterations:
        raise IndexError("state already at the end of the schedule")
    if zeta is None:
        zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    X = state.x.copy()
    M = state.momentum.copy()
    v = pump_value(params.schedule, state.iteration)
    F = state.rng.standard_normal(problem.n) if params.noise_amplitude > 0 else None
    _update(X, M, problem.matmul(X), v, zeta, params.momentum_beta, params.x_sat, F, params.noise_amplitude)
    if not np.isfinite(X).all():
        raise DivergenceError(
            f"non-finite amplitudes at iteration {state.iteration}: zeta * lambda_max is too large "
            f"(zeta={zeta}, v={v})",
            iteration=state.iteration,
        )
    return SolverState(X, M, state.iteration + 1, state.rng)


def _panel(problem, params, zeta, seeds, width, first_run, trace):
    n = problem.n
    X = np.zeros((n, width))
    M = np.zeros((n, width))
    noise = _engine.NoiseSource(seeds, width, n) if params.noise_amplitude > 0 else None
    vs = params.schedule.values()
    rec = _TraceRecorder(problem, vs) if trace else None
    beta, x_sat, amp = params.momentum_beta, params.x_sat, params.noise_amplitude
    for t in range(vs.size):
        JX = problem.matmul(X)
        if rec is not None:
            rec.before_step(t, X[:, 0], JX[:, 0])
        F = noise.draw() if noise is not None else None
        _update(X, M, JX, vs[t], zeta, beta, x_sat, F, amp)
        if rec is not None:
            rec.after_step(t, X[:, 0])
        _engine.check_finite(
            X, f"SimCIM diverged: zeta * lambda_max too large (zeta={zeta}, v={vs[t]})", first_run, t, len(seeds)
        )
    out_trace = rec.finish(problem, X[:, 0]) if rec is not None else None
    return X[:, : len(seeds)].copy(), out_trace


class RunResult(NamedTuple):
    spins: np.ndarray
    energy: float
    cut: float
    trace: SolverTrace | None
    amplitudes: np.ndarray


def run(problem, params, trace=False, block_size=None):
    """One seeded run from x = m = 0; spins read out by sign at the end.

    The run is executed in slot 0 of a ``block_size``-wide panel so that it
    reproduces exactly the corresponding run of :func:`run_batch`.
    """
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    width = int(block_size or _engine.DEFAULT_BLOCK_SIZE)
    with threadpool_limits(limits=1):
        amps, tr = _panel(problem, params, zeta, [params.seed], width, 0, trace)
    spins = spins_from_amplitudes(amps[:, 0])
    e, c = batch_energy_cut(problem, spins[:, None])
    return RunResult(spins, float(e[0]), float(c[0]), tr, amps[:, 0])


def run_batch(problem, params, n_runs, block_size=None, n_jobs=1, trace=False):
    """Independent runs with per-run seeds ``derive_seed(params.seed, k)``.

    Returns ``(RunBatchResult, trace_of_run_0_or_None)``.
    """
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)

    def panel_fn(seeds, width, first_run, want_trace):
        return _panel(problem, params, zeta, seeds, width, first_run, want_trace)

    result, tr = _engine.run_batch_panels(problem, panel_fn, params.seed, n_runs, block_size, n_jobs, trace)
    result.extra["zeta_effective"] = zeta
    return result, tr

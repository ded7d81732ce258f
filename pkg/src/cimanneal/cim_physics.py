"""Per-roundtrip CIM map on both quadratures.

With ``r2 = x^2 + p^2`` each roundtrip applies (explicit, no sub-stepping)::

    dx = w x - gamma x - s r2 x + zeta J @ x + Re f
    dp = -w p - gamma p - s r2 p + Im f

where ``Re f`` and ``Im f`` are independent N(0, noise^2) draws.  ``w`` may be
a constant or follow a :class:`~cimanneal.simcim.PumpSchedule`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import _engine
from .exceptions import DivergenceError
from .graph import batch_energy_cut, spins_from_amplitudes
from .simcim import PumpSchedule, RunResult, _TraceRecorder, effective_zeta


@dataclass(frozen=True)
class CimPhysicsParams:
    w: float = 0.2
    gamma: float = 0.1
    s: float = 0.1
    zeta: float = 0.2
    noise_amplitude: float = 0.01
    iterations: int = 1000
    seed: int = 0
    pump: PumpSchedule | None = None
    zeta_auto: bool = True

    def __post_init__(self):
        for name in ("w", "gamma", "s", "zeta", "noise_amplitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.s > 0:
            raise ValueError("s must be > 0")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.pump is not None and self.pump.duration != self.iterations:
            raise ValueError("pump schedule duration must equal iterations")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def gains(self):
        if self.pump is None:
            return np.full(self.iterations, self.w)
        return self.pump.values()

    @property
    def steady_amplitude(self):
        """Uncoupled above-threshold fixed point sqrt((w - gamma) / s)."""
        return math.sqrt(max(self.w - self.gamma, 0.0) / self.s)


@dataclass
class CimState:
    x: np.ndarray
    p: np.ndarray
    iteration: int
    rng: np.random.Generator

    @classmethod
    def initial(cls, n, seed, x0=None, p0=None):
        x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
        p = np.zeros(n) if p0 is None else np.array(p0, dtype=np.float64)
        return cls(x, p, 0, np.random.default_rng(seed))


# overflow surfaces as a DivergenceError from the finiteness check
@np.errstate(over="ignore", invalid="ignore")
def _update(X, P, JX, w, gamma, s, zeta, F):
    r2 = X * X + P * P
    dX = w * X - gamma * X - s * r2 * X + zeta * JX
    dP = -w * P - gamma * P - s * r2 * P
    if F is not None:
        dX += F[0]
        dP += F[1]
    X += dX
    P += dP


def _blowup(params, t):
    return (
        f"CIM amplitudes diverged at roundtrip {t}: the s * amplitude^3 term overshoots "
        f"(w={params.w}, gamma={params.gamma}, s={params.s}, zeta={params.zeta})"
    )


def cim_step(problem, state, params, zeta=None):
    """Apply one roundtrip to a single-run state and return the new state."""
    if state.x.shape != (problem.n,) or state.p.shape != (problem.n,):
        raise ValueError("state vectors do not match the problem size")
    if zeta is None:
        zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    t = state.iteration
    w = float(params.gains()[t]) if params.pump is not None else params.w
    F = None
    if params.noise_amplitude > 0:
        F = params.noise_amplitude * state.rng.standard_normal((2, problem.n))
    X, P = state.x.copy(), state.p.copy()
    _update(X, P, problem.matmul(X), w, params.gamma, params.s, zeta, F)
    if not (np.isfinite(X).all() and np.isfinite(P).all()):
        raise DivergenceError(_blowup(params, t), iteration=t)
    return CimState(X, P, t + 1, state.rng)


def _panel(problem, params, zeta, seeds, width, first_run, trace):
    n = problem.n
    X = np.zeros((n, width))
    P = np.zeros((n, width))
    amp = params.noise_amplitude
    noise = _engine.NoiseSource(seeds, width, n, rows=2) if amp > 0 else None
    ws = params.gains()
    rec = _TraceRecorder(problem, ws) if trace else None
    for t in range(ws.size):
        JX = problem.matmul(X)
        if rec is not None:
            rec.before_step(t, X[:, 0], JX[:, 0])
        F = amp * noise.draw() if noise is not None else None
        _update(X, P, JX, ws[t], params.gamma, params.s, zeta, F)
        if rec is not None:
            rec.after_step(t, X[:, 0])
        _engine.check_finite(X, _blowup(params, t), first_run, t, len(seeds))
        _engine.check_finite(P, _blowup(params, t), first_run, t, len(seeds))
    out_trace = rec.finish(problem, X[:, 0]) if rec is not None else None
    return X[:, : len(seeds)].copy(), out_trace


def cim_run(problem, params, trace=False, block_size=None):
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)
    width = int(block_size or _engine.DEFAULT_BLOCK_SIZE)
    with threadpool_limits(limits=1):
        amps, tr = _panel(problem, params, zeta, [params.seed], width, 0, trace)
    spins = spins_from_amplitudes(amps[:, 0])
    e, c = batch_energy_cut(problem, spins[:, None])
    return RunResult(spins, float(e[0]), float(c[0]), tr, amps[:, 0])


def cim_run_batch(problem, params, n_runs, block_size=None, n_jobs=1, trace=False):
    zeta = effective_zeta(problem, params.zeta, params.zeta_auto)

    def panel_fn(seeds, width, first_run, want_trace):
        return _panel(problem, params, zeta, seeds, width, first_run, want_trace)

    result, tr = _engine.run_batch_panels(problem, panel_fn, params.seed, n_runs, block_size, n_jobs, trace)
    result.extra["zeta_effective"] = zeta
    return result, tr

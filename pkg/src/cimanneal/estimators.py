"""scikit-learn style front end.

Each solver is an estimator whose ``fit`` takes a coupling matrix (dense,
sparse, or an :class:`~cimanneal.graph.IsingProblem`), runs a seeded batch
and stores the best configuration found::

    >>> est = SimCIM(n_runs=20, random_state=0).fit(J)
    >>> est.spins_, est.cut_

``predict`` returns the best spins; ``score`` returns the best cut value of
the fitted batch (or of ``spins_`` evaluated on a new matrix).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_symmetric

from .cim_physics import CimPhysicsParams, cim_run_batch
from .graph import IsingProblem, cut_value
from .nmfa import NmfaParams, nmfa_run_batch
from .simcim import PumpSchedule, SimCimParams
from .simcim import run_batch as simcim_run_batch


def check_problem(X):
    """Coerce ``X`` to an IsingProblem.

    Dense or sparse matrices are validated with scikit-learn's helpers; a
    slightly asymmetric matrix is symmetrized with a warning, and a nonzero
    diagonal is rejected.
    """
    if isinstance(X, IsingProblem):
        return X
    X = check_array(X, accept_sparse="csr", dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    if X.shape[0] != X.shape[1]:
        raise ValueError(f"coupling matrix must be square, got {X.shape}")
    X = check_symmetric(X, raise_warning=True, raise_exception=False)
    if sp.issparse(X):
        X = sp.csr_matrix(X)
    return IsingProblem(X)


class _BaseIsingEstimator(BaseEstimator):
    def _params(self):
        raise NotImplementedError

    def _run(self, problem, params):
        raise NotImplementedError

    def fit(self, X, y=None):
        problem = check_problem(X)
        self.problem_ = problem
        self.result_, _ = self._run(problem, self._params())
        best = self.result_.best_index
        self.spins_ = self.result_.spins[best].copy()
        self.cut_ = float(self.result_.cuts[best])
        self.energy_ = float(self.result_.energies[best])
        self.cuts_ = self.result_.cuts.copy()
        self.zeta_ = self.result_.extra.get("zeta_effective")
        self.n_features_in_ = problem.n
        return self

    def predict(self, X=None):
        check_is_fitted(self, "spins_")
        if X is not None and check_problem(X).n != self.n_features_in_:
            raise ValueError("X does not match the fitted problem size")
        return self.spins_

    def fit_predict(self, X, y=None):
        return self.fit(X).spins_

    def score(self, X=None, y=None):
        check_is_fitted(self, "spins_")
        if X is None:
            return self.cut_
        return cut_value(check_problem(X), self.spins_)


class SimCIM(_BaseIsingEstimator):
    """SimCIM annealer.

    Parameters mirror :class:`~cimanneal.simcim.SimCimParams`; ``v_start``,
    ``v_end`` and ``steepness`` define the tanh pump ramp over ``n_iter``
    iterations.
    """

    def __init__(
        self,
        zeta=SimCimParams.zeta,
        zeta_auto=True,
        noise=SimCimParams.noise_amplitude,
        x_sat=1.0,
        beta=SimCimParams.momentum_beta,
        v_start=None,
        v_end=None,
        steepness=None,
        n_iter=1000,
        n_runs=100,
        random_state=0,
        n_jobs=1,
        block_size=None,
    ):
        self.zeta = zeta
        self.zeta_auto = zeta_auto
        self.noise = noise
        self.x_sat = x_sat
        self.beta = beta
        self.v_start = v_start
        self.v_end = v_end
        self.steepness = steepness
        self.n_iter = n_iter
        self.n_runs = n_runs
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.block_size = block_size

    def _params(self):
        d = SimCimParams().schedule
        sched = PumpSchedule.tanh(
            d.start if self.v_start is None else self.v_start,
            d.end if self.v_end is None else self.v_end,
            d.steepness if self.steepness is None else self.steepness,
            self.n_iter,
        )
        return SimCimParams(
            zeta=self.zeta,
            noise_amplitude=self.noise,
            x_sat=self.x_sat,
            momentum_beta=self.beta,
            schedule=sched,
            seed=self.random_state,
            zeta_auto=self.zeta_auto,
        )

    def _run(self, problem, params):
        return simcim_run_batch(problem, params, self.n_runs, block_size=self.block_size, n_jobs=self.n_jobs)


class NMFA(_BaseIsingEstimator):
    """Noisy mean-field annealer with a linear inverse-temperature ramp ``s_start -> s_end``."""

    def __init__(
        self,
        alpha=NmfaParams.alpha,
        zeta=NmfaParams.zeta,
        zeta_auto=True,
        noise=NmfaParams.noise_amplitude,
        s_start=None,
        s_end=None,
        n_iter=1000,
        n_runs=100,
        random_state=0,
        n_jobs=1,
        block_size=None,
    ):
        self.alpha = alpha
        self.zeta = zeta
        self.zeta_auto = zeta_auto
        self.noise = noise
        self.s_start = s_start
        self.s_end = s_end
        self.n_iter = n_iter
        self.n_runs = n_runs
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.block_size = block_size

    def _params(self):
        d = NmfaParams().schedule
        sched = PumpSchedule.linear(
            d.start if self.s_start is None else self.s_start,
            d.end if self.s_end is None else self.s_end,
            self.n_iter,
        )
        return NmfaParams(
            alpha=self.alpha,
            zeta=self.zeta,
            noise_amplitude=self.noise,
            schedule=sched,
            iterations=self.n_iter,
            seed=self.random_state,
            zeta_auto=self.zeta_auto,
        )

    def _run(self, problem, params):
        return nmfa_run_batch(problem, params, self.n_runs, block_size=self.block_size, n_jobs=self.n_jobs)


class CIMPhysics(_BaseIsingEstimator):
    """Full two-quadrature CIM integrator with constant gain ``w``."""

    def __init__(
        self,
        w=CimPhysicsParams.w,
        gamma=CimPhysicsParams.gamma,
        s=CimPhysicsParams.s,
        zeta=CimPhysicsParams.zeta,
        zeta_auto=CimPhysicsParams.zeta_auto,
        noise=CimPhysicsParams.noise_amplitude,
        n_iter=1000,
        n_runs=100,
        random_state=0,
        n_jobs=1,
        block_size=None,
    ):
        self.w = w
        self.gamma = gamma
        self.s = s
        self.zeta = zeta
        self.zeta_auto = zeta_auto
        self.noise = noise
        self.n_iter = n_iter
        self.n_runs = n_runs
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.block_size = block_size

    def _params(self):
        return CimPhysicsParams(
            w=self.w,
            gamma=self.gamma,
            s=self.s,
            zeta=self.zeta,
            noise_amplitude=self.noise,
            iterations=self.n_iter,
            seed=self.random_state,
            zeta_auto=self.zeta_auto,
        )

    def _run(self, problem, params):
        return cim_run_batch(problem, params, self.n_runs, block_size=self.block_size, n_jobs=self.n_jobs)

"""Scikit-learn style front end for the sweeping solver.

The solver maps an initial particle configuration to its configuration at the
horizon, which is transform-shaped: ``fit`` runs the scheme and keeps the full
trajectory, ``transform`` returns terminal positions (re-running for unseen
clouds, since the dynamics depend on the whole cloud).  Parameters follow the
estimator protocol, so the sweeper composes with pipelines and parameter
search utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .sweeper import run
from .transport import ParticleCloud
from .validation import check_positions


class ParticleSweeper(BaseEstimator, TransformerMixin):
    """Sweep particle clouds through a moving viability region.

    Parameters
    ----------
    field : NonlocalField
        Velocity functional driving the crowd.
    moving_set : MovingSet
        Time-dependent viability region C(t).
    tau : float
        Half-window length of the catching-up mesh.
    horizon : float or None
        Final time; defaults to the moving set's horizon.
    substeps, integrator
        Transport ODE discretization (explicit Euler or classical RK4).
    strict : bool
        Enforce the step-feasibility precondition and the declared projection
        reach guard.
    """

    def __init__(self, field=None, moving_set=None, tau=0.01, horizon=None,
                 substeps=1, integrator="rk4", strict=True):
        self.field = field
        self.moving_set = moving_set
        self.tau = tau
        self.horizon = horizon
        self.substeps = substeps
        self.integrator = integrator
        self.strict = strict

    def _run(self, X):
        X = check_positions(X)
        return run(ParticleCloud(X), self.field, self.moving_set, self.tau,
                   horizon=self.horizon, substeps=self.substeps,
                   integrator=self.integrator,
                   enforce_feasibility=self.strict,
                   projection_guard="declared" if self.strict else None)

    def fit(self, X, y=None):
        """Run the scheme from initial positions X and keep the trajectory."""
        trajectory = self._run(X)
        self.trajectory_ = trajectory
        self.n_features_in_ = trajectory.dim
        self._fitted_X = np.array(check_positions(X))
        return self

    def transform(self, X):
        """Positions at the horizon for the cloud X.

        The fitted trajectory is reused when X matches the fitted cloud,
        otherwise the scheme runs afresh (deterministically).
        """
        X = check_positions(X)
        if getattr(self, "_fitted_X", None) is not None and \
                X.shape == self._fitted_X.shape and np.array_equal(X, self._fitted_X):
            return np.array(self.trajectory_.positions[-1])
        return np.array(self._run(X).positions[-1])

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

"""
scikit-learn style facade over the map, caging and sweep modules.

    >>> est = GraspEnergyMap(l1=1.6, l2=1.2, r1=0.2, r2=0.1, w=0.8, r=0.8, mu_s=0.4, dx=0.2)
    >>> est.fit().score()            # normalized caging score
    >>> est.transform([[0.0, 2.0]])  # V, reachable, equilibrium at object positions
    >>> est.predict([[0.0, 2.0]])    # ejection / stable / caged after release
"""
import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .caging import caging_score, follow_gradients
from .contact_solver import ActuationCommand
from .energy_map import build_energy_map, equilibrium_flags, point_energies
from .kinematics import GrasperDesign, ObjectSpec


def check_points(X, name="X"):
    """Object positions as a finite (n, 2) float array."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, input_name=name)
    if X.shape[1] != 2:
        raise ValueError(f"{name} must have two columns (x, y), got {X.shape[1]}")
    return X


def check_positive(value, name, allow_zero=False):
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or not np.isfinite(value):
        raise TypeError(f"{name} must be a finite real number, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return float(value)


class GraspEnergyMap(TransformerMixin, BaseEstimator):
    """Energy map and caging analysis of one grasper design and one object."""

    def __init__(self, l1=1.2, l2=1.2, r1=0.2, r2=0.1, w=0.8, r=0.8, mu_s=0.4,
                 f_left=1.0, f_right=1.0, dx=0.05):
        self.l1 = l1
        self.l2 = l2
        self.r1 = r1
        self.r2 = r2
        self.w = w
        self.r = r
        self.mu_s = mu_s
        self.f_left = f_left
        self.f_right = f_right
        self.dx = dx

    def _validate_params(self):
        for name in ("l1", "l2", "r1", "r2", "r", "f_left", "f_right", "dx"):
            check_positive(getattr(self, name), name)
        check_positive(self.w, "w", allow_zero=True)
        check_positive(self.mu_s, "mu_s", allow_zero=True)
        design = GrasperDesign(self.l1, self.l2, self.r1, self.r2, self.w)
        return design, ObjectSpec(self.r, self.mu_s), ActuationCommand(self.f_left, self.f_right)

    def fit(self, X=None, y=None):
        """Build the map on the default grid (X and y are ignored)."""
        self.design_, self.object_, self.command_ = self._validate_params()
        self.__dict__.pop("caging_", None)
        self.map_ = build_energy_map(self.design_, self.object_, self.command_, dx=self.dx,
                                     strict=False)
        self.n_reachable_ = self.map_.n_reachable
        return self

    def transform(self, X):
        """Columns V (NaN when unreachable), reachable, equilibrium at positions X."""
        check_is_fitted(self, "map_")
        X = check_points(X)
        V, reach, left, right = point_energies(self.design_, self.object_, self.command_,
                                               X[:, 0], X[:, 1])
        eq = np.zeros(len(X), dtype=bool)
        idx = np.flatnonzero(reach)
        if len(idx):
            eq[idx] = equilibrium_flags(self.design_, self.object_, self.command_,
                                        X[idx, 0], X[idx, 1], left.take(idx), right.take(idx))
        return np.column_stack([V, reach.astype(float), eq.astype(float)])

    def predict(self, X):
        """Outcome of releasing the object at each position of X."""
        check_is_fitted(self, "map_")
        X = check_points(X)
        trajs = follow_gradients(self.map_, X)
        return np.array([t.outcome for t in trajs], dtype=object)

    def caging_score(self):
        check_is_fitted(self, "map_")
        if not hasattr(self, "caging_"):
            self.caging_ = caging_score(self.map_)
        return self.caging_

    def score(self, X=None, y=None):
        """Normalized caging score in [0, 1]."""
        return self.caging_score().normalized

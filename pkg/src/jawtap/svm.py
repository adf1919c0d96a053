"""Binary gesture-vs-noise gate: a soft-margin linear SVM.

Features are z-scored with training statistics, then the L1-loss dual is
solved by deterministic coordinate descent (bias handled as an extra
always-one feature). Ties at margin zero resolve to the gesture side: a
false gesture here can still be rejected downstream by template distance,
a dropped gesture cannot be recovered.
"""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning, NotFittedError

from .errors import ModeMismatch, SingleClass
from .validation import as_float_matrix

GESTURE = "gesture"
NOISE = "noise"


class LinearSvmGate(BaseEstimator, ClassifierMixin):
    """Linear-kernel SVM with the sklearn estimator interface.

    Parameters
    ----------
    C : float
        Soft-margin penalty.
    tol : float
        KKT tolerance on the maximal projected gradient.
    max_passes : int
        Upper bound on coordinate-descent sweeps; if reached before
        convergence the best-so-far model is kept and ``converged_`` is
        False.
    """

    def __init__(self, C: float = 1.0, tol: float = 1e-3,
                 max_passes: int = 100):
        self.C = C
        self.tol = tol
        self.max_passes = max_passes

    def _encode(self, y) -> np.ndarray:
        y = np.asarray(y)
        if y.dtype.kind in "bi":
            pos = y.astype(bool)
        else:
            values = set(str(v) for v in y)
            if not values <= {GESTURE, NOISE}:
                raise ValueError(
                    f"labels must be '{GESTURE}'/'{NOISE}' or boolean, "
                    f"got {sorted(values)}"
                )
            pos = np.array([str(v) == GESTURE for v in y])
        if pos.all() or not pos.any():
            raise SingleClass("training data contains a single class")
        return np.where(pos, 1.0, -1.0)

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        yv = self._encode(y)
        if X.shape[0] != yv.shape[0]:
            raise ValueError("X and y lengths differ")
        self.n_features_in_ = X.shape[1]
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        self.mean_ = mean
        self.scale_ = std

        Z = np.column_stack([(X - mean) / std, np.ones(X.shape[0])])
        n, d = Z.shape
        q_diag = np.einsum("ij,ij->i", Z, Z)
        alpha = np.zeros(n)
        w = np.zeros(d)
        self.converged_ = False
        for _ in range(self.max_passes):
            max_pg = 0.0
            for i in range(n):
                g = yv[i] * float(Z[i] @ w) - 1.0
                if alpha[i] == 0.0:
                    pg = min(g, 0.0)
                elif alpha[i] == self.C:
                    pg = max(g, 0.0)
                else:
                    pg = g
                if abs(pg) > max_pg:
                    max_pg = abs(pg)
                if abs(pg) > 1e-12:
                    a_new = min(max(alpha[i] - g / q_diag[i], 0.0), self.C)
                    if a_new != alpha[i]:
                        w += (a_new - alpha[i]) * yv[i] * Z[i]
                        alpha[i] = a_new
            if max_pg < self.tol:
                self.converged_ = True
                break
        if not self.converged_:
            warnings.warn(
                f"gate SVM did not reach tol={self.tol} within "
                f"{self.max_passes} passes",
                ConvergenceWarning,
            )
        self.weights_ = w[:-1]
        self.bias_ = float(w[-1])
        self.dual_coef_ = alpha
        self.classes_ = np.array([NOISE, GESTURE])
        return self

    def _check_fitted_input(self, X) -> np.ndarray:
        if not hasattr(self, "weights_"):
            raise NotFittedError("fit the gate before predicting")
        X = as_float_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ModeMismatch(
                f"model expects {self.n_features_in_} features, "
                f"got {X.shape[1]}"
            )
        return X

    def decision_function(self, X) -> np.ndarray:
        """Signed margins; gesture on the non-negative side."""
        X = self._check_fitted_input(X)
        Z = (X - self.mean_) / self.scale_
        return Z @ self.weights_ + self.bias_

    def predict(self, X) -> np.ndarray:
        margins = self.decision_function(X)
        return np.where(margins >= 0.0, GESTURE, NOISE)

    def gate(self, values: np.ndarray) -> tuple[str, float]:
        """Classify one feature vector; returns (class, margin)."""
        margin = float(self.decision_function(values[None, :])[0])
        return (GESTURE if margin >= 0.0 else NOISE), margin

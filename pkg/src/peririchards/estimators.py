"""scikit-learn style wrapper around the discrete Chebyshev transform."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import chebyshev as cheb


class ChebyshevTransformer(TransformerMixin, BaseEstimator):
    """Map rows of nodal values on a Gauss-Lobatto grid to Chebyshev coefficients.

    Parameters
    ----------
    n_modes : int or None
        Grid degree. If None it is inferred from the number of columns at fit.

    Attributes
    ----------
    grid_ : SpectralGrid
    n_features_in_ : int
    """

    def __init__(self, n_modes=None):
        self.n_modes = n_modes

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[1] - 1 if self.n_modes is None else int(self.n_modes)
        if X.shape[1] != n + 1:
            raise ValueError(f"X has {X.shape[1]} columns, expected {n + 1} for n_modes={n}")
        self.grid_ = cheb.make_grid(n)
        self.n_features_in_ = X.shape[1]
        return self

    def _check(self, X):
        check_is_fitted(self, "grid_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X

    def transform(self, X):
        X = self._check(X)
        return np.array([cheb.forward_transform(row, self.grid_) for row in X])

    def inverse_transform(self, C):
        C = self._check(C)
        return np.array([cheb.inverse_transform(row, self.grid_) for row in C])

"""Scikit-learn style wrappers around the sketcher and the compressor.

Both classes follow the estimator contract (init stores hyperparameters
verbatim, ``fit`` builds derived state with trailing underscores,
``get_params``/``set_params`` come from ``BaseEstimator``), so they clone and
compose with ordinary scikit-learn tooling.  Rows of X are independent blocks.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_symbols
from .codec import design_storage_set, polar_dec_adapt, ModelSet
from .measures import binary_dist_with_entropy
from .polar import transform_array
from .sketch import build_sketch_spec, recover, sketch


class PolarSketcher(BaseEstimator, TransformerMixin):
    """Deterministic sparse sketching transformer over Z_a.

    ``transform`` maps blocks of n symbols to their m measurements;
    ``inverse_transform`` attempts exact recovery by polar decoding under the
    worst-case design spike.

    Parameters
    ----------
    a : int
        Prime alphabet size.
    epsilon : float
        Sparsity level: sources place at least 1 - epsilon mass on symbol 0.
    n : int
        Block length, a power of two.
    delta : float
        Storage-set threshold.
    method : str
        Design distribution: 'known_dist', 'pcp', 'brut_A' or 'brut_B'.
    samples, guard, seed :
        Monte-Carlo storage-set parameters (used when n is too large for the
        exact oracle).
    """

    def __init__(self, a=2, epsilon=0.05, n=4096, delta=0.01, method="pcp",
                 samples=2000, guard=2.0, seed=0):
        self.a = a
        self.epsilon = epsilon
        self.n = n
        self.delta = delta
        self.method = method
        self.samples = samples
        self.guard = guard
        self.seed = seed

    def fit(self, X=None, y=None):
        self.spec_ = build_sketch_spec(
            self.a, self.epsilon, self.n, self.delta, method=self.method,
            samples=self.samples, guard=self.guard, seed=self.seed,
        )
        self.m_ = self.spec_.m
        return self

    def _check_fitted(self):
        if not hasattr(self, "spec_"):
            raise NotFittedError("PolarSketcher must be fitted before use")

    def transform(self, X):
        self._check_fitted()
        X = check_symbols(X, self.spec_.a, self.spec_.n)
        return sketch(self.spec_, X)

    def inverse_transform(self, Y):
        self._check_fitted()
        return recover(self.spec_, Y)


class UniversalBinaryCompressor(BaseEstimator, TransformerMixin):
    """Fixed-rate lossless compressor for binary blocks of unknown bias.

    ``transform`` returns the stored transformed symbols (measurement view,
    one row per block: storage-set symbols then the checker);
    ``inverse_transform`` reconstructs the blocks adaptively and records which
    side of the alphabet each block favoured in ``chosen_models_``.
    """

    def __init__(self, rate=0.5, n=4096, delta=0.005, samples=2000, guard=2.0, seed=0):
        self.rate = rate
        self.n = n
        self.delta = delta
        self.samples = samples
        self.guard = guard
        self.seed = seed

    def fit(self, X=None, y=None):
        self.storage_ = design_storage_set(
            self.rate, self.n, self.delta, self.samples, self.guard, self.seed
        )
        mask = self.storage_.mask()
        self.checker_indices_ = (
            np.array([], dtype=np.int64) if mask[self.n - 1] else np.array([self.n - 1])
        )
        self.models_ = ModelSet((
            binary_dist_with_entropy(self.rate, 0),
            binary_dist_with_entropy(self.rate, 1),
        ))
        self.rate_ = (self.storage_.size + self.checker_indices_.size) / self.n
        return self

    def _check_fitted(self):
        if not hasattr(self, "storage_"):
            raise NotFittedError("UniversalBinaryCompressor must be fitted before use")

    def transform(self, X):
        self._check_fitted()
        X = check_symbols(X, 2, self.n)
        single = X.ndim == 1
        U = transform_array(X, 2)
        if single:
            U = U[None, :]
        out = np.concatenate(
            [U[:, self.storage_.indices], U[:, self.checker_indices_]], axis=1
        )
        return out[0] if single else out

    def inverse_transform(self, Y):
        self._check_fitted()
        Y = check_symbols(Y, 2)
        single = Y.ndim == 1
        if single:
            Y = Y[None, :]
        k = self.storage_.size
        if Y.shape[1] != k + self.checker_indices_.size:
            raise ValueError("unexpected stored-symbol width")
        x_hat, chosen = polar_dec_adapt(
            self.models_, self.n, self.storage_, self.checker_indices_,
            Y[:, :k], Y[:, k:], seed=self.seed,
        )
        self.chosen_models_ = np.atleast_1d(chosen)
        return x_hat[0] if single else x_hat

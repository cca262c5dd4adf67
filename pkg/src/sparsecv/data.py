"""Dataset container and dense/sparse design-matrix helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .families import GlmFamily, check_labels

__all__ = ["Dataset", "DENSE_DENSITY_THRESHOLD"]

# Above this nonzero fraction a sparse design is stored densely.
DENSE_DENSITY_THRESHOLD = 0.25


def _prepare_design(x):
    if sp.issparse(x):
        x = sp.csc_array(x)
        density = x.nnz / float(x.shape[0] * x.shape[1])
        if density > DENSE_DENSITY_THRESHOLD:
            return np.ascontiguousarray(x.toarray(), dtype=float)
        return x.astype(float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"design matrix must be 2-D, got shape {x.shape}")
    return x


@dataclass
class Dataset:
    """An (x, y) pair plus the GLM family tag.

    ``x`` is an N x D design, dense ndarray or CSC sparse (sparse inputs
    denser than 25% are densified). Instances are treated as immutable;
    dense arrays are marked read-only.
    """

    x: object
    y: np.ndarray
    family: GlmFamily
    _csr_cache: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.x = _prepare_design(self.x)
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.family = GlmFamily.parse(self.family)
        n, d = self.x.shape
        if n < 1 or d < 1:
            raise ValueError(f"need N >= 1 and D >= 1, got shape {(n, d)}")
        if self.y.shape[0] != n:
            raise ValueError(
                f"response length {self.y.shape[0]} does not match N={n}"
            )
        if self.family is GlmFamily.LOGISTIC:
            check_labels(self.y)
        if isinstance(self.x, np.ndarray):
            self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.x)

    def matvec(self, theta) -> np.ndarray:
        """x @ theta as a dense vector."""
        out = self.x @ np.asarray(theta, dtype=float)
        return np.asarray(out).ravel()

    def rmatvec(self, v) -> np.ndarray:
        """x.T @ v as a dense vector."""
        out = self.x.T @ np.asarray(v, dtype=float)
        return np.asarray(out).ravel()

    def row(self, n) -> np.ndarray:
        """Row n of the design as a dense 1-D vector."""
        if self.is_sparse:
            if self._csr_cache is None:
                object.__setattr__(self, "_csr_cache", sp.csr_array(self.x))
            return self._csr_cache[[n], :].toarray().ravel()
        return np.asarray(self.x[n])

    def columns(self, idx) -> np.ndarray:
        """Dense N x |idx| submatrix of the requested columns."""
        idx = np.asarray(idx, dtype=int)
        if self.is_sparse:
            return self.x[:, idx].toarray()
        return np.asarray(self.x[:, idx])

    def dense_x(self) -> np.ndarray:
        return self.x.toarray() if self.is_sparse else np.asarray(self.x)

"""Weighted n-fold product spaces and projections onto scaled-diagonal subspaces.

Vectors are plain 1-D ``float64`` arrays. A *product vector* stacks ``n``
blocks of equal dimension into one flat array of length ``n * block_dim``.
Every function here also accepts batches: arrays of shape ``(..., dim)``
are processed along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSubspaceError, ParameterError, ShapeError

__all__ = [
    "WeightedSpace",
    "ScaledDiagonal",
    "as_vector",
    "inner_w",
    "norm_w",
    "project_scaled_diagonal",
    "project_affine_complement",
]


def as_vector(x) -> np.ndarray:
    """Coerce input to a float64 array and require all entries finite."""
    v = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ParameterError("vector entries must be finite")
    return v


@dataclass(frozen=True)
class WeightedSpace:
    """An n-fold product of a ``block_dim``-dimensional space with block weights.

    The inner product is ``<x, y> = sum_i w_i <x_i, y_i>`` over the ``n``
    blocks; positive weights make it positive definite.
    """

    n_blocks: int
    block_dim: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_blocks < 2:
            raise ParameterError("a product space needs at least 2 blocks")
        if self.block_dim < 1:
            raise ParameterError("block_dim must be positive")
        w = as_vector(self.weights)
        if w.shape != (self.n_blocks,):
            raise ShapeError(
                f"expected {self.n_blocks} weights, got shape {w.shape}"
            )
        if np.any(w <= 0.0):
            raise ParameterError("all block weights must be strictly positive")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        """Total dimension of a flat product vector."""
        return self.n_blocks * self.block_dim

    def split(self, x: np.ndarray) -> np.ndarray:
        """Reshape ``(..., n*d)`` into blocks ``(..., n, d)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ShapeError(
                f"product vector has length {x.shape[-1]}, expected {self.dim}"
            )
        return x.reshape(x.shape[:-1] + (self.n_blocks, self.block_dim))

    def join(self, blocks: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`split`."""
        blocks = np.asarray(blocks, dtype=np.float64)
        if blocks.shape[-2:] != (self.n_blocks, self.block_dim):
            raise ShapeError(
                f"expected trailing shape {(self.n_blocks, self.block_dim)}, "
                f"got {blocks.shape[-2:]}"
            )
        return blocks.reshape(blocks.shape[:-2] + (self.dim,))


@dataclass(frozen=True)
class ScaledDiagonal:
    """The subspace ``{(t_1 u, ..., t_n u)}`` of a product space.

    ``tau`` must not be identically zero; individual zero entries are fine as
    long as the weighted sum ``sum_i w_i t_i^2`` stays positive.
    """

    tau: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = as_vector(self.tau)
        if t.ndim != 1 or t.size == 0:
            raise ShapeError("tau must be a nonempty 1-D sequence")
        if not np.any(t != 0.0):
            raise InvalidSubspaceError("tau must not be identically zero")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "tau", t)

    def weighted_norm_sq(self, space: WeightedSpace) -> float:
        """``sum_i w_i t_i^2`` for the ambient space."""
        self._check(space)
        return float(np.dot(space.weights, self.tau**2))

    def _check(self, space: WeightedSpace) -> None:
        if self.tau.shape != (space.n_blocks,):
            raise ShapeError(
                f"tau has {self.tau.size} entries, space has "
                f"{space.n_blocks} blocks"
            )


def inner_w(x: np.ndarray, y: np.ndarray, space: WeightedSpace):
    """Weighted inner product ``sum_i w_i <x_i, y_i>`` of two product vectors.

    Symmetric and bilinear. For batched inputs of shape ``(..., dim)`` the
    result has shape ``(...,)``; for plain vectors it is a float.
    """
    xb = space.split(x)
    yb = space.split(y)
    out = np.einsum("...nd,...nd,n->...", xb, yb, space.weights)
    return float(out) if out.ndim == 0 else out


def norm_w(x: np.ndarray, space: WeightedSpace):
    """Norm induced by :func:`inner_w`."""
    return np.sqrt(inner_w(x, x, space))


def project_scaled_diagonal(
    x: np.ndarray, diag: ScaledDiagonal, space: WeightedSpace
) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the scaled diagonal, in the weighted metric.

    The image is ``(t_1 u, ..., t_n u)`` with
    ``u = (sum_i w_i t_i x_i) / (sum_i w_i t_i^2)``; the residual is
    orthogonal (weighted) to every element of the subspace.
    """
    denom = diag.weighted_norm_sq(space)
    if denom <= 0.0:
        raise InvalidSubspaceError(
            "weighted norm of tau vanishes; the subspace is degenerate"
        )
    xb = space.split(x)
    wt = space.weights * diag.tau
    u = np.einsum("...nd,n->...d", xb, wt) / denom
    blocks = u[..., None, :] * diag.tau[:, None]
    return space.join(blocks)


def project_affine_complement(
    z: np.ndarray,
    anchor: np.ndarray,
    diag: ScaledDiagonal,
    space: WeightedSpace,
) -> np.ndarray:
    """Project ``z`` onto ``anchor + C_perp``, the weighted orthogonal complement
    of the scaled diagonal ``C`` shifted by ``anchor``.

    Computed as ``anchor + (Id - P_C)(z - anchor)``; the residual
    ``z - result`` always lies in ``C``.
    """
    z = np.asarray(z, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    shifted = z - anchor
    return anchor + (shifted - project_scaled_diagonal(shifted, diag, space))

"""Log-scale singular value computations behind the certification routines.

Long products are kept as a unit-norm core with a separate log scale, so
singular value ratios stay computable far past float overflow.  Subspaces
are orthonormal frames; distances are sines of principal angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, NoGapError
from .words import Letter, ReducedWord

GAP_TOLERANCE = 1e-12
SUBSPACE_TOLERANCE = 1e-8
_NORM_BAND = (0.5, 2.0)
_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class ScaledMatrix:
    """A d x d matrix stored as e^logscale * core with core kept near unit norm."""

    core: np.ndarray
    logscale: float = 0.0

    def __post_init__(self):
        core = np.asarray(self.core, dtype=float)
        if core.ndim != 2 or core.shape[0] != core.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got {core.shape}")
        object.__setattr__(self, "core", core)

    @staticmethod
    def identity(dim: int) -> "ScaledMatrix":
        return ScaledMatrix(np.eye(dim), 0.0)

    @staticmethod
    def of(matrix: np.ndarray) -> "ScaledMatrix":
        return _renormalized(np.asarray(matrix, dtype=float), 0.0)

    @property
    def dim(self) -> int:
        return self.core.shape[0]

    def times(self, factor: np.ndarray) -> "ScaledMatrix":
        """Right-multiply by an ordinary matrix, renormalizing the core."""
        return _renormalized(self.core @ factor, self.logscale)

    def compose(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return _renormalized(
            self.core @ other.core, self.logscale + other.logscale
        )

    def matrix(self) -> np.ndarray:
        """Materialize at true scale; refuses when the scale would overflow."""
        if abs(self.logscale) > 600.0:
            raise OverflowError(
                f"logscale {self.logscale:.1f} is too large to materialize"
            )
        return math.exp(self.logscale) * self.core


def _renormalized(core: np.ndarray, logscale: float) -> ScaledMatrix:
    # Frobenius norm as the cheap estimate of the operator norm
    estimate = float(np.linalg.norm(core))
    if not np.isfinite(estimate) or estimate == 0.0:
        raise ValueError("matrix entries must be finite and not all zero")
    if _NORM_BAND[0] <= estimate <= _NORM_BAND[1]:
        return ScaledMatrix(core, logscale)
    return ScaledMatrix(core / estimate, logscale + math.log(estimate))


@dataclass(frozen=True, eq=False)
class Representation:
    """Generator images of a free group in GL(d, R), inverses precomputed."""

    rank: int
    dim: int
    images: Mapping[Letter, np.ndarray]

    @staticmethod
    def of(generators: Sequence[np.ndarray]) -> "Representation":
        if not generators:
            raise ValueError("need at least one generator image")
        mats = [np.asarray(g, dtype=float) for g in generators]
        dim = mats[0].shape[0]
        images: dict[Letter, np.ndarray] = {}
        for i, m in enumerate(mats, start=1):
            if m.shape != (dim, dim):
                raise DimensionMismatchError(
                    f"generator {i} has shape {m.shape}, expected {(dim, dim)}"
                )
            if not np.all(np.isfinite(m)):
                raise ValueError(f"generator {i} has non-finite entries")
            try:
                inv = np.linalg.inv(m)
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"generator {i} is singular") from exc
            if np.max(np.abs(inv @ m - np.eye(dim))) > 1e-10:
                raise ValueError(
                    f"generator {i} is too ill-conditioned to invert reliably"
                )
            images[Letter(i, 1)] = m
            images[Letter(i, -1)] = inv
        return Representation(len(mats), dim, images)

    def image(self, letter: Letter) -> np.ndarray:
        try:
            return self.images[letter]
        except KeyError:
            raise ValueError(f"letter {letter} outside rank {self.rank}") from None


def evaluate(rep: Representation, w: ReducedWord) -> ScaledMatrix:
    """Left-to-right product of generator images with running renormalization."""
    out = ScaledMatrix.identity(rep.dim)
    for letter in w:
        out = out.times(rep.image(letter))
    return out


def singular_values(m: ScaledMatrix) -> np.ndarray:
    """Log-scale singular values, descending."""
    s = np.linalg.svd(m.core, compute_uv=False)
    return m.logscale + np.log(np.clip(s, _TINY, None))


def log_norm(m: ScaledMatrix) -> float:
    """log of the operator norm."""
    return float(singular_values(m)[0])


def log_conorm(m: ScaledMatrix) -> float:
    """log of the smallest singular value."""
    return float(singular_values(m)[-1])


def gap_margin(m: ScaledMatrix, k: int) -> float:
    """log sigma_k - log sigma_{k+1}; zero means no gap of index k."""
    logs = singular_values(m)
    if not 1 <= k < len(logs):
        raise ValueError(f"gap index must satisfy 1 <= k < {len(logs)}, got {k}")
    return float(logs[k - 1] - logs[k])


@dataclass(frozen=True, eq=False)
class Subspace:
    """A k-plane through the origin, held as an orthonormal d x k frame."""

    dimension: int
    frame: np.ndarray

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2 or frame.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"frame shape {frame.shape} does not match dimension {self.dimension}"
            )
        if not 1 <= self.dimension <= frame.shape[0]:
            raise DimensionMismatchError(
                f"dimension {self.dimension} invalid in ambient {frame.shape[0]}"
            )
        gram = frame.T @ frame
        if np.max(np.abs(gram - np.eye(self.dimension))) > 1e-12:
            raise ValueError("frame columns are not orthonormal")
        object.__setattr__(self, "frame", frame)

    @staticmethod
    def from_spanning(matrix: np.ndarray) -> "Subspace":
        """Orthonormalize spanning columns; rejects rank-deficient input."""
        mat = np.atleast_2d(np.asarray(matrix, dtype=float))
        q, r = np.linalg.qr(mat)
        diag = np.abs(np.diag(r))
        if np.any(diag < 1e-12 * max(1.0, diag.max())):
            raise ValueError("spanning columns are numerically dependent")
        return Subspace(mat.shape[1], q)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    def equals(self, other: "Subspace", tol: float = SUBSPACE_TOLERANCE) -> bool:
        return grassmann_distance(self, other) < tol


def u_k(m: ScaledMatrix, k: int) -> Subspace:
    """Span of the top-k left singular vectors; needs a gap of index k."""
    left, s, _ = np.linalg.svd(m.core)
    _require_gap(m, k, s)
    return Subspace(k, left[:, :k])


def s_dk(m: ScaledMatrix, k: int) -> Subspace:
    """Span of the bottom (d-k) right singular vectors; needs a gap of index k."""
    _, s, right_t = np.linalg.svd(m.core)
    _require_gap(m, k, s)
    return Subspace(m.dim - k, right_t[k:].T)


def _require_gap(m: ScaledMatrix, k: int, svals: np.ndarray) -> None:
    if not 1 <= k < m.dim:
        raise ValueError(f"gap index must satisfy 1 <= k < {m.dim}, got {k}")
    logs = np.log(np.clip(svals, _TINY, None))
    if logs[k - 1] - logs[k] <= GAP_TOLERANCE:
        raise NoGapError(
            f"no singular value gap of index {k}: "
            f"log margin {logs[k - 1] - logs[k]:.3e}"
        )


def grassmann_distance(v: Subspace, w: Subspace) -> float:
    """Sine of the largest principal angle between equal-dimension planes.

    Computed from the frame product as the norm of W minus its component
    inside V; this sine form has no cancellation for nearby planes, unlike
    sqrt(1 - cos^2) on the smallest overlap singular value.
    """
    if v.dimension != w.dimension or v.ambient_dim != w.ambient_dim:
        raise DimensionMismatchError(
            f"cannot compare a {v.dimension}-plane with a {w.dimension}-plane"
        )
    residual = w.frame - v.frame @ (v.frame.T @ w.frame)
    return float(np.clip(np.linalg.svd(residual, compute_uv=False)[0], 0.0, 1.0))


def transversality_gap(v: Subspace, w: Subspace) -> float:
    """Smallest singular value of the stacked frames; positive iff V + W = R^d."""
    if v.ambient_dim != w.ambient_dim or v.dimension + w.dimension != v.ambient_dim:
        raise DimensionMismatchError(
            f"dimensions {v.dimension}+{w.dimension} do not fill ambient "
            f"{v.ambient_dim}"
        )
    stacked = np.hstack([v.frame, w.frame])
    return float(np.clip(np.linalg.svd(stacked, compute_uv=False)[-1], 0.0, 1.0))


def apply_to_subspace(matrix: np.ndarray, v: Subspace) -> Subspace:
    """Image of a subspace under an invertible matrix, re-orthonormalized."""
    return Subspace.from_spanning(matrix @ v.frame)

"""Core dense linear algebra: point sets, transforms, subspaces, moments.

Everything here is a pure function of immutable inputs; arrays are copied on
ingestion and never mutated afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionViolated, SingularTransform, ZeroVector

# Default tolerance for structural invariants (orthonormality, symmetry, ...).
TOL = 1e-9

# Points with norm at or below this are rejected at ingestion.
ZERO_NORM_FLOOR = 1e-300

# Gram-Schmidt residuals below this relative size are treated as zero.
DROP_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce a Transform or array-like to a float ndarray."""
    if isinstance(a, Transform):
        return a.matrix
    return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class PointSet:
    """A multiset of n nonzero points in R^d, stored as an (n, d) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise PreconditionViolated("point set must be a nonempty (n, d) array")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms <= ZERO_NORM_FLOOR) or not np.all(np.isfinite(pts)):
            bad = int(np.argmin(norms))
            raise ZeroVector("point with zero or non-finite norm", index=bad)
        object.__setattr__(self, "points", pts.copy())
        self.points.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Transform:
    """An invertible d x d matrix A together with the map f_A(x) = Ax/||Ax||."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionViolated("transform matrix must be square")
        object.__setattr__(self, "matrix", m.copy())
        self.matrix.setflags(write=False)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, d: int) -> "Transform":
        return cls(np.eye(d))


@dataclass(frozen=True)
class Subspace:
    """A subspace of R^d given by an orthonormal basis of k row vectors."""

    basis: np.ndarray
    ambient: int = field(default=0)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.size == 0:
            amb = self.ambient if self.ambient else (b.shape[1] if b.ndim == 2 else 0)
            if amb < 1:
                raise PreconditionViolated("empty subspace needs an ambient dimension")
            b = np.zeros((0, amb))
        b = np.atleast_2d(b)
        gram = b @ b.T
        if b.shape[0] and np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e-7:
            raise PreconditionViolated("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", b.copy())
        object.__setattr__(self, "ambient", b.shape[1])
        self.basis.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        """The d x d projection matrix I_V."""
        return self.basis.T @ self.basis

    def complement(self) -> "Subspace":
        """Orthonormal basis of the orthogonal complement."""
        rows = list(self.basis) + list(np.eye(self.ambient))
        full = orthonormalize(rows).basis
        return Subspace(full[self.dim:], ambient=self.ambient)

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(np.eye(d))

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(np.zeros((0, d)), ambient=d)


@dataclass(frozen=True)
class MomentMatrix:
    """Second-moment matrix of normalized images, with its fixed normalizer n."""

    entries: np.ndarray
    normalizer: int

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float).copy())
        self.entries.setflags(write=False)

    def frobenius_sq(self) -> float:
        return float(np.sum(self.entries * self.entries))


def normalize_map(a, x) -> np.ndarray:
    """f_A(x) = Ax / ||Ax||_2 for a single point x."""
    m = as_matrix(a)
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx <= ZERO_NORM_FLOOR:
        raise ZeroVector("cannot normalize the image of a zero vector")
    y = m @ (x / nx)
    ny = np.linalg.norm(y)
    if ny <= ZERO_NORM_FLOOR:
        raise SingularTransform("||Ax|| underflowed; transform is numerically singular")
    return y / ny


def normalized_images(a, x: PointSet) -> np.ndarray:
    """All f_A(x) as rows of an (n, d) array."""
    m = as_matrix(a)
    # Pre-scaling each point by its own norm keeps ||Ax|| well inside range
    # even when A carries a huge condition number.
    pts = x.points / np.linalg.norm(x.points, axis=1, keepdims=True)
    y = pts @ m.T
    norms = np.linalg.norm(y, axis=1)
    if np.any(norms <= ZERO_NORM_FLOOR):
        raise SingularTransform(
            "||Ax|| underflowed for some point", index=int(np.argmin(norms))
        )
    return y / norms[:, None]


def second_moment(a, x: PointSet, subset=None, normalizer: int | None = None) -> MomentMatrix:
    """M_A(X') = (1/n) sum_{x in X'} f_A(x) f_A(x)^T.

    The divisor is always the full-set count n (or the explicit
    ``normalizer``), never the subset size.
    """
    n = x.n if normalizer is None else int(normalizer)
    imgs = normalized_images(a, x)
    if subset is not None:
        idx = np.asarray(list(subset), dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= x.n):
            raise PreconditionViolated("subset index out of range")
        imgs = imgs[idx]
    m = imgs.T @ imgs / n
    return MomentMatrix((m + m.T) / 2.0, n)


def block_moment(a, x: PointSet, v1: Subspace, v2: Subspace,
                 subset=None, normalizer: int | None = None) -> np.ndarray:
    """M^{V1,V2}_A(X') = I_{V1} M I_{V2} of the corresponding second moment."""
    m = second_moment(a, x, subset=subset, normalizer=normalizer).entries
    return v1.projector() @ m @ v2.projector()


def project(x, v: Subspace) -> np.ndarray:
    """Projection of x onto span(V)."""
    x = np.asarray(x, dtype=float)
    if v.dim == 0:
        return np.zeros_like(x)
    return (x @ v.basis.T) @ v.basis


def potential(a, x: PointSet) -> float:
    """Squared Frobenius norm of the full second-moment matrix; in [1/d, 1]."""
    return second_moment(a, x).frobenius_sq()


def orthonormalize(vectors, drop_tol: float = DROP_TOL) -> Subspace:
    """Orthonormal basis of the span, via modified Gram-Schmidt.

    Vectors whose residual norm falls below ``drop_tol`` times their own norm
    are discarded. Each accepted vector is re-orthogonalized once, which keeps
    the basis orthonormal to machine precision even for ill-conditioned input.
    """
    rows = [np.asarray(v, dtype=float) for v in vectors]
    if not rows:
        raise PreconditionViolated("cannot infer ambient dimension of empty input")
    d = rows[0].shape[0]
    basis: list[np.ndarray] = []
    for v in rows:
        nv = np.linalg.norm(v)
        if nv <= ZERO_NORM_FLOOR:
            continue
        r = v / nv
        for _ in range(2):
            for q in basis:
                r = r - (q @ r) * q
        nr = np.linalg.norm(r)
        if nr > drop_tol:
            basis.append(r / nr)
        if len(basis) == d:
            break
    return Subspace(np.array(basis) if basis else np.zeros((0, d)), ambient=d)


def preimage_subspace(a, v: Subspace) -> Subspace:
    """Orthonormal basis of A^{-1} V for an invertible transform A."""
    m = as_matrix(a)
    if v.dim == 0:
        return Subspace.zero(v.ambient)
    pulled = np.linalg.solve(m, v.basis.T).T
    return orthonormalize(pulled)


def membership_mask(x: PointSet, v: Subspace, tau: float = TOL) -> np.ndarray:
    """Boolean mask of points whose relative residual to V is at most tau."""
    pts = x.points
    resid = pts - project(pts, v)
    return np.linalg.norm(resid, axis=1) <= tau * np.linalg.norm(pts, axis=1)

"""Recursive descent into dense subspaces until a radially isotropic core is
found: if the transform computation certifies a dense subspace V, restrict the
point set to X intersect V (in V-coordinates via an isometry L) and retry.
Density |X ^ V| >= (n/d) dim(V) is preserved at every level, and the dimension
strictly decreases, so the recursion ends within d levels."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInput
from .iteration import ForsterConfig, forster_transform
from .linalg import PointSet, Subspace


@dataclass(frozen=True)
class ForsterDecomposition:
    """A subspace V (whose orthonormal basis rows are the isometry L), a
    transform A on R^{dim V}, and the indices of the points inside V."""

    subspace: Subspace
    matrix: np.ndarray
    members: list[int]
    depth: int
    iterations: int
    final_potential: float

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        """A L x for rows of pts (assumed to lie in V)."""
        return (pts @ self.subspace.basis.T) @ self.matrix.T


def forster_subspace(x: PointSet, epsilon: float,
                     cfg: ForsterConfig | None = None) -> ForsterDecomposition:
    """Find (V, A) with the points of X inside V in approximate radial
    isotropic position after A, and |X ^ V| >= (n/d) dim(V)."""
    cfg = cfg or ForsterConfig(epsilon=epsilon)
    n, d = x.n, x.d
    basis = Subspace.full(d)
    idx = np.arange(n)
    depth = 0
    while True:
        if idx.size == 0:
            raise DegenerateInput("no points left at recursion depth",
                                  depth=depth)
        coords = x.points[idx] @ basis.basis.T
        level_cfg = replace(cfg, epsilon=epsilon, seed=cfg.seed + 65537 * depth)
        outcome = forster_transform(PointSet(coords), epsilon, level_cfg)
        if outcome.is_transform:
            assert idx.size * d >= n * basis.dim
            return ForsterDecomposition(
                subspace=basis, matrix=outcome.matrix, members=idx.tolist(),
                depth=depth, iterations=outcome.iterations,
                final_potential=outcome.final_potential)
        # Descend: lift the certificate back to ambient coordinates.
        w = outcome.subspace
        basis = Subspace(w.basis @ basis.basis)
        idx = idx[np.asarray(outcome.members, dtype=int)]
        depth += 1
        assert depth <= d and basis.dim >= 1

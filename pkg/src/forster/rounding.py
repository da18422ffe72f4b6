"""Condition-number reduction and entry rounding for transform matrices.

The reduction step rescales a subspace R that is close to the large singular
directions but avoids a protective subspace W spanned by dataset points whose
images under A are small. Each accepted step divides the condition number by
~1/delta while moving every normalized image f_A(x) by at most
16/((g-1) rho delta). Once the condition estimate is under the threshold, the
matrix is snapped to an integer grid (scaled so the integers stay exactly
representable in float64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DoesNotSpan, GapTooSmall, MagnitudeCapExceeded,
                     MaxRoundsExceeded, PreconditionViolated)
from .eigen import factored_spectrum
from .linalg import (DROP_TOL, PointSet, Subspace, as_matrix,
                     normalized_images, orthonormalize, project)

INT_CAP = float(2 ** 53)


@dataclass(frozen=True)
class RoundConfig:
    """zeta: transform-preservation budget; threshold: condition cutoff N
    (default (d/zeta)^6); delta_rescale: per-step shrink factor, default
    2^-b_est clamped to [8/g, 1/2]; max_rounds caps the reduction loop."""

    zeta: float = 1e-3
    threshold: float | None = None
    delta_rescale: float | None = None
    max_rounds: int = 64
    seed: int = 0

    def resolved_threshold(self, d: int) -> float:
        if self.threshold is not None:
            return float(self.threshold)
        return (d / self.zeta) ** 6


@dataclass(frozen=True)
class SetEigenProfile:
    """Greedy per-stage minimizers w_i with their ratio values p_i."""

    vectors: np.ndarray
    values: np.ndarray


@dataclass
class StepReport:
    m: int
    g: float
    delta: float
    kappa_before: float
    kappa_after: float
    drift: float
    drift_bound: float
    rho: float


@dataclass
class RoundReport:
    kappa_before: float
    kappa_after: float
    max_drift: float
    rounds: int
    steps: list = field(default_factory=list)


def eigendecomposition_from_set(a, x: PointSet) -> SetEigenProfile:
    """Greedy singular profile of A with respect to the dataset X.

    Stage i picks the point (not yet in the span of the previous picks)
    minimizing ||A proj x|| / ||proj x|| where proj is the projection
    orthogonal to the previous picks; ties break toward earlier input order.
    """
    a = as_matrix(a)
    d = a.shape[1]
    pts = x.points
    vectors = np.zeros((d, d))
    values = np.zeros(d)
    basis: list[np.ndarray] = []
    for i in range(d):
        best = None
        for j in range(x.n):
            r = pts[j].copy()
            for q in basis:
                r = r - (q @ r) * q
            nr = np.linalg.norm(r)
            if nr <= DROP_TOL * np.linalg.norm(pts[j]):
                continue  # already in the span of w_1..w_{i-1}
            ratio = np.linalg.norm(a @ r) / nr
            if best is None or ratio < best[0]:
                best = (ratio, j, r / nr)
        if best is None:
            raise DoesNotSpan("fewer than d independent points", reached=i)
        ratio, j, unit = best
        values[i] = ratio
        vectors[i] = pts[j]
        basis.append(unit)
    return SetEigenProfile(vectors, values)


def singular_gap_split(a, seed: int = 0) -> tuple[Subspace, float]:
    """Split the singular directions of A at the largest multiplicative gap.

    Returns V (span of the small singular directions below the gap) and a gap
    estimate G with (1/2) max_i sigma_i/sigma_{i+1} <= G <=
    sigma_min(A I_{V_perp}) / sigma_max(A I_V) up to the factor-2 accuracy of
    the underlying estimates. Ties break toward the smallest index.
    """
    a = as_matrix(a)
    d = a.shape[0]
    if d < 2:
        raise PreconditionViolated("gap split needs d >= 2")
    sigmas, dirs = factored_spectrum(a, seed=seed)
    if sigmas[-1] <= 0:
        raise PreconditionViolated("matrix is numerically rank deficient")
    ratios = sigmas[:-1] / sigmas[1:]
    split = int(np.argmax(ratios))  # first occurrence wins
    v = Subspace(dirs[split + 1:], ambient=d)
    return v, float(ratios[split]) / 2.0


def _sigma_top(a: np.ndarray, sub: Subspace, seed: int = 0) -> float:
    if sub.dim == 0:
        return 0.0
    sig, _ = factored_spectrum(a @ sub.basis.T, seed=seed)
    return float(sig[0])


def _sigma_bottom(a: np.ndarray, sub: Subspace, seed: int = 0) -> float:
    if sub.dim == 0:
        return math.inf
    sig, _ = factored_spectrum(a @ sub.basis.T, seed=seed)
    return float(sig[sub.dim - 1])


def reduce_condition_step(a, x: PointSet, v: Subspace, gap: float,
                          cfg: RoundConfig) -> tuple[np.ndarray, StepReport]:
    """One condition-reduction step: returns A T and a measured report.

    T = delta I_R + I_W + I_{W_perp and V} where W shields the dataset points
    with small images and R = span(W u V_perp) ^ W_perp absorbs the shrink.
    Requires the effective gap g > 10; the caller falls back to plain entry
    rounding when this fails.
    """
    a = as_matrix(a)
    d = a.shape[0]
    profile = eigendecomposition_from_set(a, x)
    smax_v = _sigma_top(a, v, seed=cfg.seed)

    m = None
    for cand in range(d):
        if profile.values[cand] >= (gap ** ((cand + 1) / d)) * smax_v / d:
            m = cand
            break
    if m is None:
        raise GapTooSmall("no admissible shield index; gap estimate too small",
                          gap=gap)

    w = orthonormalize(profile.vectors[:m]) if m else Subspace.zero(d)
    v_perp = v.complement()
    smax_w = _sigma_top(a, w, seed=cfg.seed)
    smin_vperp = _sigma_bottom(a, v_perp, seed=cfg.seed)
    g = min(profile.values[m], smin_vperp) / max(smax_w, smax_v)
    if g <= 10.0:
        raise GapTooSmall("effective gap g <= 10", g=float(g))

    if cfg.delta_rescale is not None:
        delta = float(cfg.delta_rescale)
    else:
        b_est = max(math.ceil(math.log2(max(np.max(np.abs(x.points)), 2.0))), 1)
        delta = min(max(2.0 ** -b_est, 8.0 / g), 0.5)
    delta = max(delta, 8.0 / g)

    # R = span(W u V_perp) ^ W_perp; with the partition I = I_R + I_W +
    # I_{W_perp ^ V} this makes T = I - (1 - delta) P_R.
    shifted = [row - project(row, w) for row in v_perp.basis]
    r = orthonormalize(shifted)
    t = np.eye(d) - (1.0 - delta) * r.projector()
    a2 = a @ t

    off_w = ~np.array([np.linalg.norm(p - project(p, w)) <=
                       1e-12 * np.linalg.norm(p) for p in x.points])
    resid = x.points[off_w] - project(x.points[off_w], w)
    rho = float(np.min(np.linalg.norm(resid, axis=1))) if resid.size else math.inf
    drift = float(np.max(np.linalg.norm(
        normalized_images(a, x) - normalized_images(a2, x), axis=1)))
    report = StepReport(
        m=m, g=float(g), delta=delta,
        kappa_before=_kappa(a, cfg.seed), kappa_after=_kappa(a2, cfg.seed),
        drift=drift, drift_bound=16.0 / ((g - 1.0) * rho * delta), rho=rho,
    )
    return a2, report


def _kappa(a: np.ndarray, seed: int = 0) -> float:
    sig, _ = factored_spectrum(a, seed=seed)
    return math.inf if sig[-1] <= 0 else float(sig[0] / sig[-1])


def entry_round(a, zeta: float, seed: int = 0) -> np.ndarray:
    """Snap A to the integer grid at resolution set by zeta.

    Rescales by d / (sigma_bar * zeta) with sigma_bar a slight underestimate
    of sigma_min, then rounds entries to the nearest integer. The result is a
    float matrix with exactly-representable integer entries; magnitudes above
    2^53 raise rather than silently losing integrality.
    """
    a = as_matrix(a)
    d = a.shape[0]
    sig, _ = factored_spectrum(a, seed=seed)
    if sig[-1] <= 0:
        raise PreconditionViolated("cannot entry-round a rank-deficient matrix")
    sigma_bar = 0.75 * float(sig[-1])
    scaled = (d / (sigma_bar * zeta)) * a
    if np.max(np.abs(scaled)) > INT_CAP:
        raise MagnitudeCapExceeded(
            "integer entries would exceed 2^53",
            needed=float(np.max(np.abs(scaled))), cap=INT_CAP)
    return np.rint(scaled)


def round_transform(a, x: PointSet, cfg: RoundConfig | None = None
                    ) -> tuple[np.ndarray, RoundReport]:
    """Reduce kappa(A) below the threshold, then snap to an integer grid.

    The returned matrix A' satisfies max_x ||f_A(x) - f_{A'}(x)|| <= zeta
    (measured drift is reported) with bounded integer entries after scale
    normalization.
    """
    a = as_matrix(a)
    cfg = cfg or RoundConfig()
    d = a.shape[0]
    n_threshold = cfg.resolved_threshold(d)
    images0 = normalized_images(a, x)
    kappa0 = _kappa(a, cfg.seed)

    steps: list[StepReport] = []
    current = a
    rounds = 0
    while _kappa(current, cfg.seed) >= n_threshold:
        if rounds >= cfg.max_rounds:
            raise MaxRoundsExceeded("condition-reduction loop did not converge",
                                    rounds=rounds, kappa=_kappa(current, cfg.seed))
        v, gap = singular_gap_split(current, seed=cfg.seed)
        try:
            current, step = reduce_condition_step(current, x, v, gap, cfg)
        except GapTooSmall:
            break  # fall through to final entry rounding
        steps.append(step)
        rounds += 1

    final = entry_round(current, cfg.zeta / 4.0, seed=cfg.seed)
    drift = float(np.max(np.linalg.norm(
        images0 - normalized_images(final, x), axis=1)))
    report = RoundReport(kappa_before=kappa0, kappa_after=_kappa(final, cfg.seed),
                         max_drift=drift, rounds=rounds, steps=steps)
    return final, report

"""The main improvement loop: either drive the potential ||M_A||_F^2 down to
1/d + eps^2/d^2 (at which point every moment eigenvalue is within eps/d of
1/d) or certify non-existence with a dense subspace.

Each improvement step splits the approximate spectrum of the second-moment
matrix at the largest gap into a heavy part and a light part W, then:

  Case I  -- some point has mass >= gamma on both sides: inflate W slightly.
  Case II -- every point hugs one side. Re-decompose the moment of the heavy
             points X_B, take V = the light eigenspace of that matrix, and
             inflate V by a large factor ~ 1/beta, where beta is the largest
             V-mass among X_B. If beta = 0 the heavy points span a proper
             subspace that is provably too dense, and its preimage under A is
             returned as a certificate.

Theory mode applies the fixed step sizes; practical mode (default) probes the
step size geometrically around the prescribed value and keeps the largest
measured decrease, rejecting the step if nothing decreases. Rounding is
interleaved to keep entries on an integer grid of bounded magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import SimpleNamespace

import numpy as np

from .errors import (AllEqual, CertificateInvalid, EigenFailed,
                     IterationCapExceeded, MagnitudeCapExceeded,
                     MaxRoundsExceeded, NoProgress, PreconditionViolated)
from .eigen import EigenApprox, EigenConfig, approx_eigendecomposition
from .linalg import (PointSet, Subspace, Transform, as_matrix, membership_mask,
                     normalized_images, orthonormalize, potential,
                     preimage_subspace, project, second_moment)
from .rounding import RoundConfig, round_transform

GLOBAL_CONSTANT = 1e4   # the "sufficiently large constant" C, theory mode
PRACTICAL_GAMMA_CONSTANT = 10.0


@dataclass(frozen=True)
class ForsterConfig:
    epsilon: float = 0.25
    mode: str = "practical"
    seed: int = 0
    constant: float = GLOBAL_CONSTANT
    gamma: float | None = None
    eta: float | None = None
    delta: float = 0.01
    zeta: float | None = None
    max_iters: int | None = None
    tau: float = 1e-9
    eigen_retries: int = 5
    line_search_probes: int = 20
    round_threshold: float | None = None
    verify_trials: int = 2000

    def resolve(self, d: int, n: int) -> SimpleNamespace:
        """Pin every schedule value for a concrete instance size."""
        eps, big_c = self.epsilon, self.constant
        if self.mode == "theory":
            gamma = self.gamma or eps ** 2 / (big_c * d ** 4 * n ** 2)
            eta = self.eta or eps ** 4 / (big_c ** 3 * d ** 8 * n ** 4)
            decrease = eps ** 5 / (big_c * d ** 10 * n ** 5)
            zeta = self.zeta or 0.5 * decrease
            max_iters = self.max_iters or 10 * math.ceil((1 - 1 / d) / decrease)
            round_threshold = self.round_threshold or (d / zeta) ** 6
        else:
            gamma = self.gamma or eps ** 2 / (PRACTICAL_GAMMA_CONSTANT * d ** 4 * n ** 2)
            eta = self.eta or min(1e-4, eps / (12.0 * d ** 3.5))
            zeta = self.zeta or 1e-6
            max_iters = self.max_iters or 10 ** 5
            round_threshold = self.round_threshold or 5e8
        alpha_case1 = eps / (64.0 * n * d ** 3)
        return SimpleNamespace(
            epsilon=eps, mode=self.mode, gamma=gamma, eta=eta, delta=self.delta,
            zeta=zeta, alpha_case1=alpha_case1, max_iters=max_iters, tau=self.tau,
            constant=big_c, eigen_retries=self.eigen_retries,
            line_search_probes=self.line_search_probes, seed=self.seed,
            round_threshold=round_threshold, verify_trials=self.verify_trials,
            guard=1.0 / d + eps ** 2 / d ** 2,
        )

    def echo(self, d: int, n: int) -> dict:
        p = self.resolve(d, n)
        return {k: v for k, v in vars(p).items()}


@dataclass(frozen=True)
class ForsterOutcome:
    kind: str  # "transform" | "dense_subspace"
    matrix: np.ndarray | None
    subspace: Subspace | None
    members: list[int] | None
    iterations: int
    final_potential: float
    potential_trace: list[float]
    config_echo: dict = field(default_factory=dict)

    @property
    def is_transform(self) -> bool:
        return self.kind == "transform"


@dataclass
class ImproveStep:
    """Diagnostic record of a single improvement step."""

    case: str  # "I" | "II" | "certificate"
    k: int
    gap: float
    beta: float | None
    alpha: float | None
    potential_before: float
    potential_after: float | None
    big_set: list[int] = field(default_factory=list)


def split_by_gap(e: EigenApprox, require_positive: bool = False,
                 tol: float = 1e-12) -> tuple[int, Subspace, float]:
    """Largest consecutive gap of the pair weights a_i * ||q_i||^2.

    Returns (k, W, gap) with k in [1, d-1], W the span of the bottom d-k
    directions (ties break toward the smallest k). Zero rows sort last and W
    is built as the orthogonal complement of the top-k directions so that its
    dimension is exactly d - k even when the decomposition has kernel rows.
    """
    weights = e.pair_weights()
    d = weights.shape[0]
    if d < 2:
        raise PreconditionViolated("gap split needs d >= 2")
    order = np.argsort(-weights, kind="stable")
    sorted_w = weights[order]
    diffs = sorted_w[:-1] - sorted_w[1:]
    if require_positive and np.all(diffs <= tol):
        raise AllEqual("all consecutive pair-weight gaps are ~zero",
                       weights=sorted_w.tolist())
    k = int(np.argmax(diffs)) + 1
    top = orthonormalize(e.vectors[order[:k]])
    if top.dim != k:
        raise PreconditionViolated("top directions degenerate; cannot split",
                                   top_dim=top.dim, k=k)
    return k, top.complement(), float(diffs[k - 1])


def _decompose_with_retries(m, p, base_seed: int) -> EigenApprox:
    last = None
    for attempt in range(p.eigen_retries):
        cfg = EigenConfig(accuracy=p.eta, failure_prob=p.delta,
                          seed=base_seed + 7919 * attempt, mode=p.mode,
                          verify_trials=p.verify_trials)
        try:
            return approx_eigendecomposition(m, cfg)
        except EigenFailed as exc:
            last = exc
    raise EigenFailed("eigendecomposition retry budget exhausted",
                      retries=p.eigen_retries, last=str(last))


def _apply_inflation(a: np.ndarray, v: Subspace, alpha: float) -> np.ndarray:
    return (np.eye(a.shape[0]) + alpha * v.projector()) @ a


def _probe_alphas(base: float, probes: int) -> list[float]:
    # Paper value first, then down a little and up a lot: large moves are
    # what makes desk-scale convergence fast.
    out = [base]
    for j in range(1, 4):
        out.append(base / 2 ** j)
    j = 1
    while len(out) < probes:
        out.append(base * 2 ** j)
        j += 1
    return out


def _best_inflation(a, x, v, alphas, phi_before):
    best = None
    for alpha in alphas:
        if alpha <= 0:
            continue
        cand = _apply_inflation(a, v, alpha)
        phi = potential(cand, x)
        if phi < phi_before and (best is None or phi < best[1]):
            best = (alpha, phi, cand)
    return best


# When case I stalls at float precision, case II is retried with the margin
# the data actually presents, provided every point is at least this close to
# one side of the split.
STALL_MARGIN_CEILING = 0.05


def improve_transform(a, x: PointSet, cfg: ForsterConfig | SimpleNamespace,
                      step_seed: int | None = None):
    """One improvement step. Returns (Transform, ImproveStep) on progress or
    (ForsterOutcome certificate, ImproveStep) when no transform exists.

    Precondition: potential(A, X) > 1/d + eps^2/d^2.
    """
    p = cfg.resolve(x.d, x.n) if isinstance(cfg, ForsterConfig) else cfg
    a = as_matrix(a)
    d, n = x.d, x.n
    seed = p.seed if step_seed is None else step_seed

    phi_before = potential(a, x)
    if phi_before <= p.guard:
        raise PreconditionViolated("potential already at most 1/d + eps^2/d^2",
                                   potential=phi_before, guard=p.guard)

    m_full = second_moment(a, x)
    e_full = _decompose_with_retries(m_full.entries, p, seed)
    k, w, gap = split_by_gap(e_full)

    images = normalized_images(a, x)
    mass_w = np.linalg.norm(project(images, w), axis=1)
    mass_wp = np.linalg.norm(images - project(images, w), axis=1)
    min_mass = np.minimum(mass_w, mass_wp)

    def run_case2(gamma_c):
        big = np.flatnonzero(mass_wp >= gamma_c)
        if big.size == 0:
            raise PreconditionViolated("no heavy points; spectrum inconsistent",
                                       gamma=gamma_c)
        m_big = second_moment(a, x, subset=big)
        e_big = _decompose_with_retries(m_big.entries, p, seed + 1)
        order = np.argsort(-e_big.pair_weights(), kind="stable")
        top = orthonormalize(e_big.vectors[order[:k]])
        if top.dim != k:
            # Heavy points span fewer than k directions; complete their top
            # eigenspace to dimension k.
            completion = list(top.basis) + list(np.eye(d))
            top = Subspace(orthonormalize(completion).basis[:k], ambient=d)
        v = top.complement()
        beta = float(np.max(np.linalg.norm(project(images[big], v), axis=1)))

        if beta <= p.tau:
            cert = preimage_subspace(a, top)
            members = np.flatnonzero(membership_mask(x, cert, tau=p.tau))
            if members.size * d <= n * cert.dim:
                raise CertificateInvalid(
                    "dense-subspace count check failed",
                    count=int(members.size), dim=cert.dim, n=n, d=d)
            step = ImproveStep(case="certificate", k=k, gap=gap, beta=beta,
                               alpha=None, potential_before=phi_before,
                               potential_after=None, big_set=big.tolist())
            outcome = ForsterOutcome(kind="dense_subspace", matrix=None,
                                     subspace=cert, members=members.tolist(),
                                     iterations=0, final_potential=phi_before,
                                     potential_trace=[phi_before])
            return outcome, step

        multiplier = p.epsilon / (3.0 * beta * d ** 2 * n)
        step = ImproveStep(case="II", k=k, gap=gap, beta=beta, alpha=None,
                           potential_before=phi_before, potential_after=None,
                           big_set=big.tolist())
        if p.mode == "theory":
            alpha0 = multiplier - 1.0
            if alpha0 <= 0:
                raise PreconditionViolated("case II multiplier not above 1; "
                                           "beta too large for the schedule",
                                           beta=beta, multiplier=multiplier)
            alphas = [alpha0]
        else:
            base = max(multiplier, 1.0 + p.alpha_case1)
            alphas = [m0 - 1.0 for m0 in
                      _probe_alphas(base, p.line_search_probes) if m0 > 1.0]
        best = _best_inflation(a, x, v, alphas, phi_before)
        if best is None:
            raise NoProgress("no probed alpha decreased the potential (case II)",
                             potential=phi_before, beta=beta, gap=gap)
        step.alpha, step.potential_after = best[0], best[1]
        return Transform(best[2]), step

    if np.any(min_mass >= p.gamma):
        step = ImproveStep(case="I", k=k, gap=gap, beta=None, alpha=None,
                           potential_before=phi_before, potential_after=None)
        if p.mode == "theory":
            alphas = [p.alpha_case1]
        else:
            alphas = _probe_alphas(p.alpha_case1, p.line_search_probes)
        best = _best_inflation(a, x, w, alphas, phi_before)
        if best is not None:
            step.alpha, step.potential_after = best[0], best[1]
            return Transform(best[2]), step
        # Stalled: every probed alpha left the potential unchanged at float
        # precision. That happens when all points already hug one side of the
        # split, so rerun case II with the margin the data presents.
        stall_margin = float(np.max(min_mass)) * (1.0 + 1e-9) + 1e-300
        if p.mode == "theory" or stall_margin > STALL_MARGIN_CEILING:
            raise NoProgress("no probed alpha decreased the potential (case I)",
                             potential=phi_before, gap=gap,
                             stall_margin=stall_margin)
        return run_case2(stall_margin)

    return run_case2(p.gamma)


def forster_transform(x: PointSet, epsilon: float | None = None,
                      cfg: ForsterConfig | None = None) -> ForsterOutcome:
    """Compute an eps-approximate radial-isotropy transform of X, or return a
    dense-subspace certificate showing that none exists."""
    if cfg is None:
        cfg = ForsterConfig(epsilon=epsilon if epsilon is not None else 0.25)
    elif epsilon is not None and epsilon != cfg.epsilon:
        cfg = replace(cfg, epsilon=epsilon)
    p = cfg.resolve(x.d, x.n)
    echo = {k: v for k, v in vars(p).items()}

    a = np.eye(x.d)
    trace = [potential(a, x)]
    steps: list[ImproveStep] = []
    round_cfg = RoundConfig(zeta=p.zeta, threshold=p.round_threshold,
                            seed=p.seed)
    iters = 0
    while trace[-1] > p.guard:
        if iters >= p.max_iters:
            raise IterationCapExceeded("improvement loop hit the iteration cap",
                                       iterations=iters, trace=trace)
        step_seed = p.seed + 1_000_003 * (iters + 1)
        result, step = improve_transform(a, x, p, step_seed=step_seed)
        steps.append(step)
        if isinstance(result, ForsterOutcome):
            return replace(result, iterations=iters, potential_trace=trace,
                           final_potential=trace[-1], config_echo=echo)
        improved = result.matrix
        phi_improved = step.potential_after
        try:
            rounded, _ = round_transform(improved, x, round_cfg)
            phi_rounded = potential(rounded, x)
        except (MagnitudeCapExceeded, MaxRoundsExceeded):
            rounded, phi_rounded = improved, phi_improved
        if phi_rounded < trace[-1]:
            a, phi = rounded, phi_rounded
        elif phi_improved < trace[-1]:
            a, phi = improved, phi_improved  # rounding undid the gain; skip it
        else:
            raise NoProgress("accepted step failed to decrease the potential",
                             before=trace[-1], after=phi_improved)
        trace.append(phi)
        iters += 1

    return ForsterOutcome(kind="transform", matrix=a, subspace=None,
                          members=None, iterations=iters,
                          final_potential=trace[-1], potential_trace=trace,
                          config_echo=echo)

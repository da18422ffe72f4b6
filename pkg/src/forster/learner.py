"""Distribution-free halfspace learning via radial-isotropy preconditioning.

The building blocks mirror the analysis they come from:

  * a margin perceptron that is only obliged to classify points above a
    stated margin correctly, launched from 2d deterministic starts;
  * a partial classifier that first puts a dense subset of the data in
    approximate radial isotropic position (so a 1/(4d)-fraction of points is
    guaranteed to clear the margin) and then runs the perceptron;
  * a decision-list driver that stacks partial classifiers until the abstain
    mass on fresh samples falls under its stop rule.

Predictions are three-valued: +1 / -1 from the first stage whose region
covers the query, else 0 (abstain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NotSeparable, PreconditionViolated, RoundBudgetExceeded
from .decomposition import forster_subspace
from .iteration import ForsterConfig
from .linalg import PointSet, Subspace, project

PERCEPTRON_BUDGET_CONSTANT = 100.0  # total updates <= C d / gamma^2
PERCEPTRON_INIT_SCALE = 4.0         # ||v0|| = 4 sqrt(d) / gamma
ROUNDS_CONSTANT = 4.0               # r = ceil(C sqrt(d) log(1/eps))
THEORY_SAMPLE_CONSTANT = 10.0       # M = C d^4 log(d/(eps delta)) / eps^2


def sign(u) -> int:
    return 1 if u >= 0 else -1


@dataclass(frozen=True)
class LabeledSet:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        lab = np.asarray(self.labels, dtype=int)
        if lab.shape != (pts.shape[0],) or not np.all(np.abs(lab) == 1):
            raise PreconditionViolated("labels must be +-1, one per point")
        object.__setattr__(self, "points", pts.copy())
        object.__setattr__(self, "labels", lab.copy())
        self.points.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def homogenize(s: LabeledSet) -> LabeledSet:
    """Lift x to (x, -1) so threshold halfspaces become homogeneous."""
    lifted = np.hstack([s.points, -np.ones((s.n, 1))])
    return LabeledSet(lifted, s.labels)


@dataclass
class PerceptronReport:
    total_updates: int
    winner_start: int
    winner_updates: int
    norm_trace: list[float] = field(default_factory=list)


def margin_perceptron(s: LabeledSet, gamma: float,
                      budget_constant: float = PERCEPTRON_BUDGET_CONSTANT
                      ) -> tuple[np.ndarray, PerceptronReport]:
    """Vector v such that every (x, y) with |v.x| >= gamma ||v|| ||x|| has
    y = sign(v.x).

    Runs 2d starts (+- a scaled basis vector each) in round-robin; a start
    whose high-margin points are all correctly signed wins, lowest start
    index first. Each update adds y * x/||x|| and, for the start aligned with
    the true separator, shrinks ||v||^2 by at least 2, which bounds its
    update count. The shared budget is budget_constant * d / gamma^2 total
    updates across all starts; exhausting it raises NotSeparable.
    """
    if not 0.0 < gamma < 1.0:
        raise PreconditionViolated("margin must be in (0, 1)", gamma=gamma)
    d = s.d
    pts = s.points / np.linalg.norm(s.points, axis=1, keepdims=True)
    labels = s.labels.astype(float)
    scale = PERCEPTRON_INIT_SCALE * math.sqrt(d) / gamma
    starts = [scale * sgn * np.eye(d)[j] for j in range(d) for sgn in (1.0, -1.0)]
    budget = int(math.ceil(budget_constant * d / gamma ** 2))

    def violation(v):
        margins = pts @ v
        hot = np.abs(margins) >= gamma * np.linalg.norm(v)
        wrong = np.sign(margins) * labels < 0
        wrong |= (margins == 0) & (labels < 0)  # sign(0) = +1
        bad = np.flatnonzero(hot & wrong)
        return int(bad[0]) if bad.size else None

    active = list(range(len(starts)))
    vs = [v.copy() for v in starts]
    updates = [0] * len(starts)
    total = 0
    traces: list[list[float]] = [[float(v @ v)] for v in vs]
    while total <= budget:
        for i in active:
            j = violation(vs[i])
            if j is None:
                return vs[i], PerceptronReport(
                    total_updates=total, winner_start=i,
                    winner_updates=updates[i], norm_trace=traces[i])
        progressed = False
        for i in active:
            if total >= budget:
                break
            j = violation(vs[i])
            if j is None:
                continue
            vs[i] = vs[i] + labels[j] * pts[j]
            updates[i] += 1
            total += 1
            traces[i].append(float(vs[i] @ vs[i]))
            progressed = True
        if not progressed:
            break
    raise NotSeparable("update budget exhausted on every start",
                       budget=budget, total=total)


@dataclass(frozen=True)
class PartialClassifier:
    """Region = {x in V : |v.(ALx)| >= threshold ||v|| ||ALx||}; inside the
    region the label is sign(v.(ALx))."""

    subspace: Subspace
    matrix: np.ndarray
    weight: np.ndarray
    threshold: float
    tau: float = 1e-9

    def transformed(self, pts: np.ndarray) -> np.ndarray:
        return (pts @ self.subspace.basis.T) @ self.matrix.T

    def region_mask(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        norms = np.linalg.norm(pts, axis=1)
        resid = pts - project(pts, self.subspace)
        inside = (norms > 0) & (np.linalg.norm(resid, axis=1) <= self.tau * norms)
        z = self.transformed(pts)
        zn = np.linalg.norm(z, axis=1)
        vnorm = float(np.linalg.norm(self.weight))
        hot = np.abs(z @ self.weight) >= self.threshold * vnorm * zn
        return inside & hot & (zn > 0)

    def decide_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0], dtype=int)
        mask = self.region_mask(pts)
        if np.any(mask):
            scores = self.transformed(pts[mask]) @ self.weight
            out[mask] = np.where(scores >= 0, 1, -1)
        return out


def partial_classifier(s: LabeledSet, cfg: ForsterConfig | None = None
                       ) -> PartialClassifier:
    """Precondition a dense subset into radial isotropy (eps = 1/2), then run
    the margin perceptron at margin 1/(2 sqrt(dim V)). Every covered point is
    correctly classified and at least a 1/(4d)-fraction of S is covered."""
    cfg = cfg or ForsterConfig(epsilon=0.5)
    dec = forster_subspace(PointSet(s.points), 0.5, cfg)
    members = np.asarray(dec.members, dtype=int)
    z = dec.map_points(s.points[members])
    inner = LabeledSet(z, s.labels[members])
    gamma = 1.0 / (2.0 * math.sqrt(dec.dim))
    v, _ = margin_perceptron(inner, gamma)
    return PartialClassifier(subspace=dec.subspace, matrix=dec.matrix,
                             weight=v, threshold=gamma, tau=cfg.tau)


@dataclass(frozen=True)
class DecisionList:
    stages: tuple
    ambient_d: int

    def predict(self, x) -> int:
        return int(self.predict_batch(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def predict_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(pts.shape[0], dtype=int)
        undecided = np.ones(pts.shape[0], dtype=bool)
        for stage in self.stages:
            if not np.any(undecided):
                break
            sub = stage.decide_batch(pts[undecided])
            idx = np.flatnonzero(undecided)
            hit = sub != 0
            out[idx[hit]] = sub[hit]
            undecided[idx[hit]] = False
        return out


@dataclass(frozen=True)
class LearnConfig:
    epsilon: float = 0.1
    delta: float = 0.1
    mode: str = "practical"
    seed: int = 0
    samples_per_round: int | None = None  # practical-mode M
    rounds_constant: float = ROUNDS_CONSTANT
    forster: ForsterConfig | None = None

    def resolved_m(self, d: int) -> int:
        if self.samples_per_round is not None:
            return int(self.samples_per_round)
        return math.ceil(THEORY_SAMPLE_CONSTANT * d ** 4
                         * math.log(d / (self.epsilon * self.delta))
                         / self.epsilon ** 2)

    def rounds(self, d: int) -> int:
        return max(1, math.ceil(self.rounds_constant * math.sqrt(d)
                                * math.log(1.0 / self.epsilon)))


@dataclass
class LearnReport:
    rounds_used: int
    samples_per_round: int
    rounds_cap: int
    unclassified_counts: list[int] = field(default_factory=list)


def learn_halfspace(oracle, cfg: LearnConfig) -> tuple[DecisionList, LearnReport]:
    """Decision list of partial classifiers with (error + abstain) <= eps whp.

    ``oracle(m, rng)`` must return a LabeledSet of m fresh samples with
    y = sign(w* . x) for a fixed unknown w*. Each round draws a batch, keeps
    the still-unclassified part, and fits one more partial classifier; the
    loop stops once the unclassified fraction falls under eps/4.
    """
    rng = np.random.default_rng(cfg.seed)
    probe = oracle(1, rng)
    d = probe.d
    m = cfg.resolved_m(d)
    r = cfg.rounds(d)
    base = cfg.forster or ForsterConfig(epsilon=0.5, seed=cfg.seed)
    stages: list[PartialClassifier] = []
    report = LearnReport(rounds_used=0, samples_per_round=m, rounds_cap=r)

    for i in range(r):
        batch = oracle(m, rng)
        current = DecisionList(tuple(stages), d)
        undecided = current.predict_batch(batch.points) == 0
        report.unclassified_counts.append(int(np.sum(undecided)))
        if np.sum(undecided) < cfg.epsilon * m / 4.0:
            report.rounds_used = i
            return current, report
        sub = LabeledSet(batch.points[undecided], batch.labels[undecided])
        stage_cfg = replace(base, seed=base.seed + 104729 * (i + 1))
        stages.append(partial_classifier(sub, stage_cfg))
    raise RoundBudgetExceeded("stop rule never fired", rounds=r,
                              unclassified=report.unclassified_counts)


def evaluate(f: DecisionList, t: LabeledSet) -> dict:
    """Error, abstain, and coverage-mistake rates of a decision list on T."""
    pred = f.predict_batch(t.points)
    abstain = float(np.mean(pred == 0))
    error = float(np.mean(pred == -t.labels))
    covered = pred != 0
    coverage_mistakes = float(np.mean(pred[covered] != t.labels[covered])) \
        if np.any(covered) else 0.0
    return {"error_rate": error, "abstain_rate": abstain,
            "coverage_mistake_rate": coverage_mistakes,
            "correct_rate": float(np.mean(pred == t.labels))}

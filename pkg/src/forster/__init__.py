"""Approximate Forster transforms (radial isotropic position), dense-subspace
certificates, and a decision-list halfspace learner built on top of them."""

__version__ = "0.1.0"

from .linalg import (MomentMatrix, PointSet, Subspace, Transform, block_moment,
                     normalize_map, normalized_images, orthonormalize,
                     potential, project, second_moment)
from .eigen import (EigenApprox, EigenConfig, approx_eigendecomposition,
                    ensure_invertible, reconstruct, singular_range,
                    verify_multiplicative)
from .iteration import (ForsterConfig, ForsterOutcome, ImproveStep,
                        forster_transform, improve_transform, split_by_gap)
from .rounding import (RoundConfig, SetEigenProfile, eigendecomposition_from_set,
                       entry_round, reduce_condition_step, round_transform,
                       singular_gap_split)
from .decomposition import ForsterDecomposition, forster_subspace
from .learner import (DecisionList, LabeledSet, LearnConfig, PartialClassifier,
                      evaluate, homogenize, learn_halfspace, margin_perceptron,
                      partial_classifier)

__all__ = [
    "MomentMatrix", "PointSet", "Subspace", "Transform", "block_moment",
    "normalize_map", "normalized_images", "orthonormalize", "potential",
    "project", "second_moment",
    "EigenApprox", "EigenConfig", "approx_eigendecomposition",
    "ensure_invertible", "reconstruct", "singular_range",
    "verify_multiplicative",
    "ForsterConfig", "ForsterOutcome", "ImproveStep", "forster_transform",
    "improve_transform", "split_by_gap",
    "RoundConfig", "SetEigenProfile", "eigendecomposition_from_set",
    "entry_round", "reduce_condition_step", "round_transform",
    "singular_gap_split",
    "ForsterDecomposition", "forster_subspace",
    "DecisionList", "LabeledSet", "LearnConfig", "PartialClassifier",
    "evaluate", "homogenize", "learn_halfspace", "margin_perceptron",
    "partial_classifier",
]

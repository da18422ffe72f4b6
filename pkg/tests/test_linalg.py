import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forster.errors import PreconditionViolated, ZeroVector
from forster.linalg import (PointSet, Subspace, Transform, block_moment,
                            membership_mask, normalize_map, normalized_images,
                            orthonormalize, potential, project, second_moment)

TOL = 1e-9


def basis_set(d):
    return PointSet(np.eye(d))


def test_normalize_identity_345():
    assert np.allclose(normalize_map(np.eye(2), [3.0, 4.0]), [0.6, 0.8])


def test_normalize_scale_invariance():
    assert np.allclose(normalize_map(2.0 * np.eye(2), [3.0, 4.0]), [0.6, 0.8])


def test_normalize_diag():
    # hand computation: A x = (1, 10), ||Ax|| = sqrt(101)
    expect = np.array([1.0, 10.0]) / math.sqrt(101.0)
    assert np.allclose(normalize_map(np.diag([1.0, 10.0]), [1.0, 1.0]), expect)


def test_normalize_rejects_zero_vector():
    with pytest.raises(ZeroVector):
        normalize_map(np.eye(2), [0.0, 0.0])


def test_normalize_unit_norm_random():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    for _ in range(20):
        y = normalize_map(a, rng.standard_normal(5))
        assert abs(np.linalg.norm(y) - 1.0) < TOL


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
       st.floats(1e-3, 1e3))
def test_normalize_scale_invariance_property(coords, scale):
    x = np.asarray(coords)
    if np.linalg.norm(x) < 1e-6:
        return
    a = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.0, 3.0]])
    lhs = normalize_map(scale * a, x)
    mid = normalize_map(a, scale * x)
    rhs = normalize_map(a, x)
    assert np.allclose(lhs, rhs, atol=1e-9)
    assert np.allclose(mid, rhs, atol=1e-9)


def test_second_moment_isotropic_basis():
    for d in (2, 3, 5):
        m = second_moment(np.eye(d), basis_set(d))
        assert np.allclose(m.entries, np.eye(d) / d)


def test_second_moment_repeated_point():
    x = PointSet(np.array([[1.0, 0.0], [1.0, 0.0]]))
    m = second_moment(np.eye(2), x)
    assert np.allclose(m.entries, np.diag([1.0, 0.0]))


def test_second_moment_subset_fixed_normalizer():
    x = PointSet(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    m = second_moment(np.eye(2), x, subset=[2])
    # direct outer product: ((1,1)/sqrt 2)^T ((1,1)/sqrt 2) / 3
    assert np.allclose(m.entries, np.array([[0.5, 0.5], [0.5, 0.5]]) / 3.0)
    assert abs(np.trace(m.entries) - 1.0 / 3.0) < TOL


def test_second_moment_trace():
    rng = np.random.default_rng(1)
    x = PointSet(rng.standard_normal((17, 4)))
    m = second_moment(np.eye(4), x)
    assert abs(np.trace(m.entries) - 1.0) < TOL
    sub = second_moment(np.eye(4), x, subset=range(5))
    assert abs(np.trace(sub.entries) - 5.0 / 17.0) < TOL


def test_block_moment_full_space_equals_moment():
    rng = np.random.default_rng(2)
    x = PointSet(rng.standard_normal((9, 3)))
    full = Subspace.full(3)
    m = second_moment(np.eye(3), x).entries
    assert np.allclose(block_moment(np.eye(3), x, full, full), m)


def test_block_moment_orthogonal_subspace_is_zero():
    x = PointSet(np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    v1 = Subspace(np.array([[0.0, 1.0, 0.0]]))
    v2 = Subspace.full(3)
    assert np.allclose(block_moment(np.eye(3), x, v1, v2), 0.0)


def test_block_moment_matches_projector_product():
    rng = np.random.default_rng(3)
    x = PointSet(rng.standard_normal((12, 4)))
    a = rng.standard_normal((4, 4)) + 2 * np.eye(4)
    v1 = orthonormalize(rng.standard_normal((2, 4)))
    v2 = orthonormalize(rng.standard_normal((3, 4)))
    m = second_moment(a, x).entries
    oracle = v1.projector() @ m @ v2.projector()
    assert np.allclose(block_moment(a, x, v1, v2), oracle, atol=1e-12)


def test_project_examples():
    e1 = Subspace(np.array([[1.0, 0.0]]))
    assert np.allclose(project(np.array([1.0, 1.0]), e1), [1.0, 0.0])
    full = Subspace.full(2)
    assert np.allclose(project(np.array([0.3, -0.7]), full), [0.3, -0.7])


def test_project_against_lstsq_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        raw = rng.standard_normal((3, 6))
        v = orthonormalize(raw)
        x = rng.standard_normal(6)
        # least-squares oracle: argmin ||basis^T c - x||
        c, *_ = np.linalg.lstsq(v.basis.T, x, rcond=None)
        assert np.allclose(project(x, v), v.basis.T @ c, atol=1e-10)
        r = x - project(x, v)
        assert np.max(np.abs(v.basis @ r)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=4, max_size=4))
def test_project_pythagoras(coords):
    x = np.asarray(coords)
    v = Subspace(np.array([[1.0, 0, 0, 0], [0, 0, 1 / math.sqrt(2), 1 / math.sqrt(2)]]))
    p = project(x, v)
    q = x - p
    assert abs(p @ p + q @ q - x @ x) <= 1e-9 * max(1.0, x @ x)


def test_potential_extremes():
    for d in (2, 4, 7):
        assert abs(potential(np.eye(d), basis_set(d)) - 1.0 / d) < TOL
    doubled = PointSet(np.array([[1.0, 0.0], [1.0, 0.0]]))
    assert abs(potential(np.eye(2), doubled) - 1.0) < TOL


def test_potential_matches_eigenvalue_oracle():
    rng = np.random.default_rng(5)
    x = PointSet(rng.standard_normal((11, 3)))
    a = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    # independent route: sum of squared eigenvalues of the moment matrix
    lam = np.linalg.eigvalsh(second_moment(a, x).entries)
    assert abs(potential(a, x) - float(np.sum(lam ** 2))) < 1e-12


def test_potential_range_random():
    rng = np.random.default_rng(6)
    for _ in range(10):
        d = int(rng.integers(2, 6))
        x = PointSet(rng.standard_normal((int(rng.integers(d, 30)), d)))
        a = rng.standard_normal((d, d)) + 2 * np.eye(d)
        phi = potential(a, x)
        assert 1.0 / d - TOL <= phi <= 1.0 + TOL


def test_orthonormalize_spans_r2():
    v = orthonormalize([np.array([1.0, 0.0]), np.array([1.0, 1.0])])
    assert v.dim == 2


def test_orthonormalize_drops_dependent():
    v = orthonormalize([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
    assert v.dim == 1
    assert np.allclose(np.abs(v.basis), [[1.0, 0.0]])


def test_orthonormalize_random_spanning_set():
    rng = np.random.default_rng(7)
    for _ in range(10):
        d = int(rng.integers(2, 7))
        raw = rng.standard_normal((d + 3, d))
        v = orthonormalize(raw)
        assert v.dim == np.linalg.matrix_rank(raw)
        gram = v.basis @ v.basis.T
        assert np.max(np.abs(gram - np.eye(v.dim))) < TOL
        for row in raw:  # same span: zero residual for every input vector
            assert np.linalg.norm(row - project(row, v)) < 1e-9 * (1 + np.linalg.norm(row))


def test_empty_orthonormalize_errors():
    with pytest.raises(PreconditionViolated):
        orthonormalize([])


def test_subspace_complement():
    v = orthonormalize(np.random.default_rng(8).standard_normal((2, 5)))
    c = v.complement()
    assert c.dim == 3
    assert np.max(np.abs(v.basis @ c.basis.T)) < TOL
    assert np.allclose(v.projector() + c.projector(), np.eye(5), atol=1e-12)


def test_pointset_rejects_zero():
    with pytest.raises(ZeroVector):
        PointSet(np.array([[1.0, 0.0], [0.0, 0.0]]))


# ---------------------------------------------------------------------------
# Transform-map algebra (scale invariance, composition, perturbations)
# ---------------------------------------------------------------------------

def _random_invertible(rng, d):
    return rng.standard_normal((d, d)) + 3.0 * np.eye(d)


def test_composition_property():
    rng = np.random.default_rng(9)
    for _ in range(15):
        a = _random_invertible(rng, 4)
        b = _random_invertible(rng, 4)
        x = rng.standard_normal(4)
        lhs = normalize_map(b @ a, x)
        rhs = normalize_map(b, normalize_map(a, x))
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_dominated_perturbation_bound():
    # for B >= I: ||f_{BA}(x) - f_A(x)|| <= ||B - I||_2
    rng = np.random.default_rng(10)
    for _ in range(15):
        a = _random_invertible(rng, 3)
        s = rng.uniform(0, 0.5, size=3)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        b = q @ np.diag(1.0 + s) @ q.T
        x = rng.standard_normal(3)
        drift = np.linalg.norm(normalize_map(b @ a, x) - normalize_map(a, x))
        assert drift <= np.max(s) + 1e-9


def test_subspace_inflation_rescales_projections():
    # B = I + a I_V: V-part scales by lambda in [1, 1+a], complement by
    # mu in [1/(1+a), 1], each a pure rescaling of the old projection.
    rng = np.random.default_rng(11)
    for _ in range(15):
        a_mat = _random_invertible(rng, 4)
        v = orthonormalize(rng.standard_normal((2, 4)))
        alpha = float(rng.uniform(0.1, 3.0))
        b = np.eye(4) + alpha * v.projector()
        x = rng.standard_normal(4)
        before = normalize_map(a_mat, x)
        after = normalize_map(b @ a_mat, x)
        pv_b, pv_a = project(before, v), project(after, v)
        pc_b, pc_a = before - pv_b, after - pv_a
        if np.linalg.norm(pv_b) > 1e-12:
            lam = np.linalg.norm(pv_a) / np.linalg.norm(pv_b)
            assert 1.0 - 1e-9 <= lam <= 1.0 + alpha + 1e-9
            cos = pv_a @ pv_b / (np.linalg.norm(pv_a) * np.linalg.norm(pv_b))
            assert cos > 1.0 - 1e-9
        if np.linalg.norm(pc_b) > 1e-12:
            mu = np.linalg.norm(pc_a) / np.linalg.norm(pc_b)
            assert 1.0 / (1.0 + alpha) - 1e-9 <= mu <= 1.0 + 1e-9
            cos = pc_a @ pc_b / (np.linalg.norm(pc_a) * np.linalg.norm(pc_b))
            assert cos > 1.0 - 1e-9


def test_low_potential_pins_eigenvalues():
    # if potential <= 1/d + eps^2/d^2 then every moment eigenvalue is within
    # eps/d of 1/d (reference eigensolver)
    rng = np.random.default_rng(12)
    hits = 0
    for trial in range(40):
        d = int(rng.integers(2, 5))
        x = PointSet(rng.standard_normal((40, d)))
        phi = potential(np.eye(d), x)
        for eps in (0.1, 0.3, 0.6):
            if phi <= 1.0 / d + eps ** 2 / d ** 2:
                lam = np.linalg.eigvalsh(second_moment(np.eye(d), x).entries)
                assert np.max(np.abs(lam - 1.0 / d)) <= eps / d + 1e-12
                hits += 1
    assert hits > 5  # the assertion must actually have fired


def test_psd_frobenius_sandwich():
    # for PSD A >= B: 2 tr(A-B) lam_k(B) <= ||A||_F^2 - ||B||_F^2
    #                 <= 2 tr(A-B) lam_1(A), k = rank(A)
    rng = np.random.default_rng(13)
    for _ in range(25):
        d = int(rng.integers(2, 6))
        g = rng.standard_normal((d, d + 1))
        b = g @ g.T
        h = rng.standard_normal((d, d + 1))
        a = b + h @ h.T
        gap = np.sum(a * a) - np.sum(b * b)
        tr = np.trace(a - b)
        lam_a = np.linalg.eigvalsh(a)
        lam_b = np.linalg.eigvalsh(b)
        k = int(np.linalg.matrix_rank(a))
        low = 2.0 * tr * np.sort(lam_b)[::-1][k - 1]
        high = 2.0 * tr * lam_a[-1]
        assert low <= gap + 1e-8 * max(1.0, abs(gap))
        assert gap <= high + 1e-8 * max(1.0, abs(gap))


def test_membership_mask():
    x = PointSet(np.array([[1.0, 0.0], [1.0, 1e-12], [0.0, 1.0]]))
    v = Subspace(np.array([[1.0, 0.0]]))
    assert membership_mask(x, v).tolist() == [True, True, False]


def test_transform_identity():
    t = Transform.identity(3)
    assert t.d == 3 and np.allclose(t.matrix, np.eye(3))

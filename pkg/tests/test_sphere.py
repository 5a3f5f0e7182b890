import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_configuration, random_orthogonal
from pframe.potentials import fp
from pframe.sphere import (
    Configuration,
    NotAFrameError,
    eigendecompose,
    frame_bounds,
    frame_operator,
    gram,
    jacobi_eigh,
    orthonormal_basis,
    procrustes_direction,
    reconstruct,
    regular_polygon,
    simplex_frame,
    unit_vector,
)


def test_unit_vector_normalizes():
    v = unit_vector([3.0, 4.0])
    assert np.allclose(v, [0.6, 0.8])


def test_unit_vector_rejects_zero():
    with pytest.raises(ValueError):
        unit_vector([0.0, 0.0])


def test_configuration_rejects_zero_row():
    with pytest.raises(ValueError):
        Configuration([[1.0, 0.0], [0.0, 0.0]])


def test_configuration_points_read_only(mercedes):
    with pytest.raises(ValueError):
        mercedes.points[0, 0] = 2.0


def test_gram_examples(onb2, mercedes):
    assert np.array_equal(gram(onb2), np.eye(2))
    g = gram(mercedes)
    off = g[~np.eye(3, dtype=bool)]
    assert np.allclose(off, -0.5, atol=1e-15)
    assert np.array_equal(gram(Configuration([[0.0, 1.0]])), np.ones((1, 1)))


def test_frame_operator_examples(mercedes):
    s = frame_operator(orthonormal_basis(4)).matrix
    assert np.allclose(s, np.eye(4)) and np.isclose(np.trace(s), 4)
    assert np.allclose(frame_operator(mercedes).matrix, 1.5 * np.eye(2), atol=1e-15)
    two = Configuration([[1.0, 0.0], [1.0, 0.0]])
    assert np.allclose(frame_operator(two).matrix, np.diag([2.0, 0.0]))


def test_eigendecompose_examples(mercedes):
    assert np.allclose(eigendecompose(np.eye(2)).eigenvalues, [1, 1])
    ed = eigendecompose(np.diag([2.0, 0.0]))
    assert np.allclose(ed.eigenvalues, [2, 0])
    assert np.allclose(ed.eigenvectors, np.eye(2))
    assert np.allclose(eigendecompose(frame_operator(mercedes)).eigenvalues, [1.5, 1.5])


def test_eigendecompose_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eigendecompose_sign_convention(rng):
    a = rng.standard_normal((5, 5))
    ed = eigendecompose(a + a.T)
    for k in range(5):
        col = ed.eigenvectors[:, k]
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert first > 0


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_jacobi_matches_numpy(rng, n):
    a = rng.standard_normal((n, n))
    a = a + a.T
    w, v = jacobi_eigh(a)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-12)


def test_jacobi_wide_dynamic_range():
    a = np.diag([1e12, 1.0, 1e-12])
    a[0, 1] = a[1, 0] = 1e-20
    w, _ = jacobi_eigh(a)
    assert np.allclose(np.sort(w), [1e-12, 1.0, 1e12], rtol=1e-12)


def test_frame_bounds_examples(mercedes):
    fb = frame_bounds(orthonormal_basis(3))
    assert np.allclose([fb.lower, fb.upper], [1, 1])
    fb = frame_bounds(mercedes)
    assert np.allclose([fb.lower, fb.upper], [1.5, 1.5])
    fb = frame_bounds(Configuration([[1.0, 0.0], [1.0, 0.0]]))
    assert (fb.lower, fb.upper) == (0.0, 2.0) and not fb.is_frame


def test_reconstruct_examples(onb2, mercedes):
    assert np.allclose(reconstruct(onb2, [1.0, 0.0]), [1.0, 0.0])
    assert np.allclose(reconstruct(mercedes, [1.0, 0.0]), [1.0, 0.0], atol=1e-12)
    with pytest.raises(NotAFrameError, match="not a frame"):
        reconstruct(Configuration([[1.0, 0.0], [1.0, 0.0]]), [0.3, 0.7])


def test_reconstruct_random_frames(rng):
    done = 0
    while done < 100:
        d = int(rng.integers(1, 7))
        n = int(rng.integers(d, 13))
        cfg = random_configuration(rng, d, n)
        if frame_bounds(cfg).lower <= 1e-6:
            continue
        y = rng.standard_normal(d)
        assert np.linalg.norm(reconstruct(cfg, y) - y) <= 1e-8
        done += 1


def test_procrustes_examples(onb2, mercedes):
    pm = procrustes_direction(Configuration([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(pm.direction, [1.0, 0.0]) and np.isclose(pm.eigenvalue, 2.0)
    assert not pm.degenerate
    assert procrustes_direction(onb2).degenerate
    assert procrustes_direction(mercedes).degenerate


def test_constructors():
    assert np.allclose(gram(regular_polygon(4)), gram(Configuration([[1, 0], [0, 1], [-1, 0], [0, -1]])),
                       atol=1e-15)
    s = simplex_frame(3)
    off = gram(s)[~np.eye(4, dtype=bool)]
    assert np.allclose(off, -1.0 / 3.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_spectral_identities(d, n, seed):
    rng = np.random.default_rng(seed)
    cfg = random_configuration(rng, d, n)
    s = frame_operator(cfg)
    ed = eigendecompose(s)
    assert abs(np.trace(s.matrix) - n) <= 1e-10
    assert abs(fp(cfg, 2).value - np.sum(ed.eigenvalues ** 2)) <= 1e-9
    assert abs(fp(cfg, 2).value - np.linalg.norm(s.matrix) ** 2) <= 1e-9
    fb = frame_bounds(cfg)
    assert fb.upper == ed.eigenvalues[0]
    pm = procrustes_direction(cfg)
    assert abs(np.sum((cfg.points @ pm.direction) ** 2) - fb.upper) <= 1e-9
    q = random_orthogonal(rng, d)
    fq = frame_bounds(cfg.transform(q))
    assert abs(fq.lower - fb.lower) <= 1e-10 and abs(fq.upper - fb.upper) <= 1e-10

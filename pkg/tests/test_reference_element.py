import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdg.reference_element import (ElementGeometry, PointNotInElement, face_reference_points,
                                    gauss_legendre_rule, inverse_map_many, jacobians, lgl_nodes,
                                    map_points, reference_element, shape_eval, shape_eval_many)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_gauss_rule_exact_for_monomials(n):
    x, w = gauss_legendre_rule(n)
    for m in range(2 * n):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        assert np.isclose(np.sum(w * x ** m), exact, atol=1e-14)


def test_gauss_rule_rejects_empty():
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


@pytest.mark.parametrize("k, expected", [
    (1, [-1.0, 1.0]),
    (2, [-1.0, 0.0, 1.0]),
    (3, [-1.0, -1 / np.sqrt(5), 1 / np.sqrt(5), 1.0]),
    (4, [-1.0, -np.sqrt(3 / 7), 0.0, np.sqrt(3 / 7), 1.0]),
])
def test_lgl_nodes_closed_form(k, expected):
    assert np.allclose(lgl_nodes(k), expected, atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_lgl_nodes_symmetric_and_sorted(k):
    x = lgl_nodes(k)
    assert len(x) == k + 1
    assert np.all(np.diff(x) > 0)
    assert np.allclose(x, -x[::-1], atol=0)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_basis_is_nodal(k):
    ref = reference_element(k)
    V, _ = shape_eval_many(k, ref.nodes)
    assert np.allclose(V, np.eye(ref.n_nodes), atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_partition_of_unity(k):
    xi = np.random.default_rng(k).uniform(-1, 1, (50, 2))
    V, G = shape_eval_many(k, xi)
    assert np.allclose(V.sum(axis=1), 1.0, atol=1e-13)
    assert np.allclose(G.sum(axis=1), 0.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 5), a=st.integers(0, 5), b=st.integers(0, 5),
       pts=st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=8))
def test_tensor_polynomials_reproduced(k, a, b, pts):
    a, b = min(a, k), min(b, k)
    ref = reference_element(k)
    f = lambda x: x[..., 0] ** a * x[..., 1] ** b  # noqa: E731
    xi = np.array(pts)
    V, G = shape_eval_many(k, xi)
    coeff = f(ref.nodes)
    assert np.allclose(V @ coeff, f(xi), atol=1e-12)
    dfx = a * xi[:, 0] ** max(a - 1, 0) * xi[:, 1] ** b
    assert np.allclose(G[:, :, 0] @ coeff, dfx, atol=1e-10)


@pytest.mark.parametrize("k", [1, 3, 4])
def test_gradients_match_finite_differences(k):
    rng = np.random.default_rng(0)
    xi = rng.uniform(-0.9, 0.9, (5, 2))
    _, G = shape_eval_many(k, xi)
    h = 1e-6
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        fd = (shape_eval_many(k, xi + e)[0] - shape_eval_many(k, xi - e)[0]) / (2 * h)
        assert np.allclose(G[:, :, d], fd, atol=1e-7)


def test_shape_eval_single_point_matches_batch():
    v, g = shape_eval(2, [0.3, -0.2])
    V, G = shape_eval_many(2, [[0.3, -0.2]])
    assert np.array_equal(v, V[0]) and np.array_equal(g, G[0])


@pytest.mark.parametrize("face, start, end", [
    (0, (-1, -1), (1, -1)), (1, (1, -1), (1, 1)), (2, (1, 1), (-1, 1)), (3, (-1, 1), (-1, -1))])
def test_face_parameterisation_runs_counterclockwise(face, start, end):
    pts = face_reference_points(face, np.array([-1.0, 1.0]))
    assert np.array_equal(pts, [start, end])


def test_face_index_validated():
    with pytest.raises(ValueError):
        face_reference_points(4, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_mass_matrix_matches_overintegration(k):
    ref = reference_element(k)
    g, w = gauss_legendre_rule(k + 4)
    xi = np.stack(np.meshgrid(g, g, indexing="xy"), -1).reshape(-1, 2)
    V, _ = shape_eval_many(k, xi)
    oracle = V.T @ (np.outer(w, w).ravel()[:, None] * V)
    assert np.allclose(ref.mass_matrix(), oracle, atol=1e-14)


def test_reference_element_shapes():
    ref = reference_element(3)
    assert ref.nodes.shape == (16, 2)
    assert ref.shape_values.shape == (16, 16)
    assert ref.shape_gradients.shape == (16, 16, 2)
    assert ref.face_shape_values.shape == (4, 4, 16)
    assert ref.n_face_points == 4


def _convex_quad(draw_offsets):
    base = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return base + 0.2 * np.asarray(draw_offsets).reshape(4, 2)


quad_offsets = st.lists(st.floats(-1, 1), min_size=8, max_size=8)


@settings(max_examples=60, deadline=None)
@given(off=quad_offsets, xi=st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_inverse_map_round_trip(off, xi):
    v = _convex_quad(off)
    x = map_points(v, np.array(xi))
    back, ok = inverse_map_many(v, x)
    assert ok
    assert np.allclose(back, xi, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(off=quad_offsets)
def test_jacobian_matches_finite_differences(off):
    v = _convex_quad(off)
    xi = np.array([0.2, -0.4])
    J = jacobians(v, xi)
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (map_points(v, xi + e) - map_points(v, xi - e)) / (2 * h)
        assert np.allclose(J[:, j], fd, atol=1e-8)


def test_element_geometry_normals_and_lengths():
    geom = ElementGeometry(np.array([[0, 0], [2, 0], [2, 1], [0, 1]], dtype=float))
    assert np.allclose([geom.face_normal(f) for f in range(4)], [[0, -1], [1, 0], [0, 1], [-1, 0]])
    assert np.allclose(geom.edge_lengths(), [2, 1, 2, 1])
    assert geom.face_length(1) == 1.0


def test_map_to_reference_rejects_outside_point():
    geom = ElementGeometry(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
    assert np.allclose(geom.map_to_reference([0.25, 0.75]), [-0.5, 0.5])
    assert geom.contains([1.0, 0.5])
    assert not geom.contains([1.1, 0.5])
    with pytest.raises(PointNotInElement):
        geom.map_to_reference([1.5, 0.5])

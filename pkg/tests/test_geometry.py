import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdg.geometry import BoxIndex, clip_segment_points, point_in_convex_polygon, segment_quad_clip

UNIT = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def brute_force_interval(a, b, quad, n=20001):
    t = np.linspace(0.0, 1.0, n)
    pts = a[None] + t[:, None] * (b - a)[None]
    inside = point_in_convex_polygon(pts, quad, tol=1e-12)
    if not inside.any():
        return None
    return t[inside].min(), t[inside].max()


@pytest.mark.parametrize("a, b, expected", [
    ((-1.0, 0.5), (2.0, 0.5), (1 / 3, 2 / 3)),
    ((0.5, -1.0), (0.5, 0.5), (2 / 3, 1.0)),
    ((0.2, 0.2), (0.8, 0.9), (0.0, 1.0)),
    ((2.0, 2.0), (3.0, 3.0), None),
])
def test_clip_known_cases(a, b, expected):
    res = segment_quad_clip(a, b, UNIT)
    if expected is None:
        assert res is None
    else:
        assert np.allclose(res, expected, atol=1e-14)


def test_segment_along_an_edge_is_kept():
    assert np.allclose(segment_quad_clip((0.0, 0.0), (1.0, 0.0), UNIT), (0.0, 1.0))
    # touching only at a corner gives a zero-length piece
    assert segment_quad_clip((1.0, 1.0), (2.0, 2.0), UNIT) is None


def test_zero_length_segment_rejected():
    with pytest.raises(ValueError):
        segment_quad_clip((0.5, 0.5), (0.5, 0.5), UNIT)


def test_clip_endpoints():
    p0, p1 = clip_segment_points((-1.0, 0.5), (2.0, 0.5), UNIT)
    assert np.allclose(p0, [0, 0.5]) and np.allclose(p1, [1, 0.5])


coords = st.floats(-1.5, 2.5, allow_nan=False)


@settings(max_examples=80, deadline=None)
@given(ax=coords, ay=coords, bx=coords, by=coords,
       off=st.lists(st.floats(-0.2, 0.2), min_size=8, max_size=8))
def test_clip_agrees_with_dense_sampling(ax, ay, bx, by, off):
    a, b = np.array([ax, ay]), np.array([bx, by])
    if np.hypot(*(b - a)) < 1e-3:
        return
    quad = UNIT + np.asarray(off).reshape(4, 2)
    res = segment_quad_clip(a, b, quad)
    oracle = brute_force_interval(a, b, quad)
    step = 1.0 / 20000
    if res is None:
        assert oracle is None or oracle[1] - oracle[0] <= 2 * step
    else:
        assert oracle is not None
        assert abs(res[0] - oracle[0]) <= 2 * step and abs(res[1] - oracle[1]) <= 2 * step


def test_point_in_polygon_boundary_tolerance():
    assert point_in_convex_polygon(np.array([1.0, 0.5]), UNIT)
    assert not point_in_convex_polygon(np.array([1.0 + 1e-6, 0.5]), UNIT)


def test_box_index_candidates_superset_of_containment():
    rng = np.random.default_rng(3)
    xs = np.linspace(0, 1, 6)
    cells = np.array([[[xs[i], xs[j]], [xs[i + 1], xs[j]], [xs[i + 1], xs[j + 1]], [xs[i], xs[j + 1]]]
                      for j in range(5) for i in range(5)])
    index = BoxIndex(cells)
    for x in rng.uniform(0, 1, (200, 2)):
        inside = {e for e in range(len(cells)) if point_in_convex_polygon(x, cells[e], 1e-12)}
        assert inside <= set(index.candidates(x).tolist())
    seg = index.segment_candidates(np.array([0.0, 0.1]), np.array([1.0, 0.1]))
    assert set(range(5)) <= set(seg.tolist())

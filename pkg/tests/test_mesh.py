import warnings

import numpy as np
import pytest

from ncdg.geometry import point_in_convex_polygon
from ncdg.mesh import (BOUNDARY, INTERIOR, NCI, Admittance, BoundarySpec, Material, Mesh,
                       MeshConfigurationError, PressureDirichlet, build_embedded_rect_mesh,
                       build_overlap_mesh, build_overset_mesh, build_rect_mesh,
                       build_two_region_mesh, disc_polygon, refine_uniform, resolution_check)

OUTER = (0.0, 0.0, 0.1, 0.1)
HOLE = (1 / 30, 1 / 30, 2 / 30, 2 / 30)


@pytest.fixture(scope="module")
def instability_mesh():
    return build_embedded_rect_mesh(OUTER, HOLE, 1 / 210, 1 / 390)


def test_material_derived_quantities():
    m = Material(1.2, 343.0)
    assert abs(m.tau * m.gamma - 1.0) < 1e-14
    with pytest.raises(ValueError):
        Material(0.0, 1.0)


def test_golden_counts_coarse_embedded_mesh():
    mesh = build_embedded_rect_mesh(OUTER, HOLE, 1 / 60, 1 / 90)
    # 6x6 outer grid minus the 2x2 hole, plus a 3x3 inner grid
    assert mesh.n_elements == 41
    assert np.sum(mesh.regions == 0) == 32 and np.sum(mesh.regions == 1) == 9
    assert len(mesh.nci_faces(0)) == 8 and len(mesh.nci_faces(1)) == 12


def test_golden_counts_instability_mesh(instability_mesh):
    mesh = instability_mesh
    assert mesh.n_elements == 21 * 21 - 7 * 7 + 13 * 13 == 561
    # 7 outer and 13 inner faces on each side of the hole
    assert len(mesh.nci_faces(0)) == 28 and len(mesh.nci_faces(1)) == 52


def test_every_face_classified_once(instability_mesh):
    mesh = instability_mesh
    kinds = mesh.face_kind
    assert set(np.unique(kinds)) <= {INTERIOR, BOUNDARY, NCI}
    # conforming partners are mutual and share endpoints
    a, b = mesh.face_endpoints()
    for e, f in zip(*np.nonzero(kinds == INTERIOR)):
        ne, nf = mesh.neighbor[e, f], mesh.neighbor_face[e, f]
        assert mesh.neighbor[ne, nf] == e
        assert np.allclose(a[e, f], b[ne, nf], atol=1e-12) and np.allclose(b[e, f], a[ne, nf], atol=1e-12)
    assert np.all(mesh.boundary_tag[kinds == BOUNDARY] != None)  # noqa: E711
    assert np.sum(kinds == BOUNDARY) == 4 * 21


def test_conforming_detection_with_equal_sizes():
    merged = build_embedded_rect_mesh(OUTER, HOLE, 1 / 60, 1 / 60, conforming=True)
    assert merged.nci_faces() == []
    split = build_embedded_rect_mesh(OUTER, HOLE, 1 / 60, 1 / 60, conforming=False)
    faces = split.nci_faces()
    assert len(faces) == 16
    mids = {tuple(np.round(split.vertices[e, f] + split.vertices[e, (f + 1) % 4], 12)) for e, f in faces}
    # every NCI face has a geometric twin on the other side
    assert len(mids) == 8


def test_non_divisible_sizes_rejected():
    with pytest.raises(MeshConfigurationError):
        build_embedded_rect_mesh(OUTER, HOLE, 1 / 61, 1 / 90)


def test_negative_jacobian_rejected():
    v = np.array([[[0, 0], [0, 1], [1, 1], [1, 0]]], dtype=float)  # clockwise
    with pytest.raises(MeshConfigurationError):
        Mesh(v, [0], {0: Material()}, (0, 0, 1, 1))


def test_locate_point_against_brute_force(instability_mesh):
    mesh = instability_mesh
    rng = np.random.default_rng(11)
    for x in rng.uniform(0, 0.1, (1000, 2)):
        found = {e for e, _ in mesh.locate_point(x)}
        brute = {e for e in range(mesh.n_elements)
                 if point_in_convex_polygon(x, mesh.vertices[e], 1e-10)}
        assert found == brute


def test_locate_point_examples():
    mesh = build_rect_mesh((0, 0, 1, 1), 4, 4)
    centroid = mesh.vertices[5].mean(axis=0)
    assert len(mesh.locate_point(centroid)) == 1
    edge_mid = 0.5 * (mesh.vertices[5, 1] + mesh.vertices[5, 2])
    assert len(mesh.locate_point(edge_mid)) == 2
    assert mesh.locate_point(np.array([2.0, 2.0])) == []


def test_point_in_overlap_zone_found_in_both_regions():
    mesh = build_overlap_mesh(OUTER, (0.05, 0.05), 0.025, 2e-3)
    # just inside the disc rim, outside the hole polygon
    x = np.array([0.05 + 0.0245 * np.cos(0.1), 0.05 + 0.0245 * np.sin(0.1)])
    hits = mesh.locate_point(x)
    regions = {int(mesh.regions[e]) for e, _ in hits}
    assert regions == {0, 1}


@pytest.mark.parametrize("r", [0, 1, 2])
def test_refine_uniform_counts(r):
    base = build_embedded_rect_mesh(OUTER, HOLE, 1 / 60, 1 / 90)
    fine = refine_uniform(base, r)
    for reg in (0, 1):
        assert np.sum(fine.regions == reg) == np.sum(base.regions == reg) * 4 ** r
    assert np.isclose(fine.h_max(), base.h_max() / 2 ** r)
    assert len(fine.nci_faces()) == len(base.nci_faces()) * 2 ** r


def test_refine_zero_is_identity():
    base = build_rect_mesh((0, 0, 1, 1), 2, 2)
    assert refine_uniform(base, 0) is base


def test_two_region_mesh():
    mesh = build_two_region_mesh((-1, -1, 1, 1), 0.0, 1 / 6, 1 / 2)
    assert np.sum(mesh.regions == 0) == 72 and np.sum(mesh.regions == 1) == 8
    assert len(mesh.nci_faces(0)) == 12 and len(mesh.nci_faces(1)) == 4
    assert build_two_region_mesh((-1, -1, 1, 1), 0.0, 0.5, 0.5).nci_faces() == []


def test_disc_polygon_vertex_zero_at_minus_45_degrees():
    poly = disc_polygon((0, 0), 1.0, 3)
    assert len(poly) == 12
    assert np.allclose(poly[0], [np.sqrt(0.5), -np.sqrt(0.5)])
    assert np.allclose(np.linalg.norm(poly, axis=1), 1.0)


def test_overlap_mesh_flush_and_overlapping():
    flush = build_overlap_mesh(OUTER, (0.05, 0.05), 0.025, 0.0)
    assert not flush.overlapping
    over = build_overlap_mesh(OUTER, (0.05, 0.05), 0.025, 2e-3)
    assert over.overlapping
    assert flush.n_elements == over.n_elements == 96


def test_deep_overlap_warns():
    with pytest.warns(UserWarning):
        build_overlap_mesh(OUTER, (0.05, 0.05), 0.025, 0.02)


def test_overset_mesh_removes_covered_cells():
    mesh = build_overset_mesh(OUTER, (0.05, 0.05), 0.025, 0.1 / 16)
    poly = disc_polygon((0.05, 0.05), 0.025, 4)
    bg = mesh.vertices[mesh.regions == 0]
    assert not np.any(point_in_convex_polygon(bg, poly).all(axis=1))
    assert mesh.n_elements == 272


def test_boundary_spec_fallback():
    spec = BoundarySpec({"left": Admittance(1.0), "*": PressureDirichlet()})
    assert spec.condition("left").Y == 1.0
    assert isinstance(spec.condition("top"), PressureDirichlet)
    with pytest.raises(MeshConfigurationError):
        BoundarySpec({"left": Admittance()}).condition("top")


def test_resolution_check_instability_mesh():
    ok, lhs, rhs = resolution_check(3, 1 / 210, 2 * np.pi * 120)
    assert ok and lhs == 3.5
    # direct evaluation gives 3.326; the quoted value is about 3.44
    assert abs(rhs - 3.44) / 3.44 < 0.05
    assert [resolution_check(k, 1 / 210, 2 * np.pi * 120)[0] for k in (1, 2, 3, 4)] == \
        [False, False, True, True]
    with pytest.raises(ValueError):
        resolution_check(0, 1.0, 1.0)


def test_dump_csv(tmp_path):
    mesh = build_rect_mesh((0, 0, 1, 1), 2, 1)
    path = tmp_path / "mesh.csv"
    mesh.dump_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("element,region,x0,y0")
    assert len(lines) == 3


def test_no_warning_for_default_overlap():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_overlap_mesh(OUTER, (0.05, 0.05), 0.025, 2e-3)

"""Brute-force oracles for NCI trace integrals, shared by the test modules."""

import numpy as np

from ncdg.acoustic_dg import FieldState
from ncdg.geometry import point_in_convex_polygon
from ncdg.mesh import Material, Mesh
from ncdg.nci_coupling import evaluate_exterior_traces
from ncdg.reference_element import gauss_legendre_rule, inverse_map_many, shape_eval_many


def cell(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def split_mesh(s, materials=None):
    """Unit square on the left, two cells split at height ``s`` on the right."""
    v = np.array([cell(0, 0, 1, 1), cell(1, 0, 2, s), cell(1, s, 2, 1)])
    return Mesh(v, [0, 1, 1], materials or {0: Material(), 1: Material()}, (0, 0, 2, 1))


def field_at(mesh, k, nodal, x, region):
    """Brute-force evaluation of a DG field at ``x`` inside ``region``: all
    containing elements are found by direct polygon tests and averaged."""
    vals = []
    for e in np.flatnonzero(mesh.regions == region):
        if point_in_convex_polygon(x, mesh.vertices[e], 1e-10):
            xi, _ = inverse_map_many(mesh.vertices[e], x[None])
            V, _ = shape_eval_many(k, xi)
            vals.append(V[0] @ nodal[e])
    assert vals, f"point {x} not covered"
    return np.mean(vals)


def oracle_face_moments(mesh, k, nodal, e, f, breaks, n_gauss=8):
    """Composite Gauss integral of N_i^- p^+ over one face with known break points."""
    a, b = mesh.vertices[e, f], mesh.vertices[e, (f + 1) % 4]
    L = np.linalg.norm(b - a)
    g, w = gauss_legendre_rule(n_gauss)
    other = 1 - mesh.regions[e]
    out = np.zeros((k + 1) ** 2)
    for t0, t1 in zip(breaks[:-1], breaks[1:]):
        t = t0 + (t1 - t0) * 0.5 * (g + 1)
        x = a[None] + t[:, None] * (b - a)[None]
        xi, _ = inverse_map_many(mesh.vertices[e], x)
        V, _ = shape_eval_many(k, xi)
        pp = np.array([field_at(mesh, k, nodal, xq, other) for xq in x])
        out += V.T @ (w * 0.5 * (t1 - t0) * L * pp)
    return out


def map_face_moments(mesh, k, nodal, nci_map, face):
    state = FieldState(nodal, np.zeros((len(nodal), 2, nodal.shape[1])))
    p_p, _ = evaluate_exterior_traces(state, nci_map)
    idx = nci_map.face_points(face)
    V, _ = shape_eval_many(k, nci_map.point_xi[idx])
    return V.T @ (nci_map.point_weight[idx] * p_p[idx])

"""Coupling across non-conforming interfaces.

Both schemes integrate the numerical flux over each *primary* NCI face (every
NCI face is primary for its own element); they only differ in where the
quadrature points sit:

* point-to-point: the ``k + 1`` Gauss points of the primary face; exterior
  values are interpolated in whichever secondary elements contain them.
* mortaring: the primary face is clipped against every secondary volume
  element, and a ``k + 1`` point Gauss rule is placed on each resulting
  sub-segment (mortar), so the integrand is smooth on every rule.

Overlapping regions need no special treatment: secondary elements are
searched as volumes, not as faces.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .acoustic_dg import ldg_nci_flux
from .geometry import LENGTH_TOL, segment_quad_clip
from .reference_element import (REFERENCE_TOL, face_reference_points, gauss_legendre_rule,
                                inverse_map_many, shape_eval_many)

POINT_TO_POINT = "p2p"
MORTARING = "mortar"
GAP_TOL = 1e-8


class NciError(RuntimeError):
    pass


@dataclass(frozen=True)
class NciQuadPoint:
    face: int
    x: np.ndarray
    weight: float        # w_q |J|
    normal: np.ndarray   # outward normal of the primary face
    bindings: tuple      # ((element, xi), ...)


@dataclass(frozen=True)
class MortarPatch:
    face: int
    secondaries: tuple
    x0: np.ndarray
    x1: np.ndarray

    @property
    def length(self):
        return float(np.linalg.norm(self.x1 - self.x0))


@dataclass
class NciMap:
    """Exterior-trace evaluation data for all primary NCI faces.

    Point arrays have length ``Q``; binding arrays length ``B`` with
    ``binding_point`` giving the owning quadrature point.
    """

    scheme: str
    degree: int
    faces: list                    # (element, local face) per primary face id
    face_length: np.ndarray
    point_face: np.ndarray
    point_element: np.ndarray
    point_xi: np.ndarray           # reference coordinates in the primary element
    point_x: np.ndarray
    point_weight: np.ndarray
    point_normal: np.ndarray
    binding_point: np.ndarray
    binding_element: np.ndarray
    binding_xi: np.ndarray
    patches: list = field(default_factory=list)
    covered_fraction: np.ndarray = None

    @property
    def n_points(self):
        return len(self.point_face)

    def binding_counts(self):
        return np.bincount(self.binding_point, minlength=self.n_points)

    def face_points(self, face):
        return np.flatnonzero(self.point_face == face)

    def quad_points(self):
        """Iterate the quadrature points as :class:`NciQuadPoint` records."""
        order = np.argsort(self.binding_point, kind="stable")
        starts = np.searchsorted(self.binding_point[order], np.arange(self.n_points + 1))
        for q in range(self.n_points):
            b = order[starts[q]:starts[q + 1]]
            yield NciQuadPoint(int(self.point_face[q]), self.point_x[q], float(self.point_weight[q]),
                               self.point_normal[q],
                               tuple((int(self.binding_element[i]), self.binding_xi[i]) for i in b))

    def weight_per_face(self):
        return np.bincount(self.point_face, weights=self.point_weight, minlength=len(self.faces))

    def dump_csv(self, path, patch_path=None):
        """Quadrature-point table; optionally a mortar-patch table."""
        counts = self.binding_counts()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["face", "x1", "x2", "weight", "bindings"])
            for q in range(self.n_points):
                w.writerow([int(self.point_face[q]), repr(float(self.point_x[q, 0])),
                            repr(float(self.point_x[q, 1])), repr(float(self.point_weight[q])),
                            int(counts[q])])
        if patch_path is not None:
            with open(patch_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["face", "secondary", "x1_start", "x2_start", "x1_end", "x2_end", "length"])
                for pa in self.patches:
                    for s in pa.secondaries:
                        w.writerow([pa.face, s, repr(float(pa.x0[0])), repr(float(pa.x0[1])),
                                    repr(float(pa.x1[0])), repr(float(pa.x1[1])), repr(pa.length)])


class _Builder:
    def __init__(self, mesh, k, scheme):
        self.mesh, self.k, self.scheme = mesh, k, scheme
        self.faces, self.lengths = [], []
        self.pf, self.pe, self.pxi, self.px, self.pw, self.pn = [], [], [], [], [], []
        self.bp, self.be, self.bxi = [], [], []
        self.patches, self.covered = [], []

    def add_point(self, face_id, e, xi, x, w, normal, bindings):
        q = len(self.pf)
        self.pf.append(face_id)
        self.pe.append(e)
        self.pxi.append(xi)
        self.px.append(x)
        self.pw.append(w)
        self.pn.append(normal)
        for be, bxi in bindings:
            self.bp.append(q)
            self.be.append(be)
            self.bxi.append(bxi)

    def finish(self):
        arr = lambda a, shape: np.asarray(a, dtype=float).reshape(shape)  # noqa: E731
        return NciMap(
            self.scheme, self.k, self.faces, np.asarray(self.lengths),
            np.asarray(self.pf, dtype=int), np.asarray(self.pe, dtype=int),
            arr(self.pxi, (-1, 2)), arr(self.px, (-1, 2)), np.asarray(self.pw, dtype=float),
            arr(self.pn, (-1, 2)), np.asarray(self.bp, dtype=int), np.asarray(self.be, dtype=int),
            arr(self.bxi, (-1, 2)), self.patches, np.asarray(self.covered, dtype=float))


def _secondaries(mesh, e, x, tol=REFERENCE_TOL):
    return mesh.locate_point(x, tol, exclude_region=mesh.regions[e])


def build_p2p_map(mesh, k):
    """Point-to-point map: primary-face Gauss points located in secondary elements."""
    s, w = gauss_legendre_rule(k + 1)
    b = _Builder(mesh, k, POINT_TO_POINT)
    normals = mesh.face_normals()
    for face_id, (e, f) in enumerate(mesh.nci_faces()):
        geom = mesh.geometry(e)
        L = geom.face_length(f)
        b.faces.append((e, f))
        b.lengths.append(L)
        xi = face_reference_points(f, s)
        x = geom.map_to_physical(xi)
        for q in range(k + 1):
            found = _secondaries(mesh, e, x[q])
            if not found:
                raise NciError(f"NCI face {face_id} (element {e}, face {f}): quadrature point "
                               f"{x[q].tolist()} not found in any secondary element")
            b.add_point(face_id, e, xi[q], x[q], w[q] * 0.5 * L, normals[e, f], found)
        b.covered.append(1.0)
    return b.finish()


def build_mortar_map(mesh, k):
    """Mortar map: Gauss rules on the intersections of primary faces with
    secondary volume elements."""
    g, gw = gauss_legendre_rule(k + 1)
    b = _Builder(mesh, k, MORTARING)
    normals = mesh.face_normals()
    index = mesh.index
    for face_id, (e, f) in enumerate(mesh.nci_faces()):
        geom = mesh.geometry(e)
        a, z = geom.face_endpoints(f)
        L = geom.face_length(f)
        b.faces.append((e, f))
        b.lengths.append(L)
        own = mesh.regions[e]
        clips = []
        for c in index.segment_candidates(a, z):
            if mesh.regions[c] == own:
                continue
            res = segment_quad_clip(a, z, mesh.vertices[c], LENGTH_TOL * L)
            if res is not None:
                clips.append((int(c), res[0], res[1]))
        if not clips:
            raise NciError(f"NCI face {face_id} (element {e}, face {f}) intersects no secondary element")
        # elementary intervals between all clip endpoints; each is half-open on
        # the right so shared secondary vertices are never counted twice
        cuts = np.unique(np.concatenate([[0.0, 1.0]] + [[t0, t1] for _, t0, t1 in clips]))
        covered = 0.0
        for u0, u1 in zip(cuts[:-1], cuts[1:]):
            if (u1 - u0) * L < LENGTH_TOL * L:
                continue
            mid = 0.5 * (u0 + u1)
            owners = tuple(c for c, t0, t1 in clips if t0 <= mid < t1)
            if not owners:
                continue
            if len(owners) > 1 and not mesh.overlapping:
                raise NciError(f"NCI face {face_id}: secondary elements {owners} cover the same "
                               "sub-segment on a non-overlapping interface")
            covered += u1 - u0
            b.patches.append(MortarPatch(face_id, owners, a + u0 * (z - a), a + u1 * (z - a)))
            t = u0 + (u1 - u0) * 0.5 * (g + 1.0)
            xi_m = face_reference_points(f, 2.0 * t - 1.0)
            x = a[None] + t[:, None] * (z - a)[None]
            wj = gw * 0.5 * (u1 - u0) * L
            bind_xi = []
            for c in owners:
                xi_p, ok = inverse_map_many(mesh.vertices[c], x)
                if not ok.all() or np.any(np.abs(xi_p) > 1 + REFERENCE_TOL):
                    raise NciError(f"NCI face {face_id}: mortar point not inside secondary element {c}")
                bind_xi.append(np.clip(xi_p, -1 - REFERENCE_TOL, 1 + REFERENCE_TOL))
            for q in range(k + 1):
                b.add_point(face_id, e, xi_m[q], x[q], wj[q], normals[e, f],
                            [(c, bx[q]) for c, bx in zip(owners, bind_xi)])
        if not mesh.overlapping and abs(covered - 1.0) > GAP_TOL:
            raise NciError(f"NCI face {face_id} (element {e}, face {f}) only covered to "
                           f"{covered:.12f} of its length")
        b.covered.append(covered)
    return b.finish()


# trace evaluation ---------------------------------------------------------

def _interp_matrix(k, n_elements, rows, elements, xi, weights, n_rows):
    n = (k + 1) ** 2
    V, _ = shape_eval_many(k, xi)
    data = (V * np.asarray(weights)[:, None]).ravel()
    r = np.repeat(rows, n)
    c = (np.asarray(elements)[:, None] * n + np.arange(n)[None]).ravel()
    return sp.csr_matrix((data, (r, c)), shape=(n_rows, n_elements * n))


def exterior_matrix(nci_map, n_elements):
    """Sparse matrix mapping nodal values to averaged exterior traces."""
    counts = nci_map.binding_counts()
    w = 1.0 / counts[nci_map.binding_point]
    return _interp_matrix(nci_map.degree, n_elements, nci_map.binding_point,
                          nci_map.binding_element, nci_map.binding_xi, w, nci_map.n_points)


def interior_matrix(nci_map, n_elements):
    Q = nci_map.n_points
    return _interp_matrix(nci_map.degree, n_elements, np.arange(Q), nci_map.point_element,
                          nci_map.point_xi, np.ones(Q), Q)


def evaluate_exterior_traces(state, nci_map):
    """Exterior ``(p+, u+)`` at every map point, averaged over bindings."""
    E = state.p.shape[0]
    S = exterior_matrix(nci_map, E)
    return S @ state.p.ravel(), np.stack([S @ state.u[:, 0].ravel(), S @ state.u[:, 1].ravel()], -1)


def evaluate_interior_traces(state, nci_map):
    E = state.p.shape[0]
    S = interior_matrix(nci_map, E)
    return S @ state.p.ravel(), np.stack([S @ state.u[:, 0].ravel(), S @ state.u[:, 1].ravel()], -1)


def _plus_materials(nci_map, mesh):
    counts = nci_map.binding_counts()
    tau = np.array([mesh.material_of(e).tau for e in nci_map.binding_element])
    gamma = np.array([mesh.material_of(e).gamma for e in nci_map.binding_element])
    Q = nci_map.n_points
    tau_p = np.bincount(nci_map.binding_point, tau, Q) / counts
    gamma_p = np.bincount(nci_map.binding_point, gamma, Q) / counts
    return tau_p, gamma_p


def integrate_nci_face(face, p_m, u_m, p_p, u_p, mesh, nci_map):
    """Weak-form boundary integrals of one primary NCI face.

    Returns ``(r_u, r_p)`` with ``r_u[d, i] = sum_q w|J| N_i n_d p* / rho``
    and ``r_p[i] = sum_q w|J| N_i rho c^2 (n . u*)``; traces are given at the
    face's map points in map order.  Only the primary element is tested.
    """
    idx = nci_map.face_points(face)
    e, _ = nci_map.faces[face]
    mat = mesh.material_of(e)
    tau_p, gamma_p = _plus_materials(nci_map, mesh)
    n = nci_map.point_normal[idx]
    p_star, u_star = ldg_nci_flux(p_m, u_m, p_p, u_p, mat.tau, tau_p[idx], mat.gamma,
                                  gamma_p[idx], n)
    V, _ = shape_eval_many(nci_map.degree, nci_map.point_xi[idx])
    w = nci_map.point_weight[idx]
    r_u = np.stack([V.T @ (w * n[:, d] * p_star) for d in range(2)]) / mat.rho
    r_p = V.T @ (w * (u_star * n).sum(-1)) * mat.rho * mat.c ** 2
    return r_u, r_p


class NciOperator:
    """Assembled sparse form of the NCI face terms of a discretization."""

    def __init__(self, nci_map, disc):
        mesh = disc.mesh
        E, n = disc.n_elements, disc.n_nodes
        self.map = nci_map
        self.S_minus = interior_matrix(nci_map, E)
        self.S_plus = exterior_matrix(nci_map, E)
        self.S = sp.vstack([self.S_minus, self.S_plus]).tocsr()
        Q = nci_map.n_points
        pe = nci_map.point_element
        self.tau_m, self.gamma_m = disc.tau[pe], disc.gamma[pe]
        self.tau_p, self.gamma_p = _plus_materials(nci_map, mesh)
        self.inv_rho = 1.0 / disc.rho[pe]
        self.rho_c2 = disc.rho_c2[pe]
        V, _ = shape_eval_many(nci_map.degree, nci_map.point_xi)
        cols = np.einsum("qij,qj->qi", disc.mass_inv[pe], V) * nci_map.point_weight[:, None]
        rows = (pe[:, None] * n + np.arange(n)[None]).ravel()
        self.lift = sp.csr_matrix((cols.ravel(), (rows, np.repeat(np.arange(Q), n))),
                                  shape=(E * n, Q))
        self.n = nci_map.point_normal
        self.Q = Q
        self.shape = (E, n)

    def residual(self, y, t):
        """NCI contributions already multiplied by the inverse mass matrix."""
        E, n = self.shape
        Y = y.reshape(3, E * n).T
        T = self.S @ Y
        Q = self.Q
        p_m, u_m = T[:Q, 0], T[:Q, 1:]
        p_p, u_p = T[Q:, 0], T[Q:, 1:]
        p_star, u_star = ldg_nci_flux(p_m, u_m, p_p, u_p, self.tau_m, self.tau_p,
                                      self.gamma_m, self.gamma_p, self.n)
        g = np.empty((Q, 3))
        g[:, 0] = self.n[:, 0] * p_star * self.inv_rho
        g[:, 1] = self.n[:, 1] * p_star * self.inv_rho
        g[:, 2] = (u_star * self.n).sum(-1) * self.rho_c2
        R = self.lift @ g
        return R[:, 0].reshape(E, n), R[:, 1].reshape(E, n), R[:, 2].reshape(E, n)

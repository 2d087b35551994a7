"""Multi-region quadrilateral meshes with face classification.

Elements are stored as a ``(E, 4, 2)`` array of counterclockwise vertex
coordinates plus a region id per element.  Inside a region the mesh must be
conforming; faces that have no conforming partner and do not lie on the
outer domain rectangle are non-conforming interface (NCI) faces.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import BoxIndex, point_in_convex_polygon
from .reference_element import REFERENCE_TOL, ElementGeometry, inverse_map_many, map_points

INTERIOR, BOUNDARY, NCI = 0, 1, 2
MATCH_TOL = 1e-12


class MeshConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Material:
    rho: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and self.c > 0):
            raise ValueError(f"material needs rho > 0 and c > 0, got {self}")

    @property
    def tau(self):
        return self.rho * self.c

    @property
    def gamma(self):
        return 1.0 / (self.rho * self.c)


# boundary conditions -------------------------------------------------------
# Data callables take (x: (P, 2) array, t: float); ``None`` means zero.

@dataclass(frozen=True)
class PressureDirichlet:
    g_p: object = None

    def value(self, x, t):
        return np.zeros(len(x)) if self.g_p is None else np.asarray(self.g_p(x, t), dtype=float)


@dataclass(frozen=True)
class VelocityDirichlet:
    g_u: object = None

    def value(self, x, t):
        if self.g_u is None:
            return np.zeros((len(x), 2))
        return np.asarray(self.g_u(x, t), dtype=float).reshape(len(x), 2)


@dataclass(frozen=True)
class Admittance:
    Y: float = 0.0


class BoundarySpec(dict):
    """Mapping from boundary tag to condition; key ``"*"`` is the fallback."""

    def condition(self, tag):
        if tag in self:
            return self[tag]
        if "*" in self:
            return self["*"]
        raise MeshConfigurationError(f"no boundary condition for tag {tag!r}")


# mesh ----------------------------------------------------------------------

class Mesh:
    """Quadrilateral mesh made of one or more regions.

    Parameters
    ----------
    vertices : (E, 4, 2) array, counterclockwise
    regions : (E,) int array
    materials : dict region id -> Material
    domain : (xmin, ymin, xmax, ymax) of the outer boundary
    region_names : dict region id -> name, e.g. ``{0: "outer", 1: "inner"}``
    conforming_across_regions : match faces of different regions when their
        endpoints coincide; otherwise every region boundary is an NCI
    overlapping : regions are allowed to overlap (relaxes coverage checks)
    """

    def __init__(self, vertices, regions, materials, domain, region_names=None,
                 conforming_across_regions=False, overlapping=False):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.regions = np.asarray(regions, dtype=int)
        self.materials = dict(materials)
        self.domain = tuple(float(v) for v in domain)
        self.region_names = dict(region_names or {r: str(r) for r in np.unique(self.regions)})
        self.conforming_across_regions = conforming_across_regions
        self.overlapping = overlapping
        if self.vertices.ndim != 3 or self.vertices.shape[1:] != (4, 2):
            raise MeshConfigurationError("vertices must have shape (E, 4, 2)")
        missing = set(np.unique(self.regions)) - set(self.materials)
        if missing:
            raise MeshConfigurationError(f"regions without material: {sorted(missing)}")
        self._check_jacobians()
        self._classify_faces()
        self._index = None

    @property
    def n_elements(self):
        return len(self.vertices)

    def __repr__(self):
        kinds = np.bincount(self.face_kind.ravel(), minlength=3)
        return (f"Mesh({self.n_elements} elements, regions={self.region_names}, "
                f"faces interior/boundary/nci={kinds.tolist()})")

    def geometry(self, e):
        return ElementGeometry(self.vertices[e])

    def material_of(self, e):
        return self.materials[int(self.regions[e])]

    def region_id(self, name):
        for rid, rname in self.region_names.items():
            if rname == name:
                return rid
        raise KeyError(name)

    def _check_jacobians(self):
        v = self.vertices
        # det J of a bilinear map is linear in each reference coordinate, so
        # positivity at the corners implies positivity everywhere
        for i in range(4):
            a = v[:, (i + 1) % 4] - v[:, i]
            b = v[:, (i - 1) % 4] - v[:, i]
            cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
            if np.any(cross <= 0):
                bad = np.flatnonzero(cross <= 0)
                raise MeshConfigurationError(f"non-positive Jacobian in elements {bad[:10].tolist()}")

    def face_endpoints(self):
        """Arrays ``a, b`` of shape ``(E, 4, 2)`` with face start/end points."""
        return self.vertices, np.roll(self.vertices, -1, axis=1)

    def face_lengths(self):
        a, b = self.face_endpoints()
        return np.linalg.norm(b - a, axis=-1)

    def face_normals(self):
        a, b = self.face_endpoints()
        t = b - a
        n = np.stack([t[..., 1], -t[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def _classify_faces(self):
        E = self.n_elements
        a, b = self.face_endpoints()
        mid = 0.5 * (a + b).reshape(-1, 2)
        scale = max(1.0, self.domain[2] - self.domain[0], self.domain[3] - self.domain[1])
        tol = MATCH_TOL * scale
        self.neighbor = -np.ones((E, 4), dtype=int)
        self.neighbor_face = -np.ones((E, 4), dtype=int)
        tree = cKDTree(mid)
        af = a.reshape(-1, 2)
        bf = b.reshape(-1, 2)
        for i, j in sorted(tree.query_pairs(tol * 10)):
            ei, fi = divmod(i, 4)
            ej, fj = divmod(j, 4)
            if ei == ej:
                continue
            if self.regions[ei] != self.regions[ej] and not self.conforming_across_regions:
                continue
            if (np.linalg.norm(af[i] - bf[j]) > tol or np.linalg.norm(bf[i] - af[j]) > tol):
                continue
            if self.neighbor[ei, fi] >= 0 or self.neighbor[ej, fj] >= 0:
                raise MeshConfigurationError(f"face ({ei},{fi}) matched more than once")
            self.neighbor[ei, fi], self.neighbor_face[ei, fi] = ej, fj
            self.neighbor[ej, fj], self.neighbor_face[ej, fj] = ei, fi

        self.face_kind = np.full((E, 4), INTERIOR, dtype=int)
        self.boundary_tag = np.full((E, 4), None, dtype=object)
        x0, y0, x1, y1 = self.domain
        for e, f in zip(*np.nonzero(self.neighbor < 0)):
            p, q = a[e, f], b[e, f]
            tag = None
            for name, axis, val in (("left", 0, x0), ("right", 0, x1),
                                    ("bottom", 1, y0), ("top", 1, y1)):
                if abs(p[axis] - val) <= tol and abs(q[axis] - val) <= tol:
                    tag = name
            if tag is None:
                self.face_kind[e, f] = NCI
            else:
                self.face_kind[e, f] = BOUNDARY
                self.boundary_tag[e, f] = tag

    def nci_faces(self, region=None):
        """List of ``(element, local face)`` pairs on non-conforming interfaces."""
        faces = [(int(e), int(f)) for e, f in zip(*np.nonzero(self.face_kind == NCI))]
        if region is not None:
            faces = [(e, f) for e, f in faces if self.regions[e] == region]
        return faces

    def edge_lengths(self):
        return np.linalg.norm(np.roll(self.vertices, -1, axis=1) - self.vertices, axis=-1)

    def h_min(self):
        return float(self.edge_lengths().min())

    def h_max(self):
        return float(self.edge_lengths().max())

    def c_max(self):
        return max(self.materials[r].c for r in np.unique(self.regions))

    # point location --------------------------------------------------------

    @property
    def index(self):
        if self._index is None:
            self._index = BoxIndex(self.vertices)
        return self._index

    def locate_point(self, x, tol=REFERENCE_TOL, exclude_region=None):
        """All ``(element, xi)`` with the point inside the element (within tol)."""
        x = np.asarray(x, dtype=float)
        cand = self.index.candidates(x)
        if exclude_region is not None:
            cand = cand[self.regions[cand] != exclude_region]
        if len(cand) == 0:
            return []
        xi, ok = inverse_map_many(self.vertices[cand], np.broadcast_to(x, (len(cand), 2)), tol)
        inside = ok & np.all(np.abs(xi) <= 1 + tol, axis=1)
        return [(int(e), np.clip(z, -1 - tol, 1 + tol)) for e, z in zip(cand[inside], xi[inside])]

    def dump_csv(self, path):
        """One row per element: id, region, four vertex coordinate pairs."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["element", "region"] + [f"{c}{i}" for i in range(4) for c in ("x", "y")])
            for e in range(self.n_elements):
                w.writerow([e, int(self.regions[e])] + [repr(float(v)) for v in self.vertices[e].ravel()])


def locate_point(mesh, x, tol=REFERENCE_TOL):
    return mesh.locate_point(x, tol)


# builders ------------------------------------------------------------------

def _divisions(length, h, what):
    n = int(round(length / h))
    if n < 1 or abs(n * h - length) > 1e-12 * max(1.0, length):
        raise MeshConfigurationError(f"{what}: spacing {h} does not divide length {length}")
    return n


def _grid_cells(x0, y0, x1, y1, nx, ny):
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    v = np.stack([
        np.stack([X[:-1, :-1], Y[:-1, :-1]], -1),
        np.stack([X[:-1, 1:], Y[:-1, 1:]], -1),
        np.stack([X[1:, 1:], Y[1:, 1:]], -1),
        np.stack([X[1:, :-1], Y[1:, :-1]], -1),
    ], axis=2)
    return v.reshape(-1, 4, 2)


def build_rect_mesh(extent, nx, ny, material=None):
    """Single-region structured mesh of an axis-aligned rectangle."""
    x0, y0, x1, y1 = extent
    v = _grid_cells(x0, y0, x1, y1, nx, ny)
    return Mesh(v, np.zeros(len(v), dtype=int), {0: material or Material()},
                extent, region_names={0: "domain"})


def build_embedded_rect_mesh(outer, hole, h_outer, h_inner, materials=None, conforming=False):
    """Rectangle with a rectangular hole filled by an independently meshed region.

    Region 0 is ``"outer"``, region 1 ``"inner"``.  With ``conforming=True``
    faces of the two regions that coincide are connected conformingly.
    """
    x0, y0, x1, y1 = outer
    hx0, hy0, hx1, hy1 = hole
    if not (x0 < hx0 < hx1 < x1 and y0 < hy0 < hy1 < y1):
        raise MeshConfigurationError("hole must lie strictly inside the outer extent")
    nx = _divisions(x1 - x0, h_outer, "outer x")
    ny = _divisions(y1 - y0, h_outer, "outer y")
    i0 = _divisions(hx0 - x0, h_outer, "hole offset x")
    i1 = _divisions(hx1 - x0, h_outer, "hole end x")
    j0 = _divisions(hy0 - y0, h_outer, "hole offset y")
    j1 = _divisions(hy1 - y0, h_outer, "hole end y")
    cells = _grid_cells(x0, y0, x1, y1, nx, ny).reshape(ny, nx, 4, 2)
    keep = np.ones((ny, nx), dtype=bool)
    keep[j0:j1, i0:i1] = False
    outer_cells = cells[keep]
    mx = _divisions(hx1 - hx0, h_inner, "inner x")
    my = _divisions(hy1 - hy0, h_inner, "inner y")
    # reuse the outer grid's hole coordinates so the interfaces coincide bitwise
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    inner_cells = _grid_cells(xs[i0], ys[j0], xs[i1], ys[j1], mx, my)
    v = np.concatenate([outer_cells, inner_cells])
    regions = np.concatenate([np.zeros(len(outer_cells), int), np.ones(len(inner_cells), int)])
    materials = materials or {0: Material(), 1: Material()}
    return Mesh(v, regions, materials, outer, region_names={0: "outer", 1: "inner"},
                conforming_across_regions=conforming)


def build_two_region_mesh(extent, split_x, h_left, h_right, materials=None, conforming=None):
    """Rectangle split at ``x = split_x`` into a left (0) and right (1) region."""
    x0, y0, x1, y1 = extent
    left = _grid_cells(x0, y0, split_x, y1, _divisions(split_x - x0, h_left, "left x"),
                       _divisions(y1 - y0, h_left, "left y"))
    right = _grid_cells(split_x, y0, x1, y1, _divisions(x1 - split_x, h_right, "right x"),
                        _divisions(y1 - y0, h_right, "right y"))
    v = np.concatenate([left, right])
    regions = np.concatenate([np.zeros(len(left), int), np.ones(len(right), int)])
    if conforming is None:
        conforming = math.isclose(h_left, h_right)
    materials = materials or {0: Material(), 1: Material()}
    return Mesh(v, regions, materials, extent, region_names={0: "left", 1: "right"},
                conforming_across_regions=conforming)


def disc_polygon(center, radius, n_quarter):
    """Vertices of the regular ``4 n_quarter``-gon inscribed in a circle.

    Vertex 0 sits at angle -45 degrees; vertices run counterclockwise.
    """
    theta = -0.25 * np.pi + 0.5 * np.pi * np.arange(4 * n_quarter) / n_quarter
    return np.asarray(center) + radius * np.stack([np.cos(theta), np.sin(theta)], -1)


def _rotations():
    for q in range(4):
        c, s = math.cos(q * math.pi / 2), math.sin(q * math.pi / 2)
        yield np.array([[c, -s], [s, c]])


def disc_cells(center, radius, n_quarter, n_layers, core=0.5):
    """Butterfly (O-grid) quad mesh of the polygonal disc of :func:`disc_polygon`.

    A central square of half-width ``core * radius`` with ``n_quarter^2``
    cells is surrounded by four blocks of ``n_quarter x n_layers`` cells
    whose outer vertices are the polygon vertices.
    """
    center = np.asarray(center, dtype=float)
    n, m = n_quarter, n_layers
    a = core * radius
    s = np.linspace(-1.0, 1.0, n + 1)
    cells = []
    core_cells = _grid_cells(-a, -a, a, a, n, n)
    cells.append(core_cells)
    theta = -0.25 * np.pi + 0.5 * np.pi * (s + 1) / 2
    arc = radius * np.stack([np.cos(theta), np.sin(theta)], -1)
    side = np.stack([np.full_like(s, a), a * s], -1)
    lam = np.linspace(0.0, 1.0, m + 1)
    for R in _rotations():
        P = (1 - lam)[:, None, None] * side[None] + lam[:, None, None] * arc[None]  # (m+1, n+1, 2)
        P = P @ R.T
        for l in range(m):
            for j in range(n):
                cells.append(np.array([[P[l, j], P[l + 1, j], P[l + 1, j + 1], P[l, j + 1]]]))
    return np.concatenate(cells) + center


def _annulus_cells(inner_ring, rect, n_side, n_layers, grading=1.0):
    """O-grid between a closed inner ring (``4 n_side`` points, vertex 0 at -45
    degrees) and the boundary of rectangle ``rect``."""
    x0, y0, x1, y1 = rect
    s = np.linspace(0.0, 1.0, n_side + 1)
    # rectangle boundary points matched to the ring, counterclockwise from the
    # lower-right corner
    sides = [
        np.stack([np.full_like(s, x1), y0 + (y1 - y0) * s], -1),
        np.stack([x1 - (x1 - x0) * s, np.full_like(s, y1)], -1),
        np.stack([np.full_like(s, x0), y1 - (y1 - y0) * s], -1),
        np.stack([x0 + (x1 - x0) * s, np.full_like(s, y0)], -1),
    ]
    lam = np.linspace(0.0, 1.0, n_layers + 1) ** grading
    cells = []
    ring = np.concatenate([inner_ring, inner_ring[:1]])
    for q in range(4):
        inner = ring[q * n_side:(q + 1) * n_side + 1]
        P = (1 - lam)[:, None, None] * inner[None] + lam[:, None, None] * sides[q][None]
        for l in range(n_layers):
            for j in range(n_side):
                # ring runs counterclockwise, outward is increasing l
                cells.append([P[l, j], P[l + 1, j], P[l + 1, j + 1], P[l, j + 1]])
    return np.array(cells)


def build_overlap_mesh(extent, center, radius, overlap, n_quarter=4, n_layers=2,
                       outer_subdivision=1, outer_layers=3, materials=None):
    """Rectangle with a polygonal hole and an embedded polygonal disc.

    The hole is the disc polygon scaled to radius ``radius - overlap`` with
    each polygon edge split into ``outer_subdivision`` faces.  ``overlap = 0``
    gives a flush interface, ``overlap > 0`` lets the disc elements overlap
    the outer ones.  Region 0 is ``"outer"``, region 1 ``"inner"``.
    """
    if overlap < 0 or overlap >= radius:
        raise MeshConfigurationError(f"overlap must lie in [0, radius), got {overlap}")
    center = np.asarray(center, dtype=float)
    x0, y0, x1, y1 = extent
    if not (x0 < center[0] - radius and center[0] + radius < x1
            and y0 < center[1] - radius and center[1] + radius < y1):
        raise MeshConfigurationError("disc must lie strictly inside the extent")
    disc = disc_cells(center, radius, n_quarter, n_layers)
    poly = disc_polygon(center, radius - overlap, n_quarter)
    ns = outer_subdivision
    ring = np.concatenate([
        poly[i] + np.outer(np.arange(ns) / ns, poly[(i + 1) % len(poly)] - poly[i])
        for i in range(len(poly))])
    outer = _annulus_cells(ring, extent, n_quarter * ns, outer_layers)
    first_layer = np.min(np.linalg.norm(outer[:, 1] - outer[:, 0], axis=-1))
    if overlap > first_layer:
        warnings.warn(f"overlap {overlap:g} exceeds one outer element ({first_layer:g}); "
                      "fields in the overlap are computed redundantly", stacklevel=2)
    v = np.concatenate([outer, disc])
    regions = np.concatenate([np.zeros(len(outer), int), np.ones(len(disc), int)])
    materials = materials or {0: Material(), 1: Material()}
    return Mesh(v, regions, materials, extent, region_names={0: "outer", 1: "inner"},
                overlapping=overlap > 0)


def build_overset_mesh(extent, center, radius, h_background, n_quarter=4, n_layers=2,
                       materials=None):
    """Polygonal disc laid over a uniform background mesh.

    Background cells fully covered by the disc polygon are removed; the
    remaining partially covered cells overlap the disc.
    """
    x0, y0, x1, y1 = extent
    bg = _grid_cells(x0, y0, x1, y1, _divisions(x1 - x0, h_background, "background x"),
                     _divisions(y1 - y0, h_background, "background y"))
    poly = disc_polygon(center, radius, n_quarter)
    covered = point_in_convex_polygon(bg, poly).all(axis=1)
    bg = bg[~covered]
    disc = disc_cells(center, radius, n_quarter, n_layers)
    v = np.concatenate([bg, disc])
    regions = np.concatenate([np.zeros(len(bg), int), np.ones(len(disc), int)])
    materials = materials or {0: Material(), 1: Material()}
    return Mesh(v, regions, materials, extent, region_names={0: "outer", 1: "inner"},
                overlapping=True)


def refine_uniform(mesh, r=1):
    """Split every quadrilateral into four children, ``r`` times."""
    if r < 0:
        raise ValueError("refinement level must be >= 0")
    v, regions = mesh.vertices, mesh.regions
    for _ in range(r):
        xi = np.array([[-1, -1], [0, -1], [1, -1], [-1, 0], [0, 0], [1, 0], [-1, 1], [0, 1], [1, 1]],
                      dtype=float)
        P = map_points(v[:, None, :, :], xi[None, :, :])  # (E, 9, 2)
        children = [(0, 1, 4, 3), (1, 2, 5, 4), (3, 4, 7, 6), (4, 5, 8, 7)]
        v = np.stack([P[:, list(c)] for c in children], axis=1).reshape(-1, 4, 2)
        regions = np.repeat(regions, 4)
    if r == 0:
        return mesh
    return Mesh(v, regions, mesh.materials, mesh.domain, mesh.region_names,
                mesh.conforming_across_regions, mesh.overlapping)


def resolution_check(k, h_max, omega, C=1.0):
    """Resolution criterion ``k + 1/2 > omega h / 2 + C (omega h)^(1/3)``."""
    if not (k > 0 and h_max > 0 and omega > 0):
        raise ValueError("resolution_check needs positive arguments")
    wh = omega * h_max
    lhs = k + 0.5
    rhs = 0.5 * wh + C * wh ** (1.0 / 3.0)
    return lhs > rhs, lhs, rhs

"""Nodal tensor-product reference element on [-1, 1]^2.

Nodal points are Legendre-Gauss-Lobatto (LGL) points, quadrature is
Gauss-Legendre with ``k + 1`` points per direction.  Basis index and
quadrature index both run x-fastest: ``i = ix + (k + 1) * iy``.

Local faces of a quadrilateral with counterclockwise vertices
``v0 (-1,-1), v1 (1,-1), v2 (1,1), v3 (-1,1)`` are numbered::

    face 0: v0 -> v1  (eta = -1)
    face 1: v1 -> v2  (xi  = +1)
    face 2: v2 -> v3  (eta = +1)
    face 3: v3 -> v0  (xi  = -1)

Every face is parameterised by ``s`` in [-1, 1] running from its start
vertex to its end vertex.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

REFERENCE_TOL = 1e-10
NEWTON_MAX_ITER = 25


class PointNotInElement(ValueError):
    """Raised when the inverse bilinear map does not converge."""


def gauss_legendre_rule(n):
    """Gauss-Legendre points and weights on [-1, 1] (exact to degree 2n-1)."""
    if n < 1:
        raise ValueError(f"Gauss-Legendre rule needs n >= 1, got {n}")
    x, w = legendre.leggauss(n)
    return x, w


def lgl_nodes(k):
    """Legendre-Gauss-Lobatto nodes for degree ``k``: -1, roots of P'_k, 1."""
    if k < 1:
        raise ValueError(f"LGL nodes need k >= 1, got {k}")
    if k == 1:
        return np.array([-1.0, 1.0])
    dp = legendre.legder(legendre.Legendre.basis(k).coef)
    ddp = legendre.legder(dp)
    x = np.sort(legendre.legroots(dp).real)
    for _ in range(10):
        x = x - legendre.legval(x, dp) / legendre.legval(x, ddp)
    x = 0.5 * (x - x[::-1])
    return np.concatenate([[-1.0], x, [1.0]])


class Lagrange1D:
    """Lagrange polynomials through a set of 1D nodes."""

    def __init__(self, nodes):
        self.nodes = np.asarray(nodes, dtype=float)
        diff = self.nodes[:, None] - self.nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        self._denom = np.prod(diff, axis=1)

    def values(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = len(self.nodes)
        d = x[:, None] - self.nodes[None, :]
        out = np.empty((len(x), n))
        for j in range(n):
            out[:, j] = np.prod(np.delete(d, j, axis=1), axis=1) / self._denom[j]
        return out

    def derivatives(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = len(self.nodes)
        d = x[:, None] - self.nodes[None, :]
        out = np.zeros((len(x), n))
        for j in range(n):
            others = [m for m in range(n) if m != j]
            for m in others:
                rest = [l for l in others if l != m]
                out[:, j] += np.prod(d[:, rest], axis=1)
            out[:, j] /= self._denom[j]
        return out


@lru_cache(maxsize=None)
def _lagrange(k):
    return Lagrange1D(lgl_nodes(k))


def shape_eval_many(k, xi):
    """Tensor-product basis values ``(P, n)`` and gradients ``(P, n, 2)``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    lag = _lagrange(k)
    vx, vy = lag.values(xi[:, 0]), lag.values(xi[:, 1])
    dx, dy = lag.derivatives(xi[:, 0]), lag.derivatives(xi[:, 1])
    n1 = k + 1
    values = (vy[:, :, None] * vx[:, None, :]).reshape(-1, n1 * n1)
    grads = np.empty((len(xi), n1 * n1, 2))
    grads[:, :, 0] = (vy[:, :, None] * dx[:, None, :]).reshape(-1, n1 * n1)
    grads[:, :, 1] = (dy[:, :, None] * vx[:, None, :]).reshape(-1, n1 * n1)
    return values, grads


def shape_eval(k, xi):
    """Basis values ``(n,)`` and gradients ``(n, 2)`` at one reference point.

    Points outside [-1, 1]^2 are extrapolated; callers decide whether that
    is acceptable.
    """
    values, grads = shape_eval_many(k, np.asarray(xi, dtype=float)[None, :])
    return values[0], grads[0]


def face_reference_points(face, s):
    """Reference coordinates of face parameter values ``s`` on local face."""
    s = np.asarray(s, dtype=float)
    one = np.ones_like(s)
    if face == 0:
        return np.stack([s, -one], axis=-1)
    if face == 1:
        return np.stack([one, s], axis=-1)
    if face == 2:
        return np.stack([-s, one], axis=-1)
    if face == 3:
        return np.stack([-one, -s], axis=-1)
    raise ValueError(f"local face must be 0..3, got {face}")


@dataclass(frozen=True)
class ReferenceElement:
    degree: int
    nodes_1d: np.ndarray = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)
    quad_points_1d: np.ndarray = field(init=False, repr=False)
    quad_weights_1d: np.ndarray = field(init=False, repr=False)
    quad_points: np.ndarray = field(init=False, repr=False)
    quad_weights: np.ndarray = field(init=False, repr=False)
    shape_values: np.ndarray = field(init=False, repr=False)
    shape_gradients: np.ndarray = field(init=False, repr=False)
    face_points: np.ndarray = field(init=False, repr=False)
    face_shape_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = self.degree
        if k < 1:
            raise ValueError(f"degree must be >= 1, got {k}")
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        r = lgl_nodes(k)
        gx, gw = gauss_legendre_rule(k + 1)
        set_("nodes_1d", r)
        set_("nodes", _tensor_points(r))
        set_("quad_points_1d", gx)
        set_("quad_weights_1d", gw)
        set_("quad_points", _tensor_points(gx))
        set_("quad_weights", np.outer(gw, gw).ravel())
        values, grads = shape_eval_many(k, self.quad_points)
        set_("shape_values", values)
        set_("shape_gradients", grads)
        fpts = np.stack([face_reference_points(f, gx) for f in range(4)])
        set_("face_points", fpts)
        set_("face_shape_values",
             np.stack([shape_eval_many(k, fpts[f])[0] for f in range(4)]))

    @property
    def n_nodes(self):
        return (self.degree + 1) ** 2

    @property
    def n_face_points(self):
        return self.degree + 1

    def mass_matrix(self):
        """Mass matrix of the reference square."""
        V = self.shape_values
        return V.T @ (self.quad_weights[:, None] * V)


def _tensor_points(r):
    X, Y = np.meshgrid(r, r, indexing="xy")
    return np.stack([X.ravel(), Y.ravel()], axis=-1)


@lru_cache(maxsize=None)
def reference_element(k):
    return ReferenceElement(k)


# bilinear geometry ---------------------------------------------------------

_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def bilinear_weights(xi):
    xi = np.asarray(xi, dtype=float)
    a, b = xi[..., 0], xi[..., 1]
    return 0.25 * np.stack([(1 - a) * (1 - b), (1 + a) * (1 - b),
                            (1 + a) * (1 + b), (1 - a) * (1 + b)], axis=-1)


def bilinear_weight_gradients(xi):
    xi = np.asarray(xi, dtype=float)
    a, b = xi[..., 0], xi[..., 1]
    da = 0.25 * np.stack([-(1 - b), (1 - b), (1 + b), -(1 + b)], axis=-1)
    db = 0.25 * np.stack([-(1 - a), -(1 + a), (1 + a), (1 - a)], axis=-1)
    return np.stack([da, db], axis=-1)


def map_points(vertices, xi):
    """Bilinear map of reference points.

    ``vertices`` has shape ``(..., 4, 2)`` and ``xi`` shape ``(..., 2)`` with
    broadcast-compatible leading dimensions.
    """
    w = bilinear_weights(xi)
    return np.einsum("...a,...ad->...d", w, vertices)


def jacobians(vertices, xi):
    """Jacobian ``dx/dxi`` with ``J[..., d, j] = d x_d / d xi_j``."""
    dw = bilinear_weight_gradients(xi)
    return np.einsum("...aj,...ad->...dj", dw, vertices)


def inverse_map_many(vertices, x, tol=REFERENCE_TOL):
    """Vectorised Newton inversion of the bilinear map.

    Returns ``(xi, converged)``; ``xi`` is not clamped.
    """
    vertices = np.asarray(vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    vertices, x = np.broadcast_arrays(vertices, x[..., None, :])
    x = x[..., 0, :]
    diam = np.linalg.norm(vertices[..., 2, :] - vertices[..., 0, :], axis=-1)
    diam = np.maximum(diam, np.linalg.norm(vertices[..., 3, :] - vertices[..., 1, :], axis=-1))
    # affine initial guess from the Jacobian at the centre
    centre = vertices.mean(axis=-2)
    J0 = jacobians(vertices, np.zeros(x.shape))
    xi = np.linalg.solve(J0, (x - centre)[..., None])[..., 0]
    converged = np.zeros(x.shape[:-1], dtype=bool)
    for _ in range(NEWTON_MAX_ITER):
        r = map_points(vertices, xi) - x
        converged = np.linalg.norm(r, axis=-1) <= 1e-12 * np.maximum(diam, 1e-300)
        if converged.all():
            break
        J = jacobians(vertices, xi)
        step = np.linalg.solve(J, r[..., None])[..., 0]
        xi = xi - step
        xi = np.clip(xi, -10.0, 10.0)
    r = map_points(vertices, xi) - x
    converged = np.linalg.norm(r, axis=-1) <= 1e-12 * np.maximum(diam, 1e-300) + 1e-15
    return xi, converged


@dataclass(frozen=True)
class ElementGeometry:
    """Straight-edged quadrilateral with counterclockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(4, 2)
        object.__setattr__(self, "vertices", v)

    def map_to_physical(self, xi):
        return map_points(self.vertices, np.asarray(xi, dtype=float))

    def jacobian(self, xi):
        return jacobians(self.vertices, np.asarray(xi, dtype=float))

    def map_to_reference(self, x, tol=REFERENCE_TOL):
        """Inverse map; raises :class:`PointNotInElement` on failure.

        The returned point is clamped to ``[-1 - tol, 1 + tol]^2``; points
        further outside than ``tol`` are rejected as well.
        """
        xi, ok = inverse_map_many(self.vertices, np.asarray(x, dtype=float), tol)
        if not ok or np.any(np.abs(xi) > 1 + tol):
            raise PointNotInElement(f"point {x} not in element {self.vertices.tolist()}")
        return np.clip(xi, -1 - tol, 1 + tol)

    def contains(self, x, tol=REFERENCE_TOL):
        xi, ok = inverse_map_many(self.vertices, np.asarray(x, dtype=float), tol)
        return bool(ok and np.all(np.abs(xi) <= 1 + tol))

    def face_endpoints(self, face):
        return self.vertices[face], self.vertices[(face + 1) % 4]

    def face_length(self, face):
        a, b = self.face_endpoints(face)
        return float(np.linalg.norm(b - a))

    def face_normal(self, face):
        a, b = self.face_endpoints(face)
        t = b - a
        return np.array([t[1], -t[0]]) / np.linalg.norm(t)

    def quadrature_data(self, ref):
        """Jacobians, determinants and face normals at the quadrature points."""
        J = self.jacobian(ref.quad_points)
        det = np.linalg.det(J)
        normals = np.stack([self.face_normal(f) for f in range(4)])
        return J, det, normals

    def edge_lengths(self):
        return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)

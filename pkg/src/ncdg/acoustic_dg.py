"""Semi-discrete nodal DG operator for the acoustic conservation equations.

    rho du/dt + grad p = 0,    (1/c^2) dp/dt + rho div u = F

Weak form per element (test functions w, q)::

    (w, du/dt)  = (1/rho) (div w, p)      - (1/rho) <w.n, p*>
    (q, dp/dt)  = rho c^2 (grad q, u)     - rho c^2 <q n, u*>  + c^2 (q, F)

State vectors are flat: ``y = [p (E*n), u_x (E*n), u_y (E*n)]`` with ``n``
nodal coefficients per element.
"""

from dataclasses import dataclass, field

import numpy as np

from .mesh import BOUNDARY, INTERIOR, NCI, Admittance, BoundarySpec, MeshConfigurationError, \
    PressureDirichlet, VelocityDirichlet
from .reference_element import jacobians, map_points, reference_element


class NonFiniteStateError(FloatingPointError):
    def __init__(self, element, step=None, stage=None):
        self.element = element
        self.step = step
        self.stage = stage
        where = f" at step {step}" if step is not None else ""
        where += f", stage {stage}" if stage is not None else ""
        super().__init__(f"non-finite state in element {element}{where}")


# fluxes --------------------------------------------------------------------

def _dot(u, n):
    return u[..., 0] * n[..., 0] + u[..., 1] * n[..., 1]


def lax_friedrichs_flux(p_m, u_m, p_p, u_p, tau, gamma, n):
    """Lax-Friedrichs flux; all arguments broadcast over leading axes.

    ``p* = {p} + tau/2 (u- - u+).n``,  ``u* = {u} + gamma/2 (p- - p+) n``
    """
    p_m, p_p = np.asarray(p_m, dtype=float), np.asarray(p_p, dtype=float)
    u_m, u_p, n = (np.asarray(a, dtype=float) for a in (u_m, u_p, n))
    tau, gamma = np.asarray(tau, dtype=float), np.asarray(gamma, dtype=float)
    p_star = 0.5 * (p_m + p_p) + 0.5 * tau * _dot(u_m - u_p, n)
    u_star = 0.5 * (u_m + u_p) + (0.5 * gamma * (p_m - p_p))[..., None] * n
    return p_star, u_star


def ldg_nci_flux(p_m, u_m, p_p, u_p, tau_m, tau_p, gamma_m, gamma_p, n):
    """Material-weighted upwind flux used on non-conforming interfaces.

    Reduces to :func:`lax_friedrichs_flux` for equal impedances.
    """
    p_m, p_p = np.asarray(p_m, dtype=float), np.asarray(p_p, dtype=float)
    u_m, u_p, n = (np.asarray(a, dtype=float) for a in (u_m, u_p, n))
    tau_m, tau_p = np.asarray(tau_m, dtype=float), np.asarray(tau_p, dtype=float)
    gamma_m, gamma_p = np.asarray(gamma_m, dtype=float), np.asarray(gamma_p, dtype=float)
    ts, gs = tau_m + tau_p, gamma_m + gamma_p
    p_star = p_m - tau_m / ts * (p_m - p_p) + tau_m * tau_p / ts * _dot(u_m - u_p, n)
    u_star = (u_m - (gamma_m / gs)[..., None] * (u_m - u_p)
              + (gamma_m * gamma_p / gs * (p_m - p_p))[..., None] * n)
    return p_star, u_star


def mirror_exterior_state(condition, p_m, u_m, n, x, t, material):
    """Ghost trace ``(p+, u+)`` imposing a boundary condition by mirroring."""
    p_m = np.asarray(p_m, dtype=float)
    u_m, n = np.asarray(u_m, dtype=float), np.asarray(n, dtype=float)
    if isinstance(condition, PressureDirichlet):
        g = condition.value(np.atleast_2d(x), t).reshape(p_m.shape)
        return -p_m + 2.0 * g, u_m.copy()
    if isinstance(condition, VelocityDirichlet):
        g = condition.value(np.atleast_2d(x), t).reshape(u_m.shape)
        return p_m.copy(), -u_m + 2.0 * g
    if isinstance(condition, Admittance):
        un = 2.0 * condition.Y / (material.rho * material.c) * p_m - _dot(u_m, n)
        return p_m.copy(), un[..., None] * n
    raise MeshConfigurationError(f"unknown boundary condition {condition!r}")


# state ---------------------------------------------------------------------

@dataclass
class FieldState:
    """Nodal coefficients ``p (E, n)`` and ``u (E, 2, n)`` at time ``t``."""

    p: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.p.shape[0], 2, self.p.shape[1]):
            raise ValueError(f"u shape {self.u.shape} incompatible with p shape {self.p.shape}")

    @classmethod
    def zeros(cls, n_elements, n_nodes, t=0.0):
        return cls(np.zeros((n_elements, n_nodes)), np.zeros((n_elements, 2, n_nodes)), t)

    @classmethod
    def from_vector(cls, y, n_elements, n_nodes, t=0.0):
        En = n_elements * n_nodes
        y = np.asarray(y)
        p = y[:En].reshape(n_elements, n_nodes)
        u = np.stack([y[En:2 * En].reshape(n_elements, n_nodes),
                      y[2 * En:].reshape(n_elements, n_nodes)], axis=1)
        return cls(p.copy(), u, t)

    def to_vector(self):
        return np.concatenate([self.p.ravel(), self.u[:, 0].ravel(), self.u[:, 1].ravel()])

    def copy(self):
        return FieldState(self.p.copy(), self.u.copy(), self.t)

    def check_finite(self):
        bad = ~(np.isfinite(self.p).all(axis=1) & np.isfinite(self.u).all(axis=(1, 2)))
        if bad.any():
            raise NonFiniteStateError(int(np.flatnonzero(bad)[0]))


# discretization ------------------------------------------------------------

@dataclass
class _BoundaryGroup:
    condition: object
    index: np.ndarray       # flat face-point indices
    x: np.ndarray
    normal: np.ndarray
    material: object


@dataclass
class Discretization:
    """Precomputed DG operator on a mesh.

    Parameters
    ----------
    mesh : Mesh
    degree : polynomial degree k >= 1
    boundary : BoundarySpec; defaults to homogeneous pressure Dirichlet
    coupling : "mortar", "p2p" or a prebuilt NciMap; required when the mesh
        has NCI faces
    source : callable ``F(x, t)`` for the mass equation, or None
    """

    mesh: object
    degree: int
    boundary: BoundarySpec = None
    coupling: object = "mortar"
    source: object = None
    nci_map: object = field(init=False, default=None)

    def __post_init__(self):
        from .nci_coupling import NciOperator, build_mortar_map, build_p2p_map

        mesh, k = self.mesh, self.degree
        if self.boundary is None:
            self.boundary = BoundarySpec({"*": PressureDirichlet()})
        ref = self.ref = reference_element(k)
        E, n, n1 = mesh.n_elements, ref.n_nodes, k + 1
        self.n_elements, self.n_nodes, self.n_face_points = E, n, n1

        rho = np.array([mesh.material_of(e).rho for e in range(E)])
        c = np.array([mesh.material_of(e).c for e in range(E)])
        self.rho, self.c = rho, c
        self.tau, self.gamma = rho * c, 1.0 / (rho * c)
        self.rho_c2 = rho * c ** 2

        # volume geometry
        v = mesh.vertices
        self.node_x = map_points(v[:, None], ref.nodes[None])
        self.quad_x = map_points(v[:, None], ref.quad_points[None])
        J = jacobians(v[:, None], ref.quad_points[None])
        det = np.linalg.det(J)
        if np.any(det <= 0):
            raise MeshConfigurationError("non-positive Jacobian at a quadrature point")
        Jinv = np.linalg.inv(J)
        self.quad_w = ref.quad_weights[None] * det  # (E, nq)
        V, G = ref.shape_values, ref.shape_gradients
        grad = np.einsum("qij,eqjd->eqid", G, Jinv)  # physical gradients (E, nq, n, 2)
        M = np.einsum("qi,eq,qj->eij", V, self.quad_w, V)
        self.mass = M
        self.mass_inv = np.linalg.inv(M)
        D = np.einsum("eqid,eq,qj->deij", grad, self.quad_w, V)
        K = self.mass_inv[None] @ D  # (2, E, n, n)
        self._K_u = np.concatenate([K[0], K[1]], axis=1) / rho[:, None, None]      # (E, 2n, n)
        self._K_p = np.concatenate([K[0], K[1]], axis=2) * self.rho_c2[:, None, None]  # (E, n, 2n)
        self._source_lift = self.mass_inv @ (V.T[None] * self.quad_w[:, None, :])  # (E, n, nq)

        # faces
        L = mesh.face_lengths()
        normals = mesh.face_normals()
        self._F = ref.face_shape_values.reshape(4 * n1, n)
        wf = (ref.quad_weights_1d[None, None, :] * 0.5 * L[:, :, None]).reshape(E, 4 * n1)
        self._lift = self.mass_inv @ (self._F.T[None] * wf[:, None, :])  # (E, n, 4 n1)
        self.face_weights = wf
        self.face_normal = np.repeat(normals, n1, axis=1)  # (E, 4 n1, 2)
        a, b = mesh.face_endpoints()
        s = ref.quad_points_1d
        t01 = 0.5 * (s + 1.0)
        self.face_x = (a[:, :, None] + t01[None, None, :, None] * (b - a)[:, :, None]).reshape(E, 4 * n1, 2)

        kind = np.repeat(mesh.face_kind, n1, axis=1).ravel()
        elem = np.repeat(np.arange(E), 4 * n1)
        self._standard = kind != NCI
        idx = np.arange(E * 4 * n1)
        conf = idx[kind == INTERIOR]
        ce, rem = np.divmod(conf, 4 * n1)
        cf, cq = np.divmod(rem, n1)
        ne = mesh.neighbor[ce, cf]
        nf = mesh.neighbor_face[ce, cf]
        self._conf_idx = conf
        self._conf_plus = ne * 4 * n1 + nf * n1 + (n1 - 1 - cq)
        pts_m = self.face_x.reshape(-1, 2)[conf]
        pts_p = self.face_x.reshape(-1, 2)[self._conf_plus]
        scale = max(1.0, np.ptp(v[..., 0]), np.ptp(v[..., 1]))
        if len(conf) and np.max(np.abs(pts_m - pts_p)) > 1e-10 * scale:
            raise MeshConfigurationError("conforming face quadrature points do not coincide")
        mixed = self.tau[ce] != self.tau[ne]
        self._conf_mixed = np.flatnonzero(mixed)
        self._tau_pt = self.tau[elem]
        self._gamma_pt = self.gamma[elem]
        self._tau_plus_conf = self.tau[ne]
        self._gamma_plus_conf = self.gamma[ne]

        self._bgroups = []
        bidx = idx[kind == BOUNDARY]
        if len(bidx):
            be, rem = np.divmod(bidx, 4 * n1)
            bf = rem // n1
            tags = mesh.boundary_tag[be, bf]
            groups = {}
            for i, (tag, e) in enumerate(zip(tags, be)):
                cond = self.boundary.condition(tag)
                key = (id(cond), int(mesh.regions[e]))
                groups.setdefault(key, (cond, mesh.material_of(e), []))[2].append(i)
            for cond, mat, members in groups.values():
                members = np.asarray(members)
                gi = bidx[members]
                self._bgroups.append(_BoundaryGroup(
                    cond, gi, self.face_x.reshape(-1, 2)[gi], self.face_normal.reshape(-1, 2)[gi], mat))

        self.nci = None
        if (mesh.face_kind == NCI).any():
            cp = self.coupling
            if isinstance(cp, str):
                if cp == "mortar":
                    cp = build_mortar_map(mesh, k)
                elif cp == "p2p":
                    cp = build_p2p_map(mesh, k)
                else:
                    raise MeshConfigurationError(f"unknown coupling scheme {cp!r}")
            elif cp is None:
                raise MeshConfigurationError("mesh has NCI faces but no coupling scheme was given")
            self.nci_map = cp
            self.nci = NciOperator(cp, self)

    # ------------------------------------------------------------------

    @property
    def n_dofs(self):
        return 3 * self.n_elements * self.n_nodes

    def zero_state(self, t=0.0):
        return FieldState.zeros(self.n_elements, self.n_nodes, t)

    def interpolate(self, p_fn=None, u_fn=None, t=0.0):
        """Nodal interpolant of ``p_fn(x, t)`` and ``u_fn(x, t)``."""
        x = self.node_x.reshape(-1, 2)
        st = self.zero_state(t)
        if p_fn is not None:
            st.p = np.asarray(p_fn(x, t), dtype=float).reshape(st.p.shape)
        if u_fn is not None:
            uu = np.asarray(u_fn(x, t), dtype=float).reshape(self.n_elements, self.n_nodes, 2)
            st.u = np.ascontiguousarray(uu.transpose(0, 2, 1))
        return st

    def project(self, p_fn=None, u_fn=None, t=0.0):
        """L2 projection onto the element spaces (volume rule quadrature)."""
        x = self.quad_x.reshape(-1, 2)
        P = self.mass_inv @ (self.ref.shape_values.T[None] * self.quad_w[:, None, :])
        st = self.zero_state(t)
        nq = self.quad_x.shape[1]
        if p_fn is not None:
            f = np.asarray(p_fn(x, t), dtype=float).reshape(self.n_elements, nq)
            st.p = np.einsum("eiq,eq->ei", P, f)
        if u_fn is not None:
            f = np.asarray(u_fn(x, t), dtype=float).reshape(self.n_elements, nq, 2)
            st.u = np.einsum("eiq,eqd->edi", P, f)
        return st

    def rhs(self, t, y):
        """Time derivative of the flat state vector ``y``."""
        E, n = self.n_elements, self.n_nodes
        En = E * n
        p = y[:En].reshape(E, n)
        ux = y[En:2 * En].reshape(E, n)
        uy = y[2 * En:].reshape(E, n)
        u = np.concatenate([ux, uy], axis=1)

        pf = (p @ self._F.T).ravel()
        uf = np.stack([(ux @ self._F.T).ravel(), (uy @ self._F.T).ravel()], axis=-1)
        nrm = self.face_normal.reshape(-1, 2)

        pp = pf.copy()
        up = uf.copy()
        ci = self._conf_idx
        pp[ci] = pf[self._conf_plus]
        up[ci] = uf[self._conf_plus]
        for g in self._bgroups:
            pp[g.index], up[g.index] = mirror_exterior_state(
                g.condition, pf[g.index], uf[g.index], g.normal, g.x, t, g.material)

        p_star, u_star = lax_friedrichs_flux(pf, uf, pp, up, self._tau_pt, self._gamma_pt, nrm)
        if len(self._conf_mixed):
            m = self._conf_mixed
            i = ci[m]
            p_star[i], u_star[i] = ldg_nci_flux(
                pf[i], uf[i], pp[i], up[i], self._tau_pt[i], self._tau_plus_conf[m],
                self._gamma_pt[i], self._gamma_plus_conf[m], nrm[i])
        std = self._standard
        g = np.empty((pf.size, 3))
        g[:, 0] = nrm[:, 0] * p_star
        g[:, 1] = nrm[:, 1] * p_star
        g[:, 2] = _dot(u_star, nrm)
        g[~std] = 0.0
        face = self._lift @ g.reshape(E, -1, 3)  # (E, n, 3)

        dy = np.empty_like(y)
        du = (self._K_u @ p[:, :, None])[:, :, 0]  # (E, 2n)
        du[:, :n] -= face[:, :, 0] / self.rho[:, None]
        du[:, n:] -= face[:, :, 1] / self.rho[:, None]
        dp = (self._K_p @ u[:, :, None])[:, :, 0]
        dp -= face[:, :, 2] * self.rho_c2[:, None]
        if self.nci is not None:
            ru_x, ru_y, rp = self.nci.residual(y, t)
            du[:, :n] -= ru_x
            du[:, n:] -= ru_y
            dp -= rp
        if self.source is not None:
            f = np.asarray(self.source(self.quad_x.reshape(-1, 2), t), dtype=float)
            f = f.reshape(E, -1) * (self.c ** 2)[:, None]
            dp += (self._source_lift @ f[:, :, None])[:, :, 0]
        dy[:En] = dp.ravel()
        dy[En:2 * En] = du[:, :n].ravel()
        dy[2 * En:] = du[:, n:].ravel()
        return dy

    def apply_operator(self, state):
        """Rate ``d/dt (p, u)`` of a :class:`FieldState` as a FieldState."""
        state.check_finite()
        dy = self.rhs(state.t, state.to_vector())
        return FieldState.from_vector(dy, self.n_elements, self.n_nodes, state.t)

    def energy_from_vector(self, y, elements=None):
        """Discrete sound energy using the (exact) mass matrices."""
        st = FieldState.from_vector(y, self.n_elements, self.n_nodes)
        return self.energy(st, elements)

    def energy(self, state, elements=None):
        sel = slice(None) if elements is None else elements
        M = self.mass[sel]
        p, u = state.p[sel], state.u[sel]
        ep = np.einsum("ei,eij,ej->e", p, M, p) / self.rho_c2[sel]
        eu = np.einsum("edi,eij,edj->e", u, M, u) * self.rho[sel]
        return 0.5 * float(np.sum(ep + eu))

    def energy_rate(self, y, t=0.0):
        """``dE/dt`` of the semi-discrete system at state ``y``."""
        E, n = self.n_elements, self.n_nodes
        dy = self.rhs(t, y)
        a = FieldState.from_vector(y, E, n)
        b = FieldState.from_vector(dy, E, n)
        ep = np.einsum("ei,eij,ej->e", a.p, self.mass, b.p) / self.rho_c2
        eu = np.einsum("edi,eij,edj->e", a.u, self.mass, b.u) * self.rho
        return float(np.sum(ep + eu))


def apply_operator(disc, state):
    return disc.apply_operator(state)

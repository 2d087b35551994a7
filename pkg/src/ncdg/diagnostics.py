"""Reference solutions, error norms, sound energy, convergence rates and probes.

All diagnostic integrals use an over-integration rule with ``k + 3`` Gauss
points per direction, since they involve squares of degree-k fields and
non-polynomial exact solutions.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .reference_element import gauss_legendre_rule, jacobians, map_points, shape_eval_many

SQRT2 = np.sqrt(2.0)
GLOBAL, INNER, OUTER = "global", "inner", "outer"
SERIES_COLUMNS = ("t", "E", "eps_p_global", "eps_u_global", "eps_p_inner", "eps_u_inner",
                  "eps_p_outer", "eps_u_outer")


def membrane_exact(M, x, t):
    """Standing membrane mode with ``M`` half-waves per unit length (rho = c = 1).

    Returns ``p`` with shape ``x.shape[:-1]`` and ``u`` with shape ``x.shape``.
    """
    x = np.asarray(x, dtype=float)
    w = M * SQRT2 * np.pi * t
    sx, sy = np.sin(M * np.pi * x[..., 0]), np.sin(M * np.pi * x[..., 1])
    cx, cy = np.cos(M * np.pi * x[..., 0]), np.cos(M * np.pi * x[..., 1])
    p = np.cos(w) * sx * sy
    amp = -np.sin(w) / SQRT2
    u = np.stack([amp * cx * sy, amp * sx * cy], axis=-1)
    return p, u


def membrane_fields(M):
    """``(p_fn, u_fn)`` callables of the membrane mode for ``Discretization``."""
    return (lambda x, t: membrane_exact(M, x, t)[0]), (lambda x, t: membrane_exact(M, x, t)[1])


def transmission_coefficients(rho1, c1, rho2, c2):
    """Normal-incidence pressure reflection and transmission ``(R, T)``."""
    if min(rho1, c1, rho2, c2) <= 0:
        raise ValueError("materials must be positive")
    z1, z2 = rho1 * c1, rho2 * c2
    return (z2 - z1) / (z2 + z1), 2 * z2 / (z2 + z1)


def observed_order(errors, h_values):
    """``log2`` of successive error ratios; ``h`` must halve each time."""
    errors = np.asarray(errors, dtype=float)
    h = np.asarray(h_values, dtype=float)
    if len(errors) < 2 or len(errors) != len(h):
        raise ValueError("need at least two (error, h) samples of equal length")
    ratio = h[:-1] / h[1:]
    if not np.allclose(ratio, 2.0, rtol=1e-9):
        raise ValueError(f"h must decrease by a factor of 2 per sample, got ratios {ratio.tolist()}")
    return np.log2(errors[:-1] / errors[1:])


def region_elements(mesh, selector):
    """Element ids of ``"global"``, a region name, or a region id."""
    if selector is None or selector == GLOBAL:
        return np.arange(mesh.n_elements)
    rid = selector if isinstance(selector, (int, np.integer)) else mesh.region_id(selector)
    sel = np.flatnonzero(mesh.regions == rid)
    if len(sel) == 0:
        raise ValueError(f"region {selector!r} has no elements")
    return sel


class OverIntegration:
    """Per-element ``k + 3`` point tensor Gauss rule for a discretization."""

    def __init__(self, disc, extra=2):
        k = disc.degree
        g, w = gauss_legendre_rule(k + 1 + extra)
        xi = np.stack(np.meshgrid(g, g, indexing="xy"), -1).reshape(-1, 2)
        wq = np.outer(w, w).ravel()
        v = disc.mesh.vertices
        self.x = map_points(v[:, None], xi[None])
        det = np.linalg.det(jacobians(v[:, None], xi[None]))
        self.w = wq[None] * det
        self.V, _ = shape_eval_many(k, xi)

    def fields(self, state):
        """State values ``p (E, nq)`` and ``u (E, nq, 2)`` at the points."""
        p = state.p @ self.V.T
        u = np.einsum("edi,qi->eqd", state.u, self.V)
        return p, u


def _rule(disc):
    rule = getattr(disc, "_over_integration", None)
    if rule is None:
        rule = disc._over_integration = OverIntegration(disc)
    return rule


def l2_relative_error(disc, state, exact, region=None, field="p"):
    """Relative L2 error of pressure (``field="p"``) or velocity (``"u"``).

    ``exact(x, t)`` returns ``(p, u)`` at points ``x``.
    """
    rule = _rule(disc)
    sel = region_elements(disc.mesh, region)
    ph, uh = rule.fields(state)
    pa, ua = exact(rule.x[sel], state.t)
    w = rule.w[sel]
    if field == "p":
        num = np.sum(w * (ph[sel] - pa) ** 2)
        den = np.sum(w * pa ** 2)
    elif field == "u":
        num = np.sum(w[..., None] * (uh[sel] - ua) ** 2)
        den = np.sum(w[..., None] * ua ** 2)
    else:
        raise ValueError(f"field must be 'p' or 'u', not {field!r}")
    if den <= 0:
        raise ZeroDivisionError("exact field has zero L2 norm on the selected region")
    return float(np.sqrt(num / den))


def sound_energy(disc, state, region=None):
    """Sound energy of a discrete state over a region (J)."""
    rule = _rule(disc)
    sel = region_elements(disc.mesh, region)
    p, u = rule.fields(state)
    density = (p[sel] ** 2 / (2 * disc.rho_c2[sel, None])
               + 0.5 * disc.rho[sel, None] * np.sum(u[sel] ** 2, axis=-1))
    return float(np.sum(rule.w[sel] * density))


def field_energy(disc, exact, t=0.0, region=None):
    """Sound energy of analytic fields ``exact(x, t) -> (p, u)`` on the mesh."""
    rule = _rule(disc)
    sel = region_elements(disc.mesh, region)
    p, u = exact(rule.x[sel], t)
    density = (p ** 2 / (2 * disc.rho_c2[sel, None])
               + 0.5 * disc.rho[sel, None] * np.sum(u ** 2, axis=-1))
    return float(np.sum(rule.w[sel] * density))


def line_probe(disc, state, points):
    """Pressure at arbitrary points, averaged over all containing elements.

    Returns ``(values, found)``; points outside the mesh give ``nan`` and
    ``found = False``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    values = np.full(len(points), np.nan)
    found = np.zeros(len(points), dtype=bool)
    mesh = disc.mesh
    for i, x in enumerate(points):
        hits = mesh.locate_point(x)
        if not hits:
            continue
        acc = 0.0
        for e, xi in hits:
            V, _ = shape_eval_many(disc.degree, xi[None])
            acc += float(V[0] @ state.p[e])
        values[i] = acc / len(hits)
        found[i] = True
    return values, found


def write_probe_csv(path, points, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x1", "x2", "p"])
        for x, v in zip(points, values):
            w.writerow([repr(float(x[0])), repr(float(x[1])), "" if np.isnan(v) else repr(float(v))])


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    eps_p: dict = field(default_factory=dict)
    eps_u: dict = field(default_factory=dict)

    def row(self):
        out = [repr(float(self.t)), repr(float(self.E))]
        for reg in (GLOBAL, INNER, OUTER):
            for d in (self.eps_p, self.eps_u):
                out.append(repr(float(d[reg])) if reg in d else "")
        return out


class Recorder:
    """Collects energy (and optionally error) records during a run.

    Used as the time-integration callback; ``exact`` enables errors per
    region in ``regions``.
    """

    def __init__(self, disc, exact=None, regions=(GLOBAL,)):
        self.disc = disc
        self.exact = exact
        self.regions = [r for r in regions if r == GLOBAL or r in disc.mesh.region_names.values()]
        self.records = []

    def __call__(self, step, t, y):
        from .acoustic_dg import FieldState

        st = FieldState.from_vector(y, self.disc.n_elements, self.disc.n_nodes, t)
        rec = DiagnosticsRecord(t, sound_energy(self.disc, st))
        if self.exact is not None:
            for reg in self.regions:
                rec.eps_p[reg] = l2_relative_error(self.disc, st, self.exact, reg, "p")
                rec.eps_u[reg] = l2_relative_error(self.disc, st, self.exact, reg, "u")
        self.records.append(rec)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SERIES_COLUMNS)
            for rec in self.records:
                w.writerow(rec.row())

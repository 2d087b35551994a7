"""Scenario drivers: membrane convergence, NCI instability, overlap/overset,
heterogeneous transmission and the conforming-equivalence check.

Every driver takes a :class:`RunConfig` and an optional output directory;
with a directory it writes CSV results plus the resolved ``config.ini``.
"""

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acoustic_dg import Discretization, FieldState, NonFiniteStateError
from .config import BoundaryConfig, ConfigError, MaterialConfig, ProbeConfig, RunConfig
from .diagnostics import (GLOBAL, INNER, OUTER, l2_relative_error, line_probe,
                          membrane_exact, observed_order, sound_energy, transmission_coefficients,
                          write_probe_csv)
from .mesh import (Admittance, BoundarySpec, Material, PressureDirichlet, VelocityDirichlet,
                   build_embedded_rect_mesh, build_overlap_mesh, build_overset_mesh,
                   build_two_region_mesh, refine_uniform)
from .time_integration import cfl_timestep, get_scheme, integrate

log = logging.getLogger(__name__)

OUTPUT_ENV = "NCDG_OUTPUT_DIR"


class NumericalBlowUp(RuntimeError):
    def __init__(self, t, reason):
        super().__init__(f"blow-up at t={t:.6g}: {reason}")
        self.t = t
        self.reason = reason


# defaults -----------------------------------------------------------------

def _membrane_materials():
    return {"outer": MaterialConfig(), "inner": MaterialConfig()}


def default_config(scenario):
    """Default configuration of a scenario (desk-scaled where noted)."""
    zero_dirichlet = {"*": BoundaryConfig("pressure")}
    if scenario == "membrane-convergence":
        # reference setup: M = 30 on (0, 0.1)^2 with h = 1/60 | 1/90 and t = 1 s;
        # desk-scaled by 5 in space to M = 6
        return RunConfig(
            scenario, degrees=(1, 2, 3), refinements=(0, 1, 2, 3), end_time=0.25, modes=6,
            cadence=10 ** 9, mesh={"extent": (0.0, 0.0, 0.5, 0.5),
                                   "hole": (1 / 6, 1 / 6, 1 / 3, 1 / 3),
                                   "h_outer": 1 / 12, "h_inner": 1 / 18},
            materials=_membrane_materials(), boundaries=zero_dirichlet,
            output_dir="output/membrane-convergence").validate()
    if scenario == "instability":
        # 13 inner against 7 outer faces per side of the hole
        return RunConfig(
            scenario, degrees=(3,), end_time=2.0, modes=120, cadence=50,
            couplings=("mortar", "p2p"),
            mesh={"extent": (0.0, 0.0, 0.1, 0.1), "hole": (1 / 30, 1 / 30, 2 / 30, 2 / 30),
                  "h_outer": 1 / 210, "h_inner": 1 / 390},
            materials=_membrane_materials(), boundaries=zero_dirichlet,
            options={"blowup_factor": "100"}, output_dir="output/instability").validate()
    if scenario == "overlap":
        return RunConfig(
            scenario, degrees=(1, 2, 3, 4), end_time=1.0, modes=5, cadence=10 ** 9,
            mesh={"extent": (0.0, 0.0, 0.1, 0.1), "center": (0.05, 0.05), "radius": 0.025,
                  "overlap": 2e-3, "n_quarter": 4.0, "n_layers": 2.0, "outer_subdivision": 2.0,
                  "outer_layers": 4.0, "h_background": 0.01},
            materials=_membrane_materials(),
            boundaries={"*": BoundaryConfig("pressure", "exact")},
            options={"variants": "overlap, overset"}, output_dir="output/overlap").validate()
    if scenario == "heterogeneous":
        return RunConfig(
            scenario, degrees=(3,), end_time=0.2, cadence=10 ** 9,
            mesh={"extent": (-1.0, -1.0, 1.0, 1.0), "split_x": 0.0, "h_left": 1 / 60,
                  "h_right": 1 / 20, "pulse_sharpness": 1e4},
            materials={"left": MaterialConfig(1.0, 1.0), "right": MaterialConfig(1.0, 3.0)},
            boundaries=zero_dirichlet,
            probes={"axis": ProbeConfig((-1.0, 0.0), (1.0, 0.0), 1000)},
            options={"references": "fine, coarse", "initial": "project", "pulse_center": "0, 0",
                     "plane_wave": "yes", "plane_width": "0.05", "plane_start": "-0.4",
                     "plane_height": "0.2", "plane_end_time": "0.65"},
            output_dir="output/heterogeneous").validate()
    if scenario == "conforming-check":
        return RunConfig(
            scenario, degrees=(3,), end_time=1.0, modes=30, cadence=10 ** 9,
            mesh={"extent": (0.0, 0.0, 0.1, 0.1), "hole": (1 / 30, 1 / 30, 2 / 30, 2 / 30),
                  "h_outer": 1 / 60, "h_inner": 1 / 60, "steps": 100.0},
            materials=_membrane_materials(), boundaries=zero_dirichlet,
            output_dir="output/conforming-check").validate()
    raise ConfigError(f"unknown scenario {scenario!r}")


# building blocks -----------------------------------------------------------

def output_directory(cfg, output=None):
    """Resolve the output directory: argument, then env var, then config."""
    path = output or os.environ.get(OUTPUT_ENV) or cfg.output_dir
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def materials_for(cfg, mesh_region_names):
    cfg.require_materials(mesh_region_names.values())
    return {rid: Material(cfg.materials[name].rho, cfg.materials[name].c)
            for rid, name in mesh_region_names.items()}


def boundary_spec(cfg, exact=None):
    """BoundarySpec from the config; ``exact(x, t) -> (p, u)`` feeds ``data = exact``."""
    spec = {}
    for tag, b in cfg.boundaries.items():
        if b.data == "exact" and exact is None and b.kind != "admittance":
            raise ConfigError(f"boundary {tag!r} asks for exact data but the scenario has none")
        if b.kind == "pressure":
            g = (lambda x, t: exact(x, t)[0]) if b.data == "exact" else None
            spec[tag] = PressureDirichlet(g)
        elif b.kind == "velocity":
            g = (lambda x, t: exact(x, t)[1]) if b.data == "exact" else None
            spec[tag] = VelocityDirichlet(g)
        else:
            spec[tag] = Admittance(b.admittance)
    if "*" not in spec and not {"left", "right", "bottom", "top"} <= spec.keys():
        raise ConfigError("boundary conditions must cover all four sides or define '*'")
    return BoundarySpec(spec)


def _mesh_int(cfg, key):
    return int(round(cfg.mesh[key]))


def embedded_rect_mesh(cfg, r=0, conforming=False):
    m = cfg.mesh
    base = build_embedded_rect_mesh(m["extent"], m["hole"], m["h_outer"], m["h_inner"],
                                    conforming=conforming)
    base.materials = materials_for(cfg, base.region_names)
    return refine_uniform(base, r)


def membrane_initial(disc, M, how="interpolate"):
    p_fn = lambda x, t: membrane_exact(M, x, t)[0]  # noqa: E731
    u_fn = lambda x, t: membrane_exact(M, x, t)[1]  # noqa: E731
    return getattr(disc, how)(p_fn, u_fn, 0.0)


def march(disc, state, t_end, cfg, callback=None, every=None, energy_limit=None):
    """Advance ``state`` to ``t_end`` at the configured CFL step.

    ``energy_limit`` aborts with :class:`NumericalBlowUp` when the sound energy
    exceeds it at a cadence point.  Returns ``(state, n_steps)``.
    """
    dt = cfl_timestep(disc.mesh, disc.degree, cfg.courant)
    every = every or cfg.cadence

    def monitor(step, t, y):
        if callback is not None:
            callback(step, t, y)
        if energy_limit is not None:
            E = disc.energy_from_vector(y)
            if not math.isfinite(E) or E > energy_limit:
                raise NumericalBlowUp(t, f"energy {E:.6g} above {energy_limit:.6g}")

    try:
        t, y, n = integrate(disc.rhs, state.to_vector(), state.t, t_end, dt,
                            get_scheme(cfg.scheme), monitor, every, disc.n_elements)
    except NonFiniteStateError as exc:
        raise NumericalBlowUp(float("nan"), str(exc)) from exc
    return FieldState.from_vector(y, disc.n_elements, disc.n_nodes, t), n


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating))
                                              else v) for v in row])


def dump_field(state, disc, path):
    """One row per nodal point: ``element,region,x1,x2,p,u1,u2``."""
    mesh = disc.mesh
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["element", "region", "x1", "x2", "p", "u1", "u2"])
            for e in range(disc.n_elements):
                reg = int(mesh.regions[e])
                for i in range(disc.n_nodes):
                    x = disc.node_x[e, i]
                    w.writerow([e, reg, repr(float(x[0])), repr(float(x[1])),
                                repr(float(state.p[e, i])), repr(float(state.u[e, 0, i])),
                                repr(float(state.u[e, 1, i]))])
    except OSError as exc:
        raise OSError(f"cannot write field dump {path}: {exc}") from exc


def load_field(path, disc, t=0.0):
    """Read a :func:`dump_field` CSV back into a FieldState."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    E, n = disc.n_elements, disc.n_nodes
    if len(data) != E * n:
        raise ValueError(f"{path}: expected {E * n} rows, found {len(data)}")
    st = FieldState.zeros(E, n, t)
    st.p = data[:, 4].reshape(E, n)
    st.u = np.stack([data[:, 5].reshape(E, n), data[:, 6].reshape(E, n)], axis=1)
    return st


def _save_config(cfg, out):
    if out is not None:
        cfg.save(out / "config.ini")


# membrane convergence ------------------------------------------------------

@dataclass
class ConvergenceResult:
    rows: list = field(default_factory=list)   # dicts per (k, r)
    rates: dict = field(default_factory=dict)  # (k, region, "p"|"u") -> rates

    def errors(self, k, region, fld):
        return [row[f"eps_{fld}_{region}"] for row in self.rows if row["k"] == k]

    def failed(self):
        return [row for row in self.rows if row["status"] != "ok"]


def membrane_errors(disc, state, M, regions=(GLOBAL, INNER, OUTER)):
    exact = lambda x, t: membrane_exact(M, x, t)  # noqa: E731
    out = {}
    for reg in regions:
        for fld in ("p", "u"):
            out[f"eps_{fld}_{reg}"] = l2_relative_error(disc, state, exact, reg, fld)
    return out


def run_membrane_convergence(cfg, output=None):
    M = cfg.modes
    exact = lambda x, t: membrane_exact(M, x, t)  # noqa: E731
    res = ConvergenceResult()
    out = output_directory(cfg, output) if output is not None else None
    for k in cfg.degrees:
        for r in cfg.refinements:
            mesh = embedded_rect_mesh(cfg, r)
            disc = Discretization(mesh, k, boundary_spec(cfg, exact), cfg.couplings[0])
            row = {"k": k, "r": r, "h_outer": cfg.mesh["h_outer"] / 2 ** r,
                   "h_inner": cfg.mesh["h_inner"] / 2 ** r, "elements": mesh.n_elements,
                   "status": "ok"}
            try:
                state, _ = march(disc, membrane_initial(disc, M), cfg.end_time, cfg,
                                 energy_limit=1e3 * disc.energy(membrane_initial(disc, M)))
                row.update(membrane_errors(disc, state, M))
            except NumericalBlowUp as exc:
                row["status"] = str(exc)
            log.info("membrane k=%d r=%d: %s", k, r, row)
            res.rows.append(row)
    for k in cfg.degrees:
        hs = [row["h_outer"] for row in res.rows if row["k"] == k]
        for reg in (GLOBAL, INNER, OUTER):
            for fld in ("p", "u"):
                errs = res.errors(k, reg, fld)
                if len(errs) >= 2 and all(e is not None for e in errs):
                    res.rates[k, reg, fld] = observed_order(errs, hs).tolist()
    if out is not None:
        cols = [f"eps_{f}_{g}" for g in (GLOBAL, INNER, OUTER) for f in ("p", "u")]
        _write_rows(out / "convergence.csv", ["k", "r", "h_outer", "h_inner", "elements"] + cols
                    + ["status"], [[row["k"], row["r"], row["h_outer"], row["h_inner"],
                                    row["elements"]] + [row.get(c) for c in cols] + [row["status"]]
                                   for row in res.rows])
        _write_rows(out / "rates.csv", ["k", "region", "field", "interval", "rate"],
                    [[k, reg, fld, i, rate] for (k, reg, fld), rates in res.rates.items()
                     for i, rate in enumerate(rates)])
        _save_config(cfg, out)
    return res


# instability ---------------------------------------------------------------

@dataclass
class EnergyHistory:
    coupling: str
    k: int
    times: list
    energies: list
    blowup_time: float = None

    @property
    def E0(self):
        return self.energies[0]

    def ratios(self):
        return np.asarray(self.energies) / self.E0

    def max_deviation(self):
        return float(np.max(np.abs(self.ratios() - 1.0)))

    def first_exceed(self, factor):
        idx = np.flatnonzero(self.ratios() > factor)
        return float(self.times[idx[0]]) if len(idx) else None


def energy_history(cfg, coupling, k, mesh=None, end_time=None):
    """Sound energy over time of the membrane on the instability mesh."""
    M = cfg.modes
    mesh = mesh or embedded_rect_mesh(cfg)
    disc = Discretization(mesh, k, boundary_spec(cfg), coupling)
    state = membrane_initial(disc, M, cfg.option("initial", "interpolate"))
    times, energies = [], []

    def record(step, t, y):
        times.append(t)
        energies.append(sound_energy(disc, FieldState.from_vector(y, disc.n_elements,
                                                                   disc.n_nodes, t)))

    factor = float(cfg.option("blowup_factor", 100))
    hist = EnergyHistory(coupling, k, times, energies)
    try:
        march(disc, state, end_time or cfg.end_time, cfg, record,
              energy_limit=factor * disc.energy(state))
    except NumericalBlowUp as exc:
        hist.blowup_time = exc.t
        log.info("%s k=%d: %s", coupling, k, exc)
    return hist


def run_instability_study(cfg, output=None):
    out = output_directory(cfg, output) if output is not None else None
    mesh = embedded_rect_mesh(cfg)
    results = []
    for coupling in cfg.couplings:
        for k in cfg.degrees:
            hist = energy_history(cfg, coupling, k, mesh)
            results.append(hist)
            if out is not None:
                _write_rows(out / f"energy_{coupling}_k{k}.csv", ["t", "E"],
                            zip(hist.times, hist.energies))
    if out is not None:
        _write_rows(out / "instability_summary.csv",
                    ["coupling", "k", "E0", "E_final_ratio", "max_ratio", "t_exceed_10", "status"],
                    [[h.coupling, h.k, h.E0, float(h.ratios()[-1]), float(h.ratios().max()),
                      h.first_exceed(10.0),
                      "ok" if h.blowup_time is None else f"blow-up at t={h.blowup_time:.6g}"]
                     for h in results])
        _save_config(cfg, out)
    return results


# overlap / overset ---------------------------------------------------------

def overlap_meshes(cfg):
    m = cfg.mesh
    variants = {}
    names = [v.strip() for v in cfg.option("variants", "overlap, overset").split(",")]
    for name in names:
        if name == "overlap":
            mesh = build_overlap_mesh(m["extent"], m["center"], m["radius"], m["overlap"],
                                      _mesh_int(cfg, "n_quarter"), _mesh_int(cfg, "n_layers"),
                                      _mesh_int(cfg, "outer_subdivision"),
                                      _mesh_int(cfg, "outer_layers"))
        elif name == "flush":
            mesh = build_overlap_mesh(m["extent"], m["center"], m["radius"], 0.0,
                                      _mesh_int(cfg, "n_quarter"), _mesh_int(cfg, "n_layers"),
                                      _mesh_int(cfg, "outer_subdivision"),
                                      _mesh_int(cfg, "outer_layers"))
        elif name == "overset":
            mesh = build_overset_mesh(m["extent"], m["center"], m["radius"], m["h_background"],
                                      _mesh_int(cfg, "n_quarter"), _mesh_int(cfg, "n_layers"))
        else:
            raise ConfigError(f"unknown overlap variant {name!r}")
        mesh.materials = materials_for(cfg, mesh.region_names)
        variants[name] = mesh
    return variants


def run_overlap_study(cfg, output=None):
    """Membrane with exact Dirichlet data on overlapping and overset meshes."""
    out = output_directory(cfg, output) if output is not None else None
    M = cfg.modes
    exact = lambda x, t: membrane_exact(M, x, t)  # noqa: E731
    rows = []
    for name, mesh in overlap_meshes(cfg).items():
        for k in cfg.degrees:
            disc = Discretization(mesh, k, boundary_spec(cfg, exact), cfg.couplings[0])
            row = {"variant": name, "k": k, "elements": mesh.n_elements, "dofs": disc.n_dofs,
                   "status": "ok", "eps_p": None, "eps_u": None, "eps": None}
            state = membrane_initial(disc, M)
            try:
                state, _ = march(disc, state, cfg.end_time, cfg,
                                 energy_limit=1e3 * max(disc.energy(state), 1e-300))
                row["eps_p"] = l2_relative_error(disc, state, exact, GLOBAL, "p")
                row["eps_u"] = l2_relative_error(disc, state, exact, GLOBAL, "u")
                row["eps"] = row["eps_p"] + row["eps_u"]
            except NumericalBlowUp as exc:
                row["status"] = str(exc)
            log.info("overlap %s", row)
            rows.append(row)
    if out is not None:
        keys = ["variant", "k", "elements", "dofs", "eps_p", "eps_u", "eps", "status"]
        _write_rows(out / "overlap.csv", keys, [[row[c] for c in keys] for row in rows])
        _save_config(cfg, out)
    return rows


# heterogeneous transmission ------------------------------------------------

@dataclass
class HeterogeneousResult:
    probe_points: np.ndarray
    probes: dict           # mesh variant -> pressure samples
    dofs: dict
    max_deviation: float = None        # NCI vs fine, relative to the fine peak
    coarse_deviation: float = None
    dof_reduction: float = None
    measured_R: float = None
    measured_T: float = None
    expected_R: float = None
    expected_T: float = None


def _probe_points(cfg):
    p = cfg.probes.get("axis") or next(iter(cfg.probes.values()))
    s = np.linspace(0.0, 1.0, p.points)[:, None]
    a, b = np.asarray(p.start), np.asarray(p.end)
    return a + s * (b - a)


def two_region_mesh(cfg, h_left, h_right, extent=None):
    m = cfg.mesh
    mesh = build_two_region_mesh(extent or m["extent"], m["split_x"], h_left, h_right)
    mesh.materials = materials_for(cfg, mesh.region_names)
    return mesh


def pulse_run(cfg, mesh, k):
    """Gaussian pressure pulse at the origin marched to the end time."""
    a = cfg.mesh["pulse_sharpness"]
    center = np.array([float(v) for v in cfg.option("pulse_center", "0, 0").split(",")])
    disc = Discretization(mesh, k, boundary_spec(cfg), cfg.couplings[0])
    p0 = lambda x, t: np.exp(-a * np.sum((x - center) ** 2, axis=-1))  # noqa: E731
    state = getattr(disc, cfg.option("initial", "project"))(p0, None, 0.0)
    state, _ = march(disc, state, cfg.end_time, cfg, energy_limit=1e3 * disc.energy(state))
    return disc, state


def plane_wave_coefficients(cfg, k):
    """Reflection/transmission of a planar pulse hitting the interface.

    A strip with rigid top/bottom walls keeps the wave exactly planar; the
    pulse starts left of the interface travelling right.
    """
    m = cfg.mesh
    x0, _, x1, _ = m["extent"]
    height = float(cfg.option("plane_height", 0.2))
    width = float(cfg.option("plane_width", 0.05))
    start = float(cfg.option("plane_start", -0.4))
    t_end = float(cfg.option("plane_end_time", 0.65))
    mesh = two_region_mesh(cfg, m["h_left"], m["h_right"],
                           (x0, -height / 2, x1, height / 2))
    left, right = cfg.materials["left"], cfg.materials["right"]
    bnd = BoundarySpec({"top": Admittance(0.0), "bottom": Admittance(0.0),
                        "left": Admittance(1.0), "right": Admittance(1.0)})
    disc = Discretization(mesh, k, bnd, cfg.couplings[0])
    shape = lambda x: np.exp(-((x[..., 0] - start) / width) ** 2)  # noqa: E731
    p0 = lambda x, t: shape(x)  # noqa: E731
    u0 = lambda x, t: np.stack([shape(x) / (left.rho * left.c), 0 * x[..., 0]], -1)  # noqa: E731
    state = disc.project(p0, u0, 0.0)
    state, _ = march(disc, state, t_end, cfg, energy_limit=1e3 * disc.energy(state))
    xs = np.linspace(x0, x1, 2001)
    pts = np.stack([xs, np.zeros_like(xs)], -1)
    p, _ = line_probe(disc, state, pts)
    split = m["split_x"]
    incident = 1.0
    reflected = p[xs < split]
    transmitted = p[xs > split]
    R = reflected[np.argmax(np.abs(reflected))] / incident
    T = transmitted[np.argmax(np.abs(transmitted))] / incident
    return float(R), float(T), transmission_coefficients(left.rho, left.c, right.rho, right.c)


def run_heterogeneous_application(cfg, output=None):
    out = output_directory(cfg, output) if output is not None else None
    m = cfg.mesh
    k = cfg.degrees[0]
    pts = _probe_points(cfg)
    variants = {"nci": (m["h_left"], m["h_right"])}
    refs = [r.strip() for r in cfg.option("references", "fine, coarse").split(",") if r.strip()]
    if "fine" in refs:
        variants["fine"] = (m["h_left"], m["h_left"])
    if "coarse" in refs:
        variants["coarse"] = (m["h_right"], m["h_right"])
    res = HeterogeneousResult(pts, {}, {})
    for name, (hl, hr) in variants.items():
        mesh = two_region_mesh(cfg, hl, hr)
        disc, state = pulse_run(cfg, mesh, k)
        res.dofs[name] = disc.n_dofs
        res.probes[name], _ = line_probe(disc, state, pts)
        log.info("heterogeneous %s: %d dofs", name, disc.n_dofs)
        if out is not None:
            write_probe_csv(out / f"probe_{name}.csv", pts, res.probes[name])
            dump_field(state, disc, out / f"field_{name}.csv")
    if "fine" in res.probes:
        peak = np.nanmax(np.abs(res.probes["fine"]))
        res.max_deviation = float(np.nanmax(np.abs(res.probes["nci"] - res.probes["fine"])) / peak)
        res.dof_reduction = 1.0 - res.dofs["nci"] / res.dofs["fine"]
        if "coarse" in res.probes:
            res.coarse_deviation = float(
                np.nanmax(np.abs(res.probes["coarse"] - res.probes["fine"])) / peak)
    if cfg.option("plane_wave", "yes").lower() in ("yes", "true", "1"):
        res.measured_R, res.measured_T, (res.expected_R, res.expected_T) = \
            plane_wave_coefficients(cfg, k)
    if out is not None:
        _write_rows(out / "summary.csv", ["quantity", "value"], [
            ["dofs_" + n, d] for n, d in res.dofs.items()] + [
            ["dof_reduction", res.dof_reduction], ["max_deviation_nci_vs_fine", res.max_deviation],
            ["max_deviation_coarse_vs_fine", res.coarse_deviation],
            ["R_measured", res.measured_R], ["R_expected", res.expected_R],
            ["T_measured", res.measured_T], ["T_expected", res.expected_T]])
        _save_config(cfg, out)
    return res


# conforming equivalence ----------------------------------------------------

def run_conforming_check(cfg, output=None):
    """Max-norm difference between mortar-coupled and conforming runs on a
    mesh whose interface happens to match."""
    out = output_directory(cfg, output) if output is not None else None
    k = cfg.degrees[0]
    steps = int(round(cfg.mesh.get("steps", 100)))
    M = cfg.modes
    results = {}
    for name, conforming in (("conforming", True), ("mortar", False)):
        mesh = embedded_rect_mesh(cfg, conforming=conforming)
        disc = Discretization(mesh, k, boundary_spec(cfg), "mortar")
        state = membrane_initial(disc, M)
        dt = cfl_timestep(mesh, k, cfg.courant)
        _, y, _ = integrate(disc.rhs, state.to_vector(), 0.0, steps * dt, dt, get_scheme(cfg.scheme),
                            n_elements=disc.n_elements)
        results[name] = y
    diff = float(np.max(np.abs(results["mortar"] - results["conforming"])))
    if out is not None:
        _write_rows(out / "conforming_check.csv", ["steps", "k", "max_abs_difference"],
                    [[steps, k, diff]])
        _save_config(cfg, out)
    return diff


RUNNERS = {
    "membrane-convergence": run_membrane_convergence,
    "instability": run_instability_study,
    "overlap": run_overlap_study,
    "heterogeneous": run_heterogeneous_application,
    "conforming-check": run_conforming_check,
}


def run_scenario(cfg, output=None):
    return RUNNERS[cfg.scenario](cfg, output)

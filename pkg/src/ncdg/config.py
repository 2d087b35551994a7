"""Run configuration: typed dataclass backed by an INI file.

Layout::

    [run]
    scenario = membrane-convergence
    degree = 1, 2, 3
    ...
    [mesh]
    h_outer = 0.0833333
    [material outer]
    rho = 1.0
    c = 1.0
    [boundary *]
    kind = pressure
    [probe axis]
    start = -1, 0
    end = 1, 0
    points = 1000
    [options]
    initial = project

Overrides use ``section.key=value`` (``run`` is the default section), e.g.
``degree=2`` or ``material.inner.c=3``.
"""

import configparser
import io
from dataclasses import dataclass, field, fields, replace

SCENARIOS = ("membrane-convergence", "instability", "overlap", "heterogeneous", "conforming-check")
SCHEMES = ("rkc84", "rk4")
COUPLINGS = ("mortar", "p2p")
BOUNDARY_KINDS = ("pressure", "velocity", "admittance")
BOUNDARY_TAGS = ("left", "right", "bottom", "top", "*")


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _names(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _fmt(value):
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class MaterialConfig:
    rho: float = 1.0
    c: float = 1.0


@dataclass(frozen=True)
class BoundaryConfig:
    kind: str = "pressure"
    # "zero" or "exact" (analytic membrane data) for Dirichlet kinds
    data: str = "zero"
    admittance: float = 0.0


@dataclass(frozen=True)
class ProbeConfig:
    start: tuple = (0.0, 0.0)
    end: tuple = (1.0, 0.0)
    points: int = 1000


_RUN_KEYS = {
    "scenario": str, "degree": _ints, "refinement": _ints, "courant": float,
    "end_time": float, "scheme": str, "coupling": _names, "modes": int, "cadence": int,
    "threads": int, "output_dir": str,
}
_FIELD_OF = {"degree": "degrees", "refinement": "refinements", "coupling": "couplings"}


@dataclass
class RunConfig:
    scenario: str
    degrees: tuple = (3,)
    refinements: tuple = (0,)
    courant: float = 0.2
    end_time: float = 1.0
    scheme: str = "rkc84"
    couplings: tuple = ("mortar",)
    modes: int = 30
    cadence: int = 100
    threads: int = 1
    output_dir: str = "output"
    mesh: dict = field(default_factory=dict)
    materials: dict = field(default_factory=dict)
    boundaries: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    # validation ------------------------------------------------------------

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if not self.degrees or min(self.degrees) < 1:
            raise ConfigError("degree must be >= 1")
        if min(self.refinements, default=0) < 0:
            raise ConfigError("refinement must be >= 0")
        if self.end_time <= 0:
            raise ConfigError("end_time must be positive")
        if self.courant <= 0:
            raise ConfigError("courant must be positive")
        if self.cadence < 1:
            raise ConfigError("cadence must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        for cp in self.couplings:
            if cp not in COUPLINGS:
                raise ConfigError(f"unknown coupling {cp!r}; choose from {COUPLINGS}")
        for tag, b in self.boundaries.items():
            if tag not in BOUNDARY_TAGS:
                raise ConfigError(f"unknown boundary tag {tag!r}; choose from {BOUNDARY_TAGS}")
            if b.kind not in BOUNDARY_KINDS:
                raise ConfigError(f"unknown boundary kind {b.kind!r} for {tag!r}")
            if b.data not in ("zero", "exact"):
                raise ConfigError(f"boundary data must be 'zero' or 'exact', got {b.data!r}")
        for name, m in self.materials.items():
            if m.rho <= 0 or m.c <= 0:
                raise ConfigError(f"material {name!r} must have positive rho and c")
        for name, p in self.probes.items():
            if p.points < 1 or len(p.start) != 2 or len(p.end) != 2:
                raise ConfigError(f"probe {name!r} needs 2D start/end and points >= 1")
        return self

    def require_materials(self, region_names):
        missing = [r for r in region_names if r not in self.materials]
        if missing:
            raise ConfigError(f"no material defined for regions {missing}")

    # INI -------------------------------------------------------------------

    @classmethod
    def from_parser(cls, cp):
        if not cp.has_section("run"):
            raise ConfigError("missing [run] section")
        kw = {}
        try:
            for key, value in cp.items("run"):
                if key not in _RUN_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [run]")
                kw[_FIELD_OF.get(key, key)] = _RUN_KEYS[key](value)
            if "scenario" not in kw:
                raise ConfigError("[run] needs a scenario")
            cfg = cls(**kw)
            for sec in cp.sections():
                kind, _, name = sec.partition(" ")
                items = dict(cp.items(sec))
                if kind == "mesh":
                    cfg.mesh = {k: _floats(v) if "," in v else float(v) for k, v in items.items()}
                elif kind == "material":
                    cfg.materials[name] = MaterialConfig(float(items.get("rho", 1.0)),
                                                         float(items.get("c", 1.0)))
                elif kind == "boundary":
                    cfg.boundaries[name] = BoundaryConfig(items.get("kind", "pressure"),
                                                          items.get("data", "zero"),
                                                          float(items.get("admittance", 0.0)))
                elif kind == "probe":
                    cfg.probes[name] = ProbeConfig(_floats(items.get("start", "0, 0")),
                                                   _floats(items.get("end", "1, 0")),
                                                   int(items.get("points", 1000)))
                elif kind == "options":
                    cfg.options = items
                elif kind != "run":
                    raise ConfigError(f"unknown section [{sec}]")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        return cfg.validate()

    @classmethod
    def from_string(cls, text):
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        return cls.from_parser(cp)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_string(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_parser(self):
        cp = configparser.ConfigParser(interpolation=None)
        cp["run"] = {
            "scenario": self.scenario, "degree": _fmt(self.degrees),
            "refinement": _fmt(self.refinements), "courant": _fmt(self.courant),
            "end_time": _fmt(self.end_time), "scheme": self.scheme,
            "coupling": _fmt(self.couplings), "modes": str(self.modes),
            "cadence": str(self.cadence), "threads": str(self.threads),
            "output_dir": self.output_dir,
        }
        if self.mesh:
            cp["mesh"] = {k: _fmt(v) for k, v in self.mesh.items()}
        for name, m in self.materials.items():
            cp[f"material {name}"] = {"rho": _fmt(m.rho), "c": _fmt(m.c)}
        for tag, b in self.boundaries.items():
            cp[f"boundary {tag}"] = {"kind": b.kind, "data": b.data, "admittance": _fmt(b.admittance)}
        for name, p in self.probes.items():
            cp[f"probe {name}"] = {"start": _fmt(p.start), "end": _fmt(p.end), "points": str(p.points)}
        if self.options:
            cp["options"] = dict(self.options)
        return cp

    def to_string(self):
        buf = io.StringIO()
        self.to_parser().write(buf)
        return buf.getvalue()

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_string())

    # overrides -------------------------------------------------------------

    def with_overrides(self, overrides):
        """Copy with ``section.key=value`` strings applied."""
        cp = self.to_parser()
        for item in overrides or ():
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, value = (s.strip() for s in item.split("=", 1))
            parts = key.split(".")
            if len(parts) == 1:
                section, opt = "run", parts[0]
            elif len(parts) == 2:
                section, opt = parts
            else:
                section, opt = f"{parts[0]} {'.'.join(parts[1:-1])}", parts[-1]
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, opt, value)
        return type(self).from_parser(cp)

    def option(self, key, default=None):
        return self.options.get(key, default)

    def copy(self, **changes):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ("mesh", "materials", "boundaries", "probes", "options"):
            data[key] = dict(data[key])
        return replace(type(self)(**data), **changes)

"""Scenario files: strict JSON with documented defaults.

Every section is optional except ``kind``. Unknown keys are errors, and every
error names the offending field as a dotted path.
"""
from __future__ import annotations

import copy
import itertools
import json
import math
from dataclasses import asdict, dataclass, field, replace

KINDS = ("capacity", "imcf", "penrose", "sweep")
SURFACES = ("cap", "perturbed_cap", "profile_csv")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ConeCfg:
    n: int = 3
    theta0_deg: float = 90.0


@dataclass(frozen=True)
class SurfaceCfg:
    type: str = "cap"
    r: float = 1.0
    eps: float = 0.0
    mode: int = 2
    path: str | None = None


@dataclass(frozen=True)
class GridCfg:
    m_theta: int = 128
    m_s: int = 256
    s_max: float | None = None  # None: max u + 4


@dataclass(frozen=True)
class FlowCfg:
    t_end: float = 6.0
    dt: float = 1e-3


@dataclass(frozen=True)
class SchwarzschildCfg:
    mass: float = 2.0
    factor_mass: float | None = None  # None: same as mass


@dataclass(frozen=True)
class TolCfg:
    slack: float = 1e-6  # absolute, added to the solver error estimate
    relative: float = 1e-2  # mass inequalities, relative to m
    admissible: float = 1e-5  # pointwise R_g / H_g checks
    h_slack: float = 1e-8  # per-sample h monotonicity


@dataclass(frozen=True)
class SweepCfg:
    kind: str = "capacity"
    vary: dict = field(default_factory=dict)  # dotted field -> list of values
    workers: int = 2


@dataclass(frozen=True)
class Scenario:
    kind: str
    cone: ConeCfg = ConeCfg()
    surface: SurfaceCfg = SurfaceCfg()
    grid: GridCfg = GridCfg()
    flow: FlowCfg = FlowCfg()
    schwarzschild: SchwarzschildCfg = SchwarzschildCfg()
    tolerances: TolCfg = TolCfg()
    sweep: SweepCfg | None = None
    output: str = "run"
    write_field_csv: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def scaled(self, k: float) -> "Scenario":
        """Both resolutions multiplied by ``k`` (m_theta kept even)."""
        if k == 1:
            return self
        g = self.grid
        m_theta = max(4, int(round(g.m_theta * k / 2)) * 2)
        return replace(self, grid=replace(g, m_theta=m_theta, m_s=max(4, int(round(g.m_s * k)))))


_SECTIONS = {
    "cone": ConeCfg,
    "surface": SurfaceCfg,
    "grid": GridCfg,
    "flow": FlowCfg,
    "schwarzschild": SchwarzschildCfg,
    "tolerances": TolCfg,
    "sweep": SweepCfg,
}

_TYPES = {
    "n": int, "theta0_deg": float, "type": str, "r": float, "eps": float, "mode": int,
    "path": str, "m_theta": int, "m_s": int, "s_max": float, "t_end": float, "dt": float,
    "mass": float, "factor_mass": float, "slack": float, "relative": float, "admissible": float,
    "h_slack": float, "kind": str, "vary": dict, "workers": int,
}
_NULLABLE = {"path", "s_max", "factor_mass"}


def _coerce(path: str, key: str, value):
    want = _TYPES[key]
    if value is None:
        if key in _NULLABLE:
            return None
        raise ConfigError(f"{path}: must not be null")
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {json.dumps(value)}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{path}: expected an integer, got {json.dumps(value)}")
        return int(value)
    if not isinstance(value, want):
        raise ConfigError(f"{path}: expected {want.__name__}, got {json.dumps(value)}")
    return value


def _section(name: str, raw) -> object:
    cls = _SECTIONS[name]
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f for f in cls.__dataclass_fields__}
    for k in raw:
        if k not in known:
            raise ConfigError(f"{name}.{k}: unknown key (allowed: {', '.join(sorted(known))})")
    return cls(**{k: _coerce(f"{name}.{k}", k, v) for k, v in raw.items()})


def _validate(sc: Scenario) -> None:
    c, s, g, f, t = sc.cone, sc.surface, sc.grid, sc.flow, sc.tolerances
    if c.n < 3:
        raise ConfigError(f"cone.n: dimension must be >= 3, got {c.n}")
    if not 0 < c.theta0_deg <= 90:
        raise ConfigError(f"cone.theta0_deg: the cone must be convex, half-angle in (0, 90], got {c.theta0_deg}")
    if s.type not in SURFACES:
        raise ConfigError(f"surface.type: expected one of {SURFACES}, got {s.type!r}")
    if not s.r > 0:
        raise ConfigError(f"surface.r: must be positive, got {s.r}")
    if s.type == "perturbed_cap":
        if not abs(s.eps) < 0.5:
            raise ConfigError(f"surface.eps: perturbation bound |eps| < 0.5 violated, got {s.eps}")
        if s.mode % 2 or s.mode < 0:
            raise ConfigError(f"surface.mode: Legendre mode must be even and >= 0, got {s.mode}")
    if s.type == "profile_csv" and not s.path:
        raise ConfigError("surface.path: required for profile_csv surfaces")
    if g.m_theta < 8 or g.m_theta % 2:
        raise ConfigError(f"grid.m_theta: must be even and >= 8, got {g.m_theta}")
    if g.m_s < 8:
        raise ConfigError(f"grid.m_s: must be >= 8, got {g.m_s}")
    if not f.t_end > 0:
        raise ConfigError(f"flow.t_end: must be positive, got {f.t_end}")
    if not f.dt > 0:
        raise ConfigError(f"flow.dt: must be positive, got {f.dt}")
    if not sc.schwarzschild.mass > 0:
        raise ConfigError(f"schwarzschild.mass: must be positive, got {sc.schwarzschild.mass}")
    fm = sc.schwarzschild.factor_mass
    if fm is not None and not fm > 0:
        raise ConfigError(f"schwarzschild.factor_mass: must be positive, got {fm}")
    for k in ("slack", "relative", "admissible", "h_slack"):
        if not getattr(t, k) >= 0:
            raise ConfigError(f"tolerances.{k}: must be non-negative")
    if sc.kind == "penrose" and c.theta0_deg != 90:
        raise ConfigError("cone.theta0_deg: penrose scenarios live on the half-space (90)")
    if sc.kind == "sweep":
        sw = sc.sweep
        if sw is None or not sw.vary:
            raise ConfigError("sweep.vary: a sweep needs at least one parameter list")
        if sw.kind not in ("capacity", "imcf", "penrose"):
            raise ConfigError(f"sweep.kind: expected capacity, imcf or penrose, got {sw.kind!r}")
        if sw.workers < 1:
            raise ConfigError(f"sweep.workers: must be >= 1, got {sw.workers}")
        for key, vals in sw.vary.items():
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"sweep.vary.{key}: expected a non-empty list")
            parts = key.split(".")
            if len(parts) != 2 or parts[0] not in _SECTIONS or parts[0] == "sweep":
                raise ConfigError(f"sweep.vary.{key}: expected 'section.field'")
            if parts[1] not in _SECTIONS[parts[0]].__dataclass_fields__:
                raise ConfigError(f"sweep.vary.{key}: unknown field")
    elif sc.sweep is not None:
        raise ConfigError("sweep: only allowed when kind is 'sweep'")


def from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    top = set(Scenario.__dataclass_fields__)
    for k in raw:
        if k not in top:
            raise ConfigError(f"{k}: unknown key (allowed: {', '.join(sorted(top))})")
    if "kind" not in raw:
        raise ConfigError("kind: required (one of capacity, imcf, penrose, sweep)")
    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {KINDS}, got {kind!r}")
    kw = {"kind": kind}
    for name in _SECTIONS:
        if name in raw and not (name == "sweep" and raw[name] is None):
            kw[name] = _section(name, raw[name])
    if "output" in raw:
        if not isinstance(raw["output"], str) or not raw["output"]:
            raise ConfigError("output: expected a non-empty path prefix")
        kw["output"] = raw["output"]
    if "write_field_csv" in raw:
        if not isinstance(raw["write_field_csv"], bool):
            raise ConfigError("write_field_csv: expected true or false")
        kw["write_field_csv"] = raw["write_field_csv"]
    sc = Scenario(**kw)
    _validate(sc)
    return sc


def parse_config(text: str) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(raw)


def expand_sweep(sc: Scenario) -> list[tuple[dict, Scenario]]:
    """Cross product of the listed values, as ``(parameters, scenario)`` pairs."""
    base = sc.to_dict()
    base.pop("sweep")
    base["kind"] = sc.sweep.kind
    keys = sorted(sc.sweep.vary)
    out = []
    for combo in itertools.product(*(sc.sweep.vary[k] for k in keys)):
        raw = copy.deepcopy(base)
        for key, val in zip(keys, combo):
            sec, fld = key.split(".")
            raw[sec][fld] = val
        try:
            point = from_dict(raw)
        except ConfigError as exc:
            raise ConfigError(f"sweep point {dict(zip(keys, combo))}: {exc}") from None
        out.append((dict(zip(keys, combo)), point))
    return out

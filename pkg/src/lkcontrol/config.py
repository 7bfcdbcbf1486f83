"""JSON run configuration.

    {
      "T": 1.0,
      "x0": {"times": [0, 1], "values": [0, 0.1]},
      "xs": [{"times": [0, 1], "re": [0, 0.2], "im": [0, 0]}, ...],
      "truncation": 12,                         # optional, pads xs with zero paths
      "decay_ratio": 0.5,                       # optional
      "omega": {"form": "linear", "rate": 0.2}, # or {"form": "table", ...}
      "N": 12, "grid": 512, "refinement": 64, "composition_cap": 12,
      "methods": ["recurrence", "compositions", "picard", "stepper"],
      "seed": 0
    }

Only T, x0 and xs are required.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .control import COMPOSITION_CAP, ControlError, ControlFunction
from .drivers import DriverError, DriverFamily, make_piecewise_linear, zero_path

METHODS = ("recurrence", "compositions", "picard", "stepper")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family: DriverFamily
    omega: ControlFunction | None = None
    N: int = 12
    grid: int = 512
    refinement: int = 64
    composition_cap: int = 12
    methods: tuple[str, ...] = ("recurrence",)
    seed: int = 0
    n_max: int | None = None
    verify_grid: int = 64
    verify_refinement: int = 1024
    picard_iterations: int = 200
    residual_tol: float = 1e-6
    stepper_tol: float = 1e-6
    out: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def omega0T(self) -> float | None:
        if self.omega is None:
            return None
        return float(self.omega(0.0, self.family.T))


def _path(doc: dict, T: float, name: str, real: bool):
    try:
        times = [float(t) for t in doc["times"]]
        if real:
            values = [float(v) for v in doc["values"]]
        else:
            re = doc.get("re", doc.get("values"))
            im = doc.get("im", [0.0] * len(re))
            if len(re) != len(im):
                raise ConfigError(f"{name}: re and im lengths differ")
            values = [complex(float(a), float(b)) for a, b in zip(re, im)]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{name}: malformed path ({exc})") from exc
    if not math.isclose(times[-1], T):
        raise ConfigError(f"{name}: ends at {times[-1]}, expected T={T}")
    times[-1] = T
    return make_piecewise_linear(times, values)


def family_from_dict(doc: dict) -> DriverFamily:
    if "T" not in doc or "x0" not in doc:
        raise ConfigError("config needs 'T' and 'x0'")
    T = float(doc["T"])
    if not T > 0:
        raise ConfigError("T must be positive")
    x0 = _path(doc["x0"], T, "x0", real=True)
    xs = tuple(_path(p, T, f"x_{n}", real=False) for n, p in enumerate(doc.get("xs", []), start=1))
    M = doc.get("truncation", len(xs))
    if isinstance(M, bool) or not isinstance(M, int) or M < len(xs):
        raise ConfigError(f"truncation must be an integer >= {len(xs)} (the number of listed paths)")
    xs += tuple(zero_path(T) for _ in range(M - len(xs)))
    return DriverFamily(x0, xs, doc.get("decay_ratio"))


def family_to_dict(family: DriverFamily) -> dict:
    doc = {
        "T": family.T,
        "x0": {"times": family.x0.breakpoints.points.tolist(), "values": family.x0.values.real.tolist()},
        "xs": [
            {"times": p.breakpoints.points.tolist(), "re": p.values.real.tolist(), "im": p.values.imag.tolist()}
            for p in family.xs
        ],
    }
    if family.decay_ratio is not None:
        doc["decay_ratio"] = family.decay_ratio
    return doc


def _positive_int(doc: dict, key: str, default: int) -> int:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{key} must be a positive integer, got {v!r}")
    return v


def config_from_dict(doc: dict) -> RunConfig:
    try:
        family = family_from_dict(doc)
        omega = ControlFunction.from_dict(doc["omega"]) if doc.get("omega") else None
    except (DriverError, ControlError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg = RunConfig(family=family, omega=omega)
    cfg.N = _positive_int(doc, "N", min(cfg.N, family.truncation_level) or 1)
    cfg.grid = _positive_int(doc, "grid", cfg.grid)
    cfg.refinement = _positive_int(doc, "refinement", cfg.refinement)
    cfg.composition_cap = _positive_int(doc, "composition_cap", cfg.composition_cap)
    cfg.verify_grid = _positive_int(doc, "verify_grid", cfg.verify_grid)
    cfg.verify_refinement = _positive_int(doc, "verify_refinement", cfg.verify_refinement)
    cfg.picard_iterations = _positive_int(doc, "picard_iterations", cfg.picard_iterations)
    if cfg.N > family.truncation_level:
        raise ConfigError(f"N={cfg.N} exceeds the number of driver paths M={family.truncation_level}")
    if cfg.composition_cap > COMPOSITION_CAP:
        raise ConfigError(f"composition_cap may not exceed {COMPOSITION_CAP}")
    n_max = doc.get("n_max")
    if n_max is not None:
        n_max = _positive_int(doc, "n_max", 1)
        if n_max > min(family.truncation_level, COMPOSITION_CAP):
            raise ConfigError(f"n_max={n_max} exceeds the truncation level or composition cap")
    cfg.n_max = n_max
    methods = tuple(doc.get("methods", ["recurrence"]))
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
    if "recurrence" not in methods:
        methods = ("recurrence",) + methods
    if "compositions" in methods and cfg.N > cfg.composition_cap:
        raise ConfigError(f"N={cfg.N} exceeds composition_cap={cfg.composition_cap}")
    cfg.methods = methods
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg.seed = seed
    for key in ("residual_tol", "stepper_tol"):
        if key in doc:
            v = float(doc[key])
            if not v > 0:
                raise ConfigError(f"{key} must be positive")
            setattr(cfg, key, v)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(doc)

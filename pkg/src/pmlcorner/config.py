"""Line-oriented ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Tuples are written as
whitespace- or comma-separated numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .damping import DampingKind, DampingProfile, make_profile
from .solver import RickerSpec, Scheme


class ConfigError(ValueError):
    pass


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"expected numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} numbers, got {len(vals)} in {text!r}")
    return vals


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return " ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def read_pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


# key -> (converter, attribute); tuple converters are applied on parse.
_CONVERTERS = {
    "scheme": Scheme,
    "r": int,
    "domain": lambda s: _floats(s, 4),
    "box": lambda s: _floats(s, 4),
    "pml_thickness": float,
    "damping": DampingKind,
    "sigma": float,
    "mu": float,
    "rho": float,
    "h": float,
    "dt": float,
    "steps": int,
    "T": float,
    "source_center": lambda s: _floats(s, 2),
    "source_f0": float,
    "source_ratio": float,
    "source_amplitude": float,
    "snapshot_stride": int,
    "fields": lambda s: tuple(s.replace(",", " ").split()),
    "threshold_factor": float,
    "window": int,
    "energies": _bool,
    "name": str,
    "h_values": lambda s: _floats(s),
    "sigma_values": lambda s: _floats(s),
    "max_steps": int,
    "workers": int,
    "n": int,
    "length": float,
    "width": float,
}


def _convert(key: str, value: str):
    try:
        return _CONVERTERS[key](value)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None


@dataclass(frozen=True)
class RunConfig:
    """One simulation. ``box``/``pml_thickness`` may be omitted for an undamped run."""

    domain: tuple[float, float, float, float]
    h: float
    dt: float
    steps: int | None = None
    T: float | None = None
    scheme: Scheme = Scheme.B
    r: int = 1
    box: tuple[float, float, float, float] | None = None
    pml_thickness: float | None = None
    damping: DampingKind = DampingKind.CONSTANT
    sigma: float = 0.0
    mu: float = 1.0
    rho: float = 1.0
    source_center: tuple[float, float] = (17.0, 17.0)
    source_f0: float = 1.0
    source_ratio: float = 0.5
    source_amplitude: float = 1.0
    snapshot_stride: int = 0
    fields: tuple[str, ...] = ("P",)
    threshold_factor: float = 10.0
    window: int = 50
    energies: bool = False
    name: str = "run"

    REQUIRED = ("domain", "h", "dt")

    def __post_init__(self):
        validate_geometry(self.domain, self.box, self.pml_thickness)
        for k in ("h", "dt", "mu", "rho", "source_f0", "source_ratio", "threshold_factor"):
            if not getattr(self, k) > 0:
                raise ConfigError(f"{k} must be positive")
        if self.steps is None and self.T is None:
            raise ConfigError("missing required key 'steps' (or 'T')")
        if self.steps is not None and self.steps < 0:
            raise ConfigError("steps must be nonnegative")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.sigma > 0 and self.box is None and self.pml_thickness is None:
            raise ConfigError("damping needs 'box' or 'pml_thickness'")
        if self.snapshot_stride < 0:
            raise ConfigError("snapshot_stride must be nonnegative")
        for f in self.fields:
            if f not in ("P", "Pstar"):
                raise ConfigError(f"unknown snapshot field {f!r} (use P or Pstar)")

    @property
    def n_steps(self) -> int:
        return self.steps if self.steps is not None else int(round(self.T / self.dt))

    @property
    def c(self) -> float:
        return math.sqrt(self.mu / self.rho)

    @property
    def source(self) -> RickerSpec:
        return RickerSpec(self.source_center, self.source_f0, self.source_ratio, self.source_amplitude)

    def profile(self) -> DampingProfile | None:
        box, L = resolve_box(self.domain, self.box, self.pml_thickness)
        if box is None:
            return None
        return make_profile(self.damping, self.sigma, box, L)


@dataclass(frozen=True)
class SweepConfig:
    domain: tuple[float, float, float, float]
    h_values: tuple[float, ...]
    sigma_values: tuple[float, ...] = (0.0,)
    scheme: Scheme = Scheme.B
    r: int = 1
    box: tuple[float, float, float, float] | None = None
    pml_thickness: float | None = None
    damping: DampingKind = DampingKind.CONSTANT
    mu: float = 1.0
    rho: float = 1.0
    source_center: tuple[float, float] = (17.0, 17.0)
    source_f0: float = 1.0
    source_ratio: float = 0.5
    source_amplitude: float = 1.0
    steps: int | None = None
    max_steps: int = 1000
    threshold_factor: float = 10.0
    window: int = 50
    workers: int = 1
    name: str = "sweep"

    REQUIRED = ("domain", "h_values")

    def __post_init__(self):
        validate_geometry(self.domain, self.box, self.pml_thickness)
        if not self.h_values or any(h <= 0 for h in self.h_values):
            raise ConfigError("h_values must be positive")
        if any(s < 0 for s in self.sigma_values):
            raise ConfigError("sigma_values must be nonnegative")
        if any(s > 0 for s in self.sigma_values) and self.box is None and self.pml_thickness is None:
            raise ConfigError("damping needs 'box' or 'pml_thickness'")

    @property
    def source(self) -> RickerSpec:
        return RickerSpec(self.source_center, self.source_f0, self.source_ratio, self.source_amplitude)


@dataclass(frozen=True)
class EigConfig:
    domain: tuple[float, float, float, float]
    h: float
    r: int = 1
    sigma: float = 0.0
    mu: float = 1.0
    rho: float = 1.0
    name: str = "eig"

    REQUIRED = ("domain", "h")

    def __post_init__(self):
        validate_geometry(self.domain, None, None)
        if self.h <= 0 or self.mu <= 0 or self.rho <= 0:
            raise ConfigError("h, mu and rho must be positive")


@dataclass(frozen=True)
class CornerConfig:
    dt: float
    n: int = 32
    length: float = 1.0
    sigma: float = 0.0
    T: float | None = None
    steps: int | None = None
    width: float = 0.1
    mu: float = 1.0
    rho: float = 1.0
    name: str = "corner"

    REQUIRED = ("dt",)

    def __post_init__(self):
        if self.dt <= 0 or self.n < 2 or self.length <= 0 or self.width <= 0:
            raise ConfigError("dt, length, width must be positive and n >= 2")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.T is None and self.steps is None:
            raise ConfigError("missing required key 'T' (or 'steps')")


def resolve_box(domain, box, L):
    """Fill in whichever of box / thickness is missing; ``(None, None)`` without a PML."""
    if box is None and L is None:
        return None, None
    x0, x1, y0, y1 = domain
    if box is None:
        box = (x0 + L, x1 - L, y0 + L, y1 - L)
    if L is None:
        L = box[0] - x0
    return tuple(box), L


def validate_geometry(domain, box, L) -> None:
    x0, x1, y0, y1 = domain
    if not (x1 > x0 and y1 > y0):
        raise ConfigError(f"empty or inverted domain {domain!r}")
    if box is None and L is None:
        return
    if L is not None and L <= 0:
        raise ConfigError("pml_thickness must be positive")
    box, L = resolve_box(domain, box, L)
    bx0, bx1, by0, by1 = box
    if not (bx1 > bx0 and by1 > by0):
        raise ConfigError(f"physical box {box!r} is empty")
    margins = (bx0 - x0, x1 - bx1, by0 - y0, y1 - by1)
    tol = 1e-9 * max(1.0, abs(L))
    if any(abs(m - L) > tol for m in margins):
        raise ConfigError(
            f"geometry error: margins {margins} between domain and box must all equal pml_thickness={L}"
        )


def _build(cls, text: str):
    pairs = read_pairs(text)
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(pairs) - names)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    for key in cls.REQUIRED:
        if key not in pairs:
            raise ConfigError(f"missing required key {key!r}")
    kwargs = {k: _convert(k, v) for k, v in pairs.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> RunConfig:
    """Parse a run configuration; defaults are scheme=B, r=1, damping=constant."""
    return _build(RunConfig, text)


def parse_sweep_config(text: str) -> SweepConfig:
    return _build(SweepConfig, text)


def parse_eig_config(text: str) -> EigConfig:
    return _build(EigConfig, text)


def parse_corner_config(text: str) -> CornerConfig:
    return _build(CornerConfig, text)


def serialize_config(cfg) -> str:
    """Inverse of the parsers: one ``key = value`` line per set field."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


REFERENCE_CONFIG = """\
# Corner-instability setup: Ricker pulse near the upper-right corner PML.
scheme = A
r = 1
domain = -2 20 -2 20
box = 0 18 0 18
pml_thickness = 2
damping = constant
sigma = 25
mu = 1
rho = 1
h = 0.5
dt = 0.2
steps = 100
source_center = 17 17
source_f0 = 1
source_ratio = 0.5
"""

"""Run configuration: parsing, validation and rendering.

Configuration text is one ``key=value`` per line with ``#`` comments.
Every key is validated against the schema below; unknown keys and
malformed values are rejected with the offending line number.  ``auto``
stands for a value resolved at run time (step sizes, grids).  Rendering
and parsing round-trip exactly.
"""

from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError

COMMANDS = ("steady", "stability-map", "spectrum", "simulate", "reproduce")
MODES = ("cavity", "travelling-wave", "tw")
FIGURES = tuple(f"fig{i}" for i in range(1, 9))


@dataclass
class RunConfig:
    """Everything a command needs, with validated invariants."""

    command: str = "steady"
    # physical parameters
    kappa: float = 0.01
    gamma1: float = 1.0
    gamma2: float = 1.0
    gamma3: float = 10.0
    eps1: complex = 0j
    eps2: complex = 0j
    # trajectory controls
    mode: str = "cavity"
    dt: float | None = None
    t_max: float | None = None
    sample_stride: int = 10
    # None = command-specific default (simulate: 10_000/1234; reproduce:
    # the preset's own scale and seed)
    n_traj: int | None = None
    seed: int | None = None
    alpha1_0: complex = 0j
    alpha2_0: complex = 0j
    alpha3_0: complex = 0j
    # frequency grid
    omega_min: float | None = None
    omega_max: float | None = None
    n_omega: int = 801
    # stability-map grid
    ratio_min: float = 1.0
    ratio_max: float = 20.0
    n_ratio: int = 20
    eps_max: float | None = None
    # artifacts
    reproduce: str | None = None
    output: str | None = None
    threads: int | None = None

    def __post_init__(self):
        # canonical types: rendering and parsing then round-trip exactly
        for name in ("eps1", "eps2", "alpha1_0", "alpha2_0", "alpha3_0"):
            setattr(self, name, complex(getattr(self, name)))
        for name in ("kappa", "gamma1", "gamma2", "gamma3", "ratio_min",
                     "ratio_max"):
            setattr(self, name, float(getattr(self, name)))
        for name in ("dt", "t_max", "omega_min", "omega_max", "eps_max"):
            val = getattr(self, name)
            if val is not None:
                setattr(self, name, float(val))

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not self.kappa > 0:
            raise ConfigError(f"invariant violated: kappa > 0 (got {self.kappa})")
        for name in ("gamma1", "gamma2", "gamma3"):
            if getattr(self, name) < 0:
                raise ConfigError(
                    f"invariant violated: {name} >= 0 (got {getattr(self, name)})")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"invariant violated: dt > 0 (got {self.dt})")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError(f"invariant violated: t_max > 0 (got {self.t_max})")
        if self.sample_stride < 1:
            raise ConfigError("invariant violated: sample_stride >= 1")
        if self.n_traj is not None and self.n_traj < 2:
            raise ConfigError("invariant violated: n_traj >= 2")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("invariant violated: seed must fit in 64 bits")
        if self.n_omega < 2:
            raise ConfigError("invariant violated: n_omega >= 2")
        if not 0 < self.ratio_min <= self.ratio_max:
            raise ConfigError("invariant violated: 0 < ratio_min <= ratio_max")
        if self.n_ratio < 1:
            raise ConfigError("invariant violated: n_ratio >= 1")
        if self.eps_max is not None and not self.eps_max > 0:
            raise ConfigError("invariant violated: eps_max > 0")
        if self.reproduce is not None and self.reproduce not in FIGURES:
            raise ConfigError(
                f"reproduce must be one of {FIGURES}, got {self.reproduce!r}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("invariant violated: threads >= 1")
        return self

    @property
    def canonical_mode(self):
        return "travelling-wave" if self.mode in ("tw", "travelling-wave") else "cavity"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key, text):
    text = text.strip()
    kind = _FIELD_TYPES[key]
    optional = "None" in str(kind)
    if optional and text.lower() in ("auto", "none"):
        return None
    try:
        if key in ("eps1", "eps2", "alpha1_0", "alpha2_0", "alpha3_0"):
            return complex(text.replace(" ", ""))
        if key in ("sample_stride", "n_traj", "seed", "n_omega", "n_ratio", "threads"):
            return int(text)
        if key in ("command", "mode", "reproduce", "output"):
            return text
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key}={text!r}: {exc}") from None


def parse_config(text) -> RunConfig:
    """Parse configuration text into a validated RunConfig.

    Later assignments override earlier ones; errors carry the offending
    line number.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key=value", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        try:
            values[key] = _parse_value(key, val)
        except ConfigError as exc:
            raise ConfigError(str(exc), line=lineno) from None
    cfg = RunConfig(**values)
    try:
        return cfg.validate()
    except ConfigError:
        raise


def _render_value(value):
    if value is None:
        return "auto"
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Deterministic textual form; parse(render(cfg)) == cfg."""
    lines = [f"{f.name}={_render_value(getattr(cfg, f.name))}"
             for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def system_params(cfg: RunConfig):
    from .params import SystemParams

    if cfg.canonical_mode == "travelling-wave" and cfg.command == "simulate":
        return SystemParams.travelling_wave(cfg.kappa)
    return SystemParams(
        kappa=cfg.kappa, gamma1=cfg.gamma1, gamma2=cfg.gamma2, gamma3=cfg.gamma3,
        eps1=cfg.eps1, eps2=cfg.eps2,
    )


def resolved_dt(cfg: RunConfig):
    """Step default: resolves the fastest linear rate by at least 1000."""
    if cfg.dt is not None:
        return cfg.dt
    if cfg.canonical_mode == "travelling-wave":
        return 5e-4
    fastest = max(cfg.gamma1, cfg.gamma2, cfg.gamma3, 1e-12)
    return 1e-3 / fastest


def resolved_t_max(cfg: RunConfig):
    if cfg.t_max is not None:
        return cfg.t_max
    if cfg.canonical_mode == "travelling-wave":
        return 8.0
    positive = [g for g in (cfg.gamma1, cfg.gamma2, cfg.gamma3) if g > 0]
    return 10.0 / min(positive) if positive else 10.0


def trajectory_config(cfg: RunConfig):
    from .trajectories import TrajectoryConfig

    return TrajectoryConfig(
        dt=resolved_dt(cfg),
        t_max=resolved_t_max(cfg),
        n_traj=10_000 if cfg.n_traj is None else cfg.n_traj,
        seed=1234 if cfg.seed is None else cfg.seed,
        sample_stride=cfg.sample_stride,
        mode=cfg.canonical_mode,
    )


def omega_grid(cfg: RunConfig):
    scale = cfg.gamma1 if cfg.gamma1 > 0 else 1.0
    lo = -20.0 * scale if cfg.omega_min is None else cfg.omega_min
    hi = 20.0 * scale if cfg.omega_max is None else cfg.omega_max
    if not lo < hi:
        raise ConfigError("omega_min must be below omega_max")
    return np.linspace(lo, hi, cfg.n_omega)

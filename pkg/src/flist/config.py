"""Run configuration from plain-text key=value files."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .forward import PhysParams
from .grids import ConfigurationError, RealGrid, SpectralGrid, is_power_of_two


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 1.0
    beta: float = 1.0
    sigma: int = -1
    x_min: float = -20.0
    x_max: float = 20.0
    n_x: int = 2048
    z_cut: float = 64.0
    z_ref: float = 2.0
    z_min_inner: float = 5e-3
    n_z: int = 1024
    solver_tol: float = 1e-6
    krylov_tol: float = 1e-12
    edge_tol: float = 1e-2
    roundtrip_tol: float = 1e-3
    profile: str = "gaussian"
    amplitude: float = 0.25
    width: float = 1.0
    center: float = 0.0
    path: str = ""
    times: tuple = (0.0,)
    x_switch: float = 0.0
    seed: int = 0
    taper: bool = True
    residual_dt: float = 1e-3
    residual_tol: float = 1e-2
    lipschitz_dirs: int = 10
    lipschitz_eps: float = 1e-3
    output: str = "."

    def __post_init__(self):
        for name in ("n_x", "n_z"):
            if not is_power_of_two(getattr(self, name)):
                raise ConfigurationError(f"{name} must be a power of two, got {getattr(self, name)}")
        if self.profile not in ("gaussian", "sech", "from-file"):
            raise ConfigurationError(f"unknown profile kind {self.profile!r}")
        if self.profile == "from-file" and not self.path:
            raise ConfigurationError("profile=from-file needs path")
        ts = list(self.times)
        if any(t < 0 for t in ts) or ts != sorted(ts):
            raise ConfigurationError("times must be nonnegative and ascending")
        self.params  # validates alpha, beta, sigma

    @property
    def params(self) -> PhysParams:
        return PhysParams(self.alpha, self.beta, self.sigma)

    def real_grid(self) -> RealGrid:
        return RealGrid(self.x_min, self.x_max, self.n_x)

    def spectral_grid(self) -> SpectralGrid:
        return SpectralGrid.build(z_cut=self.z_cut, n=self.n_z, refinement_radius=self.z_ref,
                                  z_min_inner=self.z_min_inner)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **kw)


def _convert(name: str, raw: str, kind):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is tuple:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from None


_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """key=value lines; '#' starts a comment; unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected key=value")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw, _TYPES[key])
    try:
        return RunConfig(**values)
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{source}: {exc}") from None


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


def dump_config(cfg: RunConfig) -> str:
    out = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = " ".join(format(t, ".17g") for t in v)
        elif isinstance(v, bool):
            v = int(v)
        elif isinstance(v, float):
            v = format(v, ".17g")
        out.append(f"{f.name}={v}")
    return "\n".join(out) + "\n"

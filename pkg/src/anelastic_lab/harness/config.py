"""Run configuration: a flat JSON document with a schema version.

Template groups (G, rho1, U0, phi0, u0) are encoded as prefixed keys, e.g.
``G_kind``, ``G_amplitude``, ``G_radius``, ``G_mode``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..background import PhysParams, solve_background
from ..grid import Grid, make_grid
from ..templates import scalar_template, vector_template

SCHEMA_VERSION = 1
SCENARIOS = ("well_prepared", "ill_prepared", "single_run", "invariants")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "well_prepared"
    dim: int = 2
    sizes: tuple[int, ...] = (64, 64)
    lengths: tuple[float, ...] | None = None
    allow_3d: bool = False
    a: float = 0.5
    gamma: float = 2.0
    mu: float = 0.05
    kappa: float = 0.25
    epsilons: tuple[float, ...] = (0.4, 0.2, 0.1, 0.05)
    deltas: tuple[float, ...] = (0.5, 0.25)
    T_final: float = 0.5
    samples: int = 50
    cfl: float = 0.4
    normalization: str = "mean"
    rho_bar: float = 1.0
    G_kind: str = "cosine"
    G_amplitude: float = 0.2
    G_radius: float = 1.0
    G_mode: int = 1
    rho1_kind: str = "random"
    rho1_amplitude: float = 0.5
    rho1_radius: float = 1.0
    rho1_mode: int = 2
    U0_kind: str = "random"
    U0_amplitude: float = 0.5
    U0_radius: float = 1.0
    U0_mode: int = 2
    phi0_kind: str = "bump"
    phi0_amplitude: float = 1.0
    phi0_radius: float = 1.0
    phi0_mode: int = 1
    u0_kind: str = "gradient_bump"
    u0_amplitude: float = 0.5
    u0_radius: float = 1.0
    u0_mode: int = 1
    acoustic_backend: str = "dense_eigen"
    window_radius: float = 1.5
    seed: int = 0
    output_dir: str = "out"
    record_timing: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        # normalize JSON lists to tuples so round-trips compare equal
        for name in ("sizes", "lengths", "epsilons", "deltas"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, tuple):
                object.__setattr__(self, name, tuple(val))
        self.validate()

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.dim == 3 and not self.allow_3d:
            raise ConfigError("3D runs require allow_3d = true")
        if len(self.sizes) != self.dim or (self.lengths is not None and len(self.lengths) != self.dim):
            raise ConfigError("sizes/lengths must have one entry per dimension")
        eps = self.epsilons
        if not eps:
            raise ConfigError("epsilon list is empty")
        if any(e <= 0 or e > 1 for e in eps):
            raise ConfigError("every epsilon must lie in (0, 1]")
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ConfigError("epsilon list must be strictly descending")
        if not self.T_final > 0:
            raise ConfigError("T_final must be positive")
        if self.samples < 2:
            raise ConfigError("need at least two samples")
        if self.scenario == "ill_prepared":
            if not self.deltas or any(not 0 < d < 1 for d in self.deltas):
                raise ConfigError("ill_prepared requires every delta in (0, 1)")
            if self.normalization != "far_field":
                raise ConfigError("ill_prepared requires far_field normalization")

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n")

    def hash(self) -> str:
        canon = json.dumps({k: v for k, v in self.to_dict().items() if k != "output_dir"},
                           sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    # -- builders -------------------------------------------------------

    def grid(self) -> Grid:
        return make_grid(self.dim, self.sizes, self.lengths)

    def params(self, epsilon: float = 1.0) -> PhysParams:
        return PhysParams(a=self.a, gamma=self.gamma, mu=self.mu, kappa=self.kappa, epsilon=epsilon)

    def scalar(self, grid: Grid, group: str, seed_offset: int = 0):
        return scalar_template(grid, getattr(self, f"{group}_kind"), getattr(self, f"{group}_amplitude"),
                               radius=getattr(self, f"{group}_radius"), mode=getattr(self, f"{group}_mode"),
                               seed=self.seed + seed_offset)

    def vector(self, grid: Grid, group: str, seed_offset: int = 0):
        return vector_template(grid, getattr(self, f"{group}_kind"), getattr(self, f"{group}_amplitude"),
                               radius=getattr(self, f"{group}_radius"), mode=getattr(self, f"{group}_mode"),
                               seed=self.seed + seed_offset)

    def background(self, grid: Grid | None = None):
        grid = self.grid() if grid is None else grid
        G = self.scalar(grid, "G", seed_offset=101)
        return solve_background(G, grid, self.params(), self.normalization, self.rho_bar)


def default_config(scenario: str = "well_prepared", **overrides) -> RunConfig:
    """Desk-scale defaults; the ill-prepared proxy is a 1D compact-data box."""
    if scenario == "ill_prepared":
        base = dict(scenario=scenario, dim=1, sizes=(512,), lengths=(16 * math.pi,),
                    epsilons=(0.4, 0.2, 0.1), deltas=(0.5, 0.25), T_final=1.0, samples=100,
                    normalization="far_field", G_kind="bump", G_amplitude=0.3, G_radius=5.0,
                    phi0_kind="bump", phi0_amplitude=1.0, phi0_radius=1.0,
                    u0_kind="gradient_bump", u0_amplitude=0.5, u0_radius=1.0)
    else:
        base = dict(scenario=scenario)
    base.update(overrides)
    return RunConfig(**base)

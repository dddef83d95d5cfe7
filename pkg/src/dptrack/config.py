"""Run configuration: an INI file with one section per pipeline stage.

Every key is optional; missing keys fall back to the shipped presets. Example::

    [run]
    seed = 7

    [geometry]
    n_layers = 5
    spacing = 1.0
    sigma_phi = 0.002

    [generator]
    n_tracks = 3
    noise_hits = 0

    [solver]
    method = meanfield

Command-line flags override the file.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .denby_peterson import DEFAULT_CUTS, DEFAULT_PARAMS, DPParams, default_schedule
from .errors import ContractError, ParseError
from .event_gen import DetectorGeometry, EventGenConfig
from .segments import SegmentCuts
from .seeding import derive_seed
from .solvers import (
    METHODS,
    AnnealSchedule,
    MeanFieldParams,
    SqaParams,
    geometric_ladder,
    linear_ladder,
)


@dataclass
class RunConfig:
    seed: int = 0
    out: Path = Path("out")
    geometry: DetectorGeometry = field(default_factory=lambda: DetectorGeometry.uniform(5, 1.0, 0.002))
    generator: EventGenConfig = field(default_factory=lambda: EventGenConfig(n_tracks=3))
    cuts: SegmentCuts = DEFAULT_CUTS
    dp: DPParams = DEFAULT_PARAMS
    method: str = "meanfield"
    solver: dict = field(default_factory=dict)
    grid_n: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown solver {self.method!r}; choose from {', '.join(METHODS)}")

    def generator_for_run(self) -> EventGenConfig:
        return replace(self.generator, seed=derive_seed(self.seed, "generate"))

    def solver_params(self, method: str | None = None):
        method = method or self.method
        s = self.solver
        seed = derive_seed(self.seed, "solve")
        if method == "exact":
            return None
        if method == "sa":
            base = AnnealSchedule.default()
            ladder = geometric_ladder(s.get("t_start", 2.0), s.get("t_stop", 0.05),
                                      int(s.get("steps", len(base.temperatures))))
            return AnnealSchedule(ladder, int(s.get("sweeps", base.sweeps_per_temperature)),
                                  int(s.get("restarts", base.restarts)), seed)
        if method == "sqa":
            base = SqaParams.default()
            ladder = linear_ladder(s.get("gamma_start", 3.0), s.get("gamma_stop", 0.05),
                                   int(s.get("steps", len(base.gammas))))
            return SqaParams(ladder, s.get("temperature", base.temperature),
                             int(s.get("slices", base.trotter_slices)),
                             int(s.get("sweeps", base.sweeps_per_gamma)),
                             int(s.get("restarts", base.restarts)), seed)
        base = default_schedule()
        ladder = geometric_ladder(s.get("t_start", base.temperatures[0]),
                                  s.get("t_stop", base.temperatures[-1]),
                                  int(s.get("steps", len(base.temperatures))))
        return MeanFieldParams(ladder, s.get("tolerance", base.tolerance),
                               int(s.get("max_sweeps", base.max_sweeps)), seed)


def _get(cp: configparser.ConfigParser, section: str, key: str, kind, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        if kind is bool:
            return cp.getboolean(section, key)
        if kind is tuple:
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError:
        raise ParseError(f"[{section}] {key}: cannot read {raw!r} as {kind.__name__}") from None


def load_config(path: str | Path | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ParseError(f"config {path}: {exc}") from None

    cfg.seed = _get(cp, "run", "seed", int, cfg.seed)
    cfg.out = Path(_get(cp, "run", "out", str, str(cfg.out)))

    g = cfg.geometry
    radii = _get(cp, "geometry", "layer_radii", tuple, None)
    sigma = _get(cp, "geometry", "sigma_phi", float, g.sigma_phi)
    try:
        if radii is not None:
            cfg.geometry = DetectorGeometry(radii, sigma)
        else:
            cfg.geometry = DetectorGeometry.uniform(
                _get(cp, "geometry", "n_layers", int, g.n_layers),
                _get(cp, "geometry", "spacing", float, 1.0), sigma)

        gen = cfg.generator
        cfg.generator = EventGenConfig(
            n_tracks=_get(cp, "generator", "n_tracks", int, gen.n_tracks),
            curvature_range=(_get(cp, "generator", "curvature_min", float, gen.curvature_range[0]),
                             _get(cp, "generator", "curvature_max", float, gen.curvature_range[1])),
            phi_range=(_get(cp, "generator", "phi_min", float, gen.phi_range[0]),
                       _get(cp, "generator", "phi_max", float, gen.phi_range[1])),
            noise_hit_count=_get(cp, "generator", "noise_hits", int, gen.noise_hit_count),
            smear=_get(cp, "generator", "smear", bool, gen.smear),
        )
        c = cfg.cuts
        cfg.cuts = SegmentCuts(
            _get(cp, "cuts", "max_segment_length", float, c.max_segment_length),
            _get(cp, "cuts", "max_kink_angle", float, c.max_kink_angle),
            _get(cp, "cuts", "max_neurons", int, c.max_neurons),
        )
        d = cfg.dp
        cfg.dp = DPParams(
            _get(cp, "denby_peterson", "m", int, d.m),
            _get(cp, "denby_peterson", "alpha", float, d.alpha),
            _get(cp, "denby_peterson", "beta", float, d.beta),
        )
    except ContractError as exc:
        raise ParseError(f"config {path}: {exc}") from None

    cfg.method = _get(cp, "solver", "method", str, cfg.method)
    if cfg.method not in METHODS:
        raise ParseError(f"config {path}: unknown solver {cfg.method!r}")
    if cp.has_section("solver"):
        cfg.solver = {k: _number(v) for k, v in cp.items("solver") if k != "method"}
    grid = _get(cp, "chimera", "grid_n", int, None)
    cfg.grid_n = grid
    return cfg


def _number(raw: str):
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(f"[solver] value {raw!r} is not a number") from None
    return int(v) if v.is_integer() and "." not in raw and "e" not in raw.lower() else v


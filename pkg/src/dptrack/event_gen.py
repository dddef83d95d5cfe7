"""Synthetic 2-D collision events.

Tracks are circular arcs leaving a primary vertex at the origin. A track with
signed curvature ``kappa`` and initial azimuth ``phi0`` crosses a layer of
radius ``rho`` at azimuth ``phi0 + asin(kappa * rho / 2)``; layers beyond the
arc's turning radius ``2 / |kappa|`` are never reached. Measurement error is
applied in azimuth only, so every hit sits exactly on its layer circle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ContractError, ParseError
from .seeding import rng_for

RADIUS_RTOL = 1e-6


@dataclass(frozen=True)
class DetectorGeometry:
    layer_radii: tuple[float, ...]
    sigma_phi: float = 0.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.layer_radii)
        object.__setattr__(self, "layer_radii", radii)
        if not radii:
            raise ContractError("geometry needs at least one layer")
        if any(not math.isfinite(r) or r <= 0 for r in radii):
            raise ContractError(f"layer radii must be positive: {radii}")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ContractError(f"layer radii must be strictly increasing: {radii}")
        if not (self.sigma_phi >= 0 and math.isfinite(self.sigma_phi)):
            raise ContractError(f"sigma_phi must be >= 0, got {self.sigma_phi}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_radii)

    @classmethod
    def uniform(cls, n_layers: int, spacing: float = 1.0, sigma_phi: float = 0.0):
        """Layers at ``spacing, 2*spacing, ...``."""
        if n_layers < 1:
            raise ContractError("n_layers must be positive")
        return cls(tuple(spacing * (i + 1) for i in range(n_layers)), sigma_phi)


@dataclass(frozen=True)
class Hit:
    id: int
    layer: int
    x: float
    y: float

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def phi(self) -> float:
        return math.atan2(self.y, self.x)


@dataclass(frozen=True)
class TruthTrack:
    track_id: int
    hit_ids: tuple[int, ...]


@dataclass(frozen=True)
class Truth:
    tracks: tuple[TruthTrack, ...] = ()
    noise_hit_ids: tuple[int, ...] = ()

    def true_segments(self) -> set[tuple[int, int]]:
        """Consecutive (from, to) hit pairs along every truth track."""
        pairs = set()
        for t in self.tracks:
            pairs.update(zip(t.hit_ids, t.hit_ids[1:]))
        return pairs

    def track_of(self) -> dict[int, int]:
        return {h: t.track_id for t in self.tracks for h in t.hit_ids}


@dataclass(frozen=True)
class Event:
    geometry: DetectorGeometry
    hits: tuple[Hit, ...]
    truth: Truth | None = None
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hits", tuple(self.hits))
        by_id: dict[int, Hit] = {}
        for h in self.hits:
            if h.id in by_id:
                raise ContractError(f"duplicate hit id {h.id}")
            if not 0 <= h.layer < self.geometry.n_layers:
                raise ContractError(f"hit {h.id}: layer {h.layer} out of range")
            r = self.geometry.layer_radii[h.layer]
            if abs(h.radius - r) > RADIUS_RTOL * r:
                raise ContractError(
                    f"hit {h.id}: radius {h.radius!r} is off layer {h.layer} ({r!r})"
                )
            by_id[h.id] = h
        object.__setattr__(self, "_by_id", by_id)
        if self.truth is not None:
            _check_truth(self.truth, by_id)

    def hit(self, hit_id: int) -> Hit:
        return self._by_id[hit_id]

    def __contains__(self, hit_id: int) -> bool:
        return hit_id in self._by_id


def _check_truth(truth: Truth, by_id: dict[int, Hit]) -> None:
    seen: set[int] = set()
    for t in truth.tracks:
        layers = [by_id[h].layer if h in by_id else None for h in t.hit_ids]
        if None in layers:
            raise ContractError(f"truth track {t.track_id} references unknown hits")
        if any(b <= a for a, b in zip(layers, layers[1:])):
            raise ContractError(
                f"truth track {t.track_id} must have one hit per layer in increasing order"
            )
        for h in t.hit_ids:
            if h in seen:
                raise ContractError(f"hit {h} assigned twice in truth")
            seen.add(h)
    for h in truth.noise_hit_ids:
        if h not in by_id or h in seen:
            raise ContractError(f"noise hit {h} unknown or already assigned")
        seen.add(h)
    if seen != set(by_id):
        missing = sorted(set(by_id) - seen)
        raise ContractError(f"truth does not cover hits {missing[:10]}")


@dataclass(frozen=True)
class EventGenConfig:
    n_tracks: int = 5
    curvature_range: tuple[float, float] = (-0.05, 0.05)
    phi_range: tuple[float, float] = (0.0, 2 * math.pi)
    noise_hit_count: int = 0
    smear: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_tracks < 0:
            raise ContractError("n_tracks must be >= 0")
        if self.noise_hit_count < 0:
            raise ContractError("noise_hit_count must be >= 0")
        lo, hi = self.curvature_range
        if lo > hi:
            raise ContractError(f"empty curvature range {self.curvature_range}")
        lo, hi = self.phi_range
        if lo > hi:
            raise ContractError(f"empty azimuth range {self.phi_range}")


def arc_azimuth(phi0: float, curvature: float, rho: float) -> float | None:
    """Azimuth where an origin arc crosses radius ``rho``, or None if it never does."""
    arg = curvature * rho / 2.0
    if abs(arg) > 1.0:
        return None
    return phi0 + math.asin(arg)


def generate_event(config: EventGenConfig, geometry: DetectorGeometry) -> Event:
    rng = rng_for(config.seed, "event")
    radii = geometry.layer_radii
    # (layer, phi, track index or -1 for noise)
    raw: list[tuple[int, float, int]] = []
    for t in range(config.n_tracks):
        kappa = rng.uniform(*config.curvature_range)
        phi0 = rng.uniform(*config.phi_range)
        for layer, rho in enumerate(radii):
            phi = arc_azimuth(phi0, kappa, rho)
            if phi is None:
                break
            if config.smear and geometry.sigma_phi > 0:
                phi += rng.normal(0.0, geometry.sigma_phi)
            raw.append((layer, phi, t))
    for _ in range(config.noise_hit_count):
        layer = int(rng.integers(geometry.n_layers))
        raw.append((layer, rng.uniform(0.0, 2 * math.pi), -1))

    # hit ids are a seeded permutation so that id order carries no track information
    ids = rng.permutation(len(raw))
    hits = []
    track_hits: list[list[tuple[int, int]]] = [[] for _ in range(config.n_tracks)]
    noise = []
    for hid, (layer, phi, t) in zip(ids.tolist(), raw):
        rho = radii[layer]
        hits.append(Hit(hid, layer, rho * math.cos(phi), rho * math.sin(phi)))
        if t < 0:
            noise.append(hid)
        else:
            track_hits[t].append((layer, hid))
    hits.sort(key=lambda h: h.id)
    truth = Truth(
        tracks=tuple(
            TruthTrack(t, tuple(hid for _, hid in sorted(th)))
            for t, th in enumerate(track_hits)
        ),
        noise_hit_ids=tuple(sorted(noise)),
    )
    return Event(geometry, tuple(hits), truth)


def rotate_event(event: Event, angle: float) -> Event:
    c, s = math.cos(angle), math.sin(angle)
    hits = tuple(Hit(h.id, h.layer, c * h.x - s * h.y, s * h.x + c * h.y) for h in event.hits)
    return Event(event.geometry, hits, event.truth)


def scale_event(event: Event, factor: float) -> Event:
    geom = DetectorGeometry(
        tuple(r * factor for r in event.geometry.layer_radii), event.geometry.sigma_phi
    )
    hits = tuple(Hit(h.id, h.layer, h.x * factor, h.y * factor) for h in event.hits)
    return Event(geom, hits, event.truth)


# -- serialization -----------------------------------------------------------


def event_to_dict(event: Event) -> dict[str, Any]:
    d: dict[str, Any] = {
        "geometry": {
            "layer_radii": list(event.geometry.layer_radii),
            "sigma_phi": event.geometry.sigma_phi,
        },
        "hits": [{"id": h.id, "layer": h.layer, "x": h.x, "y": h.y} for h in event.hits],
        "truth": None,
    }
    if event.truth is not None:
        d["truth"] = {
            "tracks": [
                {"track_id": t.track_id, "hit_ids": list(t.hit_ids)}
                for t in event.truth.tracks
            ],
            "noise_hit_ids": list(event.truth.noise_hit_ids),
        }
    return d


def dumps_event(event: Event, extra: dict[str, Any] | None = None) -> str:
    d = event_to_dict(event)
    if extra:
        d.update(extra)
    # repr-based float text round-trips binary64 exactly
    return json.dumps(d, indent=1) + "\n"


def save_event(event: Event, destination: str | Path) -> Path:
    path = Path(destination)
    path.write_text(dumps_event(event), encoding="utf-8")
    return path


def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def event_from_dict(d: dict[str, Any]) -> Event:
    g = _need(d, "geometry", "event")
    radii = _need(g, "layer_radii", "geometry")
    if not isinstance(radii, list):
        raise ParseError("geometry.layer_radii: expected a list")
    try:
        geometry = DetectorGeometry(
            tuple(_num(r, f"geometry.layer_radii[{i}]") for i, r in enumerate(radii)),
            _num(g.get("sigma_phi", 0.0), "geometry.sigma_phi"),
        )
    except ContractError as exc:
        raise ParseError(f"geometry: {exc}") from None

    hits = []
    seen: set[int] = set()
    for i, rec in enumerate(_need(d, "hits", "event")):
        where = f"hits[{i}]"
        hid = _int(_need(rec, "id", where), where + ".id")
        if hid in seen:
            raise ParseError(f"{where}: duplicate hit id {hid}")
        seen.add(hid)
        layer = _int(_need(rec, "layer", where), where + ".layer")
        hits.append(
            Hit(hid, layer, _num(_need(rec, "x", where), where + ".x"),
                _num(_need(rec, "y", where), where + ".y"))
        )

    truth = None
    t = d.get("truth")
    if t is not None:
        tracks = []
        for i, rec in enumerate(_need(t, "tracks", "truth")):
            where = f"truth.tracks[{i}]"
            ids = _need(rec, "hit_ids", where)
            tracks.append(
                TruthTrack(
                    _int(_need(rec, "track_id", where), where + ".track_id"),
                    tuple(_int(h, f"{where}.hit_ids") for h in ids),
                )
            )
        noise = tuple(_int(h, "truth.noise_hit_ids") for h in t.get("noise_hit_ids", []))
        truth = Truth(tuple(tracks), noise)
    try:
        return Event(geometry, tuple(hits), truth)
    except ContractError as exc:
        raise ParseError(str(exc)) from None


def loads_event(text: str) -> Event:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"event file is not valid JSON: {exc}") from None
    return event_from_dict(d)


def load_event(source: str | Path) -> Event:
    return loads_event(Path(source).read_text(encoding="utf-8"))

"""Candidate segments (the network's neurons) between hits on adjacent layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CapacityError, ContractError
from .event_gen import Event


@dataclass(frozen=True)
class Segment:
    id: int
    from_hit: int
    to_hit: int
    length: float
    direction: tuple[float, float]


@dataclass(frozen=True)
class SegmentCuts:
    max_segment_length: float = math.inf
    max_kink_angle: float = math.pi
    max_neurons: int = 2000

    def __post_init__(self):
        if not self.max_segment_length > 0:
            raise ContractError("max_segment_length must be positive")
        if not 0 < self.max_kink_angle <= math.pi:
            raise ContractError("max_kink_angle must lie in (0, pi]")
        if self.max_neurons < 1:
            raise ContractError("max_neurons must be >= 1")


@dataclass(frozen=True)
class SegmentSet:
    segments: tuple[Segment, ...]
    outgoing: dict[int, tuple[int, ...]] = field(default_factory=dict)
    incoming: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __getitem__(self, i: int) -> Segment:
        return self.segments[i]

    def connected_pairs(self):
        """Yield (a, b) with segment a ending where segment b starts."""
        for s in self.segments:
            for b in self.outgoing.get(s.to_hit, ()):
                yield s.id, b

    def pairs(self) -> list[tuple[int, int]]:
        return [(s.from_hit, s.to_hit) for s in self.segments]


def _make_segment(sid: int, a, b) -> Segment:
    dx, dy = b.x - a.x, b.y - a.y
    r = math.hypot(dx, dy)
    return Segment(sid, a.id, b.id, r, (dx / r, dy / r))


def segment_set_from_pairs(event: Event, pairs) -> SegmentSet:
    """Index an explicit list of (from, to) hit pairs, in the given order."""
    segs = []
    out: dict[int, list[int]] = {}
    inc: dict[int, list[int]] = {}
    for sid, (f, t) in enumerate(pairs):
        a, b = event.hit(f), event.hit(t)
        if b.layer != a.layer + 1:
            raise ContractError(f"segment ({f}, {t}) does not join adjacent layers")
        segs.append(_make_segment(sid, a, b))
        out.setdefault(f, []).append(sid)
        inc.setdefault(t, []).append(sid)
    return SegmentSet(
        tuple(segs),
        {k: tuple(v) for k, v in out.items()},
        {k: tuple(v) for k, v in inc.items()},
    )


def build_segments(event: Event, cuts: SegmentCuts = SegmentCuts()) -> SegmentSet:
    by_layer: dict[int, list] = {}
    for h in event.hits:
        by_layer.setdefault(h.layer, []).append(h)
    pairs = []
    for h in event.hits:
        for g in by_layer.get(h.layer + 1, ()):
            if math.hypot(g.x - h.x, g.y - h.y) <= cuts.max_segment_length:
                pairs.append((h.id, g.id))
    if len(pairs) > cuts.max_neurons:
        raise CapacityError(
            f"{len(pairs)} segments required, neuron budget is {cuts.max_neurons}"
        )
    pairs.sort()
    return segment_set_from_pairs(event, pairs)


def segment_angle(s1: Segment, s2: Segment) -> float:
    """Kink angle between two chained segments, in [0, pi]."""
    if s1.to_hit != s2.from_hit:
        raise ContractError(
            f"segments {s1.id} and {s2.id} are not chained ({s1.to_hit} != {s2.from_hit})"
        )
    (ax, ay), (bx, by) = s1.direction, s2.direction
    # atan2 stays accurate near 0 and pi where acos loses digits
    return math.atan2(abs(ax * by - ay * bx), ax * bx + ay * by)

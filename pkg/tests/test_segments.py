import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dptrack.errors import CapacityError, ContractError
from dptrack.event_gen import DetectorGeometry, Event, Hit, rotate_event
from dptrack.segments import Segment, SegmentCuts, build_segments, segment_angle


def two_hit_event(layers=(0, 1)):
    geo = DetectorGeometry((1.0, 2.0))
    return Event(geo, (Hit(0, layers[0], geo.layer_radii[layers[0]], 0.0),
                       Hit(1, layers[1], 0.0, geo.layer_radii[layers[1]])))


def seg(sid, f, t, d):
    norm = math.hypot(*d)
    return Segment(sid, f, t, 1.0, (d[0] / norm, d[1] / norm))


def test_adjacent_pair_makes_one_segment():
    s = build_segments(two_hit_event(), SegmentCuts(max_segment_length=3.0))
    assert len(s) == 1
    assert (s[0].from_hit, s[0].to_hit) == (0, 1)
    assert s[0].length == pytest.approx(math.sqrt(5.0))


def test_same_layer_makes_no_segment():
    geo = DetectorGeometry((1.0, 2.0))
    ev = Event(geo, (Hit(0, 0, 1.0, 0.0), Hit(1, 0, 0.0, 1.0)))
    assert len(build_segments(ev)) == 0


def test_length_cut_excludes():
    assert len(build_segments(two_hit_event(), SegmentCuts(max_segment_length=2.0))) == 0


def test_neuron_budget_fails_loudly(noiseless_5x6):
    with pytest.raises(CapacityError, match="125"):
        build_segments(noiseless_5x6, SegmentCuts(max_neurons=10))


def test_superset_of_true_segments(noiseless_5x6):
    segs = build_segments(noiseless_5x6)
    truth = noiseless_5x6.truth.true_segments()
    assert len(truth) == 25
    assert truth <= set(segs.pairs())
    # 5 hits per layer, all pairs between 5 adjacent layer pairs
    assert len(segs) == 5 * 25


def test_ordering_and_index(noiseless_5x6):
    segs = build_segments(noiseless_5x6)
    assert segs.pairs() == sorted(segs.pairs())
    for s in segs:
        assert s.id in segs.outgoing[s.from_hit]
        assert s.id in segs.incoming[s.to_hit]
        assert s.length > 0


@pytest.mark.parametrize("d2,expected", [
    ((1.0, 0.0), 0.0),
    ((0.0, 1.0), math.pi / 2),
    ((1.0, 1.0), math.pi / 4),
    ((-1.0, 0.0), math.pi),
])
def test_segment_angle(d2, expected):
    assert segment_angle(seg(0, 0, 1, (1.0, 0.0)), seg(1, 1, 2, d2)) == pytest.approx(expected, abs=1e-15)


def test_angle_of_unchained_pair_raises():
    with pytest.raises(ContractError):
        segment_angle(seg(0, 0, 1, (1, 0)), seg(1, 2, 3, (1, 0)))


@settings(max_examples=100, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_angle_symmetric_under_reversal(a, b, rot):
    d1, d2 = (math.cos(a), math.sin(a)), (math.cos(b), math.sin(b))
    forward = segment_angle(seg(0, 0, 1, d1), seg(1, 1, 2, d2))
    # reversed path: second segment walked backwards, then the first
    backward = segment_angle(seg(1, 2, 1, (-d2[0], -d2[1])), seg(0, 1, 0, (-d1[0], -d1[1])))
    assert forward == pytest.approx(backward, abs=1e-12)
    c, s = math.cos(rot), math.sin(rot)
    r1, r2 = (c * d1[0] - s * d1[1], s * d1[0] + c * d1[1]), (c * d2[0] - s * d2[1], s * d2[0] + c * d2[1])
    assert segment_angle(seg(0, 0, 1, r1), seg(1, 1, 2, r2)) == pytest.approx(forward, abs=1e-9)


def test_angles_invariant_under_event_rotation(noiseless_5x6):
    segs = build_segments(noiseless_5x6)
    rng = np.random.default_rng(1)
    for angle in rng.uniform(-math.pi, math.pi, 5):
        rot = build_segments(rotate_event(noiseless_5x6, angle))
        assert rot.pairs() == segs.pairs()
        for a, b in segs.connected_pairs():
            assert segment_angle(rot[a], rot[b]) == pytest.approx(segment_angle(segs[a], segs[b]), abs=1e-9)

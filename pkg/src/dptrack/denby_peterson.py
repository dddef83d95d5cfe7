"""Denby-Peterson segment network.

Every candidate segment is a neuron with activation in [0, 1]. Pairs of
neurons are coupled by

* a smoothness reward ``cos^m(theta) / (r_1 + r_2)`` when the first segment
  ends where the second starts (and the kink angle passes the cut),
* a bifurcation penalty ``-alpha/2`` when two segments share their tail hit or
  their head hit,
* a global inhibition ``-beta/2`` between every pair of distinct neurons.

The network energy is ``-1/2 sum_{a != b} T_ab a_a a_b``, so the all-off state
sits at zero and only active neurons contribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .ising import IsingProblem, QuboProblem, qubo_to_ising
from .segments import SegmentCuts, SegmentSet, segment_angle
from .solvers import MeanFieldParams, geometric_ladder, mean_field


@dataclass(frozen=True)
class DPParams:
    m: int = 5
    alpha: float = 2.0
    beta: float = 0.02

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ContractError(f"cost exponent m must be a positive integer, got {self.m}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ContractError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True, eq=False)
class NeuronNetwork:
    weights: np.ndarray

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ContractError("weights must be a square matrix")
        if not np.array_equal(W, W.T):
            raise ContractError("weights must be symmetric")
        if np.any(np.diag(W) != 0):
            raise ContractError("neurons must not couple to themselves")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def to_qubo(self) -> QuboProblem:
        """Binary form with the same energy on every on/off pattern."""
        return QuboProblem(-np.triu(self.weights, 1))

    def to_ising(self) -> IsingProblem:
        return qubo_to_ising(self.to_qubo())


def build_cost(segments: SegmentSet, m: int = 5, max_kink_angle: float = math.pi) -> np.ndarray:
    n = len(segments)
    W = np.zeros((n, n))
    for a, b in segments.connected_pairs():
        theta = segment_angle(segments[a], segments[b])
        if theta > max_kink_angle:
            continue
        w = math.cos(theta) ** m / (segments[a].length + segments[b].length)
        W[a, b] += w
        W[b, a] += w
    return W


def build_constraints(segments: SegmentSet, params: DPParams) -> np.ndarray:
    n = len(segments)
    W = np.full((n, n), -params.beta / 2.0)
    np.fill_diagonal(W, 0.0)
    for index in (segments.outgoing, segments.incoming):
        for group in index.values():
            for x in range(len(group)):
                for y in range(x + 1, len(group)):
                    a, b = group[x], group[y]
                    W[a, b] -= params.alpha / 2.0
                    W[b, a] -= params.alpha / 2.0
    return W


def build_network(segments: SegmentSet, params: DPParams,
                  max_kink_angle: float = math.pi) -> NeuronNetwork:
    return NeuronNetwork(build_cost(segments, params.m, max_kink_angle)
                         + build_constraints(segments, params))


def network_energy(net: NeuronNetwork, act) -> float:
    act = np.asarray(act, dtype=float)
    if act.shape != (net.n,):
        raise ContractError(f"activation length {act.shape} does not match {net.n} neurons")
    return float(-0.5 * act @ net.weights @ act)


def mean_field_anneal(net: NeuronNetwork, schedule: MeanFieldParams) -> np.ndarray:
    """Continuous activations after logistic mean-field annealing."""
    act, _ = mean_field(net.weights, np.zeros(net.n), schedule, stage="denby-peterson")
    return act


def threshold(act) -> np.ndarray:
    return np.asarray(act, dtype=float) > 0.5


def hopfield_trajectory(net: NeuronNetwork, state, order) -> list[float]:
    """Sequential hard-threshold updates; energy after each single-neuron update.

    Neuron ``i`` switches on iff its net input ``sum_j T_ij a_j`` is positive.
    """
    a = np.asarray(state, dtype=float).copy()
    W = net.weights
    energies = [network_energy(net, a)]
    for i in order:
        a[i] = 1.0 if W[i] @ a > 0 else 0.0
        energies.append(network_energy(net, a))
    return energies


@dataclass(frozen=True)
class TrackCandidate:
    hits: tuple[int, ...]
    ambiguous: bool = False


def extract_tracks(on, segments: SegmentSet, min_segments: int = 2,
                   max_candidates: int = 10_000) -> list[TrackCandidate]:
    """Chains of active segments, followed outward from hits with no active
    incoming segment.

    Where a hit has two or more active outgoing segments the chain forks into
    one candidate per branch; where it has two or more active incoming
    segments every arriving chain continues through it. Candidates passing
    through such a hit are flagged ambiguous.
    """
    on = np.asarray(on, dtype=bool)
    if on.shape != (len(segments),):
        raise ContractError("activation pattern does not match the segment set")
    succ: dict[int, list[int]] = {}
    n_in: dict[int, int] = {}
    for s in segments:
        if on[s.id]:
            succ.setdefault(s.from_hit, []).append(s.to_hit)
            n_in[s.to_hit] = n_in.get(s.to_hit, 0) + 1
    branchy = {h for h, nxt in succ.items() if len(nxt) > 1}
    branchy |= {h for h, k in n_in.items() if k > 1}

    out: list[TrackCandidate] = []
    stack = [(h,) for h in sorted(succ, reverse=True) if h not in n_in]
    while stack and len(out) < max_candidates:
        path = stack.pop()
        nxt = succ.get(path[-1])
        if nxt:
            for h in sorted(nxt, reverse=True):
                stack.append(path + (h,))
        elif len(path) - 1 >= min_segments:
            out.append(TrackCandidate(path, any(h in branchy for h in path)))
    return out


# Frozen on the noiseless 3-track / 5-layer regression fixture.
DEFAULT_PARAMS = DPParams(m=5, alpha=2.0, beta=0.02)
DEFAULT_CUTS = SegmentCuts(max_segment_length=1.5, max_kink_angle=math.pi / 4, max_neurons=2000)


def default_schedule(seed: int = 0) -> MeanFieldParams:
    return MeanFieldParams(geometric_ladder(2.0, 0.02, 25), 1e-4, 100, seed)

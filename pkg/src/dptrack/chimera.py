"""Chimera connectivity graph, clique minor embedding, and chain decoding.

An ``n x n`` Chimera graph has one K_{4,4} cell per grid position. Qubit ids
are cell-major and partition-minor::

    qubit(row, col, side, k) = 8 * (row * n + col) + 4 * side + k

Side-0 ("left") qubits also couple to the same ``k`` in the cell below,
side-1 ("right") qubits to the same ``k`` in the cell to the right.

The embedding places logical spin ``i`` (block ``c = i // 4``, index
``k = i % 4``) on an L-shaped chain: side-0 qubits ``k`` of cells
``(0..c, c)`` plus side-1 qubits ``k`` of cells ``(c, c..n-1)``. Any two such
chains meet inside one cell, so every logical pair is coupled and the graph
hosts a complete logical graph on ``4 n`` spins.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, EmbeddingInfeasible, ParseError
from .ising import IsingProblem


def qubit_index(n: int, row: int, col: int, side: int, k: int) -> int:
    return 8 * (row * n + col) + 4 * side + k


@dataclass(frozen=True)
class ChimeraGraph:
    n: int
    couplers: frozenset = field(init=False)
    adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ContractError(f"grid size must be a positive integer, got {self.n}")
        n = self.n
        edges = set()
        for row in range(n):
            for col in range(n):
                for a in range(4):
                    for b in range(4):
                        edges.add((qubit_index(n, row, col, 0, a), qubit_index(n, row, col, 1, b)))
                for k in range(4):
                    if row + 1 < n:
                        edges.add((qubit_index(n, row, col, 0, k),
                                   qubit_index(n, row + 1, col, 0, k)))
                    if col + 1 < n:
                        edges.add((qubit_index(n, row, col, 1, k),
                                   qubit_index(n, row, col + 1, 1, k)))
        adj: dict[int, set[int]] = {q: set() for q in range(8 * n * n)}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "couplers", frozenset(edges))
        object.__setattr__(self, "adjacency", {q: frozenset(v) for q, v in adj.items()})

    @property
    def n_qubits(self) -> int:
        return 8 * self.n * self.n

    @property
    def clique_capacity(self) -> int:
        return 4 * self.n

    def has_coupler(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.couplers

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        cell, rest = divmod(q, 8)
        row, col = divmod(cell, self.n)
        side, k = divmod(rest, 4)
        return row, col, side, k


def build_chimera(n: int) -> ChimeraGraph:
    return ChimeraGraph(n)


def default_chain_strength(p: IsingProblem) -> float:
    return 1.0 + 2.0 * p.max_abs()


@dataclass(frozen=True)
class Embedding:
    grid_n: int
    chains: dict[int, tuple[int, ...]]
    chain_strength: float

    def __post_init__(self):
        if not self.chain_strength > 0:
            raise ContractError("chain strength must be positive")

    def qubits(self) -> list[int]:
        return sorted(q for chain in self.chains.values() for q in chain)

    def to_dict(self) -> dict:
        return {
            "grid_n": self.grid_n,
            "chains": {str(i): list(c) for i, c in sorted(self.chains.items())},
            "chain_strength": self.chain_strength,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Embedding":
        try:
            chains = {int(k): tuple(int(q) for q in v) for k, v in d["chains"].items()}
            return cls(int(d["grid_n"]), chains, float(d["chain_strength"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed embedding: {exc}") from None


def save_embedding(e: Embedding, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(e.to_dict(), indent=1) + "\n", encoding="utf-8")
    return path


def load_embedding(path: str | Path) -> Embedding:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"embedding file is not valid JSON: {exc}") from None
    return Embedding.from_dict(d)


def _connected(chain: Sequence[int], g: ChimeraGraph) -> bool:
    members = set(chain)
    start = chain[0]
    seen = {start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for r in g.adjacency[q]:
            if r in members and r not in seen:
                seen.add(r)
                queue.append(r)
    return seen == members


def validate_embedding(p: IsingProblem, e: Embedding, g: ChimeraGraph) -> None:
    """Raise ContractError unless chains are disjoint, connected and cover every coupling."""
    if e.grid_n != g.n:
        raise ContractError(f"embedding is for grid {e.grid_n}, graph is {g.n}")
    if set(e.chains) != set(range(p.n)):
        raise ContractError("embedding must have exactly one chain per logical spin")
    owner: dict[int, int] = {}
    for i, chain in e.chains.items():
        if not chain:
            raise ContractError(f"chain {i} is empty")
        for q in chain:
            if not 0 <= q < g.n_qubits:
                raise ContractError(f"chain {i} uses qubit {q} outside the graph")
            if q in owner:
                raise ContractError(f"qubit {q} is shared by chains {owner[q]} and {i}")
            owner[q] = i
        if not _connected(chain, g):
            raise ContractError(f"chain {i} is not connected")
    for i, j, _ in p.couplings():
        if _chain_coupler(e.chains[i], e.chains[j], g) is None:
            raise ContractError(f"no coupler between chains {i} and {j}")


def _chain_coupler(ca: Sequence[int], cb: Sequence[int], g: ChimeraGraph):
    """Smallest physical coupler joining two chains, or None."""
    best = None
    cb_set = set(cb)
    for a in ca:
        for b in g.adjacency[a]:
            if b in cb_set:
                edge = (min(a, b), max(a, b))
                if best is None or edge < best:
                    best = edge
    return best


def clique_chain(i: int, n: int) -> tuple[int, ...]:
    c, k = divmod(i, 4)
    vertical = [qubit_index(n, row, c, 0, k) for row in range(c + 1)]
    horizontal = [qubit_index(n, c, col, 1, k) for col in range(c, n)]
    return tuple(sorted(vertical + horizontal))


def find_embedding(p: IsingProblem, g: ChimeraGraph,
                   chain_strength: float | None = None) -> Embedding:
    if p.n > g.clique_capacity:
        raise EmbeddingInfeasible(p.n, g.clique_capacity)
    if chain_strength is None:
        chain_strength = default_chain_strength(p)
    e = Embedding(g.n, {i: clique_chain(i, g.n) for i in range(p.n)}, float(chain_strength))
    validate_embedding(p, e, g)
    return e


def embed_problem(p: IsingProblem, e: Embedding, g: ChimeraGraph) -> IsingProblem:
    """Physical problem over every qubit of ``g``; unused qubits carry no terms."""
    validate_embedding(p, e, g)
    N = g.n_qubits
    h = np.zeros(N)
    J = np.zeros((N, N))
    for i, chain in e.chains.items():
        for q in chain:
            h[q] += p.h[i] / len(chain)
        members = set(chain)
        for q in chain:
            for r in g.adjacency[q]:
                if r in members and q < r:
                    J[q, r] -= e.chain_strength
    for i, j, v in p.couplings():
        a, b = _chain_coupler(e.chains[i], e.chains[j], g)
        J[a, b] += v
    return IsingProblem(h, J, p.offset)


@dataclass(frozen=True)
class DecodedState:
    state: np.ndarray
    broken: tuple[int, ...]

    @property
    def n_broken(self) -> int:
        return len(self.broken)


def decode_state(physical: Sequence[float] | Mapping[int, float], e: Embedding) -> DecodedState:
    """Majority vote per chain; ties resolve to -1. Non-unanimous chains are broken."""
    out = np.empty(len(e.chains))
    broken = []
    for i in sorted(e.chains):
        votes = 0
        values = set()
        for q in e.chains[i]:
            try:
                v = physical[q]
            except (IndexError, KeyError):
                raise ContractError(f"no value for qubit {q} of chain {i}") from None
            if v not in (1, -1):
                raise ContractError(f"qubit {q} has non-spin value {v!r}")
            votes += int(v)
            values.add(int(v))
        out[i] = 1.0 if votes > 0 else -1.0
        if len(values) > 1:
            broken.append(i)
    return DecodedState(out, tuple(broken))


def expand_state(logical, e: Embedding, n_qubits: int) -> np.ndarray:
    """Physical state with every chain aligned to its logical spin; spare qubits at -1."""
    s = -np.ones(n_qubits)
    for i, chain in e.chains.items():
        s[list(chain)] = logical[i]
    return s

import itertools

import numpy as np
import pytest

from conftest import random_ising
from dptrack.chimera import (
    ChimeraGraph,
    Embedding,
    build_chimera,
    clique_chain,
    decode_state,
    default_chain_strength,
    embed_problem,
    expand_state,
    find_embedding,
    load_embedding,
    qubit_index,
    save_embedding,
    validate_embedding,
)
from dptrack.errors import CapacityError, ContractError, EmbeddingInfeasible, ParseError
from dptrack.ising import IsingProblem, ising_energy
from dptrack.solvers import brute_force


def oracle_coupled(n, a, b):
    """Chimera adjacency from coordinates alone."""
    def coords(q):
        cell, rest = divmod(q, 8)
        return divmod(cell, n) + divmod(rest, 4)
    ra, ca, sa, ka = coords(a)
    rb, cb, sb, kb = coords(b)
    if (ra, ca) == (rb, cb):
        return sa != sb
    if sa != sb or ka != kb:
        return False
    if sa == 0:
        return ca == cb and abs(ra - rb) == 1
    return ra == rb and abs(ca - cb) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_couplers_match_predicate(n):
    g = build_chimera(n)
    expected = {(a, b) for a, b in itertools.combinations(range(8 * n * n), 2)
                if oracle_coupled(n, a, b)}
    assert set(g.couplers) == expected


def test_sizes():
    assert build_chimera(1).n_qubits == 8 and len(build_chimera(1).couplers) == 16
    assert len(build_chimera(2).couplers) == 80
    g3 = build_chimera(3)
    assert g3.n_qubits == 72
    assert max(len(v) for v in g3.adjacency.values()) <= 6
    assert g3.clique_capacity == 12


def test_qubit_layout():
    g = build_chimera(3)
    assert qubit_index(3, 1, 2, 1, 3) == 8 * 5 + 7
    assert g.coordinates(47) == (1, 2, 1, 3)
    with pytest.raises(ContractError):
        ChimeraGraph(0)


def test_k4_on_single_cell():
    p = IsingProblem.from_terms(4, J={(i, j): 1.0 for i in range(4) for j in range(i + 1, 4)})
    e = find_embedding(p, build_chimera(1))
    assert all(len(c) == 2 for c in e.chains.values())
    assert e.chain_strength == 3.0


def test_capacity_exceeded():
    with pytest.raises(EmbeddingInfeasible) as info:
        find_embedding(IsingProblem.zeros(5), build_chimera(1))
    assert isinstance(info.value, CapacityError)
    assert info.value.exit_code == 3


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_clique_chains_valid(n):
    g = build_chimera(n)
    k = g.clique_capacity
    full = IsingProblem(np.zeros(k), np.triu(np.ones((k, k)), 1))
    validate_embedding(full, find_embedding(full, g), g)


def test_clique_chain_shape():
    # logical 5 on n = 3: block 1, index 1
    assert clique_chain(5, 3) == tuple(sorted([
        qubit_index(3, 0, 1, 0, 1), qubit_index(3, 1, 1, 0, 1),
        qubit_index(3, 1, 1, 1, 1), qubit_index(3, 1, 2, 1, 1)]))


def test_field_split_across_chain():
    p = IsingProblem.from_terms(1, h={0: 1.0})
    g = build_chimera(1)
    e = find_embedding(p, g)
    phys = embed_problem(p, e, g)
    for q in e.chains[0]:
        assert phys.h[q] == 0.5
    a, b = e.chains[0]
    assert phys.symmetric_J()[a, b] == -e.chain_strength


def test_embedded_energy_of_aligned_chains(rng):
    g = build_chimera(2)
    for _ in range(5):
        p = random_ising(rng, 7)
        e = find_embedding(p, g)
        phys = embed_problem(p, e, g)
        n_internal = sum(len(c) - 1 for c in e.chains.values())
        for s in rng.choice([-1.0, 1.0], (10, 7)):
            full = expand_state(s, e, g.n_qubits)
            assert ising_energy(phys, full) == pytest.approx(
                ising_energy(p, s) - e.chain_strength * n_internal, abs=1e-9)


def test_k4_round_trip_ground_state(rng):
    g = build_chimera(1)
    for _ in range(10):
        p = random_ising(rng, 4)
        e = find_embedding(p, g, 2 * p.max_abs())
        phys = embed_problem(p, e, g)
        decoded = decode_state(brute_force(phys).best_state, e)
        assert decoded.n_broken == 0
        assert ising_energy(p, decoded.state) == pytest.approx(brute_force(p).best_energy, abs=1e-12)


def test_decode_majority_and_ties():
    e = Embedding(1, {0: (0, 4), 1: (1, 5, 2)}, 1.0)
    d = decode_state({0: 1, 4: -1, 1: 1, 5: 1, 2: -1}, e)
    assert d.state.tolist() == [-1.0, 1.0]
    assert d.broken == (0, 1)
    d = decode_state({0: 1, 4: 1, 1: -1, 5: -1, 2: -1}, e)
    assert d.state.tolist() == [1.0, -1.0] and d.broken == ()
    with pytest.raises(ContractError):
        decode_state({0: 1}, e)
    with pytest.raises(ContractError):
        decode_state({0: 0, 4: 1, 1: 1, 5: 1, 2: 1}, e)


def test_validate_rejects_bad_chains():
    g = build_chimera(1)
    p = IsingProblem.from_terms(2, J={(0, 1): 1.0})
    with pytest.raises(ContractError, match="shared"):
        validate_embedding(p, Embedding(1, {0: (0, 4), 1: (4, 1)}, 1.0), g)
    with pytest.raises(ContractError, match="not connected"):
        validate_embedding(p, Embedding(1, {0: (0, 1), 1: (4,)}, 1.0), g)
    with pytest.raises(ContractError, match="no coupler"):
        validate_embedding(p, Embedding(1, {0: (0,), 1: (1,)}, 1.0), g)
    with pytest.raises(ContractError):
        Embedding(1, {0: (0,)}, 0.0)


def test_embedding_file_round_trip(tmp_path, rng):
    p = random_ising(rng, 6)
    e = find_embedding(p, build_chimera(2))
    path = save_embedding(e, tmp_path / "e.json")
    assert load_embedding(path) == e
    path.write_text('{"grid_n": 2}')
    with pytest.raises(ParseError):
        load_embedding(path)
    path.write_text("{oops")
    with pytest.raises(ParseError):
        load_embedding(path)


def test_default_chain_strength():
    p = IsingProblem.from_terms(2, h={0: -0.5}, J={(0, 1): 1.5})
    assert default_chain_strength(p) == 4.0

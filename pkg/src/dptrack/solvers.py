"""Minimizers for Ising and QUBO problems.

* ``brute_force``: exact Gray-code enumeration, n <= 25.
* ``simulated_anneal``: Metropolis single-spin flips on a temperature ladder.
* ``simulated_quantum_anneal``: path-integral Monte Carlo of the transverse-field
  Ising model. ``P`` replicas of the problem sit on a ring and corresponding
  spins of neighbouring replicas are coupled by

      J_perp = -(P T / 2) ln tanh(Gamma / (P T)),

  so the replica energy ``sum_p E(s_p) - J_perp sum_{p,i} s_{p,i} s_{p+1,i}``
  is sampled at temperature ``P T`` while ``Gamma`` decreases.
* ``mean_field``: deterministic logistic mean-field annealing of the binary form.

All random draws come from ``numpy.random.Generator`` streams derived with
:func:`dptrack.seeding.derive_seed` from ``(seed, method, restart)``; the numba
kernels only consume pre-drawn arrays.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numba
import numpy as np

from .errors import CapacityError, ContractError
from .ising import (
    IsingProblem,
    QuboProblem,
    binary_to_spins,
    ising_energy,
    ising_to_qubo,
    qubo_energy,
    qubo_to_ising,
    spins_to_binary,
)
from .seeding import rng_for

BRUTE_FORCE_MAX_N = 25
METHODS = ("exact", "sa", "sqa", "meanfield")


# -- parameter types -----------------------------------------------------------


def geometric_ladder(start: float, stop: float, steps: int) -> tuple[float, ...]:
    if steps == 1:
        return (float(start),)
    return tuple(float(t) for t in np.geomspace(start, stop, steps))


def linear_ladder(start: float, stop: float, steps: int) -> tuple[float, ...]:
    if steps == 1:
        return (float(start),)
    return tuple(float(t) for t in np.linspace(start, stop, steps))


def _check_ladder(values, name: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ContractError(f"{name} must be positive and finite")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ContractError(f"{name} must be strictly decreasing")
    return values


@dataclass(frozen=True)
class AnnealSchedule:
    temperatures: tuple[float, ...]
    sweeps_per_temperature: int = 40
    restarts: int = 50
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "temperatures", _check_ladder(self.temperatures, "temperatures"))
        if self.sweeps_per_temperature < 0:
            raise ContractError("sweeps_per_temperature must be >= 0")
        if self.restarts < 1:
            raise ContractError("restarts must be >= 1")

    @classmethod
    def default(cls, seed: int = 0) -> "AnnealSchedule":
        """Geometric 2.0 -> 0.05 in 20 steps, 40 sweeps each, 50 restarts."""
        return cls(geometric_ladder(2.0, 0.05, 20), 40, 50, seed)


@dataclass(frozen=True)
class SqaParams:
    gammas: tuple[float, ...]
    temperature: float = 0.1
    trotter_slices: int = 16
    sweeps_per_gamma: int = 30
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gammas", _check_ladder(self.gammas, "gammas"))
        if self.trotter_slices < 2:
            raise ContractError("trotter_slices must be >= 2")
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ContractError("temperature must be positive")
        if self.sweeps_per_gamma < 0:
            raise ContractError("sweeps_per_gamma must be >= 0")
        if self.restarts < 1:
            raise ContractError("restarts must be >= 1")

    @classmethod
    def default(cls, seed: int = 0) -> "SqaParams":
        """Linear Gamma 3.0 -> 0.05 in 30 steps, P=16, T=0.1, 30 sweeps per step."""
        return cls(linear_ladder(3.0, 0.05, 30), 0.1, 16, 30, 4, seed)

    def j_perp(self, gamma: float) -> float:
        return replica_coupling(gamma, self.trotter_slices, self.temperature)


@dataclass(frozen=True)
class MeanFieldParams:
    temperatures: tuple[float, ...]
    tolerance: float = 1e-4
    max_sweeps: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.temperatures:
            raise ContractError("mean-field schedule is empty")
        object.__setattr__(self, "temperatures", _check_ladder(self.temperatures, "temperatures"))
        if self.max_sweeps < 1:
            raise ContractError("max_sweeps must be >= 1")

    @classmethod
    def default(cls, seed: int = 0) -> "MeanFieldParams":
        return cls(geometric_ladder(2.0, 0.02, 25), 1e-4, 100, seed)


def replica_coupling(gamma: float, slices: int, temperature: float) -> float:
    pt = slices * temperature
    return -(pt / 2.0) * math.log(math.tanh(gamma / pt))


# -- results -------------------------------------------------------------------


@dataclass
class SolveResult:
    method: str
    best_state: np.ndarray
    best_energy: float
    restart_energies: list[float]
    seed: int
    domain: str = "spin"
    acceptance_rate: float | None = None
    params: dict[str, Any] = field(default_factory=dict)
    # (restart, step, temperature or gamma, best energy so far)
    trace: list[tuple[int, int, float, float]] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.best_state.size)

    def to_dict(self) -> dict[str, Any]:
        state = self.best_state.astype(int).tolist()
        return {
            "method": self.method,
            "seed": self.seed,
            "n": self.n,
            "domain": self.domain,
            "best_energy": self.best_energy,
            "best_state": state,
            "restart_energies": list(self.restart_energies),
            "acceptance_rate": self.acceptance_rate,
            "params": self.params,
            "trace": [list(row) for row in self.trace],
            "extras": self.extras,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SolveResult":
        return cls(
            method=d["method"],
            best_state=np.asarray(d["best_state"], dtype=float),
            best_energy=float(d["best_energy"]),
            restart_energies=[float(e) for e in d["restart_energies"]],
            seed=int(d["seed"]),
            domain=d.get("domain", "spin"),
            acceptance_rate=d.get("acceptance_rate"),
            params=d.get("params", {}),
            trace=[tuple(r) for r in d.get("trace", [])],
            extras=d.get("extras", {}),
        )


def _audited(p: IsingProblem, state: np.ndarray, tracked: float) -> float:
    exact = ising_energy(p, state)
    scale = 1.0 + np.abs(p.h).sum() + np.abs(p.J).sum() + abs(p.offset)
    if abs(exact - tracked) > 1e-9 * scale:
        raise AssertionError(f"tracked energy {tracked!r} disagrees with recomputed {exact!r}")
    return exact


def _random_spins(rng: np.random.Generator, shape) -> np.ndarray:
    return np.where(rng.random(shape) < 0.5, -1.0, 1.0)


def _sweep_orders(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    base = np.tile(np.arange(n, dtype=np.int64), (count, 1))
    return rng.permuted(base, axis=1) if count and n else base


# -- exact ---------------------------------------------------------------------


@numba.njit(cache=True)
def _energy(K, h, s):
    e = 0.0
    n = s.size
    for i in range(n):
        acc = 0.0
        for j in range(i + 1, n):
            acc += K[i, j] * s[j]
        e += s[i] * (acc + h[i])
    return e


@numba.njit(cache=True)
def _gray_enumerate(K, h, tol):
    n = h.size
    s = -np.ones(n)
    field = h.copy()
    for i in range(n):
        for j in range(n):
            field[i] += K[i, j] * s[j]
    e = _energy(K, h, s)
    best_e = e
    # lexicographic rank of the state: spin 0 is the most significant bit, +1 -> 1
    code = 0
    best_code = 0
    total = 1 << n
    for k in range(1, total):
        # flip the spin at the position of the lowest set bit of k
        bit = 0
        while not (k >> bit) & 1:
            bit += 1
        i = n - 1 - bit
        old = s[i]
        e -= 2.0 * old * field[i]
        s[i] = -old
        for j in range(n):
            field[j] -= 2.0 * old * K[j, i]
        code ^= 1 << bit
        if (k & 4095) == 0:
            e = _energy(K, h, s)
        if e < best_e - tol:
            best_e = e
            best_code = code
        elif e <= best_e + tol and code < best_code:
            best_code = code
            if e < best_e:
                best_e = e
    return best_code


def brute_force(p: IsingProblem) -> SolveResult:
    """Exact minimum by enumeration.

    Ties (energies within ``1e-12`` of the problem's absolute scale) go to the
    lexicographically smallest state with -1 ordered before +1.
    """
    n = p.n
    if n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"brute force supports n <= {BRUTE_FORCE_MAX_N}, got {n}")
    scale = 1.0 + np.abs(p.h).sum() + np.abs(p.J).sum()
    code = _gray_enumerate(p.symmetric_J(), p.h.copy(), 1e-12 * scale) if n else 0
    state = np.array([1.0 if (code >> (n - 1 - i)) & 1 else -1.0 for i in range(n)])
    energy = ising_energy(p, state)
    return SolveResult("exact", state, energy, [energy], seed=0, params={})


# -- simulated annealing -------------------------------------------------------


@numba.njit(cache=True)
def _metropolis_run(K, h, s, temps, sweeps, orders, uniforms, e0):
    """One annealing run in place on ``s``.

    Returns (best state, best energy, per-step best energies, accepted count).
    """
    n = s.size
    field = h.copy()
    for i in range(n):
        for j in range(n):
            field[i] += K[i, j] * s[j]
    e = e0
    best_e = e
    best_s = s.copy()
    step_best = np.empty(temps.size)
    accepted = 0
    row = 0
    for t in range(temps.size):
        T = temps[t]
        for _ in range(sweeps):
            for k in range(n):
                i = orders[row, k]
                dE = -2.0 * s[i] * field[i]
                if dE <= 0.0 or uniforms[row, k] < math.exp(-dE / T):
                    old = s[i]
                    s[i] = -old
                    for j in range(n):
                        field[j] -= 2.0 * old * K[j, i]
                    e += dE
                    accepted += 1
                    if e < best_e:
                        best_e = e
                        best_s[:] = s
            row += 1
        step_best[t] = best_e
    return best_s, best_e, step_best, accepted


def simulated_anneal(p: IsingProblem, sched: AnnealSchedule) -> SolveResult:
    n = p.n
    K = p.symmetric_J()
    h = p.h.copy()
    temps = np.asarray(sched.temperatures, dtype=float)
    sweeps_total = temps.size * sched.sweeps_per_temperature
    best_state = None
    best_energy = math.inf
    restart_energies = []
    trace = []
    accepted = proposed = 0
    for r in range(sched.restarts):
        rng = rng_for(sched.seed, "sa", r)
        s = _random_spins(rng, n)
        orders = _sweep_orders(rng, sweeps_total, n)
        uniforms = rng.random((sweeps_total, n))
        e0 = ising_energy(p, s) - p.offset
        bs, be, step_best, acc = _metropolis_run(
            K, h, s, temps, sched.sweeps_per_temperature, orders, uniforms, e0
        )
        be = _audited(p, bs, be + p.offset)
        restart_energies.append(be)
        trace.extend((r, k, float(T), float(v) + p.offset)
                     for k, (T, v) in enumerate(zip(temps, step_best)))
        accepted += int(acc)
        proposed += sweeps_total * n
        if be < best_energy:
            best_energy, best_state = be, bs
    return SolveResult(
        "sa", best_state, best_energy, restart_energies, sched.seed,
        acceptance_rate=accepted / proposed if proposed else None,
        params=_params_dict(sched), trace=trace,
    )


@numba.njit(cache=True)
def _metropolis_counts(K, h, s, T, orders, uniforms):
    """Fixed-temperature chain; histogram of the state code after every sweep."""
    n = s.size
    counts = np.zeros(1 << n, dtype=np.int64)
    field = h.copy()
    for i in range(n):
        for j in range(n):
            field[i] += K[i, j] * s[j]
    for row in range(orders.shape[0]):
        for k in range(n):
            i = orders[row, k]
            dE = -2.0 * s[i] * field[i]
            if dE <= 0.0 or uniforms[row, k] < math.exp(-dE / T):
                old = s[i]
                s[i] = -old
                for j in range(n):
                    field[j] -= 2.0 * old * K[j, i]
        code = 0
        for i in range(n):
            code = 2 * code + (1 if s[i] > 0 else 0)
        counts[code] += 1
    return counts


def metropolis_histogram(p: IsingProblem, temperature: float, sweeps: int,
                         seed: int = 0, chunk: int = 100_000) -> np.ndarray:
    """Visit counts of each state (lexicographic, -1 before +1) at fixed temperature.

    The chain runs the same Metropolis move as :func:`simulated_anneal` and
    records the state once per sweep. Intended for small ``n``.
    """
    if not temperature > 0:
        raise ContractError("temperature must be positive")
    if p.n > 16:
        raise CapacityError("histogram sampling supports n <= 16")
    rng = rng_for(seed, "metropolis-histogram")
    K = p.symmetric_J()
    s = _random_spins(rng, p.n)
    counts = np.zeros(1 << p.n, dtype=np.int64)
    done = 0
    while done < sweeps:
        m = min(chunk, sweeps - done)
        counts += _metropolis_counts(K, p.h.copy(), s, float(temperature),
                                     _sweep_orders(rng, m, p.n), rng.random((m, p.n)))
        done += m
    return counts


# -- simulated quantum annealing -------------------------------------------------


@numba.njit(cache=True)
def _sqa_run(K, h, s, j_perps, sweeps, T_eff, orders, uniforms, energies):
    """Path-integral annealing of ``s`` (slices x spins) in place.

    ``energies`` holds each slice's classical energy and is kept current.
    Returns (best slice state, best classical energy, per-step best, accepted).
    """
    P, n = s.shape
    field = np.empty((P, n))
    for p in range(P):
        for i in range(n):
            acc = h[i]
            for j in range(n):
                acc += K[i, j] * s[p, j]
            field[p, i] = acc
    best_e = energies[0]
    best_s = s[0].copy()
    for p in range(1, P):
        if energies[p] < best_e:
            best_e = energies[p]
            best_s[:] = s[p]
    step_best = np.empty(j_perps.size)
    accepted = 0
    row = 0
    for g in range(j_perps.size):
        jp = j_perps[g]
        for _ in range(sweeps):
            for p in range(P):
                up = (p + 1) % P
                dn = (p - 1 + P) % P
                for k in range(n):
                    i = orders[row, k]
                    si = s[p, i]
                    d_class = -2.0 * si * field[p, i]
                    d_total = d_class + 2.0 * jp * si * (s[up, i] + s[dn, i])
                    if d_total <= 0.0 or uniforms[row, k] < math.exp(-d_total / T_eff):
                        s[p, i] = -si
                        for j in range(n):
                            field[p, j] -= 2.0 * si * K[j, i]
                        energies[p] += d_class
                        accepted += 1
                row += 1
            for p in range(P):
                if energies[p] < best_e:
                    best_e = energies[p]
                    best_s[:] = s[p]
        step_best[g] = best_e
    return best_s, best_e, step_best, accepted


def replica_energy(p: IsingProblem, slices: np.ndarray, j_perp: float) -> float:
    """Energy of the replica ring: classical terms of every slice minus the
    inter-slice alignment ``J_perp * sum_{p,i} s_{p,i} s_{p+1,i}``."""
    slices = np.asarray(slices, dtype=float)
    classical = float(np.sum(ising_energy(p, slices))) if slices.shape[1] else p.offset * len(slices)
    ring = float(np.sum(slices * np.roll(slices, -1, axis=0)))
    return classical - j_perp * ring


def slice_agreement(slices: np.ndarray) -> float:
    """Fraction of spins on which every replica agrees."""
    slices = np.asarray(slices)
    if slices.shape[1] == 0:
        return 1.0
    return float(np.mean(np.all(slices == slices[0], axis=0)))


def simulated_quantum_anneal(p: IsingProblem, params: SqaParams) -> SolveResult:
    n = p.n
    P = params.trotter_slices
    K = p.symmetric_J()
    j_perps = np.array([params.j_perp(g) for g in params.gammas])
    T_eff = P * params.temperature
    rows = len(params.gammas) * params.sweeps_per_gamma * P
    best_state = None
    best_energy = math.inf
    restart_energies = []
    trace = []
    agreement = []
    accepted = 0
    for r in range(params.restarts):
        rng = rng_for(params.seed, "sqa", r)
        s = _random_spins(rng, (P, n))
        orders = _sweep_orders(rng, rows, n)
        uniforms = rng.random((rows, n))
        energies = (ising_energy(p, s) - p.offset) if n else np.zeros(P)
        bs, be, step_best, acc = _sqa_run(
            K, p.h.copy(), s, j_perps, params.sweeps_per_gamma, T_eff, orders, uniforms,
            np.array(energies, dtype=float),
        )
        be = _audited(p, bs, be + p.offset)
        restart_energies.append(be)
        agreement.append(slice_agreement(s))
        trace.extend((r, k, float(g), float(v) + p.offset)
                     for k, (g, v) in enumerate(zip(params.gammas, step_best)))
        accepted += int(acc)
        if be < best_energy:
            best_energy, best_state = be, bs
    proposed = rows * n * params.restarts
    return SolveResult(
        "sqa", best_state, best_energy, restart_energies, params.seed,
        acceptance_rate=accepted / proposed if proposed else None,
        params=_params_dict(params), trace=trace,
        extras={"final_slice_agreement": agreement},
    )


# -- mean field ------------------------------------------------------------------


@numba.njit(cache=True)
def _logistic(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@numba.njit(cache=True)
def _mean_field_run(W, b, act, temps, orders, tol, max_sweeps):
    """Sequential logistic updates ``a_i <- sigma((b_i + sum_j W_ij a_j) / T)``.

    ``orders`` supplies one visiting order per (temperature, sweep) slot.
    Returns the number of sweeps done at each temperature.
    """
    n = act.size
    used = np.zeros(temps.size, dtype=np.int64)
    for t in range(temps.size):
        T = temps[t]
        for sweep in range(max_sweeps):
            row = t * max_sweeps + sweep
            change = 0.0
            for k in range(n):
                i = orders[row, k]
                u = b[i]
                for j in range(n):
                    u += W[i, j] * act[j]
                new = _logistic(u / T)
                d = abs(new - act[i])
                if d > change:
                    change = d
                act[i] = new
            used[t] = sweep + 1
            if change < tol:
                break
    return used


def mean_field(W: np.ndarray, bias: np.ndarray, params: MeanFieldParams,
               stage: str = "meanfield") -> tuple[np.ndarray, np.ndarray]:
    """Anneal continuous activations in [0, 1] for the binary energy
    ``-1/2 a^T W a - b^T a`` (``W`` symmetric with zero diagonal).

    Activations start at 1/2 plus a seeded jitter of at most 1e-3.
    Returns the final activations and the sweeps used per temperature.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    rng = rng_for(params.seed, stage)
    act = 0.5 + rng.uniform(-1e-3, 1e-3, n)
    temps = np.asarray(params.temperatures, dtype=float)
    orders = _sweep_orders(rng, temps.size * params.max_sweeps, n)
    used = _mean_field_run(W, np.asarray(bias, dtype=float), act, temps, orders,
                           float(params.tolerance), int(params.max_sweeps))
    return act, used


def mean_field_qubo(p: QuboProblem, params: MeanFieldParams) -> SolveResult:
    U = np.triu(p.Q, 1)
    W = -(U + U.T)
    act, used = mean_field(W, -np.diag(p.Q), params)
    y = (act > 0.5).astype(float)
    e = qubo_energy(p, y)
    trace = [(0, k, float(T), e) for k, T in enumerate(params.temperatures)]
    return SolveResult(
        "meanfield", y, e, [e], params.seed, domain="binary",
        params=_params_dict(params), trace=trace,
        extras={"sweeps_per_temperature": used.tolist()},
    )


# -- dispatch --------------------------------------------------------------------


def _params_dict(params) -> dict[str, Any]:
    d = asdict(params)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def default_params(method: str, seed: int = 0):
    if method == "exact":
        return None
    if method == "sa":
        return AnnealSchedule.default(seed)
    if method == "sqa":
        return SqaParams.default(seed)
    if method == "meanfield":
        return MeanFieldParams.default(seed)
    raise ContractError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def solve_ising(p: IsingProblem, method: str, params=None) -> SolveResult:
    if method not in METHODS:
        raise ContractError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if params is None:
        params = default_params(method)
    if method == "exact":
        return brute_force(p)
    if method == "sa":
        return simulated_anneal(p, params)
    if method == "sqa":
        return simulated_quantum_anneal(p, params)
    res = mean_field_qubo(ising_to_qubo(p), params)
    s = binary_to_spins(res.best_state)
    e = ising_energy(p, s)
    res.best_state, res.best_energy, res.domain = s, e, "spin"
    res.restart_energies = [e]
    res.trace = [(r, k, c, e) for r, k, c, _ in res.trace]
    return res


def solve_qubo(p: QuboProblem, method: str, params=None) -> SolveResult:
    """Minimize a QUBO; the result is in the binary domain and includes the offset."""
    if method not in METHODS:
        raise ContractError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if params is None:
        params = default_params(method)
    if method == "meanfield":
        return mean_field_qubo(p, params)
    res = solve_ising(qubo_to_ising(p), method, params)
    y = spins_to_binary(res.best_state)
    e = qubo_energy(p, y)
    res.best_state, res.best_energy, res.domain = y, e, "binary"
    res.restart_energies = [float(v) for v in res.restart_energies]
    return res


def solve(p: IsingProblem | QuboProblem, method: str, params=None) -> SolveResult:
    if isinstance(p, QuboProblem):
        return solve_qubo(p, method, params)
    return solve_ising(p, method, params)

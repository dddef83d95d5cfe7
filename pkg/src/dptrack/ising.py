"""Ising and QUBO problems, the spin/binary transforms between them, and text I/O.

Sign convention: the Ising energy is ``sum_{i<j} J_ij s_i s_j + sum_i h_i s_i``
with no leading minus. Solvers minimize whatever energy is given.

Both problem types are stored densely. ``J`` is strictly upper triangular and
``Q`` is upper triangular with the linear terms on its diagonal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, ParseError


def _as_upper(M: np.ndarray, n: int, strict: bool, name: str) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.shape != (n, n):
        raise ContractError(f"{name} must be {n}x{n}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ContractError(f"{name} has non-finite entries")
    upper = np.triu(M, 1) + np.tril(M, -1).T
    if strict:
        if np.any(np.diag(M) != 0):
            raise ContractError(f"{name} must not carry self-couplings")
    else:
        upper += np.diag(np.diag(M))
    return upper


@dataclass(frozen=True, eq=False)
class IsingProblem:
    h: np.ndarray
    J: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=float).reshape(-1)
        if not np.all(np.isfinite(h)):
            raise ContractError("h has non-finite entries")
        J = _as_upper(self.J, h.size, strict=True, name="J")
        h.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.h.size

    @classmethod
    def zeros(cls, n: int) -> "IsingProblem":
        return cls(np.zeros(n), np.zeros((n, n)))

    @classmethod
    def from_terms(cls, n: int, h: dict | None = None, J: dict | None = None,
                   offset: float = 0.0) -> "IsingProblem":
        hv = np.zeros(n)
        Jm = np.zeros((n, n))
        for i, v in (h or {}).items():
            hv[i] += v
        for (i, j), v in (J or {}).items():
            if i == j:
                raise ContractError(f"self-coupling on spin {i}")
            Jm[min(i, j), max(i, j)] += v
        return cls(hv, Jm, offset)

    def symmetric_J(self) -> np.ndarray:
        """Symmetric coupling matrix ``K`` with ``K_ij = K_ji = J_ij``."""
        return self.J + self.J.T

    def couplings(self):
        """Yield ``(i, j, J_ij)`` for every nonzero coupling, i<j ascending."""
        for i, j in zip(*np.nonzero(self.J)):
            yield int(i), int(j), float(self.J[i, j])

    def max_abs(self) -> float:
        vals = np.concatenate([np.abs(self.h), np.abs(self.J).ravel()])
        return float(vals.max()) if vals.size else 0.0

    def subproblem(self, indices) -> "IsingProblem":
        """Problem restricted to ``indices`` (in that order); the offset is kept."""
        idx = np.asarray(indices, dtype=int)
        K = self.symmetric_J()[np.ix_(idx, idx)]
        return IsingProblem(self.h[idx], np.triu(K, 1), self.offset)

    def __eq__(self, other):
        if not isinstance(other, IsingProblem):
            return NotImplemented
        return (np.array_equal(self.h, other.h) and np.array_equal(self.J, other.J)
                and self.offset == other.offset)

    def __hash__(self):
        return hash((self.h.tobytes(), self.J.tobytes(), self.offset))


@dataclass(frozen=True, eq=False)
class QuboProblem:
    Q: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ContractError(f"Q must be square, got shape {Q.shape}")
        Q = _as_upper(Q, Q.shape[0], strict=False, name="Q")
        if not math.isfinite(self.offset):
            raise ContractError("offset must be finite")
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @classmethod
    def zeros(cls, n: int, offset: float = 0.0) -> "QuboProblem":
        return cls(np.zeros((n, n)), offset)

    def diag_upper(self) -> tuple[np.ndarray, np.ndarray]:
        """Split ``Q`` into its diagonal part and its strictly upper part."""
        return np.diag(np.diag(self.Q)), np.triu(self.Q, 1)

    def symmetric(self) -> np.ndarray:
        """Symmetric matrix giving the same quadratic form on every real vector."""
        d, u = self.diag_upper()
        return d + (u + u.T) / 2.0

    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return np.array_equal(self.Q, other.Q) and self.offset == other.offset

    def __hash__(self):
        return hash((self.Q.tobytes(), self.offset))


# -- energies ----------------------------------------------------------------


def _states(x, n: int, allowed: tuple[float, float], name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise ContractError(f"{name} length {x.shape[-1:]} does not match n={n}")
    if not np.all((x == allowed[0]) | (x == allowed[1])):
        raise ContractError(f"{name} values must be in {allowed}")
    return x


def ising_energy(p: IsingProblem, s) -> float | np.ndarray:
    """Energy of one spin vector, or of each row of a 2-D batch."""
    s = _states(s, p.n, (-1.0, 1.0), "spin state")
    e = np.einsum("...i,ij,...j->...", s, p.J, s) + s @ p.h + p.offset
    return float(e) if e.ndim == 0 else e


def qubo_energy(p: QuboProblem, y) -> float | np.ndarray:
    y = _states(y, p.n, (0.0, 1.0), "binary state")
    e = np.einsum("...i,ij,...j->...", y, p.Q, y) + p.offset
    return float(e) if e.ndim == 0 else e


def quadratic_form(M: np.ndarray, x) -> float | np.ndarray:
    """``x^T M x`` for any real vector (or batch of vectors) ``x``."""
    x = np.asarray(x, dtype=float)
    e = np.einsum("...i,ij,...j->...", x, M, x)
    return float(e) if e.ndim == 0 else e


def all_spin_states(n: int) -> np.ndarray:
    """Every state in {-1,+1}^n, lexicographic with -1 before +1."""
    if n == 0:
        return np.zeros((1, 0))
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def all_binary_states(n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0))
    return np.array(list(itertools.product((0.0, 1.0), repeat=n)))


def spins_to_binary(s) -> np.ndarray:
    return (1.0 + np.asarray(s, dtype=float)) / 2.0


def binary_to_spins(y) -> np.ndarray:
    return 2.0 * np.asarray(y, dtype=float) - 1.0


# -- polynomial squaring -----------------------------------------------------


def square_polynomial(coeffs) -> QuboProblem:
    """Upper-triangular ``Q`` with ``x^T Q x == (sum_i a_i x_i)^2``.

    Diagonal entries are ``a_i^2`` and the entries above the diagonal are
    ``2 a_i a_j``.
    """
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    if a.size < 1:
        raise ContractError("need at least one coefficient")
    outer = np.outer(a, a)
    return QuboProblem(np.diag(np.diag(outer)) + 2.0 * np.triu(outer, 1))


def symmetric_square(coeffs) -> np.ndarray:
    """The symmetric representation ``a a^T`` of the same squared form."""
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    return np.outer(a, a)


# -- spin <-> binary ----------------------------------------------------------


def ising_to_qubo(p: IsingProblem) -> QuboProblem:
    """Substitute ``s = 2y - 1`` and collect terms.

    ``J_ij s_i s_j -> 4 J_ij y_i y_j - 2 J_ij (y_i + y_j) + J_ij`` and
    ``h_i s_i -> 2 h_i y_i - h_i``.
    """
    K = p.symmetric_J()
    Q = 4.0 * p.J + np.diag(2.0 * p.h - 2.0 * K.sum(axis=1))
    offset = p.offset + p.J.sum() - p.h.sum()
    return QuboProblem(Q, offset)


def qubo_to_ising(p: QuboProblem) -> IsingProblem:
    """Substitute ``y = (1 + s) / 2``; the constant lands in ``offset``."""
    d = np.diag(p.Q)
    U = np.triu(p.Q, 1)
    J = U / 4.0
    h = d / 2.0 + (U + U.T).sum(axis=1) / 4.0
    offset = p.offset + d.sum() / 2.0 + U.sum() / 4.0
    return IsingProblem(h, J, offset)


# -- text formats --------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps_ising(p: IsingProblem) -> str:
    lines = [f"ising {p.n}"]
    if p.offset != 0.0:
        lines.append(f"offset {_fmt(p.offset)}")
    for i in range(p.n):
        if p.h[i] != 0.0:
            lines.append(f"h {i} {_fmt(p.h[i])}")
    for i, j, v in p.couplings():
        lines.append(f"J {i} {j} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def dumps_qubo(p: QuboProblem) -> str:
    lines = [f"qubo {p.n} {_fmt(p.offset)}"]
    for i, j in zip(*np.nonzero(p.Q)):
        lines.append(f"{i} {j} {_fmt(p.Q[i, j])}")
    return "\n".join(lines) + "\n"


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: expected an integer, got {tok!r}") from None


def _parse_float(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: expected a number, got {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"line {lineno}: non-finite value {tok!r}")
    return v


def _index(tok: str, n: int, lineno: int) -> int:
    i = _parse_int(tok, lineno)
    if not 0 <= i < n:
        raise ParseError(f"line {lineno}: index {i} out of range for n={n}")
    return i


def loads_ising(text: str) -> IsingProblem:
    records = _records(text)
    try:
        lineno, head = next(records)
    except StopIteration:
        raise ParseError("line 1: empty Ising file") from None
    if len(head) != 2 or head[0] != "ising":
        raise ParseError(f"line {lineno}: expected header 'ising <n>'")
    n = _parse_int(head[1], lineno)
    if n < 0:
        raise ParseError(f"line {lineno}: negative size")
    h = np.zeros(n)
    J = np.zeros((n, n))
    offset = 0.0
    seen: set[tuple] = set()
    for lineno, tok in records:
        kind = tok[0]
        if kind == "h" and len(tok) == 3:
            key = ("h", _index(tok[1], n, lineno))
            if key in seen:
                raise ParseError(f"line {lineno}: duplicate field for spin {key[1]}")
            h[key[1]] = _parse_float(tok[2], lineno)
        elif kind == "J" and len(tok) == 4:
            i, j = _index(tok[1], n, lineno), _index(tok[2], n, lineno)
            if not i < j:
                raise ParseError(f"line {lineno}: coupling indices must satisfy i<j")
            key = ("J", i, j)
            if key in seen:
                raise ParseError(f"line {lineno}: duplicate coupling ({i}, {j})")
            J[i, j] = _parse_float(tok[3], lineno)
        elif kind == "offset" and len(tok) == 2:
            key = ("offset",)
            if key in seen:
                raise ParseError(f"line {lineno}: duplicate offset")
            offset = _parse_float(tok[1], lineno)
        else:
            raise ParseError(f"line {lineno}: unrecognized record {' '.join(tok)!r}")
        seen.add(key)
    return IsingProblem(h, J, offset)


def loads_qubo(text: str) -> QuboProblem:
    records = _records(text)
    try:
        lineno, head = next(records)
    except StopIteration:
        raise ParseError("line 1: empty QUBO file") from None
    if len(head) != 3 or head[0] != "qubo":
        raise ParseError(f"line {lineno}: expected header 'qubo <n> <offset>'")
    n = _parse_int(head[1], lineno)
    if n < 0:
        raise ParseError(f"line {lineno}: negative size")
    offset = _parse_float(head[2], lineno)
    Q = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for lineno, tok in records:
        if len(tok) != 3:
            raise ParseError(f"line {lineno}: expected '<i> <j> <value>'")
        i, j = _index(tok[0], n, lineno), _index(tok[1], n, lineno)
        if i > j:
            raise ParseError(f"line {lineno}: entries must satisfy i<=j")
        if (i, j) in seen:
            raise ParseError(f"line {lineno}: duplicate entry ({i}, {j})")
        seen.add((i, j))
        Q[i, j] = _parse_float(tok[2], lineno)
    return QuboProblem(Q, offset)


def save_ising(p: IsingProblem, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps_ising(p), encoding="utf-8")
    return path


def save_qubo(p: QuboProblem, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps_qubo(p), encoding="utf-8")
    return path


def load_ising(path: str | Path) -> IsingProblem:
    return loads_ising(Path(path).read_text(encoding="utf-8"))


def load_qubo(path: str | Path) -> QuboProblem:
    return loads_qubo(Path(path).read_text(encoding="utf-8"))


def load_problem(path: str | Path) -> IsingProblem | QuboProblem:
    """Load either format, dispatching on the header keyword."""
    text = Path(path).read_text(encoding="utf-8")
    for _, tok in _records(text):
        if tok[0] == "ising":
            return loads_ising(text)
        if tok[0] == "qubo":
            return loads_qubo(text)
        break
    raise ParseError(f"line 1: {path} is neither an Ising nor a QUBO file")

"""Pauli/Kronecker operators, the Mermin-Peres magic square and its projectors.

Basis states of the four-qubit space are indexed as ``8*x1 + 4*x2 + 2*x3 + x4``
with qubit 1 most significant, so Alice's qubits (1, 2) form the left tensor
factor and Bob's qubits (3, 4) the right one.  All matrices are dense
``complex128`` numpy arrays and are returned read-only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-12

_SUPPORTED_DIMS = (2, 4, 16)

_PAULI = {
    "I2": [[1, 0], [0, 1]],
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
}

# Alphabetic codes used in file formats: alpha -> a, beta -> b, gamma -> g.
OBSERVABLE_CODES = {
    "A": "A", "B": "B", "C": "C",
    "a": "a", "b": "b", "c": "c",
    "α": "a", "β": "b", "γ": "g",
}

_ALIASES = {"alpha": "α", "beta": "β", "gamma": "γ"}

# Row-major layout of the square; entries are (left, right) Pauli factors.
_SQUARE_LAYOUT = (
    (("A", "Z", "I2"), ("B", "I2", "Z"), ("C", "Z", "Z")),
    (("a", "I2", "X"), ("b", "X", "I2"), ("c", "X", "X")),
    (("α", "Z", "X"), ("β", "X", "Z"), ("γ", "Y", "Y")),
)

# Context label -> observables in the order Alice lists her outcomes.
CONTEXT_ORDER = ("CAB", "cba", "βγα", "αAa", "βbB", "cγC")
_CONTEXT_TRIPLES = {
    "CAB": ("C", "A", "B"),
    "cba": ("c", "b", "a"),
    "βγα": ("β", "γ", "α"),
    "αAa": ("α", "A", "a"),
    "βbB": ("β", "b", "B"),
    "cγC": ("c", "γ", "C"),
}

SIGN_TRIPLES: tuple[tuple[int, int, int], ...] = tuple(
    itertools.product((1, -1), repeat=3)
)


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


def _check_dim(m: np.ndarray, allowed=_SUPPORTED_DIMS) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] not in allowed:
        raise ValueError(f"unsupported dimension {m.shape[0]}; expected one of {allowed}")
    return m.shape[0]


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    return max_abs(m - m.conj().T) <= atol


def is_projector(m: np.ndarray, atol: float = ATOL) -> bool:
    return is_hermitian(m, atol) and max_abs(m @ m - m) <= atol


def identity(dim: int) -> np.ndarray:
    if dim not in _SUPPORTED_DIMS:
        raise ValueError(f"unsupported dimension {dim}")
    return _frozen(np.eye(dim))


def pauli(name: str) -> np.ndarray:
    """Return one of ``I2``, ``X``, ``Y``, ``Z`` as a 2x2 complex matrix."""
    try:
        return _frozen(_PAULI[name])
    except KeyError:
        raise ValueError(f"unknown Pauli label {name!r}") from None


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    _check_dim(a)
    _check_dim(b)
    dim = a.shape[0] * b.shape[0]
    if dim not in (4, 16):
        raise ValueError(f"Kronecker product of dimension {dim} is not supported")
    return _frozen(np.kron(a, b))


@dataclass(frozen=True, eq=False)
class Observable:
    """A dichotomic two-qubit observable together with its eigen-projectors."""

    name: str
    matrix: np.ndarray
    proj_plus: np.ndarray = field(init=False, repr=False)
    proj_minus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        _check_dim(m, (4,))
        if max_abs(m @ m - np.eye(4)) > ATOL:
            raise ValueError(f"observable {self.name!r} does not square to the identity")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "proj_plus", _frozen((np.eye(4) + m) / 2))
        object.__setattr__(self, "proj_minus", _frozen((np.eye(4) - m) / 2))

    @property
    def code(self) -> str:
        return OBSERVABLE_CODES[self.name]

    def projector(self, sign: int) -> np.ndarray:
        if sign == 1:
            return self.proj_plus
        if sign == -1:
            return self.proj_minus
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")


@dataclass(frozen=True, eq=False)
class MeasurementContext:
    label: str
    triple: tuple[Observable, Observable, Observable]
    parity: int

    @property
    def code(self) -> str:
        return "".join(OBSERVABLE_CODES[ch] for ch in self.label)

    def position(self, obs: Observable | str) -> int:
        name = obs if isinstance(obs, str) else obs.name
        for i, o in enumerate(self.triple):
            if o.name == name:
                return i
        raise ValueError(f"{name!r} is not measured in context {self.label}")


class MagicSquare:
    """The 3x3 grid of observables with rows (A,B,C), (a,b,c), (α,β,γ)."""

    def __init__(self):
        grid = []
        for row in _SQUARE_LAYOUT:
            grid.append(
                tuple(Observable(name, kron(pauli(l), pauli(r))) for name, l, r in row)
            )
        self.grid: tuple[tuple[Observable, ...], ...] = tuple(grid)
        self._by_name = {o.name: o for row in self.grid for o in row}
        self._contexts = {}
        for label in CONTEXT_ORDER:
            triple = tuple(self._by_name[n] for n in _CONTEXT_TRIPLES[label])
            prod = triple[0].matrix @ triple[1].matrix @ triple[2].matrix
            parity = int(round(prod[0, 0].real))
            if max_abs(prod - parity * np.eye(4)) > ATOL:
                raise AssertionError(f"context {label} product is not ±I4")
            self._contexts[label] = MeasurementContext(label, triple, parity)

    def __getitem__(self, name: str) -> Observable:
        return self.observable(name)

    def observable(self, name: str) -> Observable:
        name = _ALIASES.get(name, name)
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"unknown observable {name!r}") from None

    @property
    def observables(self) -> tuple[Observable, ...]:
        return tuple(o for row in self.grid for o in row)

    def context(self, label: str) -> MeasurementContext:
        if label not in self._contexts:
            by_code = {c.code: c for c in self._contexts.values()}
            if label in by_code:
                return by_code[label]
            raise ValueError(f"unknown context {label!r}")
        return self._contexts[label]

    @property
    def contexts(self) -> tuple[MeasurementContext, ...]:
        return tuple(self._contexts[label] for label in CONTEXT_ORDER)

    def lines(self) -> tuple[tuple[Observable, ...], ...]:
        """The three rows followed by the three columns."""
        cols = tuple(tuple(self.grid[r][c] for r in range(3)) for c in range(3))
        return self.grid + cols


_SQUARE: MagicSquare | None = None


def build_magic_square() -> MagicSquare:
    global _SQUARE
    if _SQUARE is None:
        _SQUARE = MagicSquare()
    return _SQUARE


def embed_alice(m: np.ndarray) -> np.ndarray:
    """Lift a two-qubit operator on qubits 1, 2 to the 16-dimensional space."""
    m = np.asarray(m)
    _check_dim(m, (4,))
    return _frozen(np.kron(m, np.eye(4)))


def embed_bob(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    _check_dim(m, (4,))
    return _frozen(np.kron(np.eye(4), m))


def joint_projector(ctx: MeasurementContext, signs) -> np.ndarray:
    """Product of the eigen-projectors selecting ``signs`` for each observable of ``ctx``."""
    signs = tuple(signs)
    if len(signs) != 3:
        raise ValueError(f"expected three signs, got {signs!r}")
    p = np.eye(4, dtype=np.complex128)
    for obs, sign in zip(ctx.triple, signs):
        p = p @ obs.projector(sign)
    return _frozen(p)


def projector_factor(p: np.ndarray) -> np.ndarray:
    """Return ``R`` with orthonormal rows such that ``p == R^† R``.

    Lets a quadratic form ``x^† p x`` be evaluated as ``||R x||^2``.  A zero
    projector yields an empty ``(0, dim)`` factor.
    """
    p = np.asarray(p)
    w, v = np.linalg.eigh(p)
    keep = w > 0.5
    return v[:, keep].conj().T.copy()

"""Mode unitaries, two evolution backends and matrix permanents.

Convention: a unitary ``U`` acts on creation operators column-wise,

    a†_k  ->  sum_j U[j, k] a†_j,

so the 2x2 beam-splitter block ``[[t, i r], [i r, t]]`` sends
``a†_u -> t a†_u + i r a†_l``.  Composition then reads
``evolve(evolve(s, U), V) == evolve(s, V @ U)``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import (
    UNITARY_TOL,
    CapExceededError,
    DimensionError,
    check_occupation,
    check_square,
    check_transmission,
    check_unitary,
)
from .fock import PRUNE_TOL, FockState, occupations

PHOTON_CAP = int(os.environ.get("BOSONCTX_PHOTON_CAP", 12))
PERMANENT_CAP = int(os.environ.get("BOSONCTX_PERMANENT_CAP", 20))
NAIVE_PERMANENT_CAP = 8


@dataclass(frozen=True)
class ModeUnitary:
    """Validated ``m x m`` unitary acting on mode creation operators."""

    matrix: np.ndarray = field(repr=False)
    tol: float = UNITARY_TOL

    def __post_init__(self):
        arr = check_unitary(self.matrix, self.tol).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> ModeUnitary:
        return ModeUnitary(self.matrix.conj().T, self.tol)

    def __matmul__(self, other: ModeUnitary) -> ModeUnitary:
        return ModeUnitary(self.matrix @ other.matrix, self.tol)

    @classmethod
    def identity(cls, dim: int) -> ModeUnitary:
        return cls(np.eye(dim, dtype=complex))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.ravel()],
        }

    @classmethod
    def from_dict(cls, data: dict, tol: float = UNITARY_TOL) -> ModeUnitary:
        dim = int(data["dim"])
        entries = data["entries"]
        if len(entries) != dim * dim:
            raise DimensionError(f"expected {dim * dim} entries, got {len(entries)}")
        flat = np.array([complex(re, im) for re, im in entries])
        return cls(flat.reshape(dim, dim), tol)


def load_unitary(path, tol: float = UNITARY_TOL) -> ModeUnitary:
    return ModeUnitary.from_dict(json.loads(Path(path).read_text()), tol)


def save_unitary(u: ModeUnitary, path) -> None:
    Path(path).write_text(json.dumps(u.to_dict()) + "\n")


@dataclass(frozen=True)
class BeamSplitterSpec:
    upper: int
    lower: int
    t: float = 1 / math.sqrt(2)

    def __post_init__(self):
        if self.upper == self.lower:
            raise ValueError(f"beam splitter needs two distinct modes, got {self.upper} twice")
        if self.upper < 0 or self.lower < 0:
            raise IndexError("mode indices must be non-negative")
        object.__setattr__(self, "t", check_transmission(self.t))

    @property
    def r(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.t**2))


def beamsplitter_unitary(m: int, spec: BeamSplitterSpec) -> ModeUnitary:
    """Identity on ``m`` modes except the block ``[[t, i r], [i r, t]]``."""
    if spec.upper >= m or spec.lower >= m:
        raise IndexError(f"beam splitter modes {spec.upper, spec.lower} out of range for {m} modes")
    u = np.eye(m, dtype=complex)
    u[spec.upper, spec.upper] = spec.t
    u[spec.lower, spec.lower] = spec.t
    u[spec.upper, spec.lower] = 1j * spec.r
    u[spec.lower, spec.upper] = 1j * spec.r
    return ModeUnitary(u)


def random_unitary(m: int, rng=None) -> ModeUnitary:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return ModeUnitary(q * (d / np.abs(d)))


def _as_unitary(u) -> ModeUnitary:
    return u if isinstance(u, ModeUnitary) else ModeUnitary(np.asarray(u, dtype=complex))


def evolve_substitution(s: FockState, u) -> FockState:
    """Evolve ``s`` by rewriting each creation operator through ``u``.

    Every basis ket prod_k (a†_k)^{n_k} / sqrt(n_k!) |0> is expanded as a
    polynomial in the output creation operators; a monomial with exponents
    ``m`` then contributes ``sqrt(prod m_j!)`` times its coefficient to ``|m>``.
    """
    u = _as_unitary(u)
    if s.modes != u.dim:
        raise DimensionError(f"state has {s.modes} modes, unitary has dim {u.dim}")
    mat = u.matrix
    columns = [[(j, mat[j, k]) for j in range(u.dim) if mat[j, k] != 0] for k in range(u.dim)]
    out: dict[tuple[int, ...], complex] = {}
    for key, amp in s:
        poly = {(0,) * u.dim: amp / math.sqrt(math.prod(math.factorial(c) for c in key))}
        for k, count in enumerate(key):
            for _ in range(count):
                nxt: dict[tuple[int, ...], complex] = {}
                for mono, coef in poly.items():
                    for j, ujk in columns[k]:
                        e = list(mono)
                        e[j] += 1
                        e = tuple(e)
                        nxt[e] = nxt.get(e, 0j) + coef * ujk
                poly = nxt
        for mono, coef in poly.items():
            out[mono] = out.get(mono, 0j) + coef * math.sqrt(
                math.prod(math.factorial(c) for c in mono)
            )
    return FockState(s.modes, out)


def permanent(matrix, cap: int = PERMANENT_CAP) -> complex:
    """Ryser's formula with Gray-code subset order, O(2^n n)."""
    a = check_square(matrix)
    n = a.shape[0]
    if n > cap:
        raise CapExceededError(f"permanent of order {n} exceeds cap {cap}")
    if n == 0:
        return 1 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    included = [False] * n
    prev_gray = 0
    for i in range(1, 2**n):
        gray = i ^ (i >> 1)
        col = (gray ^ prev_gray).bit_length() - 1
        prev_gray = gray
        if included[col]:
            row_sums -= a[:, col]
        else:
            row_sums += a[:, col]
        included[col] = not included[col]
        sign = -1 if gray.bit_count() % 2 else 1
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


def permanent_naive(matrix, cap: int = NAIVE_PERMANENT_CAP) -> complex:
    """Direct sum over all n! permutations. Test oracle only."""
    a = check_square(matrix)
    n = a.shape[0]
    if n > cap:
        raise CapExceededError(f"naive permanent of order {n} exceeds cap {cap}")
    rows = a.tolist()
    return complex(
        sum(math.prod(rows[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    )


def _repeat_indices(counts) -> list[int]:
    return [k for k, c in enumerate(counts) for _ in range(c)]


def transition_amplitude(u, inp, out, cap: int = PERMANENT_CAP) -> complex:
    """<out| U |inp> = Per(U[out rows, inp cols]) / sqrt(prod inp! prod out!)."""
    u = _as_unitary(u)
    inp = check_occupation(inp)
    out = check_occupation(out)
    if len(inp) != u.dim or len(out) != u.dim:
        raise DimensionError(f"occupations {inp}, {out} do not match unitary dim {u.dim}")
    if sum(inp) != sum(out):
        return 0j
    sub = u.matrix[np.ix_(_repeat_indices(out), _repeat_indices(inp))]
    norm = math.sqrt(
        math.prod(math.factorial(c) for c in inp) * math.prod(math.factorial(c) for c in out)
    )
    amp = permanent(sub, cap) / norm
    # same pruning as FockState, so both backends report exact zeros alike
    return amp if abs(amp) >= PRUNE_TOL else 0j


def output_distribution(
    u, inp, photon_cap: int = PHOTON_CAP
) -> dict[tuple[int, ...], float]:
    """Probability of every output occupation, in lexicographic order."""
    u = _as_unitary(u)
    inp = check_occupation(inp, modes=u.dim)
    n = sum(inp)
    if n > photon_cap:
        raise CapExceededError(f"{n} photons exceed photon cap {photon_cap}")
    return {
        out: abs(transition_amplitude(u, inp, out)) ** 2 for out in occupations(u.dim, n)
    }

"""Sparse Fock-space states and bosonic ladder operators.

A :class:`FockState` is an immutable map from occupation vectors (tuples of
photon counts per mode) to complex amplitudes.  All stored keys share one
photon-number sector, which passive linear optics never changes.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Iterator, Mapping
from types import MappingProxyType

from ._validation import DimensionError, check_occupation

PRUNE_TOL = 1e-14
NORM_TOL = 1e-12

Occupation = tuple[int, ...]


class ZeroNormError(ValueError):
    """Raised when normalizing a state with no weight."""


class FockState:
    """Immutable superposition of Fock basis kets with fixed photon number.

    Parameters
    ----------
    modes : int
        Number of optical modes.
    terms : mapping or iterable of (occupation, amplitude) pairs
        Repeated keys are summed.  Amplitudes with modulus below
        ``PRUNE_TOL`` are dropped.
    """

    __slots__ = ("_modes", "_terms", "_n")

    def __init__(self, modes: int, terms: Mapping | Iterable = ()):
        if int(modes) < 1:
            raise DimensionError(f"mode count must be >= 1, got {modes}")
        self._modes = int(modes)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Occupation, complex] = {}
        for key, amp in items:
            key = check_occupation(key, modes=self._modes)
            acc[key] = acc.get(key, 0j) + complex(amp)
        kept = {k: acc[k] for k in sorted(acc) if abs(acc[k]) >= PRUNE_TOL}
        sectors = {sum(k) for k in kept}
        if len(sectors) > 1:
            raise ValueError(f"terms span several photon sectors: {sorted(sectors)}")
        self._terms = MappingProxyType(kept)
        self._n = sectors.pop() if sectors else None

    @property
    def modes(self) -> int:
        return self._modes

    @property
    def n_photons(self) -> int | None:
        """Total photon number, or None for the zero state."""
        return self._n

    @property
    def terms(self) -> Mapping[Occupation, complex]:
        return self._terms

    def amplitude(self, counts) -> complex:
        return self._terms.get(tuple(int(c) for c in counts), 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self) -> Iterator[tuple[Occupation, complex]]:
        # keys were inserted sorted, so this is lexicographic
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self)
        return f"FockState(modes={self._modes}, {{{body}}})"

    def _check_same_modes(self, other: FockState) -> None:
        if not isinstance(other, FockState):
            raise TypeError(f"expected FockState, got {type(other).__name__}")
        if other._modes != self._modes:
            raise DimensionError(f"mode counts differ: {self._modes} vs {other._modes}")

    def __add__(self, other: FockState) -> FockState:
        self._check_same_modes(other)
        return FockState(self._modes, [*self._terms.items(), *other._terms.items()])

    def __sub__(self, other: FockState) -> FockState:
        return self + (-1) * other

    def __neg__(self) -> FockState:
        return (-1) * self

    def __mul__(self, scalar) -> FockState:
        c = complex(scalar)
        return FockState(self._modes, {k: c * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def allclose(self, other: FockState, atol: float = 1e-12) -> bool:
        self._check_same_modes(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)

    def to_list(self) -> list[list]:
        return [[list(k), v.real, v.imag] for k, v in self]

    def to_json(self) -> str:
        return json.dumps({"modes": self._modes, "terms": self.to_list()})

    @classmethod
    def from_list(cls, modes: int, rows) -> FockState:
        return cls(modes, [(tuple(k), complex(re, im)) for k, re, im in rows])

    @classmethod
    def from_json(cls, text: str) -> FockState:
        data = json.loads(text)
        return cls.from_list(data["modes"], data["terms"])


def make_basis(counts) -> FockState:
    """Return the normalized basis ket ``|counts>``."""
    counts = check_occupation(counts)
    return FockState(len(counts), {counts: 1.0})


def vacuum(modes: int) -> FockState:
    return make_basis((0,) * modes)


def inner_product(a: FockState, b: FockState) -> complex:
    """Return <a|b>, conjugate-linear in ``a``."""
    a._check_same_modes(b)
    if a.n_photons != b.n_photons:
        return 0j
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for key in small.terms:
        if key in large.terms:
            total += a.terms[key].conjugate() * b.terms[key]
    return total


def _check_mode(s: FockState, mode: int) -> int:
    if not 0 <= mode < s.modes:
        raise IndexError(f"mode {mode} out of range for {s.modes} modes")
    return mode


def apply_creation(s: FockState, mode: int) -> FockState:
    _check_mode(s, mode)
    out = {}
    for key, amp in s:
        k = list(key)
        k[mode] += 1
        out[tuple(k)] = amp * math.sqrt(k[mode])
    return FockState(s.modes, out)


def apply_annihilation(s: FockState, mode: int) -> FockState:
    _check_mode(s, mode)
    out = {}
    for key, amp in s:
        if key[mode] == 0:
            continue
        k = list(key)
        k[mode] -= 1
        out[tuple(k)] = amp * math.sqrt(key[mode])
    return FockState(s.modes, out)


def norm(s: FockState) -> float:
    return math.sqrt(sum(abs(v) ** 2 for v in s.terms.values()))


def normalize(s: FockState) -> FockState:
    nrm = norm(s)
    if nrm == 0.0:
        raise ZeroNormError("cannot normalize the zero state")
    return s * (1.0 / nrm)


def is_normalized(s: FockState, tol: float = NORM_TOL) -> bool:
    return abs(norm(s) ** 2 - 1.0) <= tol


def occupations(modes: int, n_photons: int) -> list[Occupation]:
    """All occupation vectors with ``n_photons`` photons, lexicographic order."""
    if modes == 1:
        return [(n_photons,)]
    out = []
    for first in range(n_photons + 1):
        out.extend((first, *rest) for rest in occupations(modes - 1, n_photons - first))
    return out

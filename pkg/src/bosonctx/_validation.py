"""Input validation helpers shared by the estimators and free functions."""

from __future__ import annotations

import numpy as np

UNITARY_TOL = 1e-12


class DimensionError(ValueError):
    """Mode counts or matrix shapes do not agree."""


class InvalidOccupationError(ValueError):
    """An occupation vector has a negative or non-integer entry."""


class NotUnitaryError(ValueError):
    """A matrix failed the unitarity residual check."""


class CapExceededError(ValueError):
    """A size guard (photon number, permanent order, cycle length) was hit."""


def check_occupation(counts, modes: int | None = None) -> tuple[int, ...]:
    try:
        values = tuple(counts)
    except TypeError:
        raise InvalidOccupationError(f"occupation must be a sequence, got {counts!r}") from None
    out = []
    for c in values:
        if isinstance(c, (bool, np.bool_)) or int(c) != c:
            raise InvalidOccupationError(f"non-integer occupation entry {c!r}")
        if c < 0:
            raise InvalidOccupationError(f"negative occupation entry in {values}")
        out.append(int(c))
    if not out:
        raise InvalidOccupationError("occupation vector needs at least one mode")
    if modes is not None and len(out) != modes:
        raise DimensionError(f"occupation {tuple(out)} has {len(out)} modes, expected {modes}")
    return tuple(out)


def check_square(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def unitarity_residual(matrix) -> float:
    arr = check_square(matrix)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0]))))


def check_unitary(matrix, tol: float = UNITARY_TOL) -> np.ndarray:
    arr = check_square(matrix)
    if arr.shape[0] < 1:
        raise DimensionError("unitary needs at least one mode")
    res = unitarity_residual(arr)
    if res > tol:
        raise NotUnitaryError(f"unitarity residual {res:.3e} exceeds {tol:.0e}")
    return arr


def check_transmission(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmission amplitude must lie in [0, 1], got {t}")
    return t


def check_cycle_length(n: int, cap: int) -> int:
    if int(n) != n or n < 3:
        raise ValueError(f"cycle length must be an integer >= 3, got {n}")
    if n > cap:
        raise CapExceededError(f"cycle length {n} exceeds cap {cap}")
    return int(n)

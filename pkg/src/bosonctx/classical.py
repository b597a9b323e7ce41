"""Outcome-assignment models over distinguishable particles.

Each particle carries a fixed binary label, reflected or transmitted, drawn
from a joint distribution that does not depend on which beam splitter the
particle meets.  Assignment ``i`` is an integer whose bit ``k`` is set when
particle ``k`` is reflected; as a bit-string, character ``k`` is ``"1"`` for
reflected.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import nnls
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .contextuality import (
    MeasurementScenario,
    Outcome,
    PairTable,
    specker_experiment,
)

WEIGHT_TOL = 1e-12
FEASIBLE_TOL = 1e-9
EXACT_SUPPORT_MAX_VERTICES = 8


def bits_of(index: int, n: int) -> str:
    return "".join("1" if index >> k & 1 else "0" for k in range(n))


def index_of(bits: str) -> int:
    if set(bits) - {"0", "1"}:
        raise ValueError(f"assignment must be a 0/1 string, got {bits!r}")
    return sum(1 << k for k, c in enumerate(bits) if c == "1")


class AssignmentDistribution:
    """Probability weights over the 2**n reflect/transmit assignments."""

    def __init__(self, n: int, weights):
        if n < 1:
            raise ValueError("need at least one particle")
        if isinstance(weights, dict):
            w = np.zeros(2**n)
            for bits, val in weights.items():
                if len(bits) != n:
                    raise ValueError(f"assignment {bits!r} does not have {n} particles")
                w[index_of(bits)] += val
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (2**n,):
                raise ValueError(f"expected {2**n} weights, got shape {w.shape}")
        if w.min() < -WEIGHT_TOL:
            raise ValueError("assignment weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"assignment weights sum to {w.sum()!r}, not 1")
        self.n = n
        self.weights = np.clip(w, 0.0, None)

    @classmethod
    def deterministic(cls, bits: str) -> AssignmentDistribution:
        w = np.zeros(2 ** len(bits))
        w[index_of(bits)] = 1.0
        return cls(len(bits), w)

    def support(self) -> dict[str, float]:
        return {bits_of(i, self.n): float(w) for i, w in enumerate(self.weights) if w > 0}

    def mix(self, other: AssignmentDistribution, p: float) -> AssignmentDistribution:
        """``p * self + (1 - p) * other``."""
        if other.n != self.n:
            raise ValueError("particle counts differ")
        return AssignmentDistribution(self.n, p * self.weights + (1 - p) * other.weights)

    def to_json(self) -> str:
        return json.dumps([[b, w] for b, w in self.support().items()])

    @classmethod
    def from_json(cls, text: str) -> AssignmentDistribution:
        rows = json.loads(text)
        if not rows:
            raise ValueError("empty assignment model")
        n = len(rows[0][0])
        acc: dict[str, float] = {}
        for bits, w in rows:
            acc[bits] = acc.get(bits, 0.0) + float(w)
        return cls(n, acc)


def load_assignment(path) -> AssignmentDistribution:
    return AssignmentDistribution.from_json(Path(path).read_text())


def mimic_model() -> AssignmentDistribution:
    """Two particles, always one reflected and one transmitted."""
    return AssignmentDistribution(2, {"10": 0.5, "01": 0.5})


def independent_model(n: int = 2, p_reflect: float = 0.5) -> AssignmentDistribution:
    w = np.array(
        [np.prod([p_reflect if c == "1" else 1 - p_reflect for c in bits_of(i, n)])
         for i in range(2**n)]
    )
    return AssignmentDistribution(n, w)


def predict(model: AssignmentDistribution, s: MeasurementScenario) -> Outcome:
    """Marginalize ``model`` onto the two particles mixed in ``s``."""
    if s.upper >= model.n or s.lower >= model.n:
        raise ValueError(
            f"scenario mixes particles {s.mixed} but model has only {model.n}"
        )
    up = lo = co = 0.0
    for i, w in enumerate(model.weights):
        if w == 0.0:
            continue
        ru, rl = i >> s.upper & 1, i >> s.lower & 1
        if ru and not rl:
            up += w
        elif rl and not ru:
            lo += w
        else:
            co += w
    return Outcome(float(up), float(lo), float(co))


def specker_objective(model: AssignmentDistribution) -> float:
    exp = specker_experiment()
    return sum(predict(model, s).both_upper for s in exp.scenarios)


def specker_vertex_values() -> dict[str, float]:
    return {
        bits_of(i, 3): specker_objective(AssignmentDistribution.deterministic(bits_of(i, 3)))
        for i in range(8)
    }


def max_specker_lhs_classical() -> float:
    """The objective is linear in the weights, so its maximum sits on a vertex."""
    return max(specker_vertex_values().values())


def event_indicators(index: int, n: int) -> list[int]:
    """Which cyclic events a deterministic assignment satisfies."""
    return [int(bool(index >> k & 1) and not index >> ((k + 1) % n) & 1) for k in range(n)]


def vertex_matrix(n: int) -> np.ndarray:
    """Columns are the pair-table vectors of the 2**n deterministic assignments."""
    cols = np.zeros((4 * n, 2**n))
    for i in range(2**n):
        e = event_indicators(i, n)
        for k in range(n):
            cols[4 * k + 2 * e[k] + e[(k + 1) % n], i] = 1.0
    return cols


def _simplex_lstsq_exact(v: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Enumerate every support; solve the affine least-squares problem on each."""
    m = v.shape[1]
    best_w, best_res = None, np.inf
    for size in range(1, m + 1):
        for support in itertools.combinations(range(m), size):
            vs = v[:, support]
            base = vs[:, 0]
            if size == 1:
                coef = np.array([1.0])
            else:
                diff = vs[:, 1:] - base[:, None]
                y, *_ = np.linalg.lstsq(diff, b - base, rcond=None)
                coef = np.concatenate([[1.0 - y.sum()], y])
            if coef.min() < -1e-13:
                continue
            res = float(np.linalg.norm(vs @ coef - b))
            if res < best_res - 1e-15:
                best_res = res
                best_w = np.zeros(m)
                best_w[list(support)] = coef
    return best_w, best_res


def _simplex_lstsq_nnls(v: np.ndarray, b: np.ndarray, penalty: float = 1e4):
    a = np.vstack([v, penalty * np.ones((1, v.shape[1]))])
    rhs = np.concatenate([b, [penalty]])
    w, _ = nnls(a, rhs, maxiter=50 * v.shape[1])
    w = w / w.sum()
    return w, float(np.linalg.norm(v @ w - b))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    gap: float
    model: AssignmentDistribution
    method: str


def feasibility_gap(target: PairTable, method: str = "auto") -> FeasibilityReport:
    """Distance from ``target`` to the pair tables any assignment model can produce.

    ``gap`` is the smallest Euclidean residual between the stacked pair
    probabilities and a convex mixture of deterministic-assignment tables.
    ``method`` is ``"exact"`` (support enumeration), ``"nnls"``, or ``"auto"``
    (exact when there are at most 8 vertices).
    """
    n = target.n
    v = vertex_matrix(n)
    b = target.vector()
    if method == "auto":
        method = "exact" if v.shape[1] <= EXACT_SUPPORT_MAX_VERTICES else "nnls"
    if method == "exact":
        w, res = _simplex_lstsq_exact(v, b)
    elif method == "nnls":
        w, res = _simplex_lstsq_nnls(v, b)
    else:
        raise ValueError(f"unknown method {method!r}")
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return FeasibilityReport(res <= FEASIBLE_TOL, res, AssignmentDistribution(n, w), method)


def pair_table_of(model: AssignmentDistribution) -> PairTable:
    v = vertex_matrix(model.n)
    return PairTable((v @ model.weights).reshape(model.n, 2, 2))


class AssignmentModel(BaseEstimator):
    """Noncontextual assignment model fitted to a cyclic pair table.

    ``fit`` finds the assignment distribution whose pair table lies closest
    to the target; ``predict`` gives the three-outcome statistics it implies
    for each measurement scenario.

    Parameters
    ----------
    method : {"auto", "exact", "nnls"}
        Solver for the simplex-constrained least-squares fit.
    tol : float
        Residual below which the target counts as reproducible.
    """

    def __init__(self, method: str = "auto", tol: float = FEASIBLE_TOL):
        self.method = method
        self.tol = tol

    def fit(self, X, y=None):
        table = X if isinstance(X, PairTable) else PairTable(X)
        rep = feasibility_gap(table, self.method)
        self.distribution_ = rep.model
        self.gap_ = rep.gap
        self.feasible_ = rep.gap <= self.tol
        self.n_particles_ = table.n
        return self

    @classmethod
    def from_distribution(cls, dist: AssignmentDistribution, **params) -> AssignmentModel:
        est = cls(**params)
        est.distribution_ = dist
        est.gap_ = 0.0
        est.feasible_ = True
        est.n_particles_ = dist.n
        return est

    def predict(self, X) -> np.ndarray:
        """Rows of (both_upper, both_lower, coincidence), one per scenario."""
        check_is_fitted(self, "distribution_")
        scenarios = [X] if isinstance(X, MeasurementScenario) else list(X)
        return np.array([predict(self.distribution_, s) for s in scenarios]).reshape(-1, 3)

    def score(self, X, y=None) -> float:
        """Negative residual gap to a target pair table."""
        check_is_fitted(self, "distribution_")
        table = X if isinstance(X, PairTable) else PairTable(X)
        return -float(np.linalg.norm(pair_table_of(self.distribution_).vector() - table.vector()))

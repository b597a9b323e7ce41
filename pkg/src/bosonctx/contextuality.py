"""Cyclic beam-splitter experiments and their contextuality inequalities.

An n-cycle experiment puts one photon in each of ``n`` fibers.  Scenario
``k`` mixes fibers ``k`` (upper port) and ``k+1 mod n`` (lower port) on a
single beam splitter; event ``k`` is "photon k reflected AND photon k+1
transmitted", identified with both photons leaving through the upper port.
Consecutive events need the shared photon to be transmitted and reflected at
once, so an outcome-assignment model can satisfy at most ``floor(n/2)`` of
them.  Bosonic bunching gives each event probability 1/2.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import string
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import DimensionError, check_cycle_length, check_occupation
from .fock import FockState, inner_product, make_basis, normalize, occupations
from .interferometer import (
    PHOTON_CAP,
    BeamSplitterSpec,
    ModeUnitary,
    beamsplitter_unitary,
    evolve_substitution,
)

HALF = 1 / math.sqrt(2)
VIOLATION_TOL = 1e-9
BRUTEFORCE_CAP = 24
KCBS_QUANTUM_MAX = math.sqrt(5)


class UnsupportedInputError(ValueError):
    """Input lies outside the one-photon-per-mixed-fiber regime."""


class Pattern(enum.Enum):
    REFLECTED_UPPER = "reflected_upper"  # both photons exit the upper port
    REFLECTED_LOWER = "reflected_lower"  # mirror case, both exit the lower port


@dataclass(frozen=True)
class MeasurementScenario:
    id: int
    upper: int
    lower: int
    modes: int
    t: float = HALF

    def __post_init__(self):
        if self.upper == self.lower:
            raise ValueError("mixed modes must be distinct")
        for k in (self.upper, self.lower):
            if not 0 <= k < self.modes:
                raise IndexError(f"mode {k} out of range for {self.modes} modes")

    @property
    def mixed(self) -> tuple[int, int]:
        return (self.upper, self.lower)

    @property
    def idle(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.modes) if k not in self.mixed)

    def unitary(self) -> ModeUnitary:
        return beamsplitter_unitary(self.modes, BeamSplitterSpec(self.upper, self.lower, self.t))


@dataclass(frozen=True)
class EventSpec:
    scenario: MeasurementScenario
    pattern: Pattern
    input: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "input", check_occupation(self.input, self.scenario.modes))

    @property
    def target(self) -> tuple[int, ...]:
        s = self.scenario
        out = list(self.input)
        pair = out[s.upper] + out[s.lower]
        if self.pattern is Pattern.REFLECTED_UPPER:
            out[s.upper], out[s.lower] = pair, 0
        else:
            out[s.upper], out[s.lower] = 0, pair
        return tuple(out)

    @property
    def label(self) -> str:
        s = self.scenario
        reflected = s.upper if self.pattern is Pattern.REFLECTED_UPPER else s.lower
        names = sorted(s.mixed)
        return "".join(("_" if k == reflected else "") + particle_name(k) for k in names)


def particle_name(k: int) -> str:
    return string.ascii_lowercase[k] if k < 26 else f"p{k}"


@dataclass(frozen=True)
class CycleExperiment:
    n: int
    t: float = HALF
    scenarios: tuple[MeasurementScenario, ...] = field(init=False)
    events: tuple[EventSpec, ...] = field(init=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"cycle length must be >= 3, got {self.n}")
        scen = tuple(
            MeasurementScenario(k, k, (k + 1) % self.n, self.n, self.t) for k in range(self.n)
        )
        ones = (1,) * self.n
        object.__setattr__(self, "scenarios", scen)
        object.__setattr__(
            self, "events", tuple(EventSpec(s, Pattern.REFLECTED_UPPER, ones) for s in scen)
        )

    @property
    def input(self) -> tuple[int, ...]:
        return (1,) * self.n

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.events]

    def contexts_of(self, particle: int) -> list[MeasurementScenario]:
        return [s for s in self.scenarios if particle in s.mixed]


def specker_experiment(t: float = HALF) -> CycleExperiment:
    return CycleExperiment(3, t)


def _as_state(x) -> FockState:
    return x if isinstance(x, FockState) else make_basis(x)


def event_state(e: EventSpec) -> FockState:
    """``U† |target>``: the state whose projector tests event ``e``."""
    u = e.scenario.unitary()
    return normalize(evolve_substitution(make_basis(e.target), u.dagger()))


def event_probability(state, e: EventSpec) -> float:
    state = _as_state(state)
    return abs(inner_product(event_state(e), state)) ** 2


def event_probability_forward(state, e: EventSpec) -> float:
    """Same quantity read from ``U |state>`` instead of ``U† |target>``."""
    state = _as_state(state)
    return abs(evolve_substitution(state, e.scenario.unitary()).amplitude(e.target)) ** 2


def overlap_matrix(items) -> np.ndarray:
    """Squared overlaps ``|<e_i|e_j>|^2`` of event states (or plain states)."""
    states = [event_state(x) if isinstance(x, EventSpec) else x for x in items]
    if len(states) < 2:
        raise ValueError("overlap_matrix needs at least two events")
    if len({s.modes for s in states}) > 1:
        raise DimensionError("events act on different mode counts")
    k = len(states)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = abs(inner_product(states[i], states[j])) ** 2
    return out


class Outcome(NamedTuple):
    both_upper: float
    both_lower: float
    coincidence: float


def measurement_distribution(state, s: MeasurementScenario) -> Outcome:
    """Three-outcome statistics of scenario ``s``; idle fibers are traced out."""
    state = _as_state(state)
    if state.modes != s.modes:
        raise DimensionError(f"state has {state.modes} modes, scenario has {s.modes}")
    if state.is_zero() or any((k[s.upper], k[s.lower]) != (1, 1) for k, _ in state):
        raise UnsupportedInputError("need exactly one photon in each mixed fiber")
    probs = {(2, 0): 0.0, (0, 2): 0.0, (1, 1): 0.0}
    total = sum(abs(a) ** 2 for _, a in state)
    for key, amp in evolve_substitution(state, s.unitary()):
        probs[(key[s.upper], key[s.lower])] += abs(amp) ** 2 / total
    return Outcome(probs[(2, 0)], probs[(0, 2)], probs[(1, 1)])


def reflection_marginal(particle: int, s: MeasurementScenario) -> float:
    """Probability that ``particle`` crosses to the other port in scenario ``s``.

    The beam splitter acts on single photons, so the photon is sent alone
    through the scenario's full mode unitary and read out in the partner port.
    """
    if particle not in s.mixed:
        raise ValueError(f"particle {particle_name(particle)} not mixed in scenario {s.id}")
    partner = s.lower if particle == s.upper else s.upper
    single = tuple(int(k == particle) for k in range(s.modes))
    out = evolve_substitution(make_basis(single), s.unitary())
    hit = tuple(int(k == partner) for k in range(s.modes))
    return abs(out.amplitude(hit)) ** 2


@dataclass(frozen=True)
class NoDisturbanceResult:
    particle: int
    contexts: tuple[int, ...]
    marginals: tuple[float, ...]
    discrepancy: float
    # two-photon probability that this particle is reflected and its partner
    # transmitted, per context
    pattern_probabilities: tuple[float, ...]


def nodisturbance_check(particle: int, contexts) -> NoDisturbanceResult:
    contexts = list(contexts)
    if not contexts:
        raise ValueError("need at least one context")
    marg = tuple(reflection_marginal(particle, s) for s in contexts)
    disc = max(abs(x - y) for x in marg for y in marg)
    pattern = []
    for s in contexts:
        state = make_basis(tuple(int(k in s.mixed) for k in range(s.modes)))
        out = measurement_distribution(state, s)
        pattern.append(out.both_upper if particle == s.upper else out.both_lower)
    return NoDisturbanceResult(
        particle, tuple(s.id for s in contexts), marg, disc, tuple(pattern)
    )


def classical_bound_bruteforce(n: int, cap: int = BRUTEFORCE_CAP) -> int:
    """Most cyclic events any deterministic reflect/transmit assignment satisfies.

    Bit ``k`` of an assignment is 1 when particle ``k`` is reflected; event
    ``k`` holds when bit ``k`` is set and bit ``k+1 mod n`` is clear.
    """
    n = check_cycle_length(n, cap)
    x = np.arange(2**n, dtype=np.uint32)
    nxt = (x >> 1) | ((x & 1) << (n - 1))
    mask = np.uint32(2**n - 1)
    hits = np.bitwise_count(x & ~nxt & mask)
    return int(hits.max())


class PairTable:
    """Joint probabilities ``p(e_k = x, e_{k+1} = y)`` for each adjacent pair.

    ``joint[k, x, y]`` with ``x, y`` in {0, 1}; pair ``k`` couples event ``k``
    with event ``k+1 mod n``.
    """

    def __init__(self, joint):
        joint = np.asarray(joint, dtype=float)
        if joint.ndim != 3 or joint.shape[1:] != (2, 2) or joint.shape[0] < 3:
            raise ValueError(f"pair table must have shape (n>=3, 2, 2), got {joint.shape}")
        joint = joint.copy()
        joint.setflags(write=False)
        self.joint = joint

    @property
    def n(self) -> int:
        return self.joint.shape[0]

    def singles(self) -> np.ndarray:
        """p(e_k = 1) as read from pair k."""
        return self.joint[:, 1, :].sum(axis=1)

    def lhs(self) -> float:
        return float(sum(self.singles()))

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(self.joint.sum(axis=(1, 2)) - 1.0)))

    def exclusivity_residual(self) -> float:
        return float(np.max(np.abs(self.joint[:, 1, 1])))

    def nodisturbance_residual(self) -> float:
        from_left = self.joint.sum(axis=2)  # marginal of event k from pair k
        from_right = np.roll(self.joint.sum(axis=1), 1, axis=0)  # from pair k-1
        return float(np.max(np.abs(from_left - from_right)))

    def is_valid(self, tol: float = 1e-12) -> bool:
        return (
            float(self.joint.min()) >= -tol
            and self.completeness_residual() <= tol
            and self.exclusivity_residual() <= tol
            and self.nodisturbance_residual() <= tol
        )

    def vector(self) -> np.ndarray:
        return self.joint.reshape(-1)

    def __eq__(self, other):
        return isinstance(other, PairTable) and np.array_equal(self.joint, other.joint)

    def __repr__(self):
        return f"PairTable(n={self.n}, lhs={self.lhs():.6g})"


def nodisturbance_extremal_assignment(n: int) -> PairTable:
    """Pair table saturating the no-disturbance bound n/2."""
    if n < 3:
        raise ValueError(f"cycle length must be >= 3, got {n}")
    block = np.array([[0.0, 0.5], [0.5, 0.0]])
    table = PairTable(np.broadcast_to(block, (n, 2, 2)))
    assert table.is_valid(0.0)
    return table


def pair_table_from_quantum(n: int, t: float = HALF) -> PairTable:
    """Adjacent-pair table built from simulated two-photon scatterings.

    Singles come from the bunching statistics of each scenario; the joint
    entry ``p(1, 1)`` is zero by the shared-photon exclusivity, and the rest
    follows from completeness.
    """
    exp = CycleExperiment(n, t)
    state = make_basis(exp.input)
    p = [measurement_distribution(state, s).both_upper for s in exp.scenarios]
    joint = np.empty((n, 2, 2))
    for k in range(n):
        a, b = p[k], p[(k + 1) % n]
        rest = 1.0 - a - b
        if -1e-12 < rest < 0.0:
            rest = 0.0
        joint[k] = [[rest, b], [a, 0.0]]
    return PairTable(joint)


def coincidence_profile(exp: CycleExperiment) -> list[float]:
    """Probability of the unresolved (1, 1) outcome in each scenario."""
    state = make_basis(exp.input)
    return [measurement_distribution(state, s).coincidence for s in exp.scenarios]


@dataclass
class InequalityReport:
    experiment: str
    n: int
    t: float
    labels: list[str]
    probabilities: list[float]
    lhs: float
    classical_bound: float
    nodisturbance_bound: float
    violated: bool
    overlaps: list[list[float]]
    nodisturbance_discrepancy: float

    FIELDS = (
        "experiment",
        "n",
        "t",
        "labels",
        "probabilities",
        "lhs",
        "classical_bound",
        "nodisturbance_bound",
        "violated",
        "overlaps",
        "nodisturbance_discrepancy",
    )

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in self.FIELDS}

    @classmethod
    def from_dict(cls, d: dict) -> InequalityReport:
        return cls(**{k: d[k] for k in cls.FIELDS})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"experiment  {self.experiment} (n={self.n}, t={self.t:.12f})"]
        width = max(len(x) for x in self.labels)
        for lab, p in zip(self.labels, self.probabilities):
            lines.append(f"  p({lab}){' ' * (width - len(lab))}  {fmt_prob(p)}")
        verdict = "VIOLATED" if self.violated else "not violated"
        lines += [
            f"lhs                  {fmt_prob(self.lhs)}",
            f"classical bound      {fmt_prob(self.classical_bound)}",
            f"no-disturbance bound {fmt_prob(self.nodisturbance_bound)}",
            f"verdict              {verdict}",
            f"no-disturbance gap   {fmt_prob(self.nodisturbance_discrepancy)}",
            "overlaps |<e_i|e_j>|^2",
        ]
        for row in self.overlaps:
            lines.append("  " + "  ".join(fmt_prob(x) for x in row))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for lab, p in zip(self.labels, self.probabilities):
            w.writerow([f"p({lab})", repr(p)])
        for k in ("lhs", "classical_bound", "nodisturbance_bound", "violated",
                  "nodisturbance_discrepancy"):
            w.writerow([k, getattr(self, k)])
        return buf.getvalue()


def fmt_prob(x: float) -> str:
    if abs(x) < 1e-12:
        x = 0.0
    return f"{x:.12f}"


def ncycle_report(n: int, t: float = HALF, photon_cap: int = PHOTON_CAP,
                  name: str | None = None) -> InequalityReport:
    n = check_cycle_length(n, photon_cap)
    exp = CycleExperiment(n, t)
    state = make_basis(exp.input)
    probs = [event_probability(state, e) for e in exp.events]
    lhs = sum(probs)
    bound = classical_bound_bruteforce(n)
    disc = max(
        nodisturbance_check(k, exp.contexts_of(k)).discrepancy for k in range(n)
    )
    return InequalityReport(
        experiment=name or f"{n}-cycle",
        n=n,
        t=float(t),
        labels=exp.labels,
        probabilities=probs,
        lhs=lhs,
        classical_bound=float(bound),
        nodisturbance_bound=nodisturbance_extremal_assignment(n).lhs(),
        violated=bool(lhs > bound + VIOLATION_TOL),
        overlaps=overlap_matrix(exp.events).tolist(),
        nodisturbance_discrepancy=disc,
    )


def specker_report(t: float = HALF) -> InequalityReport:
    return ncycle_report(3, t, name="specker")


@dataclass(frozen=True)
class ContrastReport:
    overlaps: np.ndarray
    orthogonal: bool
    max_overlap: float
    bessel_sums: tuple[float, ...]
    bessel_ok: bool

    @property
    def flagged(self) -> bool:
        """True when exclusivity cannot come from orthogonal projectors."""
        return not self.orthogonal


def random_state(modes: int, n_photons: int, rng=None) -> FockState:
    rng = np.random.default_rng(rng)
    keys = occupations(modes, n_photons)
    amps = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    return normalize(FockState(modes, zip(keys, amps)))


def projector_exclusivity_contrast(items, samples: int = 32, rng=None,
                                   tol: float = 1e-12) -> ContrastReport:
    """Compare event states with the orthogonal-projector picture of exclusivity.

    Non-orthogonal event states are flagged.  For a mutually orthogonal set,
    ``sum_i |<e_i|psi>|^2 <= 1`` is checked on random ``psi``.
    """
    items = list(items)
    if len(items) < 3:
        raise ValueError("need at least three events")
    states = [normalize(event_state(x) if isinstance(x, EventSpec) else x) for x in items]
    ov = overlap_matrix(states)
    off = ov - np.diag(np.diag(ov))
    orthogonal = bool(np.max(off) <= tol)
    sums: list[float] = []
    if orthogonal:
        rng = np.random.default_rng(rng)
        ref = states[0]
        for _ in range(samples):
            psi = random_state(ref.modes, ref.n_photons, rng)
            sums.append(sum(abs(inner_product(e, psi)) ** 2 for e in states))
    return ContrastReport(
        overlaps=ov,
        orthogonal=orthogonal,
        max_overlap=float(np.max(off)),
        bessel_sums=tuple(sums),
        bessel_ok=all(s <= 1 + tol for s in sums),
    )

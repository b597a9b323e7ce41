"""Command-line reports: ``bosonctx {specker,ncycle,hom,sample,nodisturbance}``.

Exit codes: 0 success, 1 verification or I/O failure, 2 usage error,
3 input validation error, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import classical, contextuality as ctx
from ._validation import (
    CapExceededError,
    DimensionError,
    InvalidOccupationError,
    NotUnitaryError,
    check_occupation,
)
from .fock import make_basis
from .interferometer import (
    BeamSplitterSpec,
    beamsplitter_unitary,
    evolve_substitution,
    load_unitary,
    output_distribution,
    permanent,
    permanent_naive,
    random_unitary,
    transition_amplitude,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_VALIDATION, EXIT_CAP = 0, 1, 2, 3, 4
FORMATS = ("text", "json", "csv")
VERIFY_TOL = 1e-10


class VerificationError(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 5
    t: float = ctx.HALF
    format: str = "text"
    out: str | None = None
    seed: int | None = None
    photon_cap: int = 12
    permanent_cap: int = 20
    verify: bool = False


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _transmission(text: str) -> float:
    t = float(text)
    if not 0.0 <= t <= 1.0:
        raise argparse.ArgumentTypeError(f"t must lie in [0, 1], got {t}")
    return t


def _occupation(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad occupation {text!r}; use e.g. 1,1,1") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--t", type=_transmission, default=ctx.HALF,
                        help="beam-splitter transmission amplitude (default 1/sqrt(2))")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--photon-cap", type=int,
                        default=_env_int("BOSONCTX_PHOTON_CAP", 12))
    common.add_argument("--permanent-cap", type=int,
                        default=_env_int("BOSONCTX_PERMANENT_CAP", 20))
    common.add_argument("--verify", action="store_true",
                        help="re-run the brute-force oracles and fail on mismatch")

    parser = argparse.ArgumentParser(prog="bosonctx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("specker", parents=[common], help="three-photon Specker experiment")
    p = sub.add_parser("ncycle", parents=[common], help="n-cycle (KCBS-like) experiment")
    p.add_argument("--n", type=int, default=5)
    sub.add_parser("hom", parents=[common], help="two-photon bunching vs assignment models")
    p = sub.add_parser("sample", parents=[common], help="output distribution of an interferometer")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--unitary", help="JSON unitary file")
    src.add_argument("--random", type=int, metavar="M", help="Haar-random M-mode unitary")
    p.add_argument("--input", type=_occupation, required=True, help="e.g. 1,1,1")
    p.add_argument("--all", action="store_true", help="text mode: list zero-probability outputs")
    p = sub.add_parser("nodisturbance", parents=[common], help="reflection marginals per context")
    p.add_argument("--n", type=int, default=3)
    return parser


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise VerificationError(what)


def _as_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- specker / ncycle -------------------------------------------------------

def _verify_cycle(rep: ctx.InequalityReport) -> int:
    exp = ctx.CycleExperiment(rep.n, rep.t)
    state = make_basis(exp.input)
    checks = 0
    for e, p in zip(exp.events, rep.probabilities):
        fwd = ctx.event_probability_forward(state, e)
        amp = transition_amplitude(e.scenario.unitary(), exp.input, e.target)
        _check(abs(fwd - p) <= VERIFY_TOL, f"forward/backward mismatch on {e.label}")
        _check(abs(abs(amp) ** 2 - p) <= VERIFY_TOL, f"permanent route mismatch on {e.label}")
        checks += 2
    best = max(sum(classical.event_indicators(i, rep.n)) for i in range(2**rep.n))
    _check(best == rep.classical_bound, "vertex enumeration disagrees with classical bound")
    checks += 1
    if rep.n == 3:
        table = ctx.pair_table_from_quantum(3, rep.t)
        a = classical.feasibility_gap(table, "exact").gap
        b = classical.feasibility_gap(table, "nnls").gap
        _check(abs(a - b) <= 1e-6, "feasibility solvers disagree")
        _check(classical.max_specker_lhs_classical() == rep.classical_bound,
               "assignment-model maximum disagrees with classical bound")
        checks += 2
    return checks


def _render_report(rep: ctx.InequalityReport, fmt: str) -> str:
    if fmt == "json":
        return rep.to_json() + "\n"
    if fmt == "csv":
        return rep.to_csv()
    return rep.to_text()


def cmd_specker(cfg: RunConfig) -> int:
    rep = ctx.specker_report(cfg.t)
    if cfg.verify:
        _log_verify(_verify_cycle(rep))
    _emit(_render_report(rep, cfg.format), cfg)
    return EXIT_OK


def cmd_ncycle(cfg: RunConfig) -> int:
    rep = ctx.ncycle_report(cfg.n, cfg.t, photon_cap=cfg.photon_cap)
    if cfg.verify:
        _log_verify(_verify_cycle(rep))
    _emit(_render_report(rep, cfg.format), cfg)
    return EXIT_OK


# --- hom --------------------------------------------------------------------

def hom_report(t: float) -> dict:
    scen = ctx.MeasurementScenario(0, 0, 1, 2, t)
    quantum = ctx.measurement_distribution((1, 1), scen)
    return {
        "t": t,
        "quantum": quantum._asdict(),
        "mimic": classical.predict(classical.mimic_model(), scen)._asdict(),
        "independent": classical.predict(classical.independent_model(), scen)._asdict(),
    }


def _verify_hom(t: float, rep: dict) -> int:
    u = beamsplitter_unitary(2, BeamSplitterSpec(0, 1, t))
    evolved = evolve_substitution(make_basis((1, 1)), u)
    checks = 0
    for key, out in (("both_upper", (2, 0)), ("both_lower", (0, 2)), ("coincidence", (1, 1))):
        a = transition_amplitude(u, (1, 1), out)
        _check(abs(a - evolved.amplitude(out)) <= VERIFY_TOL, f"backend mismatch on {out}")
        _check(abs(abs(a) ** 2 - rep["quantum"][key]) <= VERIFY_TOL, f"probability mismatch on {key}")
        checks += 2
    return checks


def cmd_hom(cfg: RunConfig) -> int:
    rep = hom_report(cfg.t)
    if cfg.verify:
        _log_verify(_verify_hom(cfg.t, rep))
    cols = ("both_upper", "both_lower", "coincidence")
    if cfg.format == "json":
        text = _as_json(rep)
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", *cols])
        for model in ("quantum", "mimic", "independent"):
            w.writerow([model, *(repr(rep[model][c]) for c in cols)])
        text = buf.getvalue()
    else:
        lines = [f"two-photon beam splitter, t={cfg.t:.12f}",
                 f"{'model':<12} {'both_upper':>15} {'both_lower':>15} {'coincidence':>15}"]
        for model in ("quantum", "mimic", "independent"):
            vals = " ".join(f"{ctx.fmt_prob(rep[model][c]):>15}" for c in cols)
            lines.append(f"{model:<12} {vals}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg)
    return EXIT_OK


# --- sample -----------------------------------------------------------------

def _fmt_occ(occ) -> str:
    return "(" + ",".join(str(c) for c in occ) + ")"


def _verify_sample(u, inp, dist, cfg: RunConfig) -> int:
    evolved = evolve_substitution(make_basis(inp), u)
    checks = 0
    for out, p in dist.items():
        amp = transition_amplitude(u, inp, out, cfg.permanent_cap)
        _check(abs(amp - evolved.amplitude(out)) <= VERIFY_TOL, f"backend mismatch at {out}")
        checks += 1
        if sum(inp) <= 8:
            idx_out = [k for k, c in enumerate(out) for _ in range(c)]
            idx_in = [k for k, c in enumerate(inp) for _ in range(c)]
            sub = u.matrix[np.ix_(idx_out, idx_in)]
            ryser, naive = permanent(sub), permanent_naive(sub)
            _check(abs(ryser - naive) <= VERIFY_TOL * max(1.0, abs(naive)),
                   f"Ryser/naive permanent mismatch at {out}")
            checks += 1
    _check(abs(sum(dist.values()) - 1.0) <= VERIFY_TOL, "distribution does not sum to 1")
    return checks + 1


def cmd_sample(cfg: RunConfig, unitary: str | None, random_modes: int | None,
               inp, show_all: bool = False) -> int:
    u = load_unitary(unitary) if unitary else random_unitary(random_modes, cfg.seed)
    inp = check_occupation(inp, modes=u.dim)
    if sum(inp) > cfg.photon_cap:
        raise CapExceededError(f"{sum(inp)} photons exceed photon cap {cfg.photon_cap}")
    dist = output_distribution(u, inp, photon_cap=cfg.photon_cap)
    if cfg.verify:
        _log_verify(_verify_sample(u, inp, dist, cfg))
    if cfg.format == "json":
        text = _as_json({"input": list(inp),
                         "distribution": [[list(k), p] for k, p in dist.items()]})
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["output", "probability"])
        for k, p in dist.items():
            w.writerow([_fmt_occ(k), repr(p)])
        text = buf.getvalue()
    else:
        text = "".join(
            f"{_fmt_occ(k)} {ctx.fmt_prob(p)}\n"
            for k, p in dist.items()
            if show_all or abs(p) >= 1e-12
        )
    _emit(text, cfg)
    return EXIT_OK


# --- nodisturbance ----------------------------------------------------------

def nodisturbance_rows(n: int, t: float) -> list[dict]:
    exp = ctx.CycleExperiment(n, t)
    rows = []
    for k in range(n):
        res = ctx.nodisturbance_check(k, exp.contexts_of(k))
        rows.append({
            "particle": ctx.particle_name(k),
            "contexts": [f"M{i + 1}" for i in res.contexts],
            "marginals": list(res.marginals),
            "pattern_probabilities": list(res.pattern_probabilities),
            "discrepancy": res.discrepancy,
        })
    return rows


def cmd_nodisturbance(cfg: RunConfig) -> int:
    if cfg.n > cfg.photon_cap:
        raise CapExceededError(f"cycle length {cfg.n} exceeds photon cap {cfg.photon_cap}")
    rows = nodisturbance_rows(cfg.n, cfg.t)
    if cfg.verify:
        r2 = 1.0 - cfg.t**2
        for row in rows:
            for m in row["marginals"]:
                _check(abs(m - r2) <= VERIFY_TOL, "marginal differs from single-photon r^2")
        _log_verify(sum(len(r["marginals"]) for r in rows))
    if cfg.format == "json":
        text = _as_json({"n": cfg.n, "t": cfg.t, "particles": rows})
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["particle", "context", "reflection_marginal", "pattern_probability"])
        for row in rows:
            for c, m, q in zip(row["contexts"], row["marginals"], row["pattern_probabilities"]):
                w.writerow([row["particle"], c, repr(m), repr(q)])
        text = buf.getvalue()
    else:
        lines = [f"no-disturbance, {cfg.n} photons, t={cfg.t:.12f}"]
        for row in rows:
            cells = "  ".join(
                f"{c}: {ctx.fmt_prob(m)}" for c, m in zip(row["contexts"], row["marginals"])
            )
            lines.append(f"  p(_{row['particle']})  {cells}  gap {ctx.fmt_prob(row['discrepancy'])}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg)
    return EXIT_OK


def _log_verify(checks: int) -> None:
    print(f"verify: {checks} checks passed", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        n=getattr(args, "n", 5),
        t=args.t,
        format=args.format,
        out=args.out,
        seed=args.seed,
        photon_cap=args.photon_cap,
        permanent_cap=args.permanent_cap,
        verify=args.verify,
    )
    if cfg.command in ("ncycle", "nodisturbance") and cfg.n < 3:
        parser.error(f"--n must be >= 3, got {cfg.n}")
    try:
        if cfg.command == "specker":
            return cmd_specker(cfg)
        if cfg.command == "ncycle":
            return cmd_ncycle(cfg)
        if cfg.command == "hom":
            return cmd_hom(cfg)
        if cfg.command == "sample":
            if args.random is not None and args.random < 1:
                parser.error("--random needs at least one mode")
            return cmd_sample(cfg, args.unitary, args.random, args.input, args.all)
        return cmd_nodisturbance(cfg)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NotUnitaryError, DimensionError, InvalidOccupationError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except VerificationError as exc:
        print(f"verify: FAILED: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

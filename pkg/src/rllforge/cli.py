"""``rllforge`` command line: run a check from a JSON config and emit a JSON report."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
import warnings
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import currents, family, reps, rll_verify, rmatrix
from .config import ConfigError, as_complex, build_orbit, build_r, resolve_seed, samples, validate
from .report import DEFAULT_BOX, CheckReport, ResidualLog, Sampler, combine

DEFAULT_TOLS = {
    "check-r": 1e-10,
    "orbit": 1e-10,
    "currents": 1e-10,
    "verify-rll": 1e-9,
    "verify-ef": 1e-9,
    "transfer": 1e-10,
}


def _sampler(config: Mapping[str, Any], count: int) -> Sampler:
    return Sampler(seed=int(config["seed"]), box=float(config.get("box", DEFAULT_BOX)), count=count)


def run_check_r(config: Mapping[str, Any], tol: float) -> CheckReport:
    R = build_r(config.get("R"), config.get("pole_guard", rmatrix.DEFAULT_POLE_GUARD))
    parts = [
        rmatrix.check_unitarity(R, _sampler(config, samples(config, "unitarity")), tol),
        rmatrix.check_ybe(R, _sampler(config, samples(config, "ybe")), tol),
    ]
    out = combine("check-r", parts, tol)
    out.params = {"form": R.form.name, "grading": R.grading, **R.params.as_dict()}
    return out


def _exactness(orb: family.FamilyOrbit, seed: int) -> CheckReport:
    """rho^- after rho^+ returns every member exactly; tau composes exactly."""
    log = ResidualLog("orbit_exactness", 0.0, seed, {})
    lo, hi = orb.range
    for n in range(lo, hi):
        R = orb.member(n)
        back = family.apply_rho(orb.rho, "-", n + 1, family.apply_rho(orb.rho, "+", n, R))
        log.add(0.0 if back == R else 1.0, law="rho-minus-after-rho-plus", n=n)
    for a in range(lo, hi + 1):
        for b in range(lo, hi + 1):
            for m in (lo, 0, hi):
                composed = family.tau(orb, a, m) @ family.tau(orb, m, b)
                log.add(0.0 if composed.equals(family.tau(orb, a, b)) else 1.0, law="tau-composition", target=a, middle=m, source=b)
    return log.report()


def run_orbit(config: Mapping[str, Any], tol: float) -> CheckReport:
    orb = build_orbit(config)
    admissible = family.check_orbit(orb, _sampler(config, samples(config, "unitarity")), tol, samples(config, "ybe"))
    exact = _exactness(orb, int(config["seed"]))
    out = combine("orbit", [admissible, exact], tol)
    out.params = {"rho": orb.rho.to_json(), "range": list(orb.range)}
    out.details["members"] = {str(n): R.params.as_dict() for n, R in orb.members()}
    return out


def run_currents(config: Mapping[str, Any], tol: float) -> CheckReport:
    R = build_r(config.get("R"), config.get("pole_guard", rmatrix.DEFAULT_POLE_GUARD))
    sampler = _sampler(config, samples(config, "points"))
    compat = currents.check_psi_compatibility(R, sampler, tol)
    values = []
    for u in sampler.points(min(5, sampler.count), avoid=lambda z: abs(z) < 1e-3 or R.near_pole(z) or R.near_pole(-z), stream=4):
        values.append({"u": u, "psi_e": currents.psi_e(R, u), "psi_f": currents.psi_f(R, u), "phi": currents.phi(R, u)})
    out = combine("currents", [compat], tol)
    out.params = {"form": R.form.name, **R.params.as_dict()}
    try:
        out.details["N"] = currents.delta_normalization(R)
    except currents.NonSimplePoleError as exc:
        out.details["N_error"] = str(exc)
    out.details["N_convention"] = currents.N_CONVENTION
    out.details["values"] = values
    return out


def _pair(config: Mapping[str, Any]) -> tuple[int, int]:
    i, j = config.get("pair", (0, 1))
    return int(i), int(j)


def run_verify_rll(config: Mapping[str, Any], tol: float) -> CheckReport:
    orb = build_orbit(config)
    i, j = _pair(config)
    c = as_complex(config["c"]) if "c" in config else None
    rep = rll_verify.verify_components(
        orb, i, j, int(config.get("epsilon", 1)), _sampler(config, samples(config, "tags")), tol, c=c, faults=config.get("fault_injection", ())
    )
    rep.check_name = "verify-rll"
    return rep


def run_verify_ef(config: Mapping[str, Any], tol: float) -> CheckReport:
    orb = build_orbit(config)
    i, j = _pair(config)
    c = as_complex(config["c"]) if "c" in config else orb.center(i, j)
    rep = rll_verify.verify_EF_relations(
        orb,
        i,
        j,
        int(config.get("epsilon", 1)),
        c,
        _sampler(config, samples(config, "tags")),
        tol,
        quanta=int(config.get("ef_quanta", 1)),
        faults=config.get("fault_injection", ()),
    )
    rep.check_name = "verify-ef"
    return rep


def run_transfer(config: Mapping[str, Any], tol: float) -> CheckReport:
    orb = build_orbit(config)
    chain_cfg = config.get("chain", {})
    lengths = chain_cfg.get("lengths", [1, 2, 3])
    source = chain_cfg.get("source", "degenerate")
    rng = np.random.default_rng([int(config["seed"]), 30])
    parts = []
    for n_sites in lengths:
        ws = [complex(*rng.uniform(-1, 1, 2)) for _ in range(n_sites)]
        if source == "orbit":
            chain = [reps.EvalL(orb.member(min(k + 1, orb.range[1])), ws[k], k + 1) for k in range(n_sites)]
        else:
            chain = [reps.EvalL(orb.base, ws[k], k + 1) for k in range(n_sites)]
        meta: dict[str, Any] = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", reps.NonDegenerateWarning)
            reps.trace_transfer(chain, 0.1, meta)
            rep = reps.check_commuting(
                lambda u, chain=chain: reps.trace_transfer(chain, u),
                _sampler(config, samples(config, "transfer")),
                tol,
                avoid=reps.chain_avoid(chain),
                name=f"commuting[{n_sites}]",
                params={"sites": n_sites, "inhomogeneities": ws, "degenerate": meta["degenerate"]},
            )
        parts.append(rep)
    out = combine("transfer", parts, tol)
    out.params = {"source": source, "lengths": list(lengths), **orb.base.params.as_dict()}
    return out


COMMANDS: dict[str, Callable[[Mapping[str, Any], float], CheckReport]] = {
    "check-r": run_check_r,
    "orbit": run_orbit,
    "currents": run_currents,
    "verify-rll": run_verify_rll,
    "verify-ef": run_verify_ef,
    "transfer": run_transfer,
}


def run(command: str, config: Mapping[str, Any], tol: float | None = None) -> tuple[int, dict[str, Any]]:
    """Validate ``config``, run ``command`` and return ``(exit status, report dict)`` (no timestamp)."""
    validate(config)
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    tol = tol if tol is not None else float(config.get("tol", DEFAULT_TOLS[command]))
    rep = COMMANDS[command](config, tol)
    out = rep.to_dict()
    out["seed"] = int(config["seed"])
    out["config"] = json.loads(json.dumps(config))
    return (0 if rep.passed else 1), out


def report_json(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True)


def strip_timestamp(report: Mapping[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in report.items() if k != "timestamp"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rllforge", description="Verify structured R-matrices, RLL relations in Gauss currents and transfer operators.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file (default: built-in trig R, identity rho)")
    parser.add_argument("--seed", type=int, help="overrides the config seed and $RLLFORGE_SEED")
    parser.add_argument("--tol", type=float, help="tolerance override")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--quiet", action="store_true", help="no summary line on stderr")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"rllforge: cannot read config: {exc}", file=sys.stderr)
            return 2
    try:
        config = resolve_seed(config, args.seed)
        status, report = run(args.command, config, args.tol)
    except ConfigError as exc:
        print(f"rllforge: invalid config at {exc.pointer}: {exc}", file=sys.stderr)
        return 2
    report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    text = report_json(report)
    out_path = args.out or config.get("out")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not args.quiet:
        print(f"{report['check']}: {report['status']} (max residual {report['max_residual']:.3g}, {report['samples']} samples)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

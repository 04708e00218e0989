"""Command-line entry point.

Exit status: 0 when every requested certificate holds, 2 on a verification
failure, 1 on usage errors (bad flags, unreadable or malformed Choi JSON).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import config
from .channels import (
    canonical_broadcaster,
    clone_fidelity,
    diamond_distance,
    optimal_virtual_broadcaster,
    phase_covariant_cloner,
    universal_cloner,
)
from .choi import ChoiOperator, EquatorialState, is_cp, is_hp, is_tp, marginal
from .constraints import classic_deviation, verify_broadcast
from .cost import base_norm_bounds, minimize, pos_neg_split
from .matcore import I2, SX, SY, SZ
from .sampler import (
    Observable,
    Scenario,
    ShotPlan,
    empirical_failure_rate,
    hoeffding_copies,
    inflated_shots,
    sample_cost_report,
    simulate_direct,
    simulate_virtual,
)
from .twirl import extract_params, family_residual, flip_twirl, phase_twirl, swap_twirl, symmetric_twirl

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

NAMED = {
    "broadcaster": optimal_virtual_broadcaster,
    "cloner": phase_covariant_cloner,
    "canonical": canonical_broadcaster,
    "universal-cloner": universal_cloner,
}

PAULIS = {"x": SX, "y": SY, "z": SZ, "i": I2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_choi(path: str) -> ChoiOperator:
    if path in NAMED:
        return NAMED[path]()
    try:
        with open(path) as fh:
            return ChoiOperator.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _emit(obj, fmt: str, out) -> None:
    if fmt == "csv":
        rows = obj if isinstance(obj, list) else [_flatten(obj)]
        if not rows:
            return
        w = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    else:
        json.dump(obj, out, indent=2, default=_json_default)
        out.write("\n")


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            flat[key] = json.dumps(v, default=_json_default)
        else:
            flat[key] = v
    return flat


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _random_hermitian(seed: int) -> ChoiOperator:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    return ChoiOperator((a + a.conj().T) / 2)


def cmd_derive_family(args, cfg):
    c = _load_choi(args.choi) if args.choi else _random_hermitian(args.seed)
    tw = symmetric_twirl(c)
    p = extract_params(tw, tol=cfg["tolerances"]["family"])
    return {"params": p.to_dict(), "residual": family_residual(tw), "hermitian_params": p.is_hermitian()}, True


def cmd_minimize(args, cfg):
    res = minimize(starts=args.starts, seed=args.seed, grid=not args.no_grid, cfg=cfg["minimize"])
    ok = res.certificate.passed if res.certificate else True
    return res.to_dict(), ok


def cmd_decompose(args, cfg):
    c = _load_choi(args.choi)
    d = pos_neg_split(c, cfg["tolerances"]["structural"])
    bounds = base_norm_bounds(c, cfg["tolerances"]["bracket"])
    out = d.to_dict()
    out["base_norm"] = bounds.to_dict()
    for path, part in ((args.out_plus, d.e_plus), (args.out_minus, d.e_minus)):
        if path and part is not None:
            with open(path, "w") as fh:
                fh.write(part.to_json())
    return out, d.tp_exact


def cmd_verify(args, cfg):
    c = _load_choi(args.choi)
    tol = cfg["tolerances"]["structural"]
    report = {"tp": is_tp(c, tol), "hp": is_hp(c, tol), "cp": is_cp(c, tol)}
    if tuple(c.dims_out) == (2, 2) and c.dim_in == 2:
        report["symmetry"] = {
            name: float(np.max(np.abs(tw(c).matrix - c.matrix))) <= tol
            for name, tw in (("phase", phase_twirl), ("flip", flip_twirl), ("perm", swap_twirl))
        }
        report["classic"] = classic_deviation(c) <= tol
        report["broadcast"] = verify_broadcast(c, tol=cfg["tolerances"]["broadcast"]).to_dict()
    required = [r.strip() for r in args.require.split(",") if r.strip()]
    verdicts = {}
    for r in required:
        if r == "broadcast":
            verdicts[r] = bool(report.get("broadcast", {}).get("pass", False))
        elif r in ("phase", "flip", "perm"):
            verdicts[r] = bool(report.get("symmetry", {}).get(r, False))
        elif r in report:
            verdicts[r] = bool(report[r])
        else:
            raise UsageError(f"unknown requirement {r!r}")
    report["required"] = verdicts
    report["pass"] = all(verdicts.values())
    return report, report["pass"]


def cmd_distance(args, cfg):
    a, b = _load_choi(args.a), _load_choi(args.b)
    res = diamond_distance(a, b, starts=args.starts, seed=args.seed, cfg=cfg["diamond"])
    return res.to_dict(), res.certified


def _state(args) -> EquatorialState:
    return EquatorialState(args.r, args.phi)


def cmd_simulate(args, cfg):
    rho = _state(args)
    o1, o2 = Observable(PAULIS[args.obs1]), Observable(PAULIS[args.obs2])
    if args.direct:
        est = simulate_direct(rho, o1, args.shots, args.seed, shards=args.shards)
        return {"strategy": "direct", "estimate": est, "exact": o1.expectation(rho.matrix), "shots": args.shots}, True
    c = _load_choi(args.choi)
    d = pos_neg_split(c, cfg["tolerances"]["structural"])
    est = simulate_virtual(d, rho, o1, o2, args.shots, args.seed, shards=args.shards)
    return {
        "strategy": "virtual",
        "est1": est.est1,
        "est2": est.est2,
        "exact1": o1.expectation(marginal(c, rho.matrix, 1)),
        "exact2": o2.expectation(marginal(c, rho.matrix, 2)),
        "plus_fraction": est.plus_fraction,
        "a": d.a,
        "b": d.b,
        "shots": args.shots,
    }, True


def cmd_sample_report(args, cfg):
    s = cfg["sampling"]
    eps = args.epsilon if args.epsilon is not None else s["epsilon"]
    delta = args.delta if args.delta is not None else s["delta"]
    c_range = args.c_range if args.c_range is not None else s["c_range"]
    plan = ShotPlan.symmetric(eps, delta, c_range)
    c = _load_choi(args.choi)
    d = pos_neg_split(c, cfg["tolerances"]["structural"])
    report = sample_cost_report(plan, d)
    if args.repetitions:
        shots = inflated_shots(d.a + d.b, hoeffding_copies(eps, delta, c_range))
        obs = Observable(PAULIS[args.obs1])
        frep = empirical_failure_rate(Scenario("virtual", _state(args), obs, eps, shots, d), args.repetitions, args.seed)
        if args.format == "csv":
            return [{"repetition": i, "error": float(e)} for i, e in enumerate(frep.errors)], True
        report["failure_rate"] = {**frep.to_dict(), "shots": shots, "bound": frep.binomial_bound(delta)}
    return report, True


def cmd_baseline(args, cfg):
    canon, ucl = canonical_broadcaster(), universal_cloner()
    bounds = base_norm_bounds(canon, cfg["tolerances"]["bracket"])
    dres = diamond_distance(canon, ucl, cfg=cfg["diamond"])
    rng = np.random.default_rng(args.seed)
    fids = []
    for _ in range(100):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        fids.append(clone_fidelity(ucl, v / np.linalg.norm(v)))
    out = {
        "cost": bounds.to_dict(),
        "diamond_to_universal_cloner": dres.to_dict(),
        "universal_fidelity": float(np.mean(fids)),
        "universal_fidelity_spread": float(np.ptp(fids)),
    }
    return out, bounds.certified and dres.certified


def cmd_reproduce(args, cfg):
    from .reproduce import run_all

    summary = run_all(seed=args.seed, cfg=cfg, fast=args.fast)
    return summary, summary["all_pass"]


def cmd_export(args, cfg):
    c = NAMED[args.name]()
    text = c.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        return {"written": args.out, "name": args.name}, True
    return c.to_dict(), True


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vbroadcast", description="Virtual phase-covariant qubit broadcasting laboratory")
    parser.add_argument("--config", help=f"JSON config file (default: ${config.ENV_VAR} or built-in defaults)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    choi_help = "Choi JSON file or one of: " + ", ".join(NAMED)

    p = sub.add_parser("derive-family", help="twirl a Choi operator onto the symmetric family")
    p.add_argument("--choi", help=choi_help)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_derive_family)

    p = sub.add_parser("minimize", help="trace-norm minimisation with grid certificate")
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-grid", action="store_true")
    p.set_defaults(fn=cmd_minimize)

    p = sub.add_parser("decompose", help="positive/negative split of a Choi operator")
    p.add_argument("--choi", required=True, help=choi_help)
    p.add_argument("--out-plus")
    p.add_argument("--out-minus")
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("verify", help="structural, symmetry, CLASSIC and broadcast checks")
    p.add_argument("--choi", required=True, help=choi_help)
    p.add_argument("--require", default="tp,hp", help="comma list from tp,hp,cp,classic,broadcast,phase,flip,perm")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("distance", help="diamond distance with certificates")
    p.add_argument("--a", required=True, help=choi_help)
    p.add_argument("--b", required=True, help=choi_help)
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_distance)

    for name, fn, hlp in (
        ("simulate", cmd_simulate, "Monte-Carlo estimate for one equatorial input"),
        ("sample-report", cmd_sample_report, "copy-count comparison (SAMPLE)"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--choi", default="broadcaster", help=choi_help)
        p.add_argument("--r", type=float, default=1.0)
        p.add_argument("--phi", type=float, default=0.0)
        p.add_argument("--obs1", choices=sorted(PAULIS), default="x")
        p.add_argument("--seed", type=int, default=7)
        p.set_defaults(fn=fn)
        if name == "simulate":
            p.add_argument("--obs2", choices=sorted(PAULIS), default="x")
            p.add_argument("--shots", type=int, default=10000)
            p.add_argument("--shards", type=int, default=1)
            p.add_argument("--direct", action="store_true", help="measure copies of the input directly")
        else:
            p.add_argument("--epsilon", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--c-range", type=float)
            p.add_argument("--repetitions", type=int, default=0, help="also run the failure-rate experiment")

    p = sub.add_parser("baseline", help="unitary-covariant canonical broadcaster numbers")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("reproduce-paper", help="run every check and print one JSON summary")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--fast", action="store_true", help="smaller sample counts")
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("export", help="write a named Choi operator as JSON")
    p.add_argument("name", choices=sorted(NAMED))
    p.add_argument("--out")
    p.set_defaults(fn=cmd_export)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config.load_config(args.config)
        result, ok = args.fn(args, cfg)
    except UsageError as exc:
        print(f"vbroadcast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"vbroadcast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(result, args.format, out)
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

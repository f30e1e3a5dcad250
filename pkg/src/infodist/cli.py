"""Command-line front end.

Exit codes: 0 success (all checks pass), 1 a sweep check failed,
2 usage, parse, configuration or invariant error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from math import log2
from pathlib import Path

from infodist import functionals as fn
from infodist.channels import decompose_xi, informational_map
from infodist.errors import InfodistError
from infodist.harness import ALL_CHECKS, SweepConfig, run_all
from infodist.io import choi_to_json, dump_json, load_density, load_instrument, load_json

ZERO = 1e-8


def render_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def render_table(rows: list[tuple[str, object, str]]) -> str:
    width = max(len(name) for name, _, _ in rows)
    lines = []
    for name, value, note in rows:
        line = f"{name:<{width}}  {_fmt(value):>12}"
        lines.append(f"{line}  {note}" if note else line)
    return "\n".join(lines) + "\n"


def _existing_file(s: str) -> Path:
    p = Path(s)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {s}")
    return p


def _dims(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims expects comma-separated integers, got {s!r}")


def _checks(s: str) -> list[str]:
    names = [x.strip() for x in s.split(",") if x.strip()]
    bad = [n for n in names if n not in ALL_CHECKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {','.join(ALL_CHECKS)}")
    return names


def cmd_compute(args) -> int:
    ins = load_instrument(args.instrument)
    rho = load_density(args.state)
    rep = fn.full_report(ins, rho)
    if args.json:
        out = rep.to_dict()
        out["normalized"] = bool(args.normalized)
        sys.stdout.write(render_json(out))
        return 0
    scale = log2(rho.dim) if args.normalized and rho.dim > 1 else 1.0
    suffix = " / log2 d" if args.normalized else ""
    d_note = f"<- zero (|D| <= {ZERO:g})" if abs(rep.disturbance) <= ZERO else ""
    rows = [
        ("S(rho)", rep.s_rho, ""),
        ("S(Q[rho])", rep.s_out, ""),
        ("S_e (exchange)", rep.s_exchange, ""),
        ("I_c (coherent)", rep.i_coherent, ""),
        ("chi (probe Holevo)", rep.holevo_rhs, ""),
        ("I" + suffix, rep.mutual_info / scale, ""),
        ("D" + suffix, rep.disturbance / scale, d_note),
        ("D - I", rep.slack, ""),
        ("1 - F", rep.fid_disturbance, ""),
        ("1 - F_e", rep.ent_fid_disturbance, ""),
        ("Dbar", rep.dbar, ""),
    ]
    sys.stdout.write(render_table(rows))
    return 0


def cmd_sweep(args) -> int:
    data = {}
    if args.config:
        data = load_json(args.config)
        if not isinstance(data, dict):
            raise InfodistError(f"{args.config}: sweep config must be a JSON object")
    for key, val in (("dims", args.dims), ("trials", args.trials), ("seed", args.seed),
                     ("checks", args.checks), ("tolerance", args.tolerance),
                     ("max_kraus", args.max_kraus), ("output_path", args.out),
                     ("sampler", args.sampler)):
        if val is not None:
            data[key] = val
    cfg = SweepConfig.from_mapping(data)
    result = run_all(cfg)
    for c in result.checks:
        status = "PASS" if c.ok else "FAIL"
        agg = "".join(f"  [{a['name']}: {'ok' if a['passed'] else 'FAILED'}]" for a in c.aggregates)
        print(f"{c.name:<18} {status}  {c.passed}/{c.trials} trials  worst_slack={c.worst_slack:.3e}{agg}")
    if cfg.output_path:
        print(f"report written to {cfg.output_path} (+ {Path(cfg.output_path).with_suffix('.csv').name})")
    return 0 if result.ok else 1


def cmd_decompose(args) -> int:
    ins = load_instrument(args.instrument)
    ref = load_density(args.reference)
    c = informational_map(ref)
    dec = decompose_xi(ins, c)
    out = {"xi": dec.xi, "xi_is_maximal": True, "informational_basis": c.metadata.get("basis"),
           "dynamical_choi": choi_to_json(dec.dynamical) if dec.dynamical is not None else None}
    if args.out and dec.dynamical is not None:
        dump_json(out["dynamical_choi"], args.out)
    if args.json:
        sys.stdout.write(render_json(out))
    else:
        note = "no dynamical part" if dec.dynamical is None else "dynamical part present"
        sys.stdout.write(render_table([("xi* (maximal)", dec.xi, note)]))
        if args.out and dec.dynamical is not None:
            print(f"dynamical Choi matrix written to {args.out}")
    return 0


def cmd_compare(args) -> int:
    ins = load_instrument(args.instrument)
    rho = load_density(args.state)
    fid, efid, dbar = fn.fidelity_disturbances(ins, rho)
    dist = fn.disturbance(ins, rho)
    if args.json:
        sys.stdout.write(render_json({"D": dist, "1-F": fid, "1-F_e": efid, "Dbar": dbar}))
    else:
        sys.stdout.write(render_table([("D (entropic)", dist, ""), ("1 - F", fid, ""),
                                       ("1 - F_e", efid, ""), ("Dbar", dbar, "")]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infodist", description="Information gain and state disturbance of quantum instruments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def output_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="machine-readable output")
        g.add_argument("--table", action="store_true", help="human-readable table (default)")

    c = sub.add_parser("compute", help="report I, D and related entropies for an instrument and a state")
    c.add_argument("instrument", type=_existing_file)
    c.add_argument("state", type=_existing_file)
    c.add_argument("--normalized", action="store_true", help="divide I and D by log2 d")
    output_flags(c)
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="randomized verification of all bounds")
    s.add_argument("--config", type=_existing_file, help="JSON file with SweepConfig fields")
    s.add_argument("--dims", type=_dims)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--checks", type=_checks, help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
    s.add_argument("--tolerance", type=float)
    s.add_argument("--max-kraus", type=int)
    s.add_argument("--sampler", choices=["general", "unitary"])
    s.add_argument("--out", help="JSON report path; a .csv companion is written next to it")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("decompose", help="split an instrument into informational and dynamical parts")
    d.add_argument("instrument", type=_existing_file)
    d.add_argument("reference", type=_existing_file)
    d.add_argument("--out", help="write the dynamical Choi matrix here")
    output_flags(d)
    d.set_defaults(func=cmd_decompose)

    m = sub.add_parser("compare", help="entropic vs fidelity-based disturbance")
    m.add_argument("instrument", type=_existing_file)
    m.add_argument("state", type=_existing_file)
    output_flags(m)
    m.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InfodistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

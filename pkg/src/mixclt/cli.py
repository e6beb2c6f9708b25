"""``mixclt`` command-line front end.

Every subcommand only parses input, calls the library and writes the
result.  Exit status: 0 on success, 1 on invalid input, 2 when a
verification report does not pass (the report is still written).
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import limitlaw, mcstat, paths, powervar
from .lattice import DobrushinSystem, LatticePotential


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# config files


def _value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def read_config(path: str) -> dict[str, dict]:
    """INI file to ``{section: {key: value}}``; values are JSON when they parse as JSON."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ValueError(f"malformed config {path}: {exc}".replace("\n", " ")) from None
    return {s: {k: _value(v) for k, v in cp.items(s)} for s in cp.sections()}


def _vol_spec(sections: dict) -> powervar.VolModelSpec:
    return mcstat.vol_spec(sections.get("volmodel", {}))


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(mcstat._jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    sections = read_config(args.spec) if args.spec else {}
    seed = args.seed
    if args.process == "srw":
        w = paths.simulate_srw(args.n, seed)
        out = paths.SamplePath(1.0, w.positions).to_csv()
    elif args.process == "comb":
        c = paths.simulate_comb(args.n, seed)
        out = paths.SamplePath(1.0, c.c1).to_csv({"c2": c.c2, "a1": c.a1})
    elif args.process == "stochint":
        spec = _vol_spec(sections)
        xi = sections.get("stochint", {}).get("xi", "gaussian")
        sig_rng, xi_rng = np.random.default_rng(seed).spawn(2)
        k = spec.steps(args.n)
        sigma = paths.SamplePath(1.0 / args.n, spec.sigma_on_grid(np.arange(k + 1) / args.n, sig_rng))
        si = paths.simulate_discrete_stoch_integral(sigma, xi, args.n, xi_rng)
        out = si.m_n.to_csv({"v_n": si.v_n.values, "b_n": si.b_n.values})
    else:
        vp = paths.simulate_vol_model(_vol_spec(sections), args.n, seed)
        out = vp.m.to_csv({"a": vp.a.values, "r": vp.r.values})
    _write(args.out, out)
    return 0


def cmd_dobrushin(args) -> int:
    V = LatticePotential.from_text(Path(args.potential).read_text())
    _write(args.out, _dump(DobrushinSystem.build(V).report()))
    return 0


def cmd_powervar(args) -> int:
    text = Path(args.path).read_text()
    m = paths.SamplePath.from_csv(text, args.column)
    v = powervar.realized_power_variation(m, args.p, args.delta)
    header = text.splitlines()[0].split(",")
    if args.compensator_column in header:
        A = paths.SamplePath.from_csv(text, args.compensator_column)
        u = powervar.compensator_power_variation(np.diff(A.values), args.p, args.delta, A.delta)
        out = paths.SamplePath(v.delta, v.values).to_csv({"u_pd": u.values})
    else:
        out = v.to_csv()
    _write(args.out, out.replace("t,value", "t,v_pd", 1))
    return 0


def _finish_report(report: mcstat.McReport, args) -> int:
    _write(args.out, report.to_json(include_runtime=args.timing))
    if not args.quiet:
        status = "PASS" if report.passed else "FAIL"
        print(f"{report.experiment}: {status}", file=sys.stderr)
    return 0 if report.passed else 2


def cmd_scheme(args) -> int:
    sections = read_config(args.spec)
    params = dict(sections.get("volmodel", {}))
    _vol_spec(sections)
    p = float(sections.get("scheme", {}).get("p", args.p))
    if params.get("mu_drift") or params.get("beta"):
        name = "drift_robustness"
    elif p == 4:
        name = "realized_var_clt"
    else:
        name, params["p"] = "power_var_clt_p", p
    cfg = mcstat.McConfig(name, master_seed=args.seed or 0, replications=args.reps, steps=args.n,
                          params=params)
    return _finish_report(mcstat.run_experiment(cfg, threads=args.threads), args)


def cmd_limitlaw(args) -> int:
    if args.law == "localtime":
        draws = limitlaw.sample_local_time(args.t, args.seed, size=args.n)
    elif args.law == "mixture":
        draws = limitlaw.sample_mixture(limitlaw.MixtureLawSpec(args.c, args.t), args.seed, size=args.n)
    else:
        draws = limitlaw.sample_inverse_local_time(args.t, args.seed, size=args.n)
    _write(args.out, "value\n" + "".join(f"{float(x)!r}\n" for x in draws))
    return 0


def build_config(sections: dict, args) -> mcstat.McConfig:
    exp = dict(sections.get("experiment", {}))
    params = {**sections.get("volmodel", {}), **sections.get("params", {})}
    name = args.experiment or exp.get("name")
    if name is None:
        raise ValueError("no experiment given (use --experiment or [experiment] name)")
    if args.seed is not None:
        exp["master_seed"] = args.seed
    return mcstat.McConfig(name, master_seed=exp.get("master_seed", 0),
                           replications=args.reps or exp.get("replications", 1000),
                           steps=args.n or exp.get("steps", 1000), params=params,
                           ks_threshold=exp.get("ks_threshold"))


def cmd_verify(args) -> int:
    sections = read_config(args.config) if args.config else {}
    cfg = build_config(sections, args)
    return _finish_report(mcstat.run_experiment(cfg, threads=args.threads), args)


# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for replications")
    common.add_argument("--quiet", action="store_true", help="suppress status lines")

    parser = _Parser(prog="mixclt", parents=[common],
                     description="Simulate and verify martingale CLTs with mixture limits.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="simulate a process to CSV")
    p.add_argument("process", choices=["srw", "comb", "stochint", "volmodel"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="INI file with a [volmodel] section")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dobrushin", parents=[common], help="constants and tables of a potential")
    p.add_argument("--potential", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dobrushin)

    p = sub.add_parser("powervar", parents=[common], help="realized power variation of a path CSV")
    p.add_argument("--path", required=True)
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--column", default="value")
    p.add_argument("--compensator-column", default="a")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_powervar)

    p = sub.add_parser("scheme", parents=[common], help="Monte Carlo of the volatility scheme")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true", help="record runtime in the report")
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("limitlaw", parents=[common], help="draw from a limit law")
    lsub = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    s = lsub.add_parser("sample", parents=[common])
    s.add_argument("--law", choices=["localtime", "mixture", "invlocaltime"], required=True)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_limitlaw)

    p = sub.add_parser("verify", parents=[common], help="run a verification experiment")
    p.add_argument("--experiment", choices=mcstat.EXPERIMENT_NAMES)
    p.add_argument("--config")
    p.add_argument("--reps", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true", help="record runtime in the report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_help(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"mixclt: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"mixclt: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

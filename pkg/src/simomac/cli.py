"""Command-line front end: exact region reports, Monte-Carlo bound
experiments, property-suite verification, and plotter-agnostic CSV
export.

Configuration: sectioned key=value file (INI), path from --config or the
SIMOMAC_CONFIG environment variable; command-line flags override file
values.  Every JSON report embeds the fully resolved configuration, the
seed, and the package version, and is byte-identical across reruns with
the same seed and worker count.

Exit codes: 0 success, 1 property failure, 2 usage error.
"""

import argparse
import configparser
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, lemmas, region
from .auxdist import remainder_slack_bits
from .channel import FADING_KINDS, ChannelConfig, InputDistribution
from .converse import (
    REGIME_T_GE_N_PLUS_1,
    REGIME_T_LE_N,
    duality_bound_mac_user1,
    duality_bound_single_user,
)
from .errors import LowSnrRegime, SimomacError
from .training import mac_training_rates, single_user_training_rate

WORKERS = 1  # declared worker count, recorded for reproducibility


def _frac_str(x):
    return f"{x.numerator}/{x.denominator}"


def _region_payload(reg):
    return {
        "halfspaces": [[_frac_str(a1), _frac_str(a2), _frac_str(b)] for a1, a2, b in reg.halfspaces],
        "vertices": [[_frac_str(d1), _frac_str(d2)] for d1, d2 in reg.vertices],
    }


def _emit(report, args):
    print(json.dumps(report, sort_keys=True, indent=2))


def _base_report(cmd, cfg_dict):
    return {"version": __version__, "command": cmd, "workers": WORKERS, "config": cfg_dict}


def _load_config(path):
    cp = configparser.ConfigParser()
    if path:
        if not os.path.exists(path):
            raise SystemExit(2)
        cp.read(path)
    return cp


def _cfg_get(cp, section, key, fallback=None):
    if cp.has_option(section, key):
        return cp.get(section, key)
    if cp.has_option("common", key):
        return cp.get("common", key)
    return fallback


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------

def cmd_region(args, cp):
    outer = region.outer_region(args.T, args.N)
    inner = region.inner_region(args.T, args.N)
    equal = region.regions_equal(outer, inner)
    if args.format == "csv":
        sys.stdout.write(region.polygon_export(outer))
        return 0
    report = _base_report("region", {"T": args.T, "N": args.N, "format": args.format})
    report.update(
        {
            "outer": _region_payload(outer),
            "inner": _region_payload(inner),
            "equal": bool(equal),
            "polygon_csv": region.polygon_export(outer),
        }
    )
    _emit(report, args)
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def _bound_to_dict(rep):
    return {
        "value": rep.value,
        "std_error": rep.std_error,
        "remainder_terms": rep.remainder_terms,
        "fitted": {k: list(v) for k, v in rep.components.get("fitted", {}).items()},
        "analytic_rhs_value": rep.components.get("analytic_rhs_value"),
        "branch_counts": rep.components.get("branch_counts"),
    }


def cmd_bounds(args, cp):
    p_dbs = [float(s) for s in args.P_dB.split(",")]
    regime = args.regime
    if regime == "auto":
        regime = REGIME_T_GE_N_PLUS_1 if args.T >= args.N + 1 else REGIME_T_LE_N
    cfg_dict = {
        "T": args.T,
        "N": args.N,
        "P_dB": p_dbs,
        "trials": args.trials,
        "seed": args.seed,
        "fading": args.fading,
        "regime": regime,
    }
    report = _base_report("bounds", cfg_dict)
    per_p = []
    warnings = []
    for p_db in p_dbs:
        p_lin = 10.0 ** (p_db / 10.0)
        cfg = ChannelConfig(T=args.T, N=args.N, P=p_lin, fading_kind=args.fading,
                            trials=args.trials, seed=args.seed)
        iso1 = InputDistribution(kind="isotropic_peak", T=args.T, P=p_lin)
        iso2 = InputDistribution(kind="isotropic_peak", T=args.T, P=p_lin)
        entry = {"P_dB": p_db, "slack_bits": remainder_slack_bits(p_lin)}
        try:
            entry["single_user_upper"] = _bound_to_dict(duality_bound_single_user(iso1, cfg))
            entry["mac_user1_upper"] = _bound_to_dict(
                duality_bound_mac_user1(iso1, iso2, cfg, regime)
            )
        except LowSnrRegime as exc:
            warnings.append(f"P={p_db} dB: {exc}")
        if cfg.fading_kind == "iid_complex_gaussian":
            su = single_user_training_rate(cfg)
            entry["single_user_training"] = {"rate": su.rate, "std_error": su.std_error}
            if args.T >= 3:
                r1, r2 = mac_training_rates(cfg)
                entry["mac_training"] = {
                    "rate1": r1.rate, "rate2": r2.rate,
                    "std_error1": r1.std_error, "std_error2": r2.std_error,
                }
        per_p.append(entry)
    slopes = []
    for lo, hi in zip(per_p, per_p[1:]):
        if "single_user_upper" in lo and "single_user_upper" in hi:
            dx = (hi["P_dB"] - lo["P_dB"]) / 10.0 * np.log2(10.0)
            slopes.append(
                {
                    "from_dB": lo["P_dB"],
                    "to_dB": hi["P_dB"],
                    "single_user_upper": (hi["single_user_upper"]["value"]
                                          - lo["single_user_upper"]["value"]) / dx,
                    "mac_user1_upper": (hi["mac_user1_upper"]["value"]
                                        - lo["mac_user1_upper"]["value"]) / dx,
                }
            )
    report.update({"points": per_p, "slopes": slopes, "warnings": warnings})
    _emit(report, args)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_region():
    checks = []
    for t in range(1, 17):
        for n in range(1, 9):
            eq = region.regions_equal(region.outer_region(t, n), region.inner_region(t, n))
            checks.append({"check": f"region_equal_T{t}_N{n}", "margin": 0.0 if eq else 1.0,
                           "slack": 0.0, "passed": bool(eq)})
    return checks


def _verify_optimizer():
    checks = []
    for t in range(3, 17):
        for n in range(2, 9):
            lams = [(Fraction(1), Fraction(1, t - 2)), (Fraction(1, t - 2), Fraction(1)),
                    (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
                    (Fraction(1), Fraction(1))]
            objective = region.regime_objective(t, n)
            outer = region.outer_region(t, n)
            ok = True
            for l1, l2 in lams:
                sup, _ = region.weighted_sum_dof_sup(l1, l2, t, n, objective)
                if sup != region.max_weighted_dof(outer, l1, l2):
                    ok = False
            checks.append({"check": f"optimizer_tight_T{t}_N{n}", "margin": 0.0 if ok else 1.0,
                           "slack": 0.0, "passed": ok})
    # oracle spot checks (grid is slow; representative subset)
    for t, n in [(4, 2), (5, 3), (3, 4)]:
        objective = region.regime_objective(t, n)
        sup, _ = region.weighted_sum_dof_sup(Fraction(1), Fraction(1), t, n, objective)
        grid, _ = region.grid_oracle_sup(Fraction(1), Fraction(1), t, n, objective)
        tol = float(region.objective_lipschitz_bound(t, n)) / 512.0
        margin = float(sup) - float(grid)
        checks.append({"check": f"grid_oracle_T{t}_N{n}", "margin": margin, "slack": tol,
                       "passed": 0.0 <= margin <= tol})
    return checks


def _verify_props(seed):
    checks = []
    p_lin = 100.0
    slack = remainder_slack_bits(p_lin)
    for kind in FADING_KINDS:
        cfg = ChannelConfig(T=4, N=2, P=p_lin, fading_kind=kind, trials=30_000, seed=seed)
        iso = InputDistribution(kind="isotropic_peak", T=4, P=p_lin)
        su = duality_bound_single_user(iso, cfg)
        gap = su.value - su.components["analytic_rhs_value"]
        checks.append({"check": f"prop_single_user_{kind}", "margin": float(slack - gap),
                       "slack": slack + 3 * su.std_error,
                       "passed": bool(gap <= slack + 3 * su.std_error)})
        mac = duality_bound_mac_user1(iso, iso, cfg, REGIME_T_GE_N_PLUS_1)
        gap = mac.value - mac.components["analytic_rhs_value"]
        checks.append({"check": f"prop_mac_high_t_{kind}", "margin": float(slack - gap),
                       "slack": slack + 3 * mac.std_error,
                       "passed": bool(gap <= slack + 3 * mac.std_error)})
        cfg2 = ChannelConfig(T=2, N=2, P=p_lin, fading_kind=kind, trials=30_000, seed=seed)
        i1 = InputDistribution(kind="isotropic_peak", T=2, P=p_lin)
        i2 = InputDistribution(kind="exponent_profile_peak", T=2, P=p_lin,
                               params={"exponents": [0.5, 0.0]})
        low = duality_bound_mac_user1(i1, i2, cfg2, REGIME_T_LE_N)
        gap = low.value - low.components["analytic_rhs_value"]
        checks.append({"check": f"prop_mac_low_t_branches_{kind}", "margin": float(slack - gap),
                       "slack": slack + 3 * low.std_error,
                       "passed": bool(gap <= slack + 3 * low.std_error)})
    return checks


def cmd_verify(args, cp):
    suites = {
        "lemmas": lambda: lemmas.run_all(seed=args.seed),
        "region": _verify_region,
        "optimizer": _verify_optimizer,
        "props": lambda: _verify_props(args.seed),
    }
    checks = suites[args.suite]()
    report = _base_report("verify", {"suite": args.suite, "seed": args.seed})
    report["checks"] = checks
    report["all_passed"] = all(c["passed"] for c in checks)
    _emit(report, args)
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------------------
# export-plot
# ---------------------------------------------------------------------------

def cmd_export_plot(args, cp):
    outer = region.outer_region(args.T, args.N)
    inner = region.inner_region(args.T, args.N)
    for name, reg in (("outer", outer), ("inner", inner)):
        path = f"{args.out}_{name}.csv"
        with open(path, "w") as fh:
            fh.write(region.polygon_export(reg))
        print(path)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser(cp):
    parser = argparse.ArgumentParser(prog="simomac")
    parser.add_argument("--config", default=None, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="cmd", required=True)

    pr = sub.add_parser("region", help="exact DoF region report")
    pr.add_argument("--T", type=_positive_int, required=True)
    pr.add_argument("--N", type=_positive_int, required=True)
    pr.add_argument("--format", choices=("json", "csv"),
                    default=_cfg_get(cp, "region", "format", "json"))
    pr.set_defaults(func=cmd_region)

    pb = sub.add_parser("bounds", help="Monte-Carlo bound experiments")
    pb.add_argument("--T", type=_positive_int, required=True)
    pb.add_argument("--N", type=_positive_int, required=True)
    pb.add_argument("--P-dB", dest="P_dB", required=True, help="comma-separated dB list")
    pb.add_argument("--trials", type=_positive_int,
                    default=int(_cfg_get(cp, "bounds", "trials", 100_000)))
    pb.add_argument("--seed", type=int, default=int(_cfg_get(cp, "bounds", "seed", 0)))
    pb.add_argument("--fading", choices=FADING_KINDS,
                    default=_cfg_get(cp, "bounds", "fading", "iid_complex_gaussian"))
    pb.add_argument("--regime", choices=("auto", REGIME_T_GE_N_PLUS_1, REGIME_T_LE_N),
                    default="auto")
    pb.set_defaults(func=cmd_bounds)

    pv = sub.add_parser("verify", help="property suites")
    pv.add_argument("--suite", choices=("lemmas", "props", "region", "optimizer"),
                    required=True)
    pv.add_argument("--seed", type=int, default=int(_cfg_get(cp, "verify", "seed", 0)))
    pv.set_defaults(func=cmd_verify)

    pe = sub.add_parser("export-plot", help="write region polygon CSVs")
    pe.add_argument("--T", type=_positive_int, required=True)
    pe.add_argument("--N", type=_positive_int, required=True)
    pe.add_argument("--out", required=True, help="output path prefix")
    pe.set_defaults(func=cmd_export_plot)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # config path must be known before defaults are resolved
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=os.environ.get("SIMOMAC_CONFIG"))
    known, _ = pre.parse_known_args(argv)
    cp = _load_config(known.config)
    parser = build_parser(cp)
    args = parser.parse_args(argv)
    try:
        return args.func(args, cp)
    except SimomacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

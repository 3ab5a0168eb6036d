"""Configuration-driven command line entry point.

Subcommands: census, constants, delta, gon-selftest, lip-selftest, fit,
selftest.  Exit codes: 0 pass, 1 assertion failure, 2 config error,
3 budget exceeded.  All randomness is seeded, so re-running a subcommand
with the same config produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import census as census_mod
from . import selftests
from .config import RunConfig, load_config
from .errors import (BudgetExceeded, ConfigInvalid, EnumerationBudgetExceeded,
                     PrimcensusError, QuotientTooLarge, TruncationInsufficient)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _write_json(path: str, payload) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _context(cfg: RunConfig):
    field = cfg.load()
    als = cfg.build_system(field)
    ctx = census_mod.make_context(field, cfg.base_field, als, cfg.n,
                                  enum_budget=cfg.enum_budget)
    return field, als, ctx


def cmd_census(cfg: RunConfig, out_dir: str) -> int:
    field, als, ctx = _context(cfg)
    mtable = census_mod.MoebiusTable(field)
    rows = []
    report_rows = []
    mismatch = False
    for x in cfg.x_grid:
        entry = {"X": str(x)}
        direct = decomposed = None
        if "direct" in cfg.census_methods:
            direct = census_mod.census_direct(ctx, x)
            entry["direct"] = {"count_all": direct.count_all,
                               "count_primitive": direct.count_primitive}
        if "decomposed" in cfg.census_methods:
            decomposed = census_mod.census_decomposed(
                ctx, x, moebius_depth=cfg.moebius_depth, mtable=mtable)
            entry["decomposed"] = {"count_all": decomposed.count_all,
                                   "count_primitive": decomposed.count_primitive,
                                   "detail": decomposed.detail}
        chosen = direct or decomposed
        if direct and decomposed:
            if (direct.count_all != decomposed.count_all or
                    direct.count_primitive != decomposed.count_primitive):
                mismatch = True
                entry["dual_equal"] = False
            else:
                entry["dual_equal"] = True
        rows.append([str(x), chosen.count_all, chosen.count_primitive,
                     repr(chosen.main_term), repr(chosen.residual)])
        report_rows.append(entry)
    coeff, coeff_err = ctx.main_coefficient()
    report = {
        "field": field.name,
        "base_field": cfg.base_field,
        "n": cfg.n,
        "als": als.constants_table(),
        "main_term_coefficient": coeff,
        "main_term_coefficient_error": coeff_err,
        "seeds": {"master": cfg.seed},
        "moebius_depth": cfg.moebius_depth,
        "rows": report_rows,
        "dual_census_equal": not mismatch,
        "height_warnings": list(als.warnings),
    }
    _write_csv(os.path.join(out_dir, "census.csv"),
               ["X", "count_all", "count_primitive", "main_term", "residual"],
               rows)
    _write_json(os.path.join(out_dir, "census_report.json"), report)
    print(f"census: {len(rows)} grid points, dual_census_equal={not mismatch}")
    return EXIT_FAIL if mismatch else EXIT_OK


def cmd_constants(cfg: RunConfig, out_dir: str) -> int:
    field, als, ctx = _context(cfg)
    s_val, s_err = census_mod.schanuel_constant(field, cfg.n)
    vol = census_mod.global_volume(als, mc_samples=cfg.mc_samples, seed=cfg.seed)
    coeff, coeff_err = ctx.main_coefficient()
    payload = {
        "field": field.name,
        "n": cfg.n,
        "schanuel_constant": s_val,
        "schanuel_error": s_err,
        "V_fin": str(vol["V_fin"]),
        "V_inf": vol["V_inf"],
        "V_N": vol["V_N"],
        "volume_checks": vol["checks"],
        "als": als.constants_table(),
        "main_term_coefficient": coeff,
    }
    _write_json(os.path.join(out_dir, "constants.json"), payload)
    for key in ("schanuel_constant", "V_fin", "V_inf", "V_N"):
        print(f"{key:>24}: {payload[key]}")
    for key, val in payload["als"].items():
        print(f"{'als.' + key:>24}: {val}")
    ok = all(v for v in vol["checks"].values())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_delta(cfg: RunConfig, out_dir: str) -> int:
    field, als, ctx = _context(cfg)
    sub = field.subfield(cfg.base_field)
    gs = cfg.delta_gs or sorted(sub.degrees)
    estimates = census_mod.delta_search(field, sub, gs, cfg.delta_bound,
                                        budget=cfg.enum_budget)
    payload = {}
    for g, est in sorted(estimates.items()):
        payload[str(g)] = {
            "value": est.value,
            "certified": est.certified,
            "witness": [[str(x) for x in w] for w in est.witness] if est.witness else None,
            "bound": est.bound,
        }
        print(f"delta_{g}: {est.value} certified={est.certified}")
    _write_json(os.path.join(out_dir, "delta.json"),
                {"field": field.name, "base_field": cfg.base_field,
                 "estimates": payload})
    return EXIT_OK


def cmd_gon_selftest(cfg: RunConfig, out_dir: str) -> int:
    report = selftests.gon_suite(seed=cfg.seed)
    _write_json(os.path.join(out_dir, "gon_selftest.json"), report)
    print(f"gon-selftest: pass={report['pass']} "
          f"(skipped power checks: {report['skipped_power_checks']})")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_lip_selftest(cfg: RunConfig, out_dir: str) -> int:
    bounds = selftests.lip_suite(seed=cfg.seed)
    charts = selftests.chart_suite(seed=cfg.seed)
    report = {"pass": bounds["pass"] and charts["pass"],
              "bounds": bounds, "charts": charts}
    _write_json(os.path.join(out_dir, "lip_selftest.json"), report)
    print(f"lip-selftest: bounds={bounds['pass']} charts={charts['pass']}")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_fit(cfg: RunConfig, out_dir: str) -> int:
    field, als, ctx = _context(cfg)
    rows = [census_mod.census_direct(ctx, x) for x in cfg.x_grid]
    fit = census_mod.asymptotic_fit(rows, field, als, cfg.n,
                                    coeff_tolerance=cfg.fit_tolerance)
    fit["grid"] = [str(x) for x in cfg.x_grid]
    _write_json(os.path.join(out_dir, "fit.json"), fit)
    print(f"fit: coefficient={fit['coefficient']:.6f} "
          f"predicted={fit['predicted']:.6f} slope={fit['residual_slope']:.3f} "
          f"pass={fit['pass']}")
    return EXIT_OK if fit["pass"] else EXIT_FAIL


def cmd_selftest(cfg: RunConfig, out_dir: str) -> int:
    report = selftests.selftest_all(seed=cfg.seed)
    # negative control: a corrupted invariant must be rejected at load
    from .errors import DiscriminantMismatch
    from .numfield import load_field
    bad_cfg = json.loads(json.dumps(cfg.field_cfg))
    bad_cfg["invariants"]["disc"] = int(bad_cfg["invariants"]["disc"]) * 4 + 1
    try:
        load_field(bad_cfg)
        control = False
    except (DiscriminantMismatch, ConfigInvalid):
        control = True
    report["negative_control"] = control
    report["pass"] = report["pass"] and control
    _write_json(os.path.join(out_dir, "selftest.json"), report)
    for suite in report["suites"]:
        print(f"  {suite['suite']:<18} pass={suite['pass']}")
    print(f"  negative_control   pass={control}")
    print(f"selftest: pass={report['pass']}")
    return EXIT_OK if report["pass"] else EXIT_FAIL


COMMANDS = {
    "census": cmd_census,
    "constants": cmd_constants,
    "delta": cmd_delta,
    "gon-selftest": cmd_gon_selftest,
    "lip-selftest": cmd_lip_selftest,
    "fit": cmd_fit,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="primcensus",
        description="Heights, lattices and censuses of primitive projective points")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--seed", type=int, default=None, help="override seeds.master")
    parser.add_argument("--workers", type=int, default=None, help="override worker count")
    parser.add_argument("--out", default="out", help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = max(1, args.workers)
        return COMMANDS[args.command](cfg, args.out)
    except ConfigInvalid as exc:
        print(json.dumps({"error": "ConfigInvalid", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, EnumerationBudgetExceeded, QuotientTooLarge) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_BUDGET
    except TruncationInsufficient as exc:
        print(json.dumps({"error": "TruncationInsufficient", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_FAIL
    except PrimcensusError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""``teugels`` command line: gamma tables, spec verification, simulation, conversion.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 bad
configuration or spec.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import charlier as ch
from .cumulant_poly import (
    GAMMA_ORDER_CAP,
    ORACLE_ORDER_CAP,
    OrderTooLargeError,
    cumulants_from_moments,
    gamma,
    gamma_partition_oracle,
    moments_from_cumulants,
)
from .martingale_lab import (
    compensator_test,
    decomposition_residual,
    martingale_path,
    martingale_test,
    negative_control_test,
    pair_grid,
)
from .process_model import SpecError, cumulant_fn, load_spec, validate
from .simulator import SimulationError, optional_covariation_check, simulate_batch, uniform_grid, variations

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

COVARIATION_PATHS = 1000
DECOMPOSITION_PATHS = 100
RATIO_BAND = (0.3, 0.7)
RELATIVE_BOUND = 1e-2
# finest grid of the pathwise decomposition check
DECOMPOSITION_CELLS = 2**14


class StageError(Exception):
    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class RunConfig:
    command: str
    spec: str = ""
    orders: list = field(default_factory=lambda: [1, 2, 3, 4])
    grid_cells: int = 1024
    horizon: float = 1.0
    paths: int = 20000
    seed: int = 20240607
    pairs: list = field(default_factory=list)
    negative_control: bool = False
    dump_paths: int = 0
    formats: list = field(default_factory=lambda: ["json", "text"])

    def to_dict(self):
        return asdict(self)


def _fmt(x):
    return format(float(x), ".17g")


def _parse_orders(text):
    out = set()
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            out.update(range(int(a), int(b) + 1))
        elif part:
            out.add(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad order list {text!r}")
    return sorted(out)


def _parse_pairs(text):
    pairs = []
    for part in text.split(","):
        s, t = part.split(":")
        pairs.append([float(s), float(t)])
    return pairs


def _write(out, name, text):
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


# ------------------------------------------------------------------ gamma
def cmd_gamma(args):
    if args.max_order > GAMMA_ORDER_CAP:
        print(f"order too large: {args.max_order} exceeds the cap of {GAMMA_ORDER_CAP}", file=sys.stderr)
        return EXIT_CONFIG
    polys = [gamma(n) for n in range(args.max_order + 1)]
    mismatches = [n for n in range(min(args.max_order, ORACLE_ORDER_CAP) + 1) if gamma_partition_oracle(n) != polys[n]]
    text = "\n".join(f"gamma_{n} = {p}" for n, p in enumerate(polys)) + "\n"
    payload = {
        "max_order": args.max_order,
        "oracle_checked_up_to": min(args.max_order, ORACLE_ORDER_CAP),
        "oracle_mismatches": mismatches,
        "polynomials": [{"order": n, "poly": p.to_json_dict()} for n, p in enumerate(polys)],
    }
    out = Path(args.out) if args.out else None
    if "text" in args.format:
        _write(out, "gamma.txt", text)
    if "json" in args.format:
        _write(out, "gamma.json", json.dumps(payload, indent=1) + "\n")
    if out is None:
        sys.stdout.write(text)
    if mismatches:
        print(f"partition oracle disagrees at orders {mismatches}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------- charlier
def cmd_charlier(args):
    if not 1 <= args.max_order <= 12:
        print("max-order must lie in 1..12", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    for n in range(1, args.max_order + 1):
        rows.append(
            {
                "order": n,
                "lambda": [str(v) for v in ch.lambda_table(n).entries],
                "expansion": {c: ch.expansion_check(n, c).holds for c in ch.CONVENTIONS},
            }
        )
    lines = [f"{'n':>3}  {'compensated-unweighted':>22} {'raw-arg-weighted':>17}  lambda"]
    for r in rows:
        e = r["expansion"]
        lines.append(
            f"{r['order']:>3}  {('holds' if e['compensated-unweighted'] else 'fails'):>22} "
            f"{('holds' if e['raw-argument-weighted'] else 'fails'):>17}  [{', '.join(r['lambda'])}]"
        )
    text = "\n".join(lines) + "\n"
    out = Path(args.out) if args.out else None
    if "text" in args.format:
        _write(out, "charlier.txt", text)
    if "json" in args.format:
        _write(out, "charlier.json", json.dumps({"max_order": args.max_order, "orders": rows}, indent=1) + "\n")
    if out is None:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- convert
def _exact_input(v):
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(str(v))


def cmd_convert(args):
    try:
        raw = json.loads(Path(args.input).read_text() if args.input else args.values)
        values = [_exact_input(v) for v in raw]
        if not values:
            raise ValueError("empty sequence")
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = moments_from_cumulants(values) if args.to == "moments" else cumulants_from_moments(values)
    print(json.dumps([str(v) for v in result]))
    return EXIT_OK


# --------------------------------------------------------------- simulate
def _config_from(args, command):
    horizon = float(args.horizon)
    pairs = _parse_pairs(args.pairs) if getattr(args, "pairs", None) else [[horizon / 4, horizon / 2], [horizon / 2, horizon]]
    return RunConfig(
        command=command,
        spec=args.spec,
        orders=getattr(args, "orders", [1, 2, 3, 4]),
        grid_cells=int(args.grid_cells),
        horizon=horizon,
        paths=int(args.paths),
        seed=int(args.seed),
        pairs=pairs,
        negative_control=bool(getattr(args, "negative_control", False)),
        dump_paths=int(args.dump_paths),
        formats=list(args.format),
    )


def _dump(batch, count, out, formats):
    for p in range(min(count, batch.num_paths)):
        rec = batch.path(p)
        if "csv" in formats:
            _write(out / "paths", f"path_{rec.path_index:06d}.csv", rec.to_csv())
        if "json" in formats:
            _write(out / "paths", f"path_{rec.path_index:06d}.json", rec.to_json() + "\n")


def cmd_simulate(args):
    cfg = _config_from(args, "simulate")
    try:
        spec = load_spec(cfg.spec)
        rep = validate(spec, cfg.horizon, cfg.grid_cells + 1)
        if not rep.ok:
            raise StageError("validate", "; ".join(str(i) for i in rep.issues))
        grid = uniform_grid(cfg.horizon, cells=cfg.grid_cells)
        batch = simulate_batch(spec, grid, cfg.seed, cfg.paths, workers=args.workers)
    except (SpecError, SimulationError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    x = batch.x_values
    mean = x.mean(axis=0)
    var = x.var(axis=0, ddof=1) if cfg.paths > 1 else np.zeros_like(mean)
    f2 = cumulant_fn(spec, 2, grid)
    lines = ["t,mean_x,stderr_mean_x,var_x,F2"]
    for k in range(grid.size):
        se = np.sqrt(var[k] / cfg.paths)
        lines.append(",".join(_fmt(v) for v in (grid[k], mean[k], se, var[k], f2[k])))
    text = "\n".join(lines) + "\n"
    out = Path(args.out) if args.out else None
    if out is None:
        sys.stdout.write(text)
    else:
        _write(out, "summary.csv", text)
        _write(out, "config.json", json.dumps(cfg.to_dict(), indent=1) + "\n")
        _dump(batch, cfg.dump_paths, out, cfg.formats)
    return EXIT_OK


# ----------------------------------------------------------------- verify
def run_verify(cfg, workers=1):
    """Run the whole verification suite.

    Returns ``(ok, bundle, report_texts, path_batch)``; ``bundle`` is the
    JSON-ready report and ``path_batch`` the fine-grid paths used for the
    pathwise checks.
    """
    try:
        spec = load_spec(cfg.spec)
    except (SpecError, OSError, ValueError, KeyError) as exc:
        raise StageError("load", str(exc)) from None
    max_order = max(cfg.orders)
    try:
        gamma(max_order)
    except OrderTooLargeError as exc:
        raise StageError("load", str(exc)) from None
    val = validate(spec, cfg.horizon, cfg.grid_cells + 1, max_order=max_order)
    if not val.ok:
        raise StageError("validate", "; ".join(str(i) for i in val.issues))
    bundle = {"config": cfg.to_dict(), "spec": spec.to_dict(), "validation": val.to_dict()}
    ok = True

    grid = uniform_grid(cfg.horizon, cells=cfg.grid_cells)
    try:
        path_batch = simulate_batch(spec, grid, cfg.seed, min(cfg.paths, COVARIATION_PATHS), workers=workers)
        mc_batch = simulate_batch(spec, pair_grid(cfg.pairs), cfg.seed, cfg.paths, workers=workers)
    except (SpecError, SimulationError) as exc:
        raise StageError("simulate", str(exc)) from None

    cov = []
    for total in range(2, 9):
        for n in range(1, total):
            m = total - n
            if n > m:
                continue
            scale = float(np.max(np.abs(variations(path_batch, spec, total).variation_values)))
            d = optional_covariation_check(path_batch, spec, n, m)
            passed = d <= 1e-9 * (1.0 + scale)
            ok &= passed
            cov.append({"n": n, "m": m, "max_discrepancy": d, "scale": scale, "pass": passed})
    bundle["covariation"] = cov

    mart = [martingale_test(spec, n, cfg.pairs, cfg.paths, cfg.seed, batch=mc_batch) for n in cfg.orders]
    comp = [compensator_test(spec, n, cfg.pairs, cfg.paths, cfg.seed, batch=mc_batch) for n in (1, 2)]
    ok &= all(r.ok for r in mart + comp)
    bundle["martingale"] = [r.to_dict() for r in mart]
    bundle["compensator"] = [r.to_dict() for r in comp]

    if spec.pure_jump:
        bundle["decomposition"] = _decomposition_stage(spec, path_batch, [n for n in cfg.orders if n <= 4])
        ok &= all(r["pass"] for r in bundle["decomposition"])
    else:
        bundle["decomposition"] = "skipped: spec has a Gaussian part"

    if cfg.negative_control:
        neg = negative_control_test(spec, cfg.pairs, cfg.paths, cfg.seed, batch=mc_batch)
        ok &= neg.ok
        bundle["negative_control"] = neg.to_dict()
        extra = [neg.to_text()]
    else:
        extra = []
    bundle["ok"] = bool(ok)
    texts = [r.to_text() for r in mart + comp] + extra
    return bool(ok), bundle, texts, path_batch


def _refinement_levels(cells):
    """Levels whose refined grids have >= DECOMPOSITION_CELLS / 2 and >= DECOMPOSITION_CELLS cells."""
    fine = 0
    while cells * 2**fine < DECOMPOSITION_CELLS:
        fine += 1
    fine = max(fine, 1)
    return fine - 1, fine


def _decomposition_stage(spec, batch, orders):
    cells = batch.grid.size - 1
    lo, hi = _refinement_levels(cells)
    rows = []
    for n in orders:
        worst_rel, ratios, zero_ok = 0.0, [], True
        for p in range(min(DECOMPOSITION_PATHS, batch.num_paths)):
            path = batch.path(p)
            coarse = float(decomposition_residual(spec, path, n, lo).max())
            fine = float(decomposition_residual(spec, path, n, hi).max())
            scale = float(np.abs(martingale_path(spec, path, n)).max())
            worst_rel = max(worst_rel, fine / max(scale, 1e-300))
            if n == 1:
                zero_ok &= coarse <= 1e-9 * (1.0 + scale)
            elif coarse > 1e-12 * (1.0 + scale):
                # paths with no discretization error (e.g. zero drift) carry no rate information
                ratios.append(fine / coarse)
        row = {
            "order": n,
            "paths": min(DECOMPOSITION_PATHS, batch.num_paths),
            "cells": [cells * 2**lo, cells * 2**hi],
            "max_relative_residual": worst_rel,
        }
        if n == 1:
            row["pass"] = bool(zero_ok)
        else:
            row["rate_paths"] = len(ratios)
            in_band = True
            if ratios:
                row["min_ratio"] = min(ratios)
                row["max_ratio"] = max(ratios)
                in_band = RATIO_BAND[0] <= min(ratios) and max(ratios) <= RATIO_BAND[1]
            row["pass"] = bool(in_band and worst_rel <= RELATIVE_BOUND)
        rows.append(row)
    return rows


def _verify_text(bundle, texts):
    cfg = bundle["config"]
    lines = [
        f"verify spec={cfg['spec']} seed={cfg['seed']} paths={cfg['paths']} orders={cfg['orders']}",
        f"validation: {'ok' if bundle['validation']['ok'] else 'FAILED'}",
        "covariation:",
    ]
    for c in bundle["covariation"]:
        lines.append(f"  [Y{c['n']},Y{c['m']}] vs X({c['n'] + c['m']}): {_fmt(c['max_discrepancy'])}  {'pass' if c['pass'] else 'FAIL'}")
    lines.extend(texts)
    dec = bundle["decomposition"]
    if isinstance(dec, str):
        lines.append(f"decomposition: {dec}")
    else:
        lines.append("decomposition:")
        for r in dec:
            extra = f" ratio=[{_fmt(r['min_ratio'])}, {_fmt(r['max_ratio'])}]" if "min_ratio" in r else ""
            lines.append(
                f"  n={r['order']} cells={r['cells'][0]}->{r['cells'][1]} rel={_fmt(r['max_relative_residual'])}"
                f"{extra}  {'pass' if r['pass'] else 'FAIL'}"
            )
    lines.append(f"overall: {'PASS' if bundle['ok'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_verify(args):
    cfg = _config_from(args, "verify")
    try:
        ok, bundle, texts, batch = run_verify(cfg, workers=args.workers)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = _verify_text(bundle, texts)
    out = Path(args.out) if args.out else None
    if out is not None:
        if "json" in cfg.formats:
            _write(out, "report.json", json.dumps(bundle, indent=1, sort_keys=True) + "\n")
        if "text" in cfg.formats:
            _write(out, "report.txt", text)
        if cfg.dump_paths:
            _dump(batch, cfg.dump_paths, out, cfg.formats if "csv" in cfg.formats else cfg.formats + ["csv"])
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------ parser
def _formats(text):
    return [f.strip() for f in text.split(",") if f.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="teugels", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", help="emit Kendall polynomial tables")
    g.add_argument("--max-order", type=int, required=True)
    g.add_argument("--out")
    g.add_argument("--format", type=_formats, default=["json", "text"])
    g.set_defaults(func=cmd_gamma)

    def sim_flags(sp, paths):
        sp.add_argument("--spec", required=True, help="spec JSON file or bundled name (cox_t2, symmetric_pm1, ...)")
        sp.add_argument("--paths", type=int, default=paths)
        sp.add_argument("--seed", type=int, default=20240607)
        sp.add_argument("--grid-cells", type=int, default=1024)
        sp.add_argument("--horizon", type=float, default=1.0)
        sp.add_argument("--out")
        sp.add_argument("--dump-paths", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("verify", help="run the martingale verification suite on a spec")
    sim_flags(v, 20000)
    v.add_argument("--orders", type=_parse_orders, default=[1, 2, 3, 4])
    v.add_argument("--pairs", help="comma separated s:t pairs (default h/4:h/2,h/2:h)")
    v.add_argument("--negative-control", action="store_true")
    v.add_argument("--format", type=_formats, default=["json", "text"])
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="simulate paths and summarize X_t")
    sim_flags(s, 1000)
    s.add_argument("--format", type=_formats, default=["csv"])
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("charlier", help="lambda tables and Charlier expansion verdicts")
    c.add_argument("action", nargs="?", choices=["table"], default="table")
    c.add_argument("--max-order", type=int, required=True)
    c.add_argument("--out")
    c.add_argument("--format", type=_formats, default=["json", "text"])
    c.set_defaults(func=cmd_charlier)

    k = sub.add_parser("convert", help="moments <-> cumulants on a JSON list")
    k.add_argument("--to", choices=["moments", "cumulants"], required=True)
    k.add_argument("values", nargs="?", help='JSON list, e.g. "[0, 1, 0, 3]"')
    k.add_argument("--input", help="file holding the JSON list")
    k.set_defaults(func=cmd_convert)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "convert" and not (args.values or args.input):
        parser.error("convert needs VALUES or --input")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

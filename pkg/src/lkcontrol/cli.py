"""``lk`` command line: solve, verify-control, alpha, boundary, residual.

Exit codes: 0 success (certified or inconclusive), 1 verification failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import ConfigError, RunConfig, load_config
from .control import check_superadditive, verify_controlled
from .drivers import TimeGrid
from .oracle import default_z_samples, explicit_stepper, lk_residual, normwise_gap
from .report import CERTIFIED, INCONCLUSIVE, SCHEMA_VERSION, VIOLATED
from .series import radius_lower_bound
from .solver import (
    assemble_solution,
    compositions_table,
    solve_coefficients_picard,
    solve_coefficients_recurrence,
    tables_to_csv,
)
from .svg import boundary_svg

log = logging.getLogger("lkcontrol")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
BOUNDARY_ANGLES = 512
BOUNDARY_MAX_RADIUS = 1.05
STEPPER_SUBSTEPS = 8


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _outdir(cfg: RunConfig, args) -> Path:
    out = Path(args.out or cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(cfg: RunConfig) -> TimeGrid:
    return cfg.family.default_grid(cfg.grid)


def _tables(cfg: RunConfig):
    fam, grid = cfg.family, _grid(cfg)
    tables = [solve_coefficients_recurrence(fam, cfg.N, grid, cfg.refinement)]
    if "compositions" in cfg.methods:
        tables.append(compositions_table(fam, cfg.N, grid, cfg.refinement, cap=cfg.composition_cap))
    if "picard" in cfg.methods:
        tables.append(solve_coefficients_picard(fam, cfg.N, grid, cfg.picard_iterations, cfg.refinement))
    if "stepper" in cfg.methods:
        tables.append(explicit_stepper(fam, cfg.N, cfg.grid, grid, STEPPER_SUBSTEPS))
    return tables


def cmd_solve(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    tables = _tables(cfg)
    ref = tables[0]
    (out / "coefficients.csv").write_text(tables_to_csv(tables))

    w = cfg.omega0T
    verdicts = []
    for t in ref.times:
        v = analysis.check_univalence(assemble_solution(ref, float(t), w))
        verdicts.append({
            "t": float(t),
            "status": v.status,
            "alexander_partial": v.alexander_partial,
            "alexander_tail": v.alexander_tail,
            "starlikeness_min": v.sampled_starlikeness_min,
            "reason": v.reason,
        })
    if w is None:
        overall, why = INCONCLUSIVE, "no omega: per-time verdicts cover the truncated polynomial only"
    elif all(v["status"] == CERTIFIED for v in verdicts):
        overall, why = CERTIFIED, "certified at every grid time"
    else:
        overall, why = INCONCLUSIVE, "not certified at every grid time"

    radius = radius_lower_bound(assemble_solution(ref, ref.times[-1], w))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "T": cfg.family.T,
        "N": cfg.N,
        "grid_intervals": len(ref.grid) - 1,
        "refinement": cfg.refinement,
        "methods": [t.method for t in tables],
        "omega_0T": w,
        "alpha_half": analysis.univalence_threshold(),
        "radius_bound": radius.value if math.isfinite(radius.value) else "unbounded",
        "radius_certified": radius.certified and radius.value > 1.0,
        "extension": analysis.extension_certificate(w) if w is not None else None,
        "univalence": overall,
        "univalence_reason": why,
        "control_assumed": "run verify-control to certify the omega-controlled inequalities",
        "method_gaps": {t.method: normwise_gap(t.c, ref.c) for t in tables[1:]},
        "verdicts": verdicts,
    }
    if w is not None and w >= 0.5:
        summary["radius_bound"] = "not certified"
        summary["radius_certified"] = False
    _dump(out / "summary.json", summary)
    print(f"wrote {out / 'coefficients.csv'} and {out / 'summary.json'}; univalence: {overall}")
    return EXIT_OK


def cmd_verify_control(cfg: RunConfig, args) -> int:
    if cfg.omega is None:
        raise ConfigError("verify-control needs an 'omega' entry")
    out = _outdir(cfg, args)
    grid = cfg.family.default_grid(cfg.verify_grid)
    n_max = cfg.n_max or min(cfg.family.truncation_level, 10)
    axioms = check_superadditive(cfg.omega, grid)
    control = verify_controlled(cfg.family, cfg.omega, n_max, grid, cfg.verify_refinement)
    passed = axioms.passed and control.passed
    doc = {
        "schema_version": SCHEMA_VERSION,
        "status": CERTIFIED if passed else VIOLATED,
        "axioms": axioms.to_dict(),
        "controlled": control.to_dict(),
    }
    _dump(out / "verify_control.json", doc)
    for rep in (axioms, control):
        worst = rep.worst()
        print(f"{rep.title}: {rep.status}" + (f" (worst: {worst.name}, margin {worst.margin:.3e})" if worst else ""))
    if control.meta.get("failing_n"):
        print(f"failing n: {control.meta['failing_n']}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_alpha(args) -> int:
    a = analysis.compute_alpha()
    lo, hi = 1 / 8, 1 / 7
    print(f"alpha = {float(a)!r}")
    print(f"alpha/2 = {float(a) / 2!r}")
    print(f"quartic residual = {analysis.quartic(a):.3e}")
    print(f"1/8 < alpha/2 < 1/7: {lo < a / 2 < hi}")
    return EXIT_OK


def cmd_boundary(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    table = solve_coefficients_recurrence(cfg.family, cfg.N, _grid(cfg), cfg.refinement)
    w = cfg.omega0T
    bound = analysis.extension_certificate(w)["radius_bound"] if w is not None else None
    limit = min(BOUNDARY_MAX_RADIUS, bound) if bound is not None and bound > 1.0 else 1.0
    radii = args.radii or [0.5, 1.0]
    times = args.times or [cfg.family.T]
    too_big = [r for r in radii if r > limit or r <= 0]
    if too_big and not args.force:
        print(f"radii {too_big} outside the certified range (0, {limit:.4g}]; use --force", file=sys.stderr)
        return EXIT_USAGE
    theta = 2 * np.pi * np.arange(BOUNDARY_ANGLES) / BOUNDARY_ANGLES
    lines = ["t,r,k,re_f,im_f"]
    for i, t in enumerate(times):
        f = assemble_solution(table, float(t), w)
        curves = []
        for r in radii:
            vals = f(r * np.exp(1j * theta))
            curves.append((r, vals))
            lines += [f"{float(t)!r},{float(r)!r},{k},{float(v.real)!r},{float(v.imag)!r}" for k, v in enumerate(vals)]
        (out / f"boundary_t{i}.svg").write_text(boundary_svg(curves, title=f"t = {float(t):g}"))
    (out / "boundary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'boundary.csv'} and {len(times)} SVG file(s)")
    return EXIT_OK


def cmd_residual(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    fam, grid = cfg.family, _grid(cfg)
    table = solve_coefficients_recurrence(fam, cfg.N, grid, cfg.refinement)
    z = default_z_samples(cfg.seed)
    rep = lk_residual(fam, table, z)
    coarse = solve_coefficients_recurrence(fam, cfg.N, fam.default_grid(max(cfg.grid // 2, 1)), cfg.refinement)
    rep_coarse = lk_residual(fam, coarse, z)
    stepper = explicit_stepper(fam, cfg.N, cfg.grid, grid, STEPPER_SUBSTEPS)
    if len(stepper.grid) != len(table.grid):
        raise ConfigError("stepper and table grids differ")
    gap = max(normwise_gap(stepper.c, table.c), normwise_gap(stepper.C, table.C))
    ratio = rep_coarse.max_residual / rep.max_residual if rep.max_residual > 0 else math.inf
    ok = rep.max_residual <= cfg.residual_tol and gap <= cfg.stepper_tol
    rep.meta.update({
        "residual_tol": cfg.residual_tol,
        "coarse_max_residual": rep_coarse.max_residual,
        "refinement_ratio": ratio if math.isfinite(ratio) else "exact",
        "stepper_relative_gap": gap,
        "stepper_tol": cfg.stepper_tol,
        "status": CERTIFIED if ok else VIOLATED,
        "schema_version": SCHEMA_VERSION,
    })
    (out / "residual.csv").write_text(rep.to_csv())
    (out / "residual.json").write_text(rep.summary_json() + "\n")
    print(f"max residual {rep.max_residual:.3e} (tol {cfg.residual_tol:.1e}), "
          f"stepper gap {gap:.3e} (tol {cfg.stepper_tol:.1e})")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lk", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        return sp

    common(sub.add_parser("solve", help="coefficients and univalence summary"))
    common(sub.add_parser("verify-control", help="check the omega-controlled inequalities"))
    sub.add_parser("alpha", help="print the univalence threshold")
    b = common(sub.add_parser("boundary", help="images of circles |z| = r"))
    b.add_argument("--times", type=float, nargs="+")
    b.add_argument("--radii", type=float, nargs="+")
    b.add_argument("--force", action="store_true")
    common(sub.add_parser("residual", help="integral-equation residual and stepper cross-check"))
    return p


COMMANDS = {
    "solve": cmd_solve,
    "verify-control": cmd_verify_control,
    "boundary": cmd_boundary,
    "residual": cmd_residual,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "alpha":
        return cmd_alpha(args)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"lk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Commands: ``basis eval``, ``solve``, ``optimize``, ``harmonic``, ``coons``,
and ``compare``. Every command writes its artifacts into --out and a
summary.json recording the settings that produced the numbers, so each
reported value can be recomputed from the emitted files. Exit codes: 0
success, 2 invalid input or usage, 3 solver failure, 4 file error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .basis import BasisSpec, ShapePair, basis_tables
from .coons import optimize_tb, tb_surface_jet
from .dirichlet import reduced_functional, solve_interior
from .errors import (
    ConfigurationError,
    DomainError,
    NetFormatError,
    ReconstructionError,
    SolverError,
)
from .harmonic import (
    bernstein_laplacian_defect,
    defect_certificate_bound,
    defect_objective,
    harmonic_reconstruct,
)
from .io import (
    RunSummary,
    atomic_write_text,
    load_net,
    save_net,
    write_convergence_csv,
    write_curvature_csv,
    write_obj,
    write_summary,
)
from .numerics import gauss_legendre_rule
from .patch import (
    Patch,
    SurfaceShape,
    area,
    dirichlet_energy,
    fundamental_forms,
    mean_curvature_grid,
    tessellate,
    triangulate_grid,
)
from .pso import PsoConfig, optimize

NOT_IMPLEMENTED_NOTE = "not implemented: out of scope"


def _float_tuple(flag: str, count: int):
    def parse(text: str):
        parts = text.split(",")
        if len(parts) != count:
            raise argparse.ArgumentTypeError(
                f"{flag} needs {count} comma-separated numbers, got {text!r}"
            )
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} needs numbers, got {text!r}")

    return parse


def _alpha_type(text: str):
    values = _float_tuple("--alpha", 4)(text)
    try:
        return SurfaceShape(*values)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _shape_list(shape: SurfaceShape | None):
    if shape is None:
        return None
    return [float(x) for x in shape.as_array()]


def _shape_text(shape: SurfaceShape) -> str:
    return "(%.4f, %.4f, %.4f, %.4f)" % tuple(shape.as_array())


def _add_output_args(parser, tess: bool = True):
    parser.add_argument("net", help="control net JSON file")
    parser.add_argument(
        "--quad", type=int, default=32, metavar="K",
        help="Gauss-Legendre points per direction (default 32)",
    )
    if tess:
        parser.add_argument(
            "--tess", type=int, default=64, metavar="K",
            help="tessellation cells per direction for OBJ/curvature output (default 64)",
        )
    parser.add_argument(
        "--out", default="out", metavar="DIR",
        help="output directory, created if missing (default ./out)",
    )


def _add_pso_args(parser, runs: bool = False):
    if runs:
        parser.add_argument(
            "--runs", type=int, default=1, metavar="R",
            help="independent swarm runs; run r uses seed SEED+r (default 1)",
        )
    parser.add_argument("--seed", type=int, default=0, metavar="S", help="base RNG seed (default 0)")
    parser.add_argument("--swarm", type=int, default=50, metavar="N", help="particles (default 50)")
    parser.add_argument("--inertia", type=float, default=0.7, metavar="W", help="inertia weight (default 0.7)")
    parser.add_argument("--c1", type=float, default=1.5, help="acceleration toward the global best (default 1.5)")
    parser.add_argument("--c2", type=float, default=1.5, help="acceleration toward the personal best (default 1.5)")
    parser.add_argument("--iters", type=int, default=200, metavar="T", help="swarm iterations (default 200)")
    parser.add_argument(
        "--bounds", type=_float_tuple("--bounds", 2), default=(0.5, 3.5), metavar="LO,HI",
        help="shape-parameter box, applied per component (default 0.5,3.5)",
    )
    parser.add_argument(
        "--threads", type=int, default=None, metavar="N",
        help="fitness evaluation threads (default: GT_PLATEAU_THREADS or 1)",
    )


def _pso_config(args, seed: int) -> PsoConfig:
    return PsoConfig(
        swarm_size=args.swarm,
        inertia=args.inertia,
        c1=args.c1,
        c2=args.c2,
        max_iters=args.iters,
        bounds=np.array([args.bounds] * 4, dtype=float),
        seed=seed,
        threads=args.threads,
    )


def _pso_settings(args, runs: int | None = None) -> dict:
    settings = {
        "seed": args.seed,
        "swarm": args.swarm,
        "inertia": args.inertia,
        "c1": args.c1,
        "c2": args.c2,
        "iters": args.iters,
        "bounds": list(args.bounds),
        "threads": args.threads,
    }
    if runs is not None:
        settings["runs"] = runs
    return settings


def _select_bases(basis_name: str, shape: SurfaceShape, net) -> tuple[BasisSpec, BasisSpec]:
    if basis_name == "gt":
        return shape.basis_specs(net.degree_u, net.degree_v)
    return BasisSpec.bernstein(net.degree_u), BasisSpec.bernstein(net.degree_v)


def _extremal(net, basis_u: BasisSpec, basis_v: BasisSpec, rule):
    """Solve the interior when anything is unknown, else report the net as-is."""
    if net.free.any():
        sol = solve_interior(net, basis_u, basis_v, rule)
        return sol.net, sol.energy, sol.system_condition_hint, sol.route
    surface = Patch(basis_u=basis_u, basis_v=basis_v, net=net)
    return net, dirichlet_energy(surface, rule), None, "none (net already complete)"


def _write_patch_artifacts(surface: Patch, rule, args, out: str) -> float:
    """net.json, surface.obj, curvature.csv; returns the surface area."""
    save_net(surface.net, os.path.join(out, "net.json"))
    vertices, faces = tessellate(surface, args.tess)
    write_obj(os.path.join(out, "surface.obj"), vertices, faces)
    us, vs, forms = mean_curvature_grid(surface, args.tess + 1)
    write_curvature_csv(os.path.join(out, "curvature.csv"), us, vs, forms)
    return area(surface, rule)


def cmd_solve(args) -> int:
    net = load_net(args.net)
    rule = gauss_legendre_rule(args.quad)
    basis_u, basis_v = _select_bases(args.basis, args.alpha, net)
    solved, energy, hint, route = _extremal(net, basis_u, basis_v, rule)

    out = args.out
    os.makedirs(out, exist_ok=True)
    surface = Patch(basis_u=basis_u, basis_v=basis_v, net=solved)
    area_value = _write_patch_artifacts(surface, rule, args, out)

    discrepancy = None
    if args.reference_area is not None:
        relative = abs(area_value - args.reference_area) / abs(args.reference_area)
        if relative > args.reference_rel_tol:
            discrepancy = {
                "area": area_value,
                "energy": energy,
                "quadrature_order": args.quad,
                "reference_area": args.reference_area,
                "relative_error": relative,
            }
            atomic_write_text(
                os.path.join(out, "discrepancy_report.json"),
                json.dumps(discrepancy, indent=2) + "\n",
            )

    summary = RunSummary(
        command="solve",
        settings={
            "net": os.fspath(args.net),
            "basis": args.basis,
            "alpha": _shape_list(args.alpha) if args.basis == "gt" else None,
            "quadrature_order": args.quad,
            "tessellation_cells": args.tess,
            "reference_area": args.reference_area,
            "reference_rel_tol": args.reference_rel_tol,
        },
        results={
            "solved_points": int(net.free.sum()),
            "route": route,
            "energy": energy,
            "area": area_value,
            "system_condition_hint": hint,
            "discrepancy": discrepancy is not None,
        },
    )
    write_summary(summary, os.path.join(out, "summary.json"))
    print(f"solve: route={route} energy={energy:.6f} area={area_value:.6f}")
    if discrepancy is not None:
        print(
            "solve: area misses the reference by "
            f"{discrepancy['relative_error']:.3%}; wrote discrepancy_report.json"
        )
    return 0


def cmd_optimize(args) -> int:
    net = load_net(args.net)
    if not net.free.any():
        raise ConfigurationError("optimize needs a net with unknown interior points")
    if args.runs < 1:
        raise ConfigurationError("--runs must be >= 1")
    rule = gauss_legendre_rule(args.quad)
    out = args.out
    os.makedirs(out, exist_ok=True)

    def objective(x):
        return reduced_functional(net, SurfaceShape.from_iterable(x), rule)

    run_rows = []
    best = None
    for r in range(args.runs):
        result = optimize(objective, _pso_config(args, args.seed + r))
        write_convergence_csv(os.path.join(out, f"convergence_{r:02d}.csv"), result.history)
        shape = SurfaceShape.from_iterable(result.position)
        sol = solve_interior(net, *shape.basis_specs(net.degree_u, net.degree_v), rule)
        run_area = area(Patch.gt(sol.net, shape), rule)
        run_rows.append(
            {
                "run": r,
                "seed": args.seed + r,
                "alpha": _shape_list(shape),
                "energy": sol.energy,
                "area": run_area,
                "evaluations": result.evaluations,
            }
        )
        if best is None or sol.energy < best[1].energy:
            best = (r, sol, shape, run_area)

    r_best, sol, shape, best_area = best
    surface = Patch.gt(sol.net, shape)
    _write_patch_artifacts(surface, rule, args, out)
    summary = RunSummary(
        command="optimize",
        settings={
            "net": os.fspath(args.net),
            "quadrature_order": args.quad,
            "tessellation_cells": args.tess,
            **_pso_settings(args, runs=args.runs),
        },
        results={
            "best_run": r_best,
            "alpha": _shape_list(shape),
            "energy": sol.energy,
            "area": best_area,
            "system_condition_hint": sol.system_condition_hint,
            "runs": run_rows,
        },
    )
    write_summary(summary, os.path.join(out, "summary.json"))
    print(
        f"optimize: best run {r_best} alpha={_shape_text(shape)} "
        f"energy={sol.energy:.6f} area={best_area:.6f}"
    )
    return 0


def cmd_harmonic(args) -> int:
    net = load_net(args.net)
    rule = gauss_legendre_rule(args.quad)
    reconstructed = harmonic_reconstruct(net)
    defect = bernstein_laplacian_defect(reconstructed, rule)
    bound = defect_certificate_bound(reconstructed)

    out = args.out
    os.makedirs(out, exist_ok=True)
    save_net(reconstructed, os.path.join(out, "net.json"))

    results = {
        "reconstructed_points": int(net.free.sum()),
        "laplacian_defect": defect,
        "certificate_bound": bound,
        "certified": bool(defect < bound),
    }
    settings = {
        "net": os.fspath(args.net),
        "quadrature_order": args.quad,
        "tune_alpha": bool(args.tune_alpha),
    }
    if args.tune_alpha:
        result = optimize(
            lambda x: defect_objective(reconstructed, SurfaceShape.from_iterable(x), rule),
            _pso_config(args, args.seed),
        )
        write_convergence_csv(os.path.join(out, "convergence.csv"), result.history)
        shape = SurfaceShape.from_iterable(result.position)
        results["alpha"] = _shape_list(shape)
        results["tuned_defect"] = result.value
        results["evaluations"] = result.evaluations
        settings.update(_pso_settings(args))

    summary = RunSummary(command="harmonic", settings=settings, results=results)
    write_summary(summary, os.path.join(out, "summary.json"))
    line = f"harmonic: defect={defect:.3e} certified={results['certified']}"
    if args.tune_alpha:
        line += f" tuned_defect={results['tuned_defect']:.3e}"
    print(line)
    return 0


def cmd_coons(args) -> int:
    net = load_net(args.net)
    rule = gauss_legendre_rule(args.quad)
    optimum = optimize_tb(net, _pso_config(args, args.seed), rule)

    out = args.out
    os.makedirs(out, exist_ok=True)
    write_convergence_csv(os.path.join(out, "convergence.csv"), optimum.history)
    save_net(optimum.net, os.path.join(out, "net.json"))

    params = np.linspace(0.0, 1.0, args.tess + 1)
    jet = tb_surface_jet(optimum.net, optimum.shape, params, params)
    vertices, faces = triangulate_grid(jet.S)
    write_obj(os.path.join(out, "surface.obj"), vertices, faces)
    forms = fundamental_forms(jet.Su, jet.Sv, jet.Suu, jet.Suv, jet.Svv)
    write_curvature_csv(os.path.join(out, "curvature.csv"), params, params, forms)

    # the two mixed-basis components, as inspectable meshes
    r1 = Patch(
        basis_u=BasisSpec.bernstein(3),
        basis_v=BasisSpec(family="gt", degree=3, shape=optimum.shape.v_pair),
        net=optimum.net,
    )
    r2 = Patch(
        basis_u=BasisSpec(family="gt", degree=3, shape=optimum.shape.u_pair),
        basis_v=BasisSpec.bernstein(3),
        net=optimum.net,
    )
    write_obj(os.path.join(out, "r1.obj"), *tessellate(r1, args.tess))
    write_obj(os.path.join(out, "r2.obj"), *tessellate(r2, args.tess))

    summary = RunSummary(
        command="coons",
        settings={
            "net": os.fspath(args.net),
            "quadrature_order": args.quad,
            "tessellation_cells": args.tess,
            **_pso_settings(args),
        },
        results={
            "alpha": _shape_list(optimum.shape),
            "energy": optimum.energy,
            "evaluations": optimum.pso.evaluations,
            "system_condition_hint": optimum.system_condition_hint,
        },
    )
    write_summary(summary, os.path.join(out, "summary.json"))
    print(f"coons: alpha={_shape_text(optimum.shape)} energy={optimum.energy:.6f}")
    return 0


def cmd_compare(args) -> int:
    net = load_net(args.net)
    rule = gauss_legendre_rule(args.quad)
    out = args.out
    os.makedirs(out, exist_ok=True)

    rows = []

    def add_row(method, shape, energy, area_value, note=""):
        rows.append(
            {
                "method": method,
                "alpha": _shape_list(shape),
                "energy": energy,
                "area": area_value,
                "note": note,
            }
        )

    optimized = args.runs > 0 and bool(net.free.any())
    if optimized:
        best = None
        for r in range(args.runs):
            result = optimize(
                lambda x: reduced_functional(net, SurfaceShape.from_iterable(x), rule),
                _pso_config(args, args.seed + r),
            )
            if best is None or result.value < best.value:
                best = result
        shape = SurfaceShape.from_iterable(best.position)
        sol = solve_interior(net, *shape.basis_specs(net.degree_u, net.degree_v), rule)
        add_row("gt-optimized", shape, sol.energy, area(Patch.gt(sol.net, shape), rule))

    shape0 = args.alpha
    solved, energy, _, _ = _extremal(net, *shape0.basis_specs(net.degree_u, net.degree_v), rule)
    add_row("gt-fixed-alpha", shape0, energy, area(Patch.gt(solved, shape0), rule))

    bu = BasisSpec.bernstein(net.degree_u)
    bv = BasisSpec.bernstein(net.degree_v)
    solved, energy, _, _ = _extremal(net, bu, bv, rule)
    add_row("bernstein-dirichlet", None, energy, area(Patch(basis_u=bu, basis_v=bv, net=solved), rule))

    add_row("quasi-harmonic", None, None, None, NOT_IMPLEMENTED_NOTE)
    add_row("bending-energy", None, None, None, NOT_IMPLEMENTED_NOTE)

    csv_lines = ["method,alpha1,alpha2,beta1,beta2,energy,area,note"]
    for row in rows:
        alpha = row["alpha"] if row["alpha"] is not None else ["", "", "", ""]
        cells = [row["method"]]
        cells += ["%.17g" % a if a != "" else "" for a in alpha]
        cells += ["%.17g" % row[k] if row[k] is not None else "" for k in ("energy", "area")]
        cells.append(row["note"])
        csv_lines.append(",".join(cells))
    atomic_write_text(os.path.join(out, "comparison.csv"), "\n".join(csv_lines) + "\n")

    md_lines = [
        "| method | alpha | energy | area | note |",
        "| --- | --- | --- | --- | --- |",
    ]
    for row in rows:
        alpha = "" if row["alpha"] is None else _shape_text(SurfaceShape(*row["alpha"]))
        energy = "" if row["energy"] is None else "%.6f" % row["energy"]
        area_text = "" if row["area"] is None else "%.6f" % row["area"]
        md_lines.append(f"| {row['method']} | {alpha} | {energy} | {area_text} | {row['note']} |")
    markdown = "\n".join(md_lines) + "\n"
    atomic_write_text(os.path.join(out, "comparison.md"), markdown)

    summary = RunSummary(
        command="compare",
        settings={
            "net": os.fspath(args.net),
            "alpha": _shape_list(args.alpha),
            "quadrature_order": args.quad,
            **_pso_settings(args, runs=args.runs),
        },
        results={"rows": rows, "optimized_row_included": optimized},
    )
    write_summary(summary, os.path.join(out, "summary.json"))
    print(markdown, end="")
    return 0


def cmd_basis_eval(args) -> int:
    if args.basis == "bernstein":
        spec = BasisSpec.bernstein(args.degree)
    else:
        spec = BasisSpec(family="gt", degree=args.degree, shape=ShapePair(*args.theta))
    if args.samples < 2:
        raise ConfigurationError("--samples must be >= 2")
    ts = np.linspace(0.0, 1.0, args.samples)
    tables = basis_tables(spec, ts)

    count = spec.degree + 1
    header = ["t"]
    for prefix in ("value", "d1", "d2"):
        header += [f"{prefix}_{i}" for i in range(count)]
    lines = [",".join(header)]
    for col, t in enumerate(ts):
        cells = ["%.17g" % t]
        for table in (tables.values, tables.first, tables.second):
            cells += ["%.17g" % x for x in table[:, col]]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"

    if args.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)
        print(f"basis eval: wrote {args.samples} samples to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtplateau",
        description=(
            "Dirichlet-extremal tensor-product patches with tunable trigonometric "
            "bases: solve, shape-optimize, reconstruct, and compare."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    basis_cmd = sub.add_parser("basis", help="basis-function utilities")
    basis_sub = basis_cmd.add_subparsers(dest="basis_command", required=True, metavar="SUBCOMMAND")
    ev = basis_sub.add_parser("eval", help="tabulate one basis family as CSV")
    ev.add_argument("--basis", choices=("gt", "bernstein"), default="gt")
    ev.add_argument("--degree", type=int, default=3, help="basis degree (default 3)")
    ev.add_argument(
        "--theta", type=_float_tuple("--theta", 2), default=(2.0, 2.0), metavar="T1,T2",
        help="shape pair for the gt family (default 2,2)",
    )
    ev.add_argument("--samples", type=int, default=21, help="parameter samples (default 21)")
    ev.add_argument("--out", default=None, metavar="FILE", help="CSV file (default stdout)")
    ev.set_defaults(handler=cmd_basis_eval)

    solve = sub.add_parser("solve", help="fill unknown interior points with the energy extremal")
    _add_output_args(solve)
    solve.add_argument("--basis", choices=("gt", "bernstein"), default="gt")
    solve.add_argument(
        "--alpha", type=_alpha_type, default=SurfaceShape(2.0, 2.0, 2.0, 2.0),
        metavar="A1,A2,B1,B2", help="shape vector for the gt basis (default 2,2,2,2)",
    )
    solve.add_argument(
        "--reference-area", type=float, default=None, metavar="X",
        help="compare the computed area against X and report discrepancies",
    )
    solve.add_argument(
        "--reference-rel-tol", type=float, default=0.005, metavar="T",
        help="relative tolerance for --reference-area (default 0.005)",
    )
    solve.set_defaults(handler=cmd_solve)

    opt = sub.add_parser("optimize", help="swarm-search the shape vector minimizing the extremal energy")
    _add_output_args(opt)
    _add_pso_args(opt, runs=True)
    opt.set_defaults(handler=cmd_optimize)

    harm = sub.add_parser("harmonic", help="reconstruct missing points from the harmonicity relations")
    _add_output_args(harm, tess=False)
    harm.add_argument(
        "--tune-alpha", action="store_true",
        help="after reconstruction, swarm-minimize the Laplacian defect over the shape vector",
    )
    _add_pso_args(harm)
    harm.set_defaults(handler=cmd_harmonic)

    coons = sub.add_parser("coons", help="minimal blended patch: solve the interior and optimize the shape vector")
    _add_output_args(coons)
    _add_pso_args(coons)
    coons.set_defaults(handler=cmd_coons)

    comp = sub.add_parser("compare", help="area/energy table across solver variants")
    _add_output_args(comp, tess=False)
    comp.add_argument(
        "--alpha", type=_alpha_type, default=SurfaceShape(2.0, 2.0, 2.0, 2.0),
        metavar="A1,A2,B1,B2", help="shape vector for the fixed-alpha row (default 2,2,2,2)",
    )
    _add_pso_args(comp, runs=True)
    comp.set_defaults(handler=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"gtplateau: invalid input: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ReconstructionError) as exc:
        print(f"gtplateau: solver failure: {exc}", file=sys.stderr)
        return 3
    except (NetFormatError, OSError) as exc:
        print(f"gtplateau: file error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

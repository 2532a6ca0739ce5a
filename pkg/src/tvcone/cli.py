#!/usr/bin/env python
"""
tvcone CLI - phantom, mask, degrade, regularize, eval, bench, study, export
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import scipy.fft

from .config import RunConfig, configure_logging, dump_run_config, load_run_config
from .errors import ParameterError, exit_code_for, handle_error, log_error
from .metrics import slice_report
from .optics import build_support_mask, closed_form_resolution, degrade, implied_resolution, missing_cone_mask
from .patchwork import patched_regularize
from .phantoms import default_bead, generate
from .solver import BEAD_STUDY_SETS, create_bench_params, parameter_study, regularize
from .types import GridSpec
from .volgrid import Volume3, real_ifft3_array
from . import volio

logger = logging.getLogger(__name__)

BENCH_LADDER = [(64, 64, 64)] + [(n, n, 64) for n in range(96, 321, 32)]
BENCH_HEADER = "nx,ny,nz,voxels,wall_seconds,f_update_seconds,shrinkage_seconds,bookkeeping_seconds"
STUDY_HEADER = "name,n_outer,n_inner,mu,tau,gamma,mse,lateral_fwhm_um,axial_fwhm_um,axial_error"


def _parse_params(values: Sequence[str]) -> Dict[str, Any]:
    """(N, M, mu, tau, gamma) from --params; N and M must be whole numbers."""
    parsed: Dict[str, Any] = {}
    names = ("n_outer", "n_inner", "mu", "tau", "gamma")
    for name, text, kind in zip(names, values, (int, int, float, float, float)):
        try:
            parsed[name] = kind(text)
        except ValueError:
            expected = "an integer" if kind is int else "a number"
            raise ParameterError(f"--params value '{text}' is not {expected}", name) from None
    return parsed


def _load(args) -> RunConfig:
    """Merge the config file with global and command flags, validate once."""
    overrides: Dict[str, Any] = {"output": {}}
    if args.log_level:
        overrides["output"]["log_level"] = args.log_level
    if args.threads is not None:
        overrides["output"]["threads"] = args.threads
    if args.seed is not None:
        overrides["output"]["seed"] = args.seed
    if args.output_dir:
        overrides["output"]["directory"] = args.output_dir

    solver: Dict[str, Any] = {}
    if getattr(args, "preset", None):
        solver["preset"] = args.preset
    if getattr(args, "params", None):
        solver.update(preset=None, **_parse_params(args.params))
    if getattr(args, "nonneg_mode", None):
        solver["nonneg_mode"] = args.nonneg_mode
    if getattr(args, "tol_fupdate", None) is not None:
        solver["tol_fupdate"] = args.tol_fupdate
    if solver:
        overrides["solver"] = solver

    patch: Dict[str, Any] = {}
    if getattr(args, "patched", None) is not None:
        patch["enabled"] = args.patched
    if getattr(args, "patch_size", None):
        patch["patch"] = args.patch_size
    if getattr(args, "stride", None):
        patch["stride"] = args.stride
    if getattr(args, "window", None):
        patch["mode"] = args.window
    if patch:
        overrides["patch"] = patch

    cfg = load_run_config(args.config, overrides)
    configure_logging(cfg.output.log_level)
    return cfg


def _out(cfg: RunConfig, given: Optional[str], default: str) -> Path:
    return cfg.output_path(given or default)


def _read_input(path: str):
    """A spectrum or a raw tomogram, whichever the file holds."""
    if volio.read_kind(path) == volio.PayloadKind.COMPLEX:
        return volio.read_spec(path)
    return volio.read_vol(path)


def cmd_phantom(args, cfg: RunConfig):
    """Generate the configured phantom."""
    vol = generate(cfg.phantom_spec(), cfg.grid)
    out = _out(cfg, args.output, "truth.vol3")
    volio.write_vol(vol, out)
    print(f"✓ Phantom {cfg.phantom.kind.value} {cfg.grid.shape} -> {out}")


def cmd_mask(args, cfg: RunConfig):
    """Build the optical support mask (or an idealised missing-cone mask)."""
    if args.cone_angle is not None:
        mask = missing_cone_mask(cfg.grid, args.cone_angle)
    else:
        mask = build_support_mask(cfg.optics, cfg.grid, workers=cfg.output.threads)
        lateral, axial = closed_form_resolution(cfg.optics)
        print(f"  Closed-form resolution: lateral {1000 * lateral:.1f} nm, axial {1000 * axial:.1f} nm")
    lateral, axial = implied_resolution(mask)
    out = _out(cfg, args.output, "mask.vol3")
    volio.write_mask(mask, out)
    print(f"✓ Mask {mask.count} voxels ({100 * mask.fraction:.2f}%) -> {out}")
    print(f"  Rasterised resolution: lateral {1000 * lateral:.1f} nm, axial {1000 * axial:.1f} nm")


def cmd_degrade(args, cfg: RunConfig):
    """Apply the support mask to a ground truth."""
    truth = volio.read_vol(args.truth)
    mask = volio.read_mask(args.mask)
    spectrum, raw = degrade(truth, mask)
    spec_out = _out(cfg, args.spectrum_output, "measured.vol3")
    raw_out = _out(cfg, args.raw_output, "raw.vol3")
    volio.write_spec(spectrum, spec_out)
    volio.write_vol(raw, raw_out)
    print(f"✓ Degraded {args.truth} -> {spec_out}, {raw_out}")


def cmd_regularize(args, cfg: RunConfig):
    """Regularise a spectrum or raw tomogram, whole or patch by patch."""
    data = _read_input(args.input)
    mask = volio.read_mask(args.mask)
    params = cfg.solver_params()
    out = _out(cfg, args.output, "regularized.vol3")
    report_out = _out(cfg, args.report, "report.json")

    if cfg.patch.enabled:
        layout = cfg.patch.layout()
        raw = data if isinstance(data, Volume3) else Volume3(data.grid, real_ifft3_array(data.data))

        def mask_builder(grid: GridSpec):
            if grid == mask.grid:
                return mask
            if args.cone_angle is not None:
                return missing_cone_mask(grid, args.cone_angle)
            return build_support_mask(cfg.optics, grid)

        result, solve_report = patched_regularize(
            raw, mask_builder, params, layout, workers=cfg.output.threads
        )
        report = {
            "mode": "patched",
            "patch": layout.model_dump(mode="json"),
            **solve_report.to_dict(),
        }
    else:
        result, solve_report = regularize(data, mask, params)
        report = {"mode": "whole", **solve_report.to_dict()}

    report["input"] = str(args.input)
    report["mask"] = str(args.mask)
    volio.write_vol(result, out)
    volio.write_json_report(report, report_out)
    print(f"✓ Regularised ({report['mode']}, {params.as_tuple()}) -> {out}")
    print(f"  Report -> {report_out}")


def cmd_eval(args, cfg: RunConfig):
    """Per-slice MSE, SSIM and Pearson of two volumes."""
    a = volio.read_vol(args.a)
    b = volio.read_vol(args.b)
    report = slice_report(a, b, z_range_um=args.z_range, z_center_um=args.z_center)
    text = report.to_csv()
    if args.output:
        out = cfg.output_path(args.output)
        volio.write_csv(text, out)
        agg = report.aggregate
        print(f"✓ {len(report.rows)} slices, volume MSE {agg.mse:.6g} -> {out}")
    else:
        print(text, end="")


def _parse_size(text: str) -> Tuple[int, int, int]:
    try:
        nx, ny, nz = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size '{text}' is not NXxNYxNZ") from None
    return nx, ny, nz


def run_bench(
    cfg: RunConfig, sizes: Sequence[Tuple[int, int, int]], two_outer: bool = False, **overrides
) -> List[Dict[str, float]]:
    """Time the solver on a bead at every size; one row per size."""
    params = create_bench_params(two_outer=two_outer, **overrides)
    bead = default_bead()
    rows = []
    for shape in sizes:
        grid = cfg.grid.with_shape(shape)
        mask = build_support_mask(cfg.optics, grid, workers=cfg.output.threads)
        _, raw = degrade(generate(bead, grid), mask)
        _, report = regularize(raw, mask, params)
        rows.append({
            "nx": grid.nx, "ny": grid.ny, "nz": grid.nz, "voxels": grid.voxel_count,
            "wall_seconds": report.wall_seconds, **report.timings,
        })
        logger.info(f"Bench {shape}: {report.wall_seconds:.3f}s")
    return rows


def cmd_bench(args, cfg: RunConfig):
    """Runtime versus volume size."""
    two_outer = args.iterations == "two-outer"
    overrides = {}
    if args.n_inner:
        overrides["n_inner"] = args.n_inner
    if args.n_outer:
        overrides["n_outer"] = args.n_outer
    params = create_bench_params(two_outer=two_outer, **overrides)
    print(
        f"Iterations: {args.iterations} reading, "
        f"{params.n_inner} inner x {params.n_outer} outer"
    )

    rows = run_bench(cfg, args.sizes or BENCH_LADDER, two_outer, **overrides)
    lines = [BENCH_HEADER]
    for r in rows:
        lines.append(
            f"{r['nx']},{r['ny']},{r['nz']},{r['voxels']},{r['wall_seconds']:.6f},"
            f"{r['f_update']:.6f},{r['shrinkage']:.6f},{r['bookkeeping']:.6f}"
        )
    out = _out(cfg, args.output, "bench.csv")
    volio.write_csv("\n".join(lines) + "\n", out)
    print(f"✓ {len(rows)} sizes -> {out}")


def cmd_study(args, cfg: RunConfig):
    """Parameter dependency study on the configured phantom."""
    truth = generate(cfg.phantom_spec(), cfg.grid)
    if args.cone_angle is not None:
        mask = missing_cone_mask(cfg.grid, args.cone_angle)
    else:
        mask = build_support_mask(cfg.optics, cfg.grid, workers=cfg.output.threads)
    rows = parameter_study(truth, mask, BEAD_STUDY_SETS, cfg.phantom.centers[0])

    lines = [STUDY_HEADER]
    for row in rows:
        values = row.params or ("", "", "", "", "")
        lines.append(
            f"{row.name},{','.join(str(v) for v in values)},{row.mse:.9g},"
            f"{row.lateral_fwhm:.6f},{row.axial_fwhm:.6f},{row.axial_error:.6f}"
        )
    out = _out(cfg, args.output, "study.csv")
    volio.write_csv("\n".join(lines) + "\n", out)
    print(f"✓ {len(rows)} rows -> {out}")


def cmd_export(args, cfg: RunConfig):
    """Vol3 volume to headerless binary32."""
    vol = volio.read_vol(args.input)
    out = _out(cfg, args.output, Path(args.input).with_suffix(".raw").name)
    volio.export_raw(vol, out)
    print(f"✓ Exported {vol.grid.shape} float32 x-fastest -> {out}")


def cmd_config(args, cfg: RunConfig):
    """Print the fully resolved configuration."""
    print(dump_run_config(cfg), end="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="tvcone - TV regularisation of missing-cone tomograms"
    )
    parser.add_argument("-c", "--config", help="YAML run configuration")
    parser.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level (overrides output.log_level)"
    )
    parser.add_argument("--threads", type=int, help="Worker cap for FFTs and pools")
    parser.add_argument("--seed", type=int, help="Seed for randomised phantom options")
    parser.add_argument("--output-dir", help="Directory for outputs given as relative names")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    phantom_parser = subparsers.add_parser("phantom", help="Generate a ground-truth volume")
    phantom_parser.add_argument("-o", "--output", help="Output volume file")
    phantom_parser.set_defaults(func=cmd_phantom)

    mask_parser = subparsers.add_parser("mask", help="Build the support mask")
    mask_parser.add_argument("-o", "--output", help="Output mask file")
    mask_parser.add_argument(
        "--cone-angle", type=float,
        help="Idealised missing cone of this half-angle in degrees instead of the optics"
    )
    mask_parser.set_defaults(func=cmd_mask)

    degrade_parser = subparsers.add_parser("degrade", help="Simulate a missing-cone measurement")
    degrade_parser.add_argument("truth", help="Ground-truth volume file")
    degrade_parser.add_argument("mask", help="Support mask file")
    degrade_parser.add_argument("--spectrum-output", help="Measured spectrum file")
    degrade_parser.add_argument("--raw-output", help="Raw reconstruction file")
    degrade_parser.set_defaults(func=cmd_degrade)

    reg_parser = subparsers.add_parser("regularize", help="Run the TV regulariser")
    reg_parser.add_argument("input", help="Measured spectrum or raw volume file")
    reg_parser.add_argument("-m", "--mask", required=True, help="Support mask file")
    reg_parser.add_argument("-o", "--output", help="Regularised volume file")
    reg_parser.add_argument("-r", "--report", help="JSON run report file")
    params_group = reg_parser.add_mutually_exclusive_group()
    params_group.add_argument("--preset", help="Named parameter set (bead, spyogenes, ociaml3)")
    params_group.add_argument(
        "--params", nargs=5, metavar=("N", "M", "MU", "TAU", "GAMMA"),
        help="Explicit (N, M, mu, tau, gamma)"
    )
    reg_parser.add_argument("--nonneg-mode", choices=["project", "paper_shrink"])
    reg_parser.add_argument("--tol-fupdate", type=float, help="CG tolerance for the f-update")
    patch_group = reg_parser.add_mutually_exclusive_group()
    patch_group.add_argument("--patched", dest="patched", action="store_true", default=None)
    patch_group.add_argument("--whole", dest="patched", action="store_false", default=None)
    reg_parser.add_argument("--patch-size", type=int, help="Patch edge length in voxels")
    reg_parser.add_argument("--stride", type=int, help="Patch stride in voxels")
    reg_parser.add_argument("--window", choices=["partition_of_unity", "paper_literal"])
    reg_parser.add_argument(
        "--cone-angle", type=float,
        help="Per-patch masks are idealised missing cones of this half-angle"
    )
    reg_parser.set_defaults(func=cmd_regularize)

    eval_parser = subparsers.add_parser("eval", help="Compare two volumes slice by slice")
    eval_parser.add_argument("a", help="First volume file")
    eval_parser.add_argument("b", help="Second volume file")
    eval_parser.add_argument("--z-range", type=float, default=2.0, help="Half range in um")
    eval_parser.add_argument("--z-center", type=float, default=0.0, help="Centre in um")
    eval_parser.add_argument("-o", "--output", help="CSV file (defaults to stdout)")
    eval_parser.set_defaults(func=cmd_eval)

    bench_parser = subparsers.add_parser("bench", help="Runtime versus volume size")
    bench_parser.add_argument(
        "--sizes", nargs="+", type=_parse_size, help="Sizes as NXxNYxNZ (default ladder)"
    )
    bench_parser.add_argument(
        "--iterations", choices=["five-outer", "two-outer"], default="five-outer",
        help="five-outer: 100 inner x 5 outer; two-outer: 100 inner x 2 outer"
    )
    bench_parser.add_argument("--n-inner", type=int, help="Override inner iterations")
    bench_parser.add_argument("--n-outer", type=int, help="Override outer iterations")
    bench_parser.add_argument("-o", "--output", help="CSV file")
    bench_parser.set_defaults(func=cmd_bench)

    study_parser = subparsers.add_parser("study", help="Parameter dependency study")
    study_parser.add_argument("-o", "--output", help="CSV file")
    study_parser.add_argument("--cone-angle", type=float, help="Use an idealised missing cone")
    study_parser.set_defaults(func=cmd_study)

    export_parser = subparsers.add_parser("export", help="Export a volume as raw binary32")
    export_parser.add_argument("input", help="Volume file")
    export_parser.add_argument("-o", "--output", help="Raw output file")
    export_parser.set_defaults(func=cmd_export)

    config_parser = subparsers.add_parser("config", help="Print the resolved configuration")
    config_parser.set_defaults(func=cmd_config)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    try:
        if args.threads is not None and args.threads < 1:
            raise ParameterError("--threads must be at least 1", "threads")
        cfg = _load(args)
        with scipy.fft.set_workers(cfg.output.threads or 1):
            args.func(args, cfg)
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        return 1
    except Exception as e:
        log_error(e, args.command, level=logging.DEBUG)
        print(f"Error: {handle_error(e, args.command)}", file=sys.stderr)
        return exit_code_for(e)
    return 0


if __name__ == "__main__":
    sys.exit(main())

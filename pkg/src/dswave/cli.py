"""Command-line interface: reproducible spectrum/synthesis/error experiments.

Every command resolves its parameters (flags beat ``--config`` file entries,
which beat defaults), writes a ``manifest.txt`` of the resolved values next
to its outputs, and exits 0 on success, 1 on usage or runtime errors, 2 when
an optimization is infeasible.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import imaging, spectral, synthesis, targets
from .optimize import (
    EnergyKind,
    LowFreqMode,
    SpectrumProblem,
    feasible_region,
    min_m0,
    solve,
)
from .points import (
    PointSet,
    generate_dart_throwing,
    generate_poisson,
    generate_random,
    generate_regular,
    load_points,
    save_points,
)
from .radial import (
    RadialGrid,
    RadialSpectrum,
    read_radial_csv,
    spectrum_to_pcf,
    write_radial_csv,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; our contract reserves 2 for infeasible."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _read_config(path: str) -> dict:
    """Plain `key = value` lines; '#' starts a comment; keys use flag names."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: malformed config line {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, args, argv) -> None:
    """Overlay config-file values onto defaults; explicit flags still win."""
    if not getattr(args, "config", None):
        return
    cfg = _read_config(args.config)
    known = set()
    for action in parser._actions:
        if not action.option_strings or action.dest in ("help", "config"):
            continue
        known.add(action.dest)
        if action.dest not in cfg:
            continue
        if any(opt in argv for opt in action.option_strings):
            continue  # flag given explicitly
        raw = cfg[action.dest]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        setattr(args, action.dest, value)
    unknown = set(cfg) - known
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, args, extra: dict | None = None) -> None:
    lines = {
        "command": command,
        "dswave_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
    }
    for key, value in sorted(vars(args).items()):
        if key in ("func", "parser"):
            continue
        if isinstance(value, np.ndarray):
            value = ",".join(f"{v:.12g}" for v in value)
        lines[key] = value.value if hasattr(value, "value") else value
    if extra:
        lines.update(extra)
    with open(out / "manifest.txt", "w", encoding="ascii") as fh:
        for key, value in lines.items():
            fh.write(f"{key} = {value}\n")


def _write_report(path: Path, fields: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for key, value in fields.items():
            fh.write(f"{key} = {value}\n")


def _nu_grid(args) -> RadialGrid:
    return RadialGrid.from_spacing(args.nu_spacing, args.nu_max)


def _r_grid(args) -> RadialGrid:
    return RadialGrid.from_spacing(args.r_spacing, args.r_max)


def _m0_value(text: str) -> float:
    value = float(text)
    if not (value >= 1.0):
        raise argparse.ArgumentTypeError("m0 must be >= 1 (or inf)")
    return value


def _parse_target(spec: str, width: int | None = None) -> targets.TargetFunction:
    """cosine:NU | blob:SIGMA | zoneplate[:ALPHA] | zoneplate-width:W | stripes:NU"""
    kind, _, param = spec.partition(":")
    kind = kind.lower()
    if kind == "cosine":
        return targets.cosine(float(param))
    if kind in ("blob", "gaussian-blob", "gaussianblob"):
        return targets.gaussian_blob(float(param))
    if kind == "stripes":
        return targets.stripes(float(param))
    if kind == "zoneplate-width":
        return targets.zone_plate_for_width(int(param))
    if kind == "zoneplate":
        if param:
            return targets.zone_plate(float(param))
        if width is None:
            raise ValueError("zoneplate needs an alpha (zoneplate:ALPHA) here")
        return targets.zone_plate_for_width(width)
    raise ValueError(f"unknown target spec {spec!r}")


def _load_spectrum(path: str) -> RadialSpectrum:
    coords, values = read_radial_csv(path)
    if coords.size < 2:
        raise ValueError(f"{path}: spectrum needs at least two nodes")
    spacing = coords[1] - coords[0]
    if not np.allclose(np.diff(coords), spacing, rtol=0.0, atol=1e-9 * spacing):
        raise ValueError(f"{path}: spectrum grid is not uniformly spaced")
    if coords[0] != 0.0:
        raise ValueError(f"{path}: spectrum grid must start at 0")
    grid = RadialGrid(spacing=float(spacing), count=coords.size)
    return RadialSpectrum(grid=grid, f_values=values)


def _load_pcf(path: str):
    from .radial import PairCorrelation

    coords, values = read_radial_csv(path)
    spacing = coords[1] - coords[0]
    grid = RadialGrid(spacing=float(spacing), count=coords.size)
    return PairCorrelation(grid=grid, g_values=values)


def _pattern(spec: str, n: int, seed: int) -> PointSet:
    kind, _, param = spec.partition(":")
    kind = kind.lower()
    if kind == "random":
        return generate_random(n, seed)
    if kind == "regular":
        return generate_regular(n)
    if kind == "dart":
        return generate_dart_throwing(n, float(param), seed)
    if kind == "file":
        pts = load_points(param)
        if pts.n != n:
            raise ValueError(f"{param} holds {pts.n} points, expected {n}")
        return pts
    raise ValueError(f"unknown pattern spec {spec!r}")


def _collect_point_files(paths: list[str]) -> list[PointSet]:
    files: list[Path] = []
    for entry in paths:
        p = Path(entry)
        if p.is_dir():
            # synthesize writes points_###.txt next to reports and manifests
            files.extend(sorted(p.glob("points*.txt")))
        else:
            files.append(p)
    if not files:
        raise ValueError("no point-set files found")
    sets = [load_points(f) for f in files]
    counts = {s.n for s in sets}
    if len(counts) > 1:
        raise ValueError(f"point sets disagree on N: {sorted(counts)}")
    return sets


# ---------------------------------------------------------------- commands


def cmd_optimize(args) -> int:
    problem = SpectrumProblem(
        nu0=args.nu0,
        e0=args.e0,
        m0=args.m0,
        energy=EnergyKind(args.energy),
        nu_grid=_nu_grid(args),
        r_grid=_r_grid(args),
        low_freq_mode=LowFreqMode(args.low_freq_mode),
    )
    report = solve(problem)
    out = _out_dir(args)
    fields = {
        "status": report.status,
        "objective": f"{report.objective:.12g}",
        "peak_m": f"{report.peak_m:.12g}",
        "solver_iterations": report.solver_iterations,
        "max_violation": f"{report.max_violation:.6g}",
        "audit_min_g": f"{report.audit_min_g:.6g}",
        "message": report.message,
    }
    _write_report(out / "report.txt", fields)
    _write_manifest(out, "optimize", args)
    if report.optimal:
        write_radial_csv(
            out / "spectrum.csv",
            problem.nu_grid.coords,
            report.spectrum.f_values,
        )
        print(
            f"optimal: objective = {report.objective:.6g}, "
            f"peak_m = {report.peak_m:.6g}"
        )
        return EXIT_OK
    print(f"{report.status}: {report.message}", file=sys.stderr)
    return EXIT_INFEASIBLE if report.status == "infeasible" else EXIT_ERROR


def cmd_min_m0(args) -> int:
    value = min_m0(
        args.nu0,
        args.e0,
        energy=EnergyKind(args.energy),
        tolerance=args.tol,
        nu_grid=_nu_grid(args),
        r_grid=_r_grid(args),
    )
    out = _out_dir(args)
    _write_report(out / "report.txt", {"min_m0": f"{value:.12g}"})
    _write_manifest(out, "min-m0", args)
    print(f"min_m0 = {value:.6g}")
    return EXIT_OK


def _parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("range must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("range must satisfy start <= stop, step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def cmd_feasible_region(args) -> int:
    if args.nu0_range is not None:
        nu0_values = args.nu0_range
    elif args.nu0 is not None:
        nu0_values = np.array([args.nu0])
    else:
        raise ValueError("need --nu0 or --nu0-range")
    table = feasible_region(
        args.e0,
        nu0_values,
        energy=EnergyKind(args.energy),
        tolerance=args.tol,
        nu_grid=_nu_grid(args),
        r_grid=_r_grid(args),
    )
    out = _out_dir(args)
    with open(out / "feasible_region.csv", "w", encoding="ascii") as fh:
        fh.write("nu0,min_m0\n")
        for nu0, value in table:
            fh.write(f"{nu0:.12g},{value:.12g}\n")
    _write_manifest(out, "feasible-region", args)
    for nu0, value in table:
        print(f"nu0 = {nu0:.4g}: min_m0 = {value:.6g}")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    if (args.spectrum is None) == (args.pcf is None):
        raise ValueError("need exactly one of --spectrum or --pcf")
    if args.pcf is not None:
        target = _load_pcf(args.pcf)
    else:
        spectrum = _load_spectrum(args.spectrum)
        target = spectrum_to_pcf(spectrum, _r_grid(args))
    out = _out_dir(args)
    for i in range(args.sets):
        config = synthesis.SynthesisConfig(
            n_points=args.points,
            target=target,
            smoothing_sigma=args.sigma,
            step_size=args.step_size,
            max_iterations=args.max_iter,
            convergence_tol=args.tol,
            seed=args.seed + i,
            initialization=args.init,
        )
        result = synthesis.synthesize(config)
        save_points(result.points, out / f"points_{i:03d}.txt")
        _write_report(
            out / f"report_{i:03d}.txt",
            {
                "seed": args.seed + i,
                "energy": f"{result.energy:.12g}",
                "iterations": result.iterations,
                "converged": result.converged,
                "low_frequency_mass": f"{result.low_frequency_mass:.6g}",
                "message": result.message,
            },
        )
        print(
            f"set {i}: energy = {result.energy:.4g}, "
            f"iterations = {result.iterations}, converged = {result.converged}"
        )
    _write_manifest(out, "synthesize", args)
    return EXIT_OK


def cmd_analyze(args) -> int:
    sets = _collect_point_files(args.points)
    n = sets[0].n
    m = args.m if args.m > 0 else int(math.ceil(3.0 * math.sqrt(n)))
    spectrum = spectral.empirical_power_spectrum(sets, m)
    profile = spectral.radial_average(spectrum, bin_width=args.bin_width)
    r_grid = _r_grid(args)
    g_mean = np.mean(
        [spectral.empirical_pcf(s, r_grid, args.sigma).g_values for s in sets],
        axis=0,
    )
    out = _out_dir(args)
    spectral.write_profile_csv(out / "radial_p.csv", profile)
    write_radial_csv(out / "pcf.csv", r_grid.coords, g_mean)
    _write_manifest(out, "analyze", args, {"resolved_m": m, "n_points": n})
    print(f"analyzed {len(sets)} set(s) of {n} points, window m = {m}")
    return EXIT_OK


def cmd_predict_error(args) -> int:
    spectrum = _load_spectrum(args.spectrum)
    target = _parse_target(args.target, None)
    error = spectral.predict_error_spectrum(
        spectrum, target, args.n_points, args.m, dc_term=args.dc_term
    )
    if args.filter_sigma_px > 0.0:
        if args.filter_width <= 0:
            raise ValueError("--filter-width is required with --filter-sigma-px")
        error = spectral.filtered_error(error, args.filter_sigma_px, args.filter_width)
    profile = spectral.radial_average(error, args.n_points, bin_width=args.bin_width)
    out = _out_dir(args)
    spectral.write_spectrum_csv(out / "error2d.csv", error)
    spectral.write_profile_csv(out / "error_radial.csv", profile)
    _write_manifest(out, "predict-error", args, {"dc_value": f"{error.dc:.12g}"})
    print(f"error spectrum on |k| <= {args.m}: dc = {error.dc:.6g}")
    return EXIT_OK


def cmd_render(args) -> int:
    target = _parse_target(args.image, args.width)
    config = imaging.RenderConfig(
        target=target,
        width=args.width,
        spp=args.spp,
        filter_sigma_px=args.filter_sigma_px,
        normalization=args.normalization,
    )
    points = _pattern(args.pattern, config.n_points, args.seed)
    pixels = imaging.render(config, points)
    out = _out_dir(args)
    imaging.write_image(out / "image.pgm", pixels)
    extra = {}
    reference = imaging.reference_image(target, args.width, config.n_points)
    if args.reference:
        imaging.write_image(out / "reference.pgm", reference)
    if args.band is not None:
        lo, _, hi = args.band.partition(":")
        energy = imaging.band_energy(pixels, reference, (float(lo), float(hi)))
        extra["band_energy"] = f"{energy:.12g}"
        print(f"band energy [{lo}, {hi}] = {energy:.6g}")
    if args.pixels_csv:
        imaging.write_pixels_csv(out / "pixels.csv", pixels)
    _write_manifest(out, "render", args, extra)
    return EXIT_OK


def cmd_variance(args) -> int:
    spectrum = _load_spectrum(args.spectrum)
    target = _parse_target(args.target, None)
    value = spectral.integration_variance(
        spectrum, target, args.n_points, dc_term=args.dc_term
    )
    fields = {"variance": f"{value:.12g}"}
    print(f"variance = {value:.9g}")
    if args.mc > 0:
        n = int(round(args.n_points))
        if args.dc_term == "poisson":
            source = lambda s: generate_poisson(args.n_points, s)  # noqa: E731
        else:
            source = lambda s: generate_random(n, s)  # noqa: E731
        _, grids = spectral.monte_carlo_error_spectrum(
            source,
            target,
            m=0,
            realizations=args.mc,
            seed=args.seed,
            n_points=args.n_points,
            return_realizations=True,
        )
        samples = grids[:, 0, 0]
        mc_mean = float(samples.mean())
        mc_sem = float(samples.std(ddof=1) / math.sqrt(args.mc))
        fields["monte_carlo"] = f"{mc_mean:.12g}"
        fields["monte_carlo_stderr"] = f"{mc_sem:.12g}"
        fields["realizations"] = args.mc
        print(f"monte_carlo = {mc_mean:.9g} +- {mc_sem:.2g} ({args.mc} realizations)")
    out = _out_dir(args)
    _write_report(out / "report.txt", fields)
    _write_manifest(out, "variance", args)
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value file; explicit flags win")
    sub.add_argument("--out", default=".", help="output directory")


def _add_grid_flags(sub: argparse.ArgumentParser, r_max: float) -> None:
    sub.add_argument("--nu-spacing", type=float, default=0.01)
    sub.add_argument("--nu-max", type=float, default=10.0)
    sub.add_argument("--r-spacing", type=float, default=0.01)
    sub.add_argument("--r-max", type=float, default=r_max)


def build_parser() -> _Parser:
    parser = _Parser(prog="dswave", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dswave {__version__}")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = subs.add_parser("optimize", help="solve for an optimal sampling spectrum")
    p.add_argument("--nu0", type=float, required=True)
    p.add_argument("--e0", type=float, default=0.0)
    p.add_argument("--m0", type=_m0_value, default=math.inf)
    p.add_argument("--energy", choices=[e.value for e in EnergyKind], default="tv")
    p.add_argument(
        "--low-freq-mode",
        choices=[m.value for m in LowFreqMode],
        default="pointwise",
    )
    _add_grid_flags(p, 20.0)
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = subs.add_parser("min-m0", help="smallest feasible peak bound m0")
    p.add_argument("--nu0", type=float, required=True)
    p.add_argument("--e0", type=float, default=0.0)
    p.add_argument("--energy", choices=[e.value for e in EnergyKind], default="tv")
    p.add_argument("--tol", type=float, default=0.01)
    _add_grid_flags(p, 20.0)
    _add_common(p)
    p.set_defaults(func=cmd_min_m0)

    p = subs.add_parser("feasible-region", help="min_m0 over a nu0 sweep")
    p.add_argument("--nu0", type=float)
    p.add_argument("--nu0-range", type=_parse_range, metavar="START:STOP:STEP")
    p.add_argument("--e0", type=float, default=0.0)
    p.add_argument("--energy", choices=[e.value for e in EnergyKind], default="tv")
    p.add_argument("--tol", type=float, default=0.01)
    _add_grid_flags(p, 20.0)
    _add_common(p)
    p.set_defaults(func=cmd_feasible_region)

    p = subs.add_parser("synthesize", help="synthesize point sets matching a spectrum")
    p.add_argument("--spectrum", help="spectrum CSV (coord,value)")
    p.add_argument("--pcf", help="pair-correlation CSV (coord,value)")
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--sets", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--step-size", type=float, default=0.02)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--init", choices=["random", "dart"], default="random")
    p.add_argument("--r-spacing", type=float, default=0.02)
    p.add_argument("--r-max", type=float, default=6.0)
    _add_common(p)
    p.set_defaults(func=cmd_synthesize)

    p = subs.add_parser("analyze", help="radial spectrum and PCF of point sets")
    p.add_argument("--points", nargs="+", required=True, help="files or directories")
    p.add_argument("--m", type=int, default=0, help="window half-width (0 = auto)")
    p.add_argument("--bin-width", type=float, default=0.02)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--r-spacing", type=float, default=0.02)
    p.add_argument("--r-max", type=float, default=4.0)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("predict-error", help="predicted error spectrum for a target")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--target", required=True, help="cosine:NU | blob:SIGMA | ...")
    p.add_argument("--n-points", type=float, required=True)
    p.add_argument("--m", type=int, default=32)
    p.add_argument("--dc-term", choices=["fixed-count", "poisson"], default="fixed-count")
    p.add_argument("--filter-sigma-px", type=float, default=0.0)
    p.add_argument("--filter-width", type=int, default=0)
    p.add_argument("--bin-width", type=float, default=0.02)
    _add_common(p)
    p.set_defaults(func=cmd_predict_error)

    p = subs.add_parser("render", help="sample/filter/resample a test image")
    p.add_argument("--image", default="zoneplate")
    p.add_argument("--pattern", default="random", help="random|regular|dart:D|file:PATH")
    p.add_argument("--spp", type=int, default=2)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--filter-sigma-px", type=float, default=0.5)
    p.add_argument(
        "--normalization", choices=["weightsum", "unbiased"], default="weightsum"
    )
    p.add_argument("--reference", action="store_true", help="also write reference.pgm")
    p.add_argument("--band", metavar="LO:HI", help="band-energy vs reference")
    p.add_argument("--pixels-csv", action="store_true", help="dump raw pixel CSV")
    _add_common(p)
    p.set_defaults(func=cmd_render)

    p = subs.add_parser("variance", help="predicted integral-estimate variance")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--n-points", type=float, required=True)
    p.add_argument("--dc-term", choices=["fixed-count", "poisson"], default="fixed-count")
    p.add_argument("--mc", type=int, default=0, help="Monte-Carlo realizations")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_variance)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        sub = next(
            a for a in parser._subparsers._group_actions
        ).choices[args.command]
        _apply_config(sub, args, argv)
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"dswave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

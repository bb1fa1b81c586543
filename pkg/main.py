"""
Command-line entry point: spectrum, report, simulate, sweep, reduce and verify.

    python main.py report --config run_config.json --out output
"""

import argparse
import cmath
import logging
import sys
from typing import Callable, Dict, Optional, Sequence

from dotenv import load_dotenv

from acceptance import acceptance_record, run_acceptance
from analysis import bifurcation_sweep, dominant_frequency, reduction_for, steady_amplitude, sweep_summary
from artifacts import (
    AVERAGED_HEADER,
    BRANCH_HEADER,
    POLAR_HEADER,
    SERIES_HEADER,
    SWEEP_HEADER,
    TRAJECTORY_HEADER,
    ArtifactWriter,
)
from center_manifold import coefficients_record, predict_orbit, prediction_record
from config import (
    RunConfig,
    build_distribution,
    config_hash,
    default_config_dict,
    load_config,
    parse_config,
    resolve_log_level,
    resolve_runtime,
    resolve_threads,
    simulation_settings,
)
from distributions import AnalyticDistribution
from errors import AssumptionViolated, BranchLost, ConfigError, DegenerateTie, KuramotoLabError, WindowTooShort
from reduced_ode import CenterState, integrate_averaged, integrate_center_manifold, integrate_polar
from simulate import ModelParams, run_simulation
from spectral import (
    SpectralPoint,
    continued_dispersion,
    find_eigenvalues,
    find_generalized_eigenvalues,
    spectral_record,
    track_branch,
    transition_point,
    verify_assumptions,
)

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger("kdlab")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

DEFAULT_HORIZON = 1000.0


def _residual(dist: AnalyticDistribution, K: float, lam: complex) -> float:
    return abs(continued_dispersion(dist, lam) - 2.0 / K)


def _seed_region(dist: AnalyticDistribution, K: float):
    # meromorphic continuations may be searched deeper than the analyticity strip
    depth = max(dist.strip_width, dist.frequency_scale) if dist.has_closed_dispersion else dist.strip_width
    bound = 3.0 * dist.frequency_scale + K
    return (-depth, 0.0, -bound, bound)


def cmd_spectrum(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    dist = build_distribution(config.distribution)
    grid = config.spectrum.grid()
    records = []
    for K in grid:
        points = [SpectralPoint(lam) for lam in find_eigenvalues(dist, K)]
        points += find_generalized_eigenvalues(dist, K, _seed_region(dist, K))
        records += [spectral_record(K, p, _residual(dist, K, p.lam)) for p in points]
    rows = [(r["K"], r["re_lambda"], r["im_lambda"], r["sheet"], r["residual"]) for r in records]
    writer.csv("spectrum.csv", BRANCH_HEADER, rows, "spectrum")
    writer.json("spectrum.json", {"distribution": dist.label, "roots": records}, "spectrum")
    print(f"📄 spectrum.csv: {len(rows)} roots over {len(grid)} coupling values")

    if not config.spectrum.track or len(grid) < 2:
        return EXIT_OK

    K0 = grid[0]
    seeds = [SpectralPoint(lam) for lam in find_eigenvalues(dist, K0)]
    seeds += find_generalized_eigenvalues(dist, K0, _seed_region(dist, K0))
    for n, seed in enumerate(seeds, start=1):
        try:
            branch = track_branch(dist, K0, grid[-1], seed, steps=len(grid) - 1)
        except BranchLost as e:
            logger.warning("%s", e)
            print(f"⚠️  branch {n} lost: {e}")
            branch = e.branch
        branch_rows = [(K, p.lam.real, p.lam.imag, p.sheet, r) for (K, p), r in zip(branch.samples, branch.residuals)]
        writer.csv(f"branch_{n}.csv", BRANCH_HEADER, branch_rows, "branch")
        crossings = ", ".join(f"{K:.6f}" for K in branch.crossings) or "none"
        print(f"📄 branch_{n}.csv: {len(branch_rows)} samples, crossings at K = {crossings}")
    return EXIT_OK


def cmd_report(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    dist = build_distribution(config.distribution)
    K, h = config.model.K, config.model.h
    record: Dict[str, object] = {"distribution": dist.label, "K": K, "h": h}
    try:
        report = verify_assumptions(dist, h, transition_point(dist))
    except (AssumptionViolated, DegenerateTie) as e:
        record["error"] = f"{type(e).__name__}: {e}"
        writer.json("report.json", record, "report")
        print(f"⚠️  no transition point: {e}")
        return EXIT_OK

    flags = report.flags
    record["transition"] = {
        "y_c": report.y_c,
        "K_c": report.K_c,
        "K_c2": report.K_c2,
        "candidates": [list(c) for c in report.candidates],
        "dlambda_dK": [report.dlambda_dK.real, report.dlambda_dK.imag],
        "first_harmonic_eigenvalues": [[z.real, z.imag] for z in find_eigenvalues(dist, K)] if K > 0 else [],
    }
    record["assumptions"] = {name: getattr(flags, name) for name in ("A1", "A2", "A3", "A4", "A5")}
    record["assumptions"]["diagnostics"] = flags.diagnostics

    try:
        _, coeffs = reduction_for(dist, h, report)
    except AssumptionViolated as e:
        record["coefficients"] = None
        record["error"] = f"AssumptionViolated: {e}"
        print(f"⚠️  reduction unavailable: {e}")
    else:
        prediction = predict_orbit(coeffs, K - report.K_c)
        record["coefficients"] = coefficients_record(coeffs)
        record["prediction"] = prediction_record(coeffs, prediction)
        kind = "subcritical" if prediction.subcritical else "supercritical"
        print(f"✅ K_c = {report.K_c:.10g}, y_c = {report.y_c:.10g}, {kind} {coeffs.kind} bifurcation")
    writer.json("report.json", record, "report")
    return EXIT_OK


def cmd_simulate(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    dist = build_distribution(config.distribution)
    settings = simulation_settings(config.simulation)
    params = ModelParams(config.model.K, config.model.h)
    t_end = settings.t_end or DEFAULT_HORIZON
    series = run_simulation(dist, params, settings, t_end)
    writer.csv("series.csv", SERIES_HEADER, series.rows(), series.source)

    summary: Dict[str, object] = {"source": series.source, "K": params.K, "h": params.h, "t_end": t_end,
                                  "samples": len(series.times)}
    fraction = config.analysis.transient_fraction
    try:
        summary["steady_amplitude"] = steady_amplitude(series, fraction)
        summary["dominant_frequency"] = dominant_frequency(series, fraction)
    except (WindowTooShort, ValueError) as e:
        logger.warning("no steady-state summary: %s", e)
    writer.json("series.json", summary, series.source)
    print(f"📄 series.csv: {len(series.times)} samples from the {series.source} simulator")
    return EXIT_OK


def cmd_sweep(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    dist = build_distribution(config.distribution)
    settings = simulation_settings(config.simulation)
    h = config.model.h
    result = bifurcation_sweep(dist, h, config.sweep.K_list, settings,
                               config.analysis.transient_fraction, threads)
    writer.csv("sweep.csv", SWEEP_HEADER, [row.as_row() for row in result.rows], "sweep")
    summary = sweep_summary(result)
    tolerance_key = "exponent_sine" if h == 0 else "exponent_second_harmonic"
    summary["exponent_tolerance"] = config.verify.tolerance(tolerance_key)
    summary["predictions"] = [
        {"epsilon": p.epsilon, "amplitude": p.amplitude, "stable": p.stable, "subcritical": p.subcritical}
        for p in result.predictions
    ]
    writer.json("sweep.json", summary, "sweep")
    print(f"📄 sweep.csv: {len(result.rows)} points, fitted exponent {result.exponent}")
    return EXIT_OK


def cmd_reduce(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    dist = build_distribution(config.distribution)
    section = config.reduce
    report, coeffs = reduction_for(dist, config.model.h)
    epsilon = section.epsilon if section.epsilon is not None else config.model.K - report.K_c
    a = complex(*section.alpha_plus)
    b = complex(*section.alpha_minus)
    options = dict(t_end=section.t_end, dt=section.dt, record_stride=section.record_stride)

    if section.system == "full":
        trajectory = integrate_center_manifold(coeffs, epsilon, CenterState(a, b), **options)
        header, rows = TRAJECTORY_HEADER, trajectory.rows()
    elif section.system == "polar":
        # gauge arg α₊ + arg α₋ = 0
        psi = 0.5 * (_arg(a) - _arg(b))
        trajectory = integrate_polar(coeffs, epsilon, psi, abs(a), abs(b), **options)
        header, rows = POLAR_HEADER, [(t, *s) for t, s in zip(trajectory.times, trajectory.states)]
    else:
        trajectory = integrate_averaged(coeffs, epsilon, (abs(a), abs(b)), **options)
        header, rows = AVERAGED_HEADER, [(t, *s) for t, s in zip(trajectory.times, trajectory.states)]

    writer.csv("trajectory.csv", header, rows, trajectory.system_kind)
    writer.json("reduce.json", prediction_record(coeffs, predict_orbit(coeffs, epsilon)), trajectory.system_kind)
    print(f"📄 trajectory.csv: {len(trajectory.times)} samples of the {trajectory.system_kind} system")
    return EXIT_OK


def _arg(z: complex) -> float:
    return cmath.phase(z) if z != 0 else 0.0


def cmd_verify(config: RunConfig, writer: ArtifactWriter, threads: int) -> int:
    results = run_acceptance(config.verify, threads=threads, seed=config.simulation.seed or 0)
    record = acceptance_record(results)
    writer.json("acceptance.json", record, "acceptance")
    return EXIT_OK if record["passed"] else EXIT_FAILED


COMMANDS: Dict[str, Callable[[RunConfig, ArtifactWriter, int], int]] = {
    "spectrum": cmd_spectrum,
    "report": cmd_report,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "reduce": cmd_reduce,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdlab", description="Kuramoto-Daido Hopf bifurcation lab")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="run config JSON (reference defaults when omitted)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps; 1 is the reference mode")
    parser.add_argument("--seed", type=int, help="overrides simulation.seed")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def load_run_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return parse_config(default_config_dict())
    return load_config(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        logging.basicConfig(level=resolve_log_level(args.log_level),
                            format="%(levelname)s %(name)s: %(message)s")
        config = resolve_runtime(load_run_config(args.config), out=args.out, seed=args.seed)
        threads = resolve_threads(args.threads)
        writer = ArtifactWriter(config.output.directory, config_hash(config), config.output.formats)
        logger.info("%s: config %s, output %s", args.command, writer.config_hash[:12], writer.directory)
        return COMMANDS[args.command](config, writer, threads)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"❌ Invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KuramotoLabError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("\n⚠️  Interrupted by user.", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

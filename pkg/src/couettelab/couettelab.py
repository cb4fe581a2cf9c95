# -*- coding: utf-8 -*-
# Pseudo-spectral perturbations of plane Couette flow
# (c) Couettelab Developers 2026

import argparse
import os
import platform
import sys
import time
from typing import Any, Dict, List, NamedTuple, Tuple

import colorama
import numpy as np
from colorama import Fore

from .cl_types import Kp, Laplacian, RateKind, ToyVariant
from .config import config
from .constants import ERROR
from .coords import COORD_HEADER, CoordState, StreakFeed, coord_series, identity_residuals
from .dns import DnsState, run_dns, tau_decay
from .exceptions import (
    BlowUpError,
    CflError,
    FitError,
    FixedPointError,
    GridError,
    InvertibilityError,
    ModeStateError,
    MultiplierDomainError,
    NormParamsError,
    NormRangeError,
    ProfileRangeError,
    UnknownLemmaError,
)
from .lemmas import LEMMAS
from .linear import SERIES_HEADER, ModeState, exact_q2_factor, linear_series
from .multiplier import build_profile
from .streak import (
    STREAK_HEADER,
    StreakState,
    shear_layer,
    streak_series,
    streak_trajectory,
    taylor_green,
)
from .toymodel import (
    TRAJECTORY_HEADER,
    SuperSolution,
    ToyParams,
    ToyState,
    check_supersolution,
    integrate_toy,
    trajectory_records,
)
from .utils import is_compiled, write_csv
from .version import __version__
from .xrun.classify import classify_run
from .xrun.exceptions import ConfigHashMismatchError, RunConfigError, TruncatedSeriesError
from .xrun.lemmacheck import lemma_check
from .xrun.ratestudy import rate_study
from .xrun.report import (
    ReportLog,
    ReportSection,
    ReportText,
    lemma_sections,
    rate_sections,
    record_section,
    section,
    sweep_sections,
)
from .xrun.runconfig import RunConfig, hash_values
from .xrun.sweep import threshold_sweep

if sys.stdout.encoding != "UTF-8":
    sys.stdout.reconfigure(encoding="utf-8")  # type: ignore[union-attr]

LINEAR_TOLERANCE = 1e-8
IDENTITY_TOLERANCE = 1e-10
DIVERGENCE_TOLERANCE = 1e-8
COORD_CONSTANT = 10.0

HANDLED_ERRORS = (
    BlowUpError,
    CflError,
    ConfigHashMismatchError,
    FitError,
    FixedPointError,
    GridError,
    InvertibilityError,
    ModeStateError,
    MultiplierDomainError,
    NormParamsError,
    NormRangeError,
    ProfileRangeError,
    RunConfigError,
    TruncatedSeriesError,
    UnknownLemmaError,
)


class Outcome(NamedTuple):
    title: str
    sections: List[ReportSection]
    config_hash: str
    out_dir: str


def main() -> None:
    colorama.init()

    parser = argparse.ArgumentParser()

    if is_compiled():
        version_str = f"{parser.prog} v{__version__} (compiled)"
    else:
        version_str = f"{parser.prog} v{__version__}"

    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=version_str,
    )
    parser.add_argument("-d", "--debug", action="store_true", help="enable debug logging")
    parser.add_argument(
        "--nolog",
        action="store_true",
        help="don't print the report to the terminal, write the report file only",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_linear(subparsers)
    _add_streak(subparsers)
    _add_toy(subparsers)
    _add_coords(subparsers)
    _add_dns(subparsers)
    _add_sweep(subparsers)
    _add_rate_study(subparsers)
    _add_lemma_check(subparsers)
    _add_multiplier_dump(subparsers)

    args = parser.parse_args()
    config.debug = args.debug

    if config.debug:
        print(f"{Fore.YELLOW}{version_str}")
        print(f"{Fore.GREEN}python: v{platform.python_version()}")
        print(f"{Fore.GREEN}system: {platform.system()}, release: {platform.release()}")
        for arg in vars(args):
            print(f"{Fore.GREEN}args: {arg}: {getattr(args, arg)}")
        config.output_config(sys.stdout)

    started = time.perf_counter()
    try:
        outcome = args.func(args)
    except HANDLED_ERRORS as e:
        parser.exit(1, f"{ERROR} {e}\n")
    except IOError as e:
        parser.exit(1, f"{ERROR} {e}\n")

    report = ReportText(
        outcome.title,
        outcome.sections,
        outcome.config_hash,
        time.perf_counter() - started,
        {k: _plain(v) for k, v in vars(args).items() if k != "func"},
    )
    report.write(outcome.out_dir)
    if not args.nolog:
        ReportLog(outcome.title, outcome.sections)

    if report.violations:
        parser.exit(1, f"{ERROR} {len(report.violations)} invariant violation(s) recorded\n")


def _float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"'{value}' is not a comma separated list") from e


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"'{value}' is not a comma separated list") from e


def _mode(value: str) -> Tuple[float, float, float]:
    values = _float_list(value)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"mode '{value}' must be k,eta,l")
    return values[0], values[1], values[2]


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _args_hash(args: argparse.Namespace) -> str:
    skip = ("func", "debug", "nolog")
    return hash_values({k: _plain(v) for k, v in vars(args).items() if k not in skip})


def _csv_dir(filename: str) -> str:
    return os.path.dirname(os.path.abspath(filename))


def _add_linear(subparsers: Any) -> None:
    p = subparsers.add_parser("linear", help="evolve one Fourier mode of the linearised problem")
    p.add_argument("--mode", type=_mode, default=(1.0, 0.0, 1.0), help="k,eta,l (default 1,0,1)")
    p.add_argument("--nu", type=float, default=1e-3, help="viscosity")
    p.add_argument("--tmax", type=float, default=100.0, help="final time")
    p.add_argument("--dt", type=float, help="time step (default from the mode size)")
    p.add_argument("--every", type=int, default=10, help="write every n-th step")
    p.add_argument("--out", default="series.csv", help="series CSV filename")
    p.set_defaults(func=_do_linear)


def _do_linear(args: argparse.Namespace) -> Outcome:
    k, eta, l = args.mode
    rows = linear_series(ModeState.initial(k, eta, l), args.nu, args.tmax, args.dt, args.every)
    write_csv(args.out, SERIES_HEADER, rows)

    violations = []
    exact = exact_q2_factor(k, eta, l, args.nu, rows[-1].t)
    error = 0.0
    q2_ratio = 0.0
    if rows[0].q2 > 0.0:
        q2_ratio = rows[-1].q2 / rows[0].q2
        error = abs(q2_ratio - exact) / exact if exact > 0.0 else q2_ratio
        if error > LINEAR_TOLERANCE:
            violations.append(f"q2 factor differs from the closed form by {error:.3e}")

    record = {
        "mode": f"({k:g}, {eta:g}, {l:g})",
        "t end": rows[-1].t,
        "q2 factor": q2_ratio,
        "q2 factor exact": exact,
        "relative error": error,
    }
    sections = [record_section("Linear mode", record, violations)]
    return Outcome("Linear", sections, _args_hash(args), _csv_dir(args.out))


def _add_plane_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ny", type=int, default=32, help="y resolution")
    p.add_argument("--nz", type=int, default=32, help="z resolution")
    p.add_argument(
        "--init",
        choices=["shear", "taylor-green"],
        default="shear",
        help="initial streak data, shear is (u2, u3) = (eps sin z, 0)",
    )
    p.add_argument("--eps", type=float, default=1e-3, help="initial amplitude")
    p.add_argument("--nu", type=float, default=1e-4, help="viscosity")


def _initial_streak(args: argparse.Namespace) -> StreakState:
    plane = RunConfig(ny=args.ny, nz=args.nz).plane()
    if args.init == "taylor-green":
        return taylor_green(plane, args.eps, args.nu)
    return shear_layer(plane, args.eps, args.nu)


def _add_streak(subparsers: Any) -> None:
    p = subparsers.add_parser("streak", help="evolve x-independent (streak) data")
    _add_plane_args(p)
    p.add_argument("--tmax", type=float, default=10.0, help="final time")
    p.add_argument("--dt", type=float, default=0.01, help="time step")
    p.add_argument("--every", type=int, default=10, help="write every n-th step")
    p.add_argument("--out", default="series.csv", help="series CSV filename")
    p.set_defaults(func=_do_streak)


def _do_streak(args: argparse.Namespace) -> Outcome:
    rows = streak_series(_initial_streak(args), args.tmax, args.dt, args.every)
    write_csv(args.out, STREAK_HEADER, rows)

    violations = []
    if args.nu > 0.0 and rows[-1].enstrophy > rows[0].enstrophy * (1.0 + 1e-10):
        violations.append("enstrophy increased under viscous 2D flow")

    record = {
        "t end": rows[-1].t,
        "|u1| end": rows[-1].u1,
        "|(u2,u3)| end": rows[-1].u23,
        "enstrophy end": rows[-1].enstrophy,
    }
    sections = [record_section("Streak", record, violations)]
    return Outcome("Streak", sections, _args_hash(args), _csv_dir(args.out))


def _add_toy(subparsers: Any) -> None:
    p = subparsers.add_parser("toy", help="integrate the toy echo model over a critical interval")
    p.add_argument("--k", type=int, default=1, help="resonant x frequency")
    p.add_argument("--kp", type=int, help="non-resonant x frequency (default k-1, or 2 at k=1)")
    p.add_argument("--eta", type=float, default=100.0, help="y frequency")
    p.add_argument("--eps", type=float, default=1e-3, help="perturbation size")
    p.add_argument("--nu", type=float, default=1e-4, help="viscosity")
    p.add_argument("--c0", type=float, default=0.0, help="strength of the t-growing coupling")
    p.add_argument("--alpha", type=float, default=float(config.alpha), help="dissipation power")
    p.add_argument(
        "--dissipation",
        choices=[kp.value for kp in Kp],
        default=Kp.AS_PRINTED.value,
        help="x frequency in the dissipation of the Q2_kp equation",
    )
    p.add_argument(
        "--variant",
        choices=[v.value for v in ToyVariant],
        default=ToyVariant.BALANCED.value,
        help="super-solution to check the trajectory against",
    )
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_do_toy)


def _do_toy(args: argparse.Namespace) -> Outcome:
    state = ToyState.initial(args.k, args.eta, args.kp)
    params = ToyParams(args.eps, args.nu, args.c0, args.alpha, Kp(args.dissipation))
    trajectory = integrate_toy(state, params)
    write_csv(
        os.path.join(args.out, "trajectory.csv"),
        TRAJECTORY_HEADER,
        trajectory_records(trajectory),
    )

    variant = ToyVariant(args.variant)
    sup = SuperSolution(variant, state.k, state.kp, state.eta, config.kappa)
    domination = check_supersolution(trajectory, sup)
    violations = []
    if not domination.dominates:
        violations.append(f"{variant.value} super-solution exceeded at t={domination.t_violation}")

    record: Dict[str, Any] = dict(domination._asdict())
    record["blow-up t"] = trajectory.blow_up_time
    record["t start"] = float(trajectory.t[0])
    record["t end"] = float(trajectory.t[-1])
    sections = [record_section("Domination", record, violations)]
    return Outcome("Toy model", sections, _args_hash(args), args.out)


def _add_coords(subparsers: Any) -> None:
    p = subparsers.add_parser("coords", help="evolve the coordinate change fed by a streak run")
    _add_plane_args(p)
    p.add_argument("--t0", type=float, default=1.0, help="start time of the coordinate change")
    p.add_argument("--tmax", type=float, default=50.0, help="final time")
    p.add_argument("--dt", type=float, default=0.05, help="time step")
    p.add_argument("--every", type=int, default=10, help="write every n-th step")
    p.add_argument(
        "--laplacian",
        choices=[kind.value for kind in Laplacian],
        default=Laplacian.TILDE.value,
        help="Laplacian driving the coordinate equation",
    )
    p.add_argument("--out", default="series.csv", help="series CSV filename")
    p.set_defaults(func=_do_coords)


def _do_coords(args: argparse.Namespace) -> Outcome:
    feed = StreakFeed(streak_trajectory(_initial_streak(args), args.tmax, args.dt))
    state = CoordState.initial(feed.lab_velocity(args.t0)[0], args.t0, args.nu)
    run = coord_series(state, feed, args.tmax, args.dt, args.every, Laplacian(args.laplacian))
    write_csv(args.out, COORD_HEADER, run.rows)

    violations = []
    eps = args.eps if args.eps > 0.0 else 1.0
    constant = run.g_constant(eps)
    if constant > COORD_CONSTANT:
        violations.append(f"|g|<t>^2/eps reached {constant:.4g}")
    residual = max(identity_residuals(run.final.jacobian()))
    if residual > IDENTITY_TOLERANCE:
        violations.append(f"Jacobian identity residual {residual:.3e}")

    record = {
        "t end": run.final.t,
        "|g|<t>^2/eps max": constant,
        "min det": min(row.min_det for row in run.rows),
        "identity residual": residual,
    }
    sections = [record_section("Coordinates", record, violations)]
    return Outcome("Coordinates", sections, _args_hash(args), _csv_dir(args.out))


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    run_config = RunConfig.load(args.config_file) if args.config_file else RunConfig()
    if args.out:
        run_config = run_config.replace(out_dir=args.out)
    return run_config


def _add_dns(subparsers: Any) -> None:
    p = subparsers.add_parser("dns", help="direct numerical simulation in the shearing frame")
    p.add_argument("--config", dest="config_file", required=True, help="run config (YAML)")
    p.add_argument("--out", help="run directory, overrides out_dir of the config")
    p.set_defaults(func=_do_dns)


def _do_dns(args: argparse.Namespace) -> Outcome:
    run_config = _load_run_config(args)
    out_dir = run_config.prepare_out_dir()
    state = DnsState.random(
        run_config.grid(),
        run_config.eps,
        run_config.seed,
        run_config.lambda_0,
        run_config.s,
        run_config.nu,
    )
    run = run_dns(
        state,
        run_config.tmax,
        run_config.dt,
        out_dir,
        run_config.config_hash,
        run_config.series_every,
        run_config.snapshot_every,
        run_config.remap_periods,
    )

    violations = []
    worst = max(row.divergence for row in run.series)
    if worst > DIVERGENCE_TOLERANCE:
        violations.append(f"divergence reached {worst:.3e}")

    t_required = None if run.blew_up else run_config.classify_until()
    classification = classify_run(run.series, t_required, run.blow_up_time)
    record = {
        "t end": run.final.t,
        "classification": classification.value,
        "tau_100": tau_decay(run.series, 100.0),
        "discarded energy": run.final.discarded_energy,
        "events": len(run.events),
    }
    sections = [record_section("DNS run", record, violations)]
    return Outcome("DNS", sections, run_config.config_hash, out_dir)


def _add_sweep(subparsers: Any) -> None:
    p = subparsers.add_parser("sweep", help="classify DNS runs over a (nu, eps) grid")
    p.add_argument("--config", dest="config_file", help="base run config (YAML)")
    p.add_argument(
        "--nu", dest="nu_list", type=_float_list, default=[1e-2, 1e-3], help="comma separated nu"
    )
    p.add_argument(
        "--eps",
        dest="eps_grid",
        type=_float_list,
        default=[1e-4, 1e-3, 1e-2, 1e-1],
        help="comma separated eps",
    )
    p.add_argument("--workers", type=int, default=1, help="worker processes, 1 runs serially")
    p.add_argument("--out", help="sweep directory, overrides out_dir of the config")
    p.set_defaults(func=_do_sweep)


def _do_sweep(args: argparse.Namespace) -> Outcome:
    run_config = _load_run_config(args)
    out_dir = run_config.prepare_out_dir()
    report = threshold_sweep(args.nu_list, args.eps_grid, run_config, args.workers)
    write_csv(
        os.path.join(out_dir, "sweep.csv"),
        ["nu", "eps", "classification", "blow-up t", "config hash"],
        [
            [c.nu, c.eps, c.classification.value, c.blow_up_time, c.config_hash]
            for c in report.cells
        ],
    )
    return Outcome("Threshold sweep", sweep_sections(report), run_config.config_hash, out_dir)


def _add_rate_study(subparsers: Any) -> None:
    p = subparsers.add_parser("rate-study", help="fit lift-up, damping and dissipation rates")
    p.add_argument("--config", dest="config_file", help="run config (YAML)")
    p.add_argument(
        "--kind",
        choices=[kind.value for kind in RateKind],
        action="append",
        help="study to run, can be repeated (default all)",
    )
    p.add_argument("--out", help="study directory, overrides out_dir of the config")
    p.set_defaults(func=_do_rate_study)


def _do_rate_study(args: argparse.Namespace) -> Outcome:
    run_config = _load_run_config(args)
    out_dir = run_config.prepare_out_dir()
    kinds = [RateKind(kind) for kind in args.kind] if args.kind else list(RateKind)
    reports = [rate_study(kind, run_config) for kind in kinds]
    return Outcome("Rate study", rate_sections(reports), run_config.config_hash, out_dir)


def _add_lemma_check(subparsers: Any) -> None:
    p = subparsers.add_parser("lemma-check", help="sample the frequency-ratio inequalities")
    p.add_argument(
        "--lemma",
        choices=sorted(LEMMAS),
        action="append",
        help="lemma to check, can be repeated (default all)",
    )
    p.add_argument("--samples", type=int, help="samples per lemma (default from config)")
    p.add_argument("--nodoubling", action="store_true", help="skip the doubled box")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_do_lemma_check)


def _do_lemma_check(args: argparse.Namespace) -> Outcome:
    rows = lemma_check(args.lemma, samples=args.samples, doubling=not args.nodoubling)
    return Outcome("Lemma check", lemma_sections(rows), _args_hash(args), args.out)


def _add_multiplier_dump(subparsers: Any) -> None:
    p = subparsers.add_parser("multiplier-dump", help="tabulate the multipliers of one eta")
    p.add_argument("--eta", type=float, default=100.0, help="y frequency")
    p.add_argument("--kappa", type=float, default=float(config.kappa), help="weight exponent")
    p.add_argument("--kp", type=_int_list, default=[], help="comma separated k' for w3 columns")
    p.add_argument("--points", type=int, default=2001, help="uniform time samples")
    p.add_argument("--out", default="profile.csv", help="profile CSV filename")
    p.set_defaults(func=_do_multiplier_dump)


def _do_multiplier_dump(args: argparse.Namespace) -> Outcome:
    profile = build_profile(args.eta, args.kappa, k_primes=args.kp or None, points=args.points)
    k_primes = sorted(profile.log_w3)
    header = ["t", "wbar", "w"] + [f"w3[{kp}]" for kp in k_primes]
    columns = [profile.t_grid, profile.wbar, profile.w] + [profile.w3(kp) for kp in k_primes]
    write_csv(args.out, header, np.column_stack(columns).tolist())

    violations = []
    if not np.all(np.isfinite(profile.log_w)):
        violations.append("w is not finite on the time grid")
    intervals = section(
        "Critical intervals",
        ["k", "t left", "t right", "resonant"],
        [[e.k, e.t_left, e.t_right, e.resonant] for e in profile.critical.entries],
        violations=violations,
    )
    return Outcome("Multiplier profile", [intervals], _args_hash(args), _csv_dir(args.out))

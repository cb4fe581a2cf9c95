# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from colorama import Fore
from scipy import stats
from tqdm import tqdm

from ..cl_types import Classification, ExperimentKind
from ..constants import WARNING
from ..dns import DnsState, run_dns
from ..exceptions import CflError
from ..utils import cl_tqdm_write, debug_print, disable_tqdm
from .classify import classify_run, is_stable
from .runconfig import RunConfig

# Accepted range for the fitted boundary exponent at desk-scale resolution
GAMMA_LOW = 0.5
GAMMA_HIGH = 1.1


class SweepCell(NamedTuple):
    nu: float
    eps: float
    classification: Classification
    blow_up_time: Optional[float]
    config_hash: str


class BoundaryFit(NamedTuple):
    gamma: float
    intercept: float
    stderr: float
    band_low: float
    band_high: float
    points: int


@dataclass
class SweepReport:
    cells: List[SweepCell]
    violations: List[str] = field(default_factory=list)
    boundary: Dict[float, float] = field(default_factory=dict)
    fit: Optional[BoundaryFit] = None

    @property
    def monotone(self) -> bool:
        return not self.violations

    def column(self, nu: float) -> List[SweepCell]:
        return sorted((c for c in self.cells if c.nu == nu), key=lambda c: c.eps)

    def nus(self) -> List[float]:
        return sorted({c.nu for c in self.cells})


CellRunner = Callable[[RunConfig], SweepCell]


def cell_dir(out_dir: str, nu: float, eps: float) -> str:
    return os.path.join(out_dir, f"nu{nu:.3g}_eps{eps:.3g}")


def run_cell(run_config: RunConfig) -> SweepCell:
    """One DNS from seeded random data, classified. Blow-ups are outcomes, not errors."""
    if run_config.out_dir is not None:
        run_config.prepare_out_dir()

    state = DnsState.random(
        run_config.grid(),
        run_config.eps,
        run_config.seed,
        run_config.lambda_0,
        run_config.s,
        run_config.nu,
    )
    t_end = run_config.classify_until()
    try:
        run = run_dns(
            state,
            t_end,
            run_config.dt,
            run_config.out_dir,
            run_config.config_hash,
            run_config.series_every,
            run_config.snapshot_every,
            run_config.remap_periods,
        )
    except CflError as e:
        return SweepCell(
            run_config.nu,
            run_config.eps,
            Classification.BLOW_UP_EVENT,
            e.t,
            run_config.config_hash,
        )

    classification = classify_run(run.series, t_end, run.blow_up_time)
    return SweepCell(
        run_config.nu,
        run_config.eps,
        classification,
        run.blow_up_time,
        run_config.config_hash,
    )


def monotonicity_violations(cells: Sequence[SweepCell]) -> List[str]:
    """Every stable cell sitting above an unstable cell of the same nu."""
    violations = []
    for nu in sorted({c.nu for c in cells}):
        column = sorted((c for c in cells if c.nu == nu), key=lambda c: c.eps)
        for i, lower in enumerate(column):
            if is_stable(lower.classification):
                continue
            for upper in column[i + 1 :]:
                if is_stable(upper.classification):
                    violations.append(
                        f"nu={nu:g}: {upper.classification.value} at eps={upper.eps:g} "
                        f"above {lower.classification.value} at eps={lower.eps:g}"
                    )
    return violations


def critical_eps(cells: Sequence[SweepCell]) -> Dict[float, float]:
    """Geometric midpoint between the last stable and the first unstable eps of each column."""
    boundary = {}
    for nu in sorted({c.nu for c in cells}):
        column = sorted((c for c in cells if c.nu == nu), key=lambda c: c.eps)
        first_unstable = next(
            (i for i, c in enumerate(column) if not is_stable(c.classification)), None
        )
        if first_unstable is None or first_unstable == 0:
            continue
        boundary[nu] = math.sqrt(column[first_unstable - 1].eps * column[first_unstable].eps)
    return boundary


def _bracket_ratio(cells: Sequence[SweepCell], nu: float) -> float:
    eps = sorted(c.eps for c in cells if c.nu == nu)
    return max((b / a for a, b in zip(eps, eps[1:]) if a > 0.0), default=1.0)


def fit_boundary(
    boundary: Dict[float, float], cells: Sequence[SweepCell] = ()
) -> Optional[BoundaryFit]:
    """Fit eps_crit ~ nu^gamma.

    The band is gamma +- 2 standard errors, widened to the slope change the eps grid
    spacing alone allows when that is larger.
    """
    if len(boundary) < 2:
        return None

    nus = sorted(boundary)
    x = np.log(nus)
    y = np.log([boundary[nu] for nu in nus])
    result = stats.linregress(x, y)
    stderr = float(result.stderr) if len(nus) > 2 else 0.0

    span = float(np.ptp(x))
    grid_width = 0.0
    if cells:
        grid_width = max(math.log(_bracket_ratio(cells, nu)) for nu in nus) / span
    half_width = max(2.0 * stderr, grid_width)
    gamma = float(result.slope)
    return BoundaryFit(
        gamma,
        float(result.intercept),
        stderr,
        gamma - half_width,
        gamma + half_width,
        len(nus),
    )


def sweep_configs(
    nu_list: Sequence[float], eps_grid: Sequence[float], base_config: RunConfig
) -> List[RunConfig]:
    configs = []
    for nu in nu_list:
        for eps in sorted(eps_grid):
            out_dir = None
            if base_config.out_dir is not None:
                out_dir = cell_dir(base_config.out_dir, nu, eps)
            configs.append(
                base_config.replace(kind=ExperimentKind.DNS, nu=nu, eps=eps, out_dir=out_dir)
            )
    return configs


def threshold_sweep(
    nu_list: Sequence[float],
    eps_grid: Sequence[float],
    base_config: RunConfig,
    workers: int = 1,
    cell_runner: CellRunner = run_cell,
) -> SweepReport:
    configs = sweep_configs(nu_list, eps_grid, base_config)
    debug_print(f"sweep: cells={len(configs)} workers={workers} grid={base_config.grid().shape}")

    cells: List[Optional[SweepCell]] = [None] * len(configs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(cell_runner, c): i for i, c in enumerate(configs)}
            for future in tqdm(
                as_completed(futures),
                total=len(futures),
                unit="cell",
                desc="sweeping",
                disable=disable_tqdm(),
            ):
                cells[futures[future]] = future.result()
    else:
        for i, run_config in enumerate(
            tqdm(configs, unit="cell", desc="sweeping", disable=disable_tqdm())
        ):
            cells[i] = cell_runner(run_config)

    done = [c for c in cells if c is not None]
    for cell in done:
        if cell.classification is Classification.BLOW_UP_EVENT:
            cl_tqdm_write(
                f"{WARNING} Blow-up at t={cell.blow_up_time} for nu={cell.nu:g} "
                f"eps={cell.eps:g}{Fore.RESET}"
            )

    violations = monotonicity_violations(done)
    for violation in violations:
        cl_tqdm_write(f"{WARNING} Classification not monotone in eps: {violation}{Fore.RESET}")

    boundary = critical_eps(done)
    return SweepReport(done, violations, boundary, fit_boundary(boundary, done))

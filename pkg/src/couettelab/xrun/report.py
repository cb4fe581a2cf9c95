# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import datetime
import math
import os
from typing import Any, Dict, List, Optional, Sequence

import jinja2
from colorama import Fore
from typing_extensions import TypedDict

from ..config import config
from ..constants import _H1, H1, PROJECT_NAME
from ..utils import cl_tqdm_write, get_output_filename
from ..version import __version__
from .lemmacheck import DOUBLING_GROWTH_LIMIT, LemmaCheckRow
from .ratestudy import RateReport
from .sweep import GAMMA_HIGH, GAMMA_LOW, SweepReport


class ReportSection(TypedDict):
    title: str
    header: List[str]
    rows: List[List[Any]]
    notes: List[str]
    violations: List[str]


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isnan(value):
            return "n/a"
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def section(
    title: str,
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    notes: Sequence[str] = (),
    violations: Sequence[str] = (),
) -> ReportSection:
    return ReportSection(
        title=title,
        header=list(header),
        rows=[list(row) for row in rows],
        notes=list(notes),
        violations=list(violations),
    )


def record_section(
    title: str, record: Dict[str, Any], violations: Sequence[str] = ()
) -> ReportSection:
    return section(title, ["field", "value"], sorted(record.items()), violations=violations)


def sweep_sections(report: SweepReport) -> List[ReportSection]:
    cells = section(
        "Classification",
        ["nu", "eps", "classification", "blow-up t"],
        [
            [c.nu, c.eps, c.classification.value, c.blow_up_time]
            for c in sorted(report.cells, key=lambda c: (c.nu, c.eps))
        ],
        violations=report.violations,
    )
    notes = []
    if report.fit is None:
        notes.append("gamma not fitted: fewer than two nu columns cross the boundary")
    else:
        notes.append(
            f"eps_crit ~ nu^gamma, gamma={report.fit.gamma:.4g} "
            f"[{report.fit.band_low:.4g}, {report.fit.band_high:.4g}] "
            f"from {report.fit.points} columns"
        )
    violations = []
    if report.fit is not None and not GAMMA_LOW <= report.fit.gamma <= GAMMA_HIGH:
        violations.append(
            f"gamma {format_value(report.fit.gamma)} outside [{GAMMA_LOW:g}, {GAMMA_HIGH:g}]"
        )
    boundary = section(
        "Boundary",
        ["nu", "eps_crit"],
        sorted(report.boundary.items()),
        notes=notes,
        violations=violations,
    )
    return [cells, boundary]


def rate_sections(reports: Sequence[RateReport]) -> List[ReportSection]:
    rows = []
    violations = []
    for r in reports:
        rows.append([r.kind.value, r.measured, r.target, r.low, r.high, r.passed])
        if not r.low <= r.measured <= r.high:
            violations.append(
                f"{r.kind.value}: measured {format_value(r.measured)} outside "
                f"[{format_value(r.low)}, {format_value(r.high)}]"
            )
        violations.extend(f"{r.kind.value}: {problem}" for problem in r.problems)
    details = [
        [r.kind.value, name, value] for r in reports for name, value in sorted(r.details.items())
    ]
    return [
        section(
            "Rates",
            ["study", "measured", "target", "low", "high", "pass"],
            rows,
            violations=violations,
        ),
        section("Details", ["study", "quantity", "value"], details),
    ]


def lemma_sections(rows: Sequence[LemmaCheckRow]) -> List[ReportSection]:
    violations = []
    for r in rows:
        if not r.finite:
            violations.append(f"{r.lemma_id}: max ratio not finite on {r.box}")
        if r.growth is not None and not r.growth < DOUBLING_GROWTH_LIMIT:
            violations.append(
                f"{r.lemma_id}: max ratio grows by {format_value(r.growth)} "
                f"when the box doubles"
            )
    table = section(
        "Lemma ratios",
        ["lemma", "max ratio", "log max ratio", "doubling growth"],
        [[r.lemma_id, r.max_ratio, r.log_max_ratio, r.growth] for r in rows],
        notes=[f"box: {rows[0].box}"] if rows else [],
        violations=violations,
    )
    argmax = section(
        "Worst samples",
        ["lemma", "k", "k'", "eta", "xi", "l", "l'", "t"],
        [
            [r.lemma_id]
            + [r.argmax[key] for key in ("k", "k_prime", "eta", "xi", "l", "l_prime", "t")]
            for r in rows
        ],
    )
    return [table, argmax]


class ReportText:
    TEMPLATE = "report.txt"
    FILENAME = "report.txt"

    def __init__(
        self,
        title: str,
        sections: Sequence[ReportSection],
        config_hash: str,
        wall_time: float,
        args: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.sections = list(sections)
        self.env = jinja2.Environment(
            loader=jinja2.PackageLoader(PROJECT_NAME, "templates"),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )
        self.env.filters["valuefilter"] = format_value

        template = self.env.get_template(self.TEMPLATE)
        self.text = template.render(
            {
                "date": datetime.datetime.now(),
                "author": f"{PROJECT_NAME} v{__version__}",
                "config": config,
                "config_hash": config_hash,
                "wall_time": wall_time,
                "title": title,
                "args": args or {},
                "sections": self.sections,
            }
        )

    @property
    def violations(self) -> List[str]:
        return [v for s in self.sections for v in s["violations"]]

    def write(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        filename = get_output_filename(os.path.join(out_dir, self.FILENAME))
        with open(filename, "w", encoding="utf-8") as report_file:
            report_file.write(self.text)
        cl_tqdm_write(f"{Fore.WHITE}report file created: {Fore.YELLOW}{os.path.abspath(filename)}")
        return filename


class ReportLog:
    COLUMN_WIDTH = 16

    def __init__(self, title: str, sections: Sequence[ReportSection]) -> None:
        print(f"{Fore.WHITE}{title} report output:")
        for s in sections:
            self._section(s)

    def _section(self, s: ReportSection) -> None:
        print(f"{H1}{s['title']}{_H1}")
        print(f"{Fore.YELLOW}" + " ".join(f"{h:>{self.COLUMN_WIDTH}}" for h in s["header"]))
        for row in s["rows"]:
            cells = " ".join(f"{format_value(v):>{self.COLUMN_WIDTH}}" for v in row)
            print(f"{Fore.WHITE}{cells}")
        for note in s["notes"]:
            print(f"{Fore.CYAN}{note}")
        for violation in s["violations"]:
            print(f"{Fore.RED}violation: {violation}")

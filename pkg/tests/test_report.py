import math

from couettelab.cl_types import Classification, RateKind
from couettelab.xrun.lemmacheck import LemmaCheckRow
from couettelab.xrun.ratestudy import RateReport
from couettelab.xrun.report import (
    ReportLog,
    ReportText,
    format_value,
    lemma_sections,
    rate_sections,
    record_section,
    section,
    sweep_sections,
)
from couettelab.xrun.sweep import BoundaryFit, SweepCell, SweepReport


def test_format_value() -> None:
    assert format_value(True) == "yes"
    assert format_value(False) == "no"
    assert format_value(math.nan) == "n/a"
    assert format_value(0.5) == "0.5"
    assert format_value(1.0 / 3.0) == "0.333333"
    assert format_value(None) == "-"
    assert format_value(3) == "3"


def test_record_section_is_sorted() -> None:
    s = record_section("Toy", {"b": 2, "a": 1})
    assert s["header"] == ["field", "value"]
    assert s["rows"] == [["a", 1], ["b", 2]]
    assert s["violations"] == []


def test_rate_sections_flag_failures() -> None:
    passed = RateReport(RateKind.LIFT_UP, 1.01, 1.0, 0.98, 1.02, True, {"slope": 1e-3})
    failed = RateReport(RateKind.INVISCID_DAMPING, -1.2, -2.0, -math.inf, -1.8, False, {})
    rates, details = rate_sections([passed, failed])
    assert len(rates["rows"]) == 2
    assert rates["violations"] == ["inviscid_damping: measured -1.2 outside [-inf, -1.8]"]
    assert details["rows"] == [["lift_up", "slope", 1e-3]]


def test_sweep_sections_without_fit() -> None:
    cells = [SweepCell(1e-3, 1e-4, Classification.RELAMINARIZING, None, "abc")]
    classification, boundary = sweep_sections(SweepReport(cells))
    assert classification["rows"] == [[1e-3, 1e-4, "relaminarizing", None]]
    assert boundary["notes"][0].startswith("gamma not fitted")
    assert boundary["violations"] == []


def test_sweep_sections_flag_gamma_out_of_range() -> None:
    cells = [SweepCell(1e-3, 1e-4, Classification.RELAMINARIZING, None, "abc")]
    inside = SweepReport(cells, fit=BoundaryFit(0.7, 0.0, 0.05, 0.6, 0.8, 2))
    outside = SweepReport(cells, fit=BoundaryFit(1.4, 0.0, 0.05, 1.3, 1.5, 2))
    assert sweep_sections(inside)[1]["violations"] == []
    assert sweep_sections(outside)[1]["violations"] == ["gamma 1.4 outside [0.5, 1.1]"]


def _lemma_row(log_max_ratio: float, growth: float) -> LemmaCheckRow:
    return LemmaCheckRow("wRat", "box", math.exp(log_max_ratio), log_max_ratio, growth, {})


def test_lemma_sections_flag_doubling_growth() -> None:
    table, _ = lemma_sections([_lemma_row(1.0, 1.2)])
    assert table["violations"] == []

    table, _ = lemma_sections([_lemma_row(1.0, 2.5)])
    assert table["violations"] == ["wRat: max ratio grows by 2.5 when the box doubles"]

    table, _ = lemma_sections([_lemma_row(math.inf, 1.0)])
    assert table["violations"] == ["wRat: max ratio not finite on box"]


def test_rate_sections_report_problems() -> None:
    report = RateReport(
        RateKind.ENHANCED_DISSIPATION,
        2.0,
        2.15,
        1.66,
        2.8,
        False,
        {},
        ("remaps discarded 4 of E_nonzero(0) at nu, limit 0.1",),
    )
    rates, _ = rate_sections([report])
    assert rates["violations"] == [
        "enhanced_dissipation: remaps discarded 4 of E_nonzero(0) at nu, limit 0.1"
    ]


def test_report_text(tmp_path) -> None:
    sections = [
        section("Quiet", ["x"], [[1.0]]),
        section("Loud", ["x", "y"], [[True, math.nan]], notes=["a note"], violations=["broke"]),
    ]
    report = ReportText("Check", sections, "f" * 64, 1.5, {"nu": 1e-3})
    assert report.violations == ["broke"]
    assert "config hash: " + "f" * 64 in report.text
    assert "wall time: 1.500 s" in report.text
    assert "nu: 0.001" in report.text
    assert "yes\tn/a" in report.text
    assert "VIOLATION: broke" in report.text

    filename = report.write(str(tmp_path))
    assert filename == str(tmp_path / "report.txt")
    with open(filename, encoding="utf-8") as report_file:
        assert report_file.read() == report.text

    # An existing report is never overwritten
    assert report.write(str(tmp_path)) == str(tmp_path / "report-2.txt")


def test_report_log(capsys) -> None:
    ReportLog("Check", [section("Loud", ["x"], [[2]], violations=["broke"])])
    out = capsys.readouterr().out
    assert "Check report output:" in out
    assert "violation: broke" in out

"""Test the fair-noma command line."""
import csv
import importlib
import json
import math
import os
import sys
import pytest
import ergodic_analysis
import validation
from pathlib import Path
from model import ConvergenceError
if __name__ == "__main__":
    sys.exit(f"The script {os.path.basename(__file__)} should only be run by pytest.")
fair_noma = importlib.import_module("fair-noma")


def run(*arguments: str) -> int:
    """Run one command and get its exit code."""
    return fair_noma.main(list(arguments))


def read_rows(path: Path) -> list[dict[str, str]]:
    """Read a CSV result file."""
    with open(path, newline="") as file:
        return list(csv.DictReader(file))


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    """--version prints the version from versioning.yml."""
    with pytest.raises(SystemExit) as exit_info:
        run("--version")
    assert exit_info.value.code == 0
    assert fair_noma.__version__ in capsys.readouterr().out


def test_region(tmp_path: Path) -> None:
    """The worked-example region, in JSON."""
    out = tmp_path / "region.json"
    assert run("region", "--gains", "1,4", "--snr-db", "10", "--format", "json", "--out", str(out)) == 0
    summary = json.loads(out.read_text())
    assert summary["a_inf"] == pytest.approx(0.135078, abs=1e-6)
    assert summary["a_sup"] == pytest.approx(0.231662, abs=1e-6)
    assert summary["at_a_sup"]["c1_noma"] == pytest.approx(summary["at_a_sup"]["c1_oma"], rel=1e-12)
    assert summary["at_a_inf"]["c2_noma"] == pytest.approx(summary["at_a_inf"]["c2_oma"], rel=1e-12)


def test_region_sorts_gains(tmp_path: Path) -> None:
    """Swapping the gains changes nothing."""
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    run("region", "--gains", "1,4", "--snr-db", "10", "--format", "json", "--out", str(first))
    run("region", "--gains", "4,1", "--snr-db", "10", "--format", "json", "--out", str(second))
    assert first.read_bytes() == second.read_bytes()


def test_degenerate_region_as_text(tmp_path: Path) -> None:
    """Equal gains collapse the region, and the text format is a table."""
    out = tmp_path / "region.json"
    run("region", "--gains", "1,1", "--snr-db", "3", "--format", "json", "--out", str(out))
    summary = json.loads(out.read_text())
    assert summary["a_inf"] == summary["a_sup"]
    text = tmp_path / "region.txt"
    assert run("region", "--gains", "1,1", "--snr-db", "3", "--out", str(text)) == 0
    assert "a_inf" in text.read_text()


def test_capacity(tmp_path: Path) -> None:
    """A fair allocation inside the region."""
    out = tmp_path / "capacity.json"
    assert run("capacity", "--gains", "1,4", "--snr-db", "10", "--alpha", "0.2", "--format", "json",
               "--out", str(out)) == 0
    summary = json.loads(out.read_text())
    assert summary["fair"] is True
    assert summary["sic_margin"] > 0
    assert summary["c1_noma"] > summary["c1_oma"]
    assert summary["c2_noma"] > summary["c2_oma"]


@pytest.mark.parametrize("arguments, flag", [(["region", "--gains", "1,-4", "--snr-db", "10"], "--gains"),
                                             (["region", "--gains", "1", "--snr-db", "10"], "--gains"),
                                             (["capacity", "--gains", "1,4", "--snr-db", "10", "--alpha", "1.5"],
                                              "--alpha"),
                                             (["sweep-snr", "--start", "10", "--stop", "0"], "--start"),
                                             (["sweep-snr", "--steps", "1"], "--steps"),
                                             (["sweep-snr", "--methods", "guesswork"], "--methods"),
                                             (["sweep-snr", "--beta", "-1"], "--beta"),
                                             (["sweep-snr", "--policy", "fixed", "--methods", "monte-carlo"],
                                              "--alpha"),
                                             (["sweep-alpha", "--gains", "1,4", "--methods", "monte-carlo"],
                                              "--gains"),
                                             (["sweep-alpha", "--methods", "closed-form"], "--gains"),
                                             (["sweep-alpha", "--start", "0", "--gains", "1,4"], "--start")])
def test_usage_errors(arguments: list[str], flag: str, capsys: pytest.CaptureFixture[str]) -> None:
    """Invalid flags exit with code 2 and name the flag."""
    with pytest.raises(SystemExit) as exit_info:
        run(*arguments)
    assert exit_info.value.code == 2
    message = capsys.readouterr().err.splitlines()[-1]
    assert flag in message


def test_snr_sweep_csv(tmp_path: Path) -> None:
    """The analytic rows over 0 to 40 dB, with the fixed CSV header and CRLF line ends."""
    out = tmp_path / "sweep.csv"
    assert run("sweep-snr", "--out", str(out)) == 0
    raw = out.read_bytes()
    assert raw.startswith(b"sweep_value,quantity,method,value,error_bound\r\n")
    rows = read_rows(out)
    assert [float(row["sweep_value"]) for row in rows] == sorted(float(row["sweep_value"]) for row in rows)
    assert all(math.isfinite(float(row["value"])) for row in rows)
    sum_oma = [float(row["value"]) for row in rows if row["quantity"] == "sum_oma"]
    assert len(sum_oma) == 41
    assert all(later > earlier for earlier, later in zip(sum_oma, sum_oma[1:]))
    methods = {row["quantity"]: row["method"] for row in rows}
    assert methods["c1_oma"] == "closed-form"
    assert methods["c1_noma_at_inf"] == "quadrature"
    assert methods["sum_noma_at_sup"] == "quadrature"


def test_snr_sweep_monte_carlo_is_reproducible(tmp_path: Path) -> None:
    """Identical flags give identical bytes, whatever the worker count."""
    outputs = []
    for index, workers in enumerate(("1", "1", "2")):
        out = tmp_path / f"sweep{index}.csv"
        assert run("sweep-snr", "--methods", "monte-carlo", "--steps", "3", "--samples", "20000",
                   "--policy", "at-inf", "--policy", "fixed", "--alpha", "0.3", "--workers", workers,
                   "--out", str(out)) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    quantities = {row["quantity"] for row in read_rows(tmp_path / "sweep0.csv")}
    assert {"sum_oma", "sum_gap:at-inf", "c1_noma:fixed=0.3"} <= quantities


def test_snr_sweep_falls_back_to_monte_carlo(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A quadrature that fails keeps its row, computed by Monte Carlo and labelled as such."""
    def failing(*args: object, **kwargs: object) -> tuple[float, float]:
        raise ConvergenceError("roundoff error is detected")

    monkeypatch.setattr(ergodic_analysis, "_integrate", failing)
    out = tmp_path / "sweep.json"
    assert run("sweep-snr", "--methods", "quadrature", "--steps", "2", "--samples", "5000", "--format", "json",
               "--out", str(out)) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 8
    assert {row["method"] for row in rows} == {"monte-carlo-fallback"}
    assert all(math.isfinite(row["value"]) for row in rows)


def test_alpha_sweep_monte_carlo(tmp_path: Path) -> None:
    """The expected sum capacity never drops as a grows, and the markers are in the grid."""
    out = tmp_path / "alpha.csv"
    assert run("sweep-alpha", "--samples", "20000", "--steps", "9", "--out", str(out)) == 0
    rows = read_rows(out)
    markers = {row["quantity"]: float(row["value"]) for row in rows if row["quantity"].endswith("_marker")}
    assert 0 < markers["a_inf_marker"] < markers["a_sup_marker"] < 0.5
    sums = {float(row["sweep_value"]): float(row["value"]) for row in rows if row["quantity"] == "sum_noma"}
    assert markers["a_inf_marker"] in sums and markers["a_sup_marker"] in sums
    ordered = [sums[a] for a in sorted(sums)]
    assert all(later >= earlier for earlier, later in zip(ordered, ordered[1:]))
    assert all(row["method"] == "monte-carlo" for row in rows)


def test_alpha_sweep_fixed_pair(tmp_path: Path) -> None:
    """With --gains the rows are exact and the markers are the pair's own region."""
    out = tmp_path / "alpha.json"
    assert run("sweep-alpha", "--gains", "1,4", "--snr-db", "10", "--start", "0.001", "--stop", "0.999",
               "--steps", "5", "--format", "json", "--out", str(out)) == 0
    rows = json.loads(out.read_text())
    marker = next(row for row in rows if row["quantity"] == "a_inf_marker")
    assert marker["value"] == pytest.approx(0.135078, abs=1e-6)
    first_c2 = next(row for row in rows if row["quantity"] == "c2_noma")
    assert first_c2["sweep_value"] == pytest.approx(0.001)
    assert first_c2["value"] < 0.06
    assert {row["method"] for row in rows} == {"closed-form"}


def test_log_file(tmp_path: Path) -> None:
    """-l writes the log to a file."""
    log = tmp_path / "run.log"
    assert run("region", "--gains", "1,4", "--snr-db", "10", "-v", "-l", str(log), "--out",
               str(tmp_path / "region.txt")) == 0
    assert "Config:" in log.read_text()


def test_validate_reports_a_failed_check(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A check that can't be computed fails the run and shows up as null in valid JSON."""
    def broken(settings: validation.ValidationSettings) -> list[validation.Check]:
        raise ConvergenceError("roundoff error is detected")

    monkeypatch.setattr(validation, "CHECKS", [(broken, 1.0), (validation.check_allocation_bound, 1.0)])
    out = tmp_path / "checks.json"
    assert run("validate", "--samples", "1000", "--format", "json", "--out", str(out)) == 1
    checks = json.loads(out.read_text(), parse_constant=lambda name: pytest.fail(f"{name} is not JSON"))
    assert checks[0]["name"] == "broken"
    assert checks[0]["estimate"] is None and checks[0]["delta"] is None
    assert [check["passed"] for check in checks] == [False, True, True]

    monkeypatch.setattr(validation, "CHECKS", [(validation.check_allocation_bound, 1.0)])
    assert run("validate", "--samples", "1000", "--out", str(tmp_path / "checks.txt")) == 0

import csv
import json
import os
import re
from datetime import datetime
from typing import Dict, List, Optional

import typer
from dotenv import load_dotenv

from newform_utils.zetaintegrals import VerificationReport

load_dotenv()

app = typer.Typer(name="verify_log")

DEFAULT_LOG_FILE = os.getenv("NEWFORM_REPORT_CSV", "newform_reports.csv")

FIELDNAMES = [
    "run_id", "timestamp", "profile", "identity", "label", "descriptor",
    "verdict", "max_residual", "tolerance", "relative", "points", "seconds", "message",
]


def _run_id(stamp: datetime, label: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9_.-]+", "_", label).strip("_") or "check"
    return f"{stamp.strftime('%Y%m%dT%H%M%S')}_{slug}"


def report_row(report: VerificationReport, profile: str, stamp: datetime) -> Dict[str, str]:
    """One flat CSV row; the per-point detail goes to the JSON dump."""
    return {
        "run_id": _run_id(stamp, report.label),
        "timestamp": stamp.isoformat(timespec="seconds"),
        "profile": profile,
        "identity": report.identity,
        "label": report.label,
        "descriptor": " | ".join(report.descriptor),
        "verdict": report.verdict,
        "max_residual": f"{report.max_residual:.3e}",
        "tolerance": f"{report.tolerance:.1e}",
        "relative": str(report.relative).lower(),
        "points": str(len(report.points)),
        "seconds": f"{report.seconds:.2f}",
        "message": report.message.replace("\n", "\\n"),
    }


def write_reports(
    reports: List[VerificationReport],
    profile: str,
    log_file: str = DEFAULT_LOG_FILE,
    json_out_dir: Optional[str] = None,
) -> None:
    """Append one row per report to ``log_file``; optionally dump each report as JSON."""
    stamp = datetime.now()
    rows = [report_row(r, profile, stamp) for r in reports]

    if json_out_dir:
        try:
            os.makedirs(json_out_dir, exist_ok=True)
            for row, report in zip(rows, reports):
                detail = {"run_id": row["run_id"], "timestamp": row["timestamp"], "profile": profile,
                          "report": report.to_dict(timing=True)}
                with open(os.path.join(json_out_dir, f"{row['run_id']}.json"), "w", encoding="utf-8") as jf:
                    json.dump(detail, jf, ensure_ascii=False, indent=2, sort_keys=True)
        except OSError as exc:
            # a failed detail dump must not lose the CSV rows
            typer.secho(f"warning: could not write JSON reports: {exc}", fg=typer.colors.YELLOW, err=True)

    file_exists = os.path.exists(log_file)
    with open(log_file, "a", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=FIELDNAMES)
        if not file_exists:
            writer.writeheader()
        writer.writerows(rows)


def read_rows(log_file: str) -> List[Dict[str, str]]:
    if not os.path.exists(log_file):
        return []
    with open(log_file, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


@app.command()
def summary(
    log_csv: Optional[str] = typer.Option(None, "--log-csv", help="CSV written by `newform verify --csv`"),
    profile: Optional[str] = typer.Option(None, "--profile", help="Only rows of this profile"),
    last: int = typer.Option(0, "--last", min=0, help="Only the most recent N rows (0 = all)"),
):
    """Pass/fail counts per identity over the logged verification runs."""
    rows = read_rows(log_csv or DEFAULT_LOG_FILE)
    if profile:
        rows = [r for r in rows if r.get("profile") == profile]
    if last:
        rows = rows[-last:]
    if not rows:
        typer.secho("no logged reports", fg=typer.colors.YELLOW)
        raise typer.Exit(code=1)

    counts: Dict[str, Dict[str, int]] = {}
    for row in rows:
        per = counts.setdefault(row["identity"], {"pass": 0, "fail": 0, "error": 0})
        per[row["verdict"]] = per.get(row["verdict"], 0) + 1
    for identity in sorted(counts):
        c = counts[identity]
        colour = typer.colors.GREEN if c["fail"] == 0 and c["error"] == 0 else typer.colors.RED
        typer.secho(f"{identity:<20} pass {c['pass']:>4}  fail {c['fail']:>4}  error {c['error']:>4}", fg=colour)
    worst = max(rows, key=lambda r: float(r["max_residual"] or 0.0))
    typer.echo(f"largest residual: {worst['max_residual']} ({worst['label']}, {worst['timestamp']})")


if __name__ == "__main__":
    app()

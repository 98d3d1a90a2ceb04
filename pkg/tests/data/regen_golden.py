"""Regenerate the CLI golden files from the fixtures.

Run from any directory::

    python tests/data/regen_golden.py

Only rerun after an intentional output-format change; test_cli.py checks the
golden reports against the brute-force oracle independently of the CLI.
"""

import contextlib
import io
import os
from pathlib import Path

from xlcalib.cli import main

HERE = Path(__file__).resolve().parent


def run(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    if code != 0:
        raise SystemExit(f"command failed ({code}): {argv}")
    return buf.getvalue()


def regenerate():
    os.chdir(HERE)
    golden = Path("golden")
    (golden / "reports").mkdir(parents=True, exist_ok=True)
    for lang in ("en", "de", "sw"):
        out = run("ece", "--test", f"fixture/{lang}.jsonl", "--out", f"golden/reports/{lang}.json")
        (golden / f"{lang}.ece.txt").write_text(out)
    run("reliability", "--test", "fixture/en.jsonl", "--csv", "golden/en.reliability.csv",
        "--svg", "golden/en.reliability.svg")
    run("fit-temp", "--dev", "fixture/en.dev.jsonl", "--out", "golden/en.temp.json")
    run("apply", "--test", "fixture/en.jsonl", "--model", "golden/en.temp.json", "--out", "golden/en.scaled.jsonl")
    out = run("report", "--reports", "golden/reports", "--pivot", "en", "--out", "golden/aggregate.json")
    (golden / "report.txt").write_text(out)


if __name__ == "__main__":
    regenerate()

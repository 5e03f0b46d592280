#!/usr/bin/env python3
"""Run every shipped scenario and summarize the reports."""
import json
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main():
    out_root = ROOT / "out"
    rc_total = 0
    for scen in sorted((ROOT / "scenarios").glob("*.json")):
        out = out_root / scen.stem
        rc = subprocess.call([sys.executable, "-m", "nlelast.cli", "simulate",
                              "--config", str(scen), "--out", str(out)])
        rc_total |= rc
        if rc == 0:
            report = json.loads((out / "report.json").read_text())
            bad = [k for k, v in report["verdicts"].items() if not v["pass"]]
            status = "all checks pass" if not bad else f"FAILING: {bad}"
            print(f"  {scen.stem}: {status}")
    return rc_total


if __name__ == "__main__":
    sys.exit(main())

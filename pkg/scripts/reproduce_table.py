#!/usr/bin/env python3
"""Run every shipped replay config and print the performance table."""
import argparse
import sys
from pathlib import Path

from svagen.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]
DESIGNS = ("rv_timer", "pattgen", "gpio", "rom_ctrl", "sram_ctrl", "adc_ctrl")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "out", help="where run bundles go")
    ap.add_argument("--format", choices=("table", "json"), default="table")
    args = ap.parse_args(argv)
    bundles = []
    for design in DESIGNS:
        config = ROOT / "fixtures" / design / f"{design}.replay.run.json"
        bundle = args.out / design
        code = cli(["generate", "--config", str(config), "--out", str(bundle)])
        if code != 0:
            print(f"{design}: generate exited {code}", file=sys.stderr)
            return code
        bundles.append(str(bundle))
    return cli(["report", "--format", args.format, *bundles])


if __name__ == "__main__":
    sys.exit(main())

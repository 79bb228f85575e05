"""Regenerate the data behind every figure from the configs in scripts/configs.

    python3 scripts/reproduce_figures.py [outdir]

Each config names its subcommand under "command"; output goes to
``outdir/<config stem>.csv`` (default ``figures/``).
"""
import json
import sys
from pathlib import Path

from cavity_filter.cli import main

CONFIGS = Path(__file__).resolve().parent / "configs"


def run(path: Path, outdir: Path) -> int:
    command = json.loads(path.read_text())["command"]
    out = outdir / f"{path.stem}.csv"
    return main([command, "--config", str(path), "--out", str(out)])


if __name__ == "__main__":
    outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for path in sorted(CONFIGS.glob("*.json")):
        code = run(path, outdir)
        print(f"{path.stem}: exit {code}")
        worst = max(worst, code)
    sys.exit(worst)

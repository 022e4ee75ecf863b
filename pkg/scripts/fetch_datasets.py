#!/usr/bin/env python3
"""Download the public benchmark series into a data directory.

Usage::

    python3 scripts/fetch_datasets.py [DEST]      # default: tests/data

Two series have stable public mirrors and are fetched directly. The electricity
load and gold price series come from Kaggle/UCI pages that need an account or a
manual export; place them in DEST yourself as ``electricity-load.csv`` and
``daily-gold-price.csv`` with the value in the last column.

Point the acceptance tests at DEST with ``ROBOSNN_DATA_DIR=DEST`` (not needed
for the default location).
"""

import hashlib
import sys
import urllib.request
from pathlib import Path

BASE = "https://raw.githubusercontent.com/jbrownlee/Datasets/master"
SOURCES = {
    "daily-min-temperatures.csv": f"{BASE}/daily-min-temperatures.csv",
    "monthly-sunspots.csv": f"{BASE}/monthly-sunspots.csv",
}
MANUAL = ("electricity-load.csv", "daily-gold-price.csv")


def fetch(dest: Path) -> int:
    dest.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name, url in SOURCES.items():
        target = dest / name
        if target.exists():
            print(f"exists   {target}")
            continue
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                body = resp.read()
        except OSError as exc:
            print(f"FAILED   {name}: {exc}", file=sys.stderr)
            failed += 1
            continue
        target.write_bytes(body)
        print(f"fetched  {target}  sha256={hashlib.sha256(body).hexdigest()[:16]}")
    for name in MANUAL:
        if not (dest / name).exists():
            print(f"manual   {dest / name} (see module docstring)")
    return 1 if failed else 0


if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent
    sys.exit(fetch(Path(sys.argv[1]) if len(sys.argv) > 1 else root / "tests" / "data"))

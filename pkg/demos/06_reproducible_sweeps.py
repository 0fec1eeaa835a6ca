#!/usr/bin/env python3
"""Reproducibility end to end: a sweep's CSV is a pure function of its
config, independent of how many workers ran it.

Runs the committed example config twice (once serial, once with 8
threads) into a temp directory and diffs the bytes, then shows the first
records and the summary sidecar.
"""

import tempfile
from pathlib import Path

from lowdose import harness

config_path = Path(__file__).resolve().parents[1] / "configs" / "example.toml"
cfg = harness.config_from_toml(str(config_path))

with tempfile.TemporaryDirectory() as tmp:
    serial = Path(tmp) / "serial.csv"
    threaded = Path(tmp) / "threaded.csv"
    harness.run_sweep(cfg, threads=1, output_path=str(serial))
    records, _, summary_path = harness.run_sweep(cfg, threads=8, output_path=str(threaded))

    identical = serial.read_bytes() == threaded.read_bytes()
    print(f"config: {config_path.name}, {len(records)} records")
    print(f"serial and 8-thread CSVs byte-identical: {identical}\n")

    lines = serial.read_text().splitlines()
    print("first rows:")
    for line in lines[:4]:
        print(f"  {line}")
    print("\nsummary sidecar:")
    print(Path(summary_path).read_text())

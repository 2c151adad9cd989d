#!/usr/bin/env python3
"""Time the parse and analyze stages on a synthetic bulk detection log.

    python scripts/benchmark_parse.py --lines 100000 --repeats 3
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dragonwatch.ingest import parse_detection_log
from dragonwatch.pipeline import analyze_timeline


def bulk_log(num_lines: int) -> str:
    frames = (num_lines + 2) // 3
    rows = [f"!geometry 640 480 30 {frames}"]
    count = 0
    for t in range(frames):
        for line in (
            f"{t} 0 0.5 {0.4 + 0.05 * ((t % 100) / 100):.6f} 0.18 0.12 0.9",
            f"{t} 1 0.5 0.2 0.1 0.08 0.85",
            f"{t} 2 {0.1 + 0.6 * (t % 500) / 500:.6f} 0.7 0.03 0.02 0.6",
        ):
            if count >= num_lines:
                break
            rows.append(line)
            count += 1
    return "\n".join(rows)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lines", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    text = bulk_log(args.lines)
    print(f"log: {args.lines} data lines, {len(text) / 1e6:.1f} MB")
    for run in range(1, args.repeats + 1):
        t0 = time.perf_counter()
        timeline = parse_detection_log(text)
        t1 = time.perf_counter()
        result = analyze_timeline(timeline)
        t2 = time.perf_counter()
        rate = args.lines / (t2 - t0)
        print(
            f"run {run}: parse {t1 - t0:.3f}s, analyze {t2 - t1:.3f}s, "
            f"total {t2 - t0:.3f}s ({rate:,.0f} lines/s, "
            f"{len(result.episodes)} episodes)"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())

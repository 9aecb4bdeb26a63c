#!/usr/bin/env python3
"""Generate the bundled demo logs in raw mobile-measurement format.

The repo cannot redistribute the original public transit logs, so these are
synthetic stand-ins with the same file shape (millisecond timestamp + bytes
per 1 s interval) and qualitatively similar bandwidth behavior: "tram" is
volatile with stop/tunnel dropouts, "ferry" is smoother and faster.  Output
is deterministic; regenerate with `python3 tools/make_demo_traces.py`.
"""

import math
import os
import random

DURATION_S = 480
INTERVAL_MS = 1000
START_TS_MS = 1_262_300_400_000  # arbitrary epoch-style origin


def tram_kbps(rng):
    values = []
    base = 2400.0
    dropout = 0
    for t in range(DURATION_S):
        # slow drift plus street-level fading
        base += rng.gauss(0.0, 90.0)
        base = min(max(base, 1500.0), 3600.0)
        wave = 500.0 * math.sin(2 * math.pi * t / 90.0)
        noise = rng.gauss(0.0, 200.0)
        kbps = base + wave + noise
        if 300 <= t < 340:  # tunnel section
            kbps = 950.0 + rng.gauss(0.0, 70.0)
        elif dropout > 0:
            kbps = rng.uniform(700.0, 950.0)
            dropout -= 1
        elif rng.random() < 0.012:  # stop or underpass every ~80 s
            dropout = rng.randint(1, 2)
        values.append(max(kbps, 250.0))
    return values


def ferry_kbps(rng):
    values = []
    for t in range(DURATION_S):
        base = 3500.0 + 450.0 * math.sin(2 * math.pi * t / 240.0)
        noise = rng.gauss(0.0, 120.0)
        kbps = base + noise
        if 260 <= t < 340:  # mid-crossing coverage trough
            kbps = 850.0 + rng.gauss(0.0, 60.0)
        elif 250 <= t < 260:  # entry shoulder
            kbps -= (t - 250) * 250.0
        elif 340 <= t < 350:  # exit shoulder
            kbps -= (350 - t) * 250.0
        values.append(max(kbps, 300.0))
    return values


def write_log(path, kbps_values):
    with open(path, "w", encoding="utf-8") as fh:
        ts = START_TS_MS
        for kbps in kbps_values:
            nbytes = int(round(kbps * INTERVAL_MS / 8.0))  # bits -> bytes over 1 s
            fh.write(f"{ts} {nbytes}\n")
            ts += INTERVAL_MS
    print(f"wrote {path} ({len(kbps_values)} rows)")


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data", "raw")
    os.makedirs(out_dir, exist_ok=True)
    write_log(os.path.join(out_dir, "tram.log"), tram_kbps(random.Random(20100101)))
    write_log(os.path.join(out_dir, "ferry.log"), ferry_kbps(random.Random(20100102)))


if __name__ == "__main__":
    main()

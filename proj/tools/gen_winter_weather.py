"""Writes the synthetic winter week used by the bundled scenarios.

Deterministic: a diurnal ambient cycle with day-to-day offsets and clear-sky facade
irradiance scaled by a per-day cloud factor. Local time is UTC+2.
"""

import argparse
import math
from datetime import datetime, timezone

START = int(datetime(2026, 1, 4, 22, 0, tzinfo=timezone.utc).timestamp())  # Monday 00:00 local
STEP = 600
RECORDS = 1008
UTC_OFFSET_H = 2.0

DAY_OFFSET = [-2.0, 0.0, 1.0, -1.0, 2.0, 0.5, -3.0]
CLOUD = [1.0, 0.4, 0.8, 0.3, 1.0, 0.6, 0.9]
SUNRISE_H = 7.75
SUNSET_H = 16.75


def ambient(day: int, hour: float) -> float:
    # minimum near 06:00, maximum near 15:00
    diurnal = -4.0 * math.cos(2 * math.pi * (hour - 3.0) / 24.0)
    return 1.0 + DAY_OFFSET[day % 7] + diurnal


def irradiance(day: int, hour: float) -> tuple[float, float, float, float]:
    if hour <= SUNRISE_H or hour >= SUNSET_H:
        return 0.0, 0.0, 0.0, 0.0
    phase = (hour - SUNRISE_H) / (SUNSET_H - SUNRISE_H)  # 0 at sunrise, 1 at sunset
    elevation = math.sin(math.pi * phase)
    c = CLOUD[day % 7]
    diffuse = 40.0 * elevation
    south = c * 450.0 * elevation ** 1.5 + diffuse
    east = c * 300.0 * max(0.0, math.cos(math.pi * phase)) * elevation + diffuse
    west = c * 300.0 * max(0.0, -math.cos(math.pi * phase)) * elevation + diffuse
    north = diffuse
    return north, south, east, west


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    args = parser.parse_args()
    with open(args.output, "w", newline="\n") as f:
        f.write("timestamp,ambient_temp,irr_n,irr_s,irr_e,irr_w\n")
        for i in range(RECORDS):
            t = START + i * STEP
            local_h = (i * STEP / 3600.0) % 24.0
            day = int(i * STEP // 86400)
            n, s, e, w = irradiance(day, local_h)
            f.write(f"{t},{ambient(day, local_h):.2f},{n:.1f},{s:.1f},{e:.1f},{w:.1f}\n")


if __name__ == "__main__":
    main()

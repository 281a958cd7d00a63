#!/usr/bin/env python3
"""Writes the synthetic 96-interval daily timeline used by data/daily.ini.

Hourly shapes (a spring Sunday: low midday prices while PV is high, evening
price and demand peak) are interpolated linearly to 15-minute intervals.
"""
import argparse
import math

LOAD = [0.62, 0.58, 0.55, 0.54, 0.54, 0.55, 0.58, 0.63, 0.70, 0.76, 0.80, 0.82,
        0.81, 0.78, 0.76, 0.76, 0.79, 0.85, 0.93, 0.98, 1.00, 0.96, 0.85, 0.72]
TARIFF = [0.19, 0.17, 0.16, 0.15, 0.15, 0.16, 0.17, 0.18, 0.16, 0.12, 0.09, 0.07,
          0.06, 0.06, 0.07, 0.09, 0.13, 0.18, 0.23, 0.27, 0.29, 0.26, 0.22, 0.20]
PV_PEAK = 0.65


def hourly(series, h):
    i = int(math.floor(h)) % 24
    f = h - math.floor(h)
    return series[i] * (1 - f) + series[(i + 1) % 24] * f


def pv(h):
    s = math.sin(math.pi * (h - 5.5) / 15.0)
    return PV_PEAK * s ** 1.3 if s > 0 else 0.0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    args = ap.parse_args()
    with open(args.out, "w") as f:
        f.write("# synthetic daily profile, 15-minute intervals\n")
        f.write("interval\ttariff\tload\tpv\tmg_load\n")
        for k in range(96):
            h = k / 4.0
            f.write(f"{k}\t{hourly(TARIFF, h):.4f}\t{hourly(LOAD, h):.4f}\t{pv(h):.4f}\t{hourly(LOAD, h):.4f}\n")


if __name__ == "__main__":
    main()

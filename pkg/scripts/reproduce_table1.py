"""Print the performance table next to the published values, with per-cell residuals."""

import sys

from precision_drop.performance import TABLE1_THROTTLES, AirframeConfig, table1_curve, table_report, write_table_csv

PUBLISHED = {
    "tilt_angle": [43.21, 58.63, 63.04],
    "takeoff_velocity": [8.29, 9.81, 10.52],
    "horizontal_velocity": [11.28, 15.94, 18.08],
    "flight_time": [6.95, 4.42, 3.044],
    "range_km": [4.70, 4.22, 3.30],
}


def main():
    points = table_report(table1_curve(), AirframeConfig(), TABLE1_THROTTLES)
    write_table_csv(points, sys.stdout)
    print()
    print(f"{'quantity':<22}" + "".join(f"{p.throttle:>12.1%}" for p in points[3:]))
    for key, published in PUBLISHED.items():
        cells = [getattr(p, key) / ref - 1 for p, ref in zip(points[3:], published)]
        print(f"{key:<22}" + "".join(f"{c:>+12.2%}" for c in cells))


if __name__ == "__main__":
    main()

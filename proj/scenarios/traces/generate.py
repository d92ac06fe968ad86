"""Regenerates the recorded hand traces shipped with the presets and test fixtures.

Traces are piecewise-linear operator paths at constant speed, sampled at a mocap
rate that differs from the simulator rate so replay exercises resampling.
"""

import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent.parent / "tests" / "fixtures"


def polyline(waypoints, speed, rate, hold_start=1.0, hold_end=2.0, z=1.0):
    samples = []
    t = 0.0
    dt = 1.0 / rate
    # Arc-length parametrisation of the polyline.
    legs = []
    total = 0.0
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        length = math.hypot(x1 - x0, y1 - y0)
        legs.append((total, length, (x0, y0), (x1, y1)))
        total += length
    duration = hold_start + total / speed + hold_end
    k = 0
    while t <= duration + 1e-12:
        s = min(max(t - hold_start, 0.0) * speed, total)
        leg = next((leg for leg in legs if s <= leg[0] + leg[1]), legs[-1])
        start, length, (x0, y0), (x1, y1) = leg
        w = 0.0 if length == 0 else min(max((s - start) / length, 0.0), 1.0)
        samples.append((t, x0 + w * (x1 - x0), y0 + w * (y1 - y0), z))
        k += 1
        t = k * dt
    return samples


def fmt(value):
    # Shortest round-trip text without a trailing ".0", as the simulator writes it.
    text = repr(round(value, 6))
    return text[:-2] if text.endswith(".0") else text


def write(path, samples):
    with open(path, "w") as f:
        f.write("t,x,y,z\n")
        for sample in samples:
            f.write(",".join(fmt(v) for v in sample) + "\n")


def main():
    speed = 0.3
    a = [(0.0, 0.0), (2.7, 0.0), (3.2, 0.6), (4.7, 0.6), (5.2, 0.0), (7.8, 0.0)]
    b = [(x, -y) for x, y in a]
    write(HERE / "labyrinth-a.csv", polyline(a, speed, rate=50))
    write(HERE / "labyrinth-b.csv", polyline(b, speed, rate=50))
    write(FIXTURES / "straight-hand.csv", polyline([(0.0, 0.0), (5.0, 0.0)], speed, rate=30))


if __name__ == "__main__":
    main()

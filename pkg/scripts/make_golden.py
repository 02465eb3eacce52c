"""Write golden simulator outputs with a scalar, loop-based re-implementation.

Nothing from the package is imported: each formula is typed in again with
``math`` only, so the frozen values are an independent check of the
vectorized simulators.

    python3 scripts/make_golden.py tests/data/golden_series.csv
"""
import csv
import math
import sys

L = 200


def grid(start, stop):
    return [start + (stop - start) * i / (L - 1) for i in range(L)]


def easom(x, t):
    x1, x2 = x
    return math.cos(x1) * math.cos(x2) * math.exp(-(x1 - math.pi * t) ** 2 - (x2 - math.pi) ** 2)


def levy(x, t):
    w1 = 1 + (x[0] - 1) / 4
    w2 = 1 + (x[1] - 1) / 4
    a = math.sin(math.pi * t) ** 2
    b = (t / 5 - 1) ** 2 * (1 + 10 * math.sin(math.pi * t / 2 + 1) ** 2)
    c = (w1 - 1) ** 2 * (1 + 10 * math.sin(math.pi * w1 + 1) ** 2)
    e = (w2 - 1) ** 2 * (1 + math.sin(2 * math.pi * w2) ** 2)
    return a + b * c + e


def harari(x, t):
    x1, x2, x3 = x
    return math.exp(3 * x1 * t + t) * math.cos(6 * x2 * t + 2 * t - 8 * x3 - 6)


def bliznyuk(x, t):
    m, d, l, tau, s = x
    v = m / math.sqrt(d * t) * math.exp(-s * s / (4 * d * t))
    if t > tau:
        v += m / math.sqrt(d * (t - tau)) * math.exp(-(s - l) ** 2 / (4 * d * (t - tau)))
    return v


CASES = [
    ("easom", easom, (0.8, 0.2), grid(0.0, 1.0)),
    ("levy", levy, (0.5, 0.5), grid(0.0, 1.0)),
    ("harari", harari, (0.522, 0.95, 0.427), grid(0.0, 1.0)),
    ("bliznyuk", bliznyuk, (9.640, 0.059, 1.445, 30.277, 2.520), grid(35.3, 95.0)),
]


def main(path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["simulator", "index", "t", "value"])
        for name, f, x, ts in CASES:
            for i, t in enumerate(ts, start=1):
                w.writerow([name, i, repr(t), repr(f(x, t))])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/golden_series.csv")

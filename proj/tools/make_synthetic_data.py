"""Writes data/synthetic_skewed.csv: 500 rows, 5 features, right-skewed target."""

import numpy as np

rng = np.random.default_rng(20201)
n, p = 500, 5
x = rng.normal(size=(n, p))
signal = 0.6 * x[:, 0] + 0.4 * x[:, 1] - 0.3 * x[:, 2] + 0.2 * x[:, 3] * x[:, 4]
y = 20.0 * np.exp(signal + 0.35 * rng.normal(size=n))

with open("data/synthetic_skewed.csv", "w", newline="\n") as out:
    out.write("x1,x2,x3,x4,x5,y\n")
    for row, target in zip(x, y):
        out.write(",".join(f"{v:.6f}" for v in row) + f",{target:.6f}\n")

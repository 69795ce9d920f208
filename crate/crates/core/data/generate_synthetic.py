"""Writes synthetic_1000.csv: 1000 points in four Gaussian blobs with two
sensitive attributes (sex, marital) whose mix differs per blob.

Run from this directory: python3 generate_synthetic.py
"""

import csv

import numpy as np

SEED = 20190601
CENTERS = np.array([[0.0, 0.0, 0.0], [8.0, 1.0, -2.0], [2.0, 9.0, 3.0], [-6.0, 5.0, 7.0]])
SPREAD = [1.5, 2.0, 1.2, 2.5]
SIZES = [320, 260, 240, 180]
# probability of sex == "F" and of each marital status, per blob
FEMALE = [0.25, 0.7, 0.5, 0.35]
MARITAL = ["single", "married", "divorced"]
MARITAL_P = [[0.6, 0.3, 0.1], [0.2, 0.7, 0.1], [0.3, 0.4, 0.3], [0.45, 0.45, 0.1]]


def main():
    rng = np.random.default_rng(SEED)
    rows = []
    for blob, (center, spread, size) in enumerate(zip(CENTERS, SPREAD, SIZES)):
        points = center + spread * rng.standard_normal((size, 3))
        sex = np.where(rng.random(size) < FEMALE[blob], "F", "M")
        marital = rng.choice(MARITAL, size=size, p=MARITAL_P[blob])
        rows.extend(zip(points, sex, marital))
    order = rng.permutation(len(rows))
    with open("synthetic_1000.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "x", "y", "z", "sex", "marital"])
        for new_id, idx in enumerate(order):
            point, sex, marital = rows[idx]
            writer.writerow([new_id, *(f"{c:.4f}" for c in point), sex, marital])


if __name__ == "__main__":
    main()

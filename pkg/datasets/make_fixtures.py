"""Regenerate the bundled synthetic CSV fixtures.

Run from the repository root after installing the package:

    python3 datasets/make_fixtures.py

Both files are deterministic; rerunning must not change them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from mcni.data import Dataset, save_csv

HERE = Path(__file__).resolve().parent


def regression(n: int = 512, seed: int = 20240101) -> Dataset:
    """Linear target over 6 standard-normal features plus tiny noise.

    Kept linear and low-noise so that any sanely trained model recovers it
    to a standardized RMSE well under 0.05.
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 6))
    w = np.array([1.5, -2.0, 0.8, 0.0, 0.5, -1.2])
    y = X @ w + 0.3 + 0.02 * rng.standard_normal(n)
    cols = [f"x{i}" for i in range(6)] + ["y"]
    return Dataset(X=X, Y=y.reshape(-1, 1), task="regression", columns=cols)


def classification(n: int = 400, seed: int = 20240102) -> Dataset:
    """Two overlapping Gaussian blobs at (-1,-1) and (+1,+1)."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    centers = np.where(labels[:, None] == 0, -1.0, 1.0)
    X = centers + 0.8 * rng.standard_normal((n, 2))
    return Dataset(X=X, Y=labels.astype(np.int64), task="classification",
                   columns=["x0", "x1", "label"])


def main() -> None:
    save_csv(regression(), HERE / "synth_regression.csv")
    save_csv(classification(), HERE / "synth_classification.csv")
    print("wrote", HERE / "synth_regression.csv")
    print("wrote", HERE / "synth_classification.csv")


if __name__ == "__main__":
    main()

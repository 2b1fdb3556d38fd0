"""Write public benchmark datasets as plain numeric CSV under ``data/``.

Only Iris is handled here: scikit-learn ships it, so no download is needed.
The species column is dropped and the four measurements are kept unscaled.

    python3 scripts/fetch_datasets.py [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np


def write_iris(out: Path) -> Path:
    from sklearn.datasets import load_iris

    X = load_iris().data
    path = out / "iris.csv"
    header = "sepal_length,sepal_width,petal_length,petal_width"
    np.savetxt(path, X, delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    print(f"wrote {write_iris(args.out)}")


if __name__ == "__main__":
    main()

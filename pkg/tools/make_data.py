"""Regenerate the vendored data files under src/adeqnn/data/.

glass.data is rebuilt from the MASS ``fgl`` table (shipped by the ``rdatasets``
wheel), which is the UCI Glass Identification data with the refractive index
stored as ``(RI - 1.518) * 1000`` and the class as a label. digits.csv is the
UCI 8x8 optical-digits table as bundled with scikit-learn.

Neither package is a runtime dependency; run this once with both installed:

    python tools/make_data.py
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "adeqnn" / "data"

FGL_TYPES = {"WinF": 1, "WinNF": 2, "Veh": 3, "Con": 5, "Tabl": 6, "Head": 7}


def make_glass(path: Path) -> None:
    import rdatasets

    df = rdatasets.data("MASS", "fgl")
    lines = []
    for k, row in enumerate(df.itertuples(index=False), start=1):
        ri = 1.518 + row.RI / 1000.0
        feats = [row.Na, row.Mg, row.Al, row.Si, row.K, row.Ca, row.Ba, row.Fe]
        fields = [str(k), f"{ri:.5f}"] + [f"{v:.2f}" for v in feats]
        fields.append(str(FGL_TYPES[row.type]))
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


def make_digits(path: Path) -> None:
    from sklearn.datasets import load_digits

    d = load_digits()
    rows = np.column_stack([d.data.astype(int), d.target.astype(int)])
    path.write_text("\n".join(",".join(str(v) for v in r) for r in rows) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    make_glass(OUT / "glass.data")
    make_digits(OUT / "digits.csv")
    print("wrote", OUT)

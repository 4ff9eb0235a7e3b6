"""Regenerate golden_plaquette_l10.csv with ARPACK, independent of the package solver."""
from __future__ import annotations

import csv
from pathlib import Path

from scipy.sparse.linalg import eigsh

from compactqed.analysis import plaquette_expectation
from compactqed.basis import CouplingParams, GroupParams
from compactqed.hamiltonian import build_pure_gauge_electric

GRID = [0.1, 0.3, 1.0, 3.0, 10.0]


def main() -> None:
    rows = []
    for x in GRID:
        coupling = CouplingParams(1.0 / x, 1.0)
        ham = build_pure_gauge_electric(GroupParams(10, 10), coupling)
        w, v = eigsh(ham.total.tocsc(), k=1, which="SA", tol=1e-13, v0=None)
        rows.append({"inv_g2": repr(x), "l": 10, "energy": repr(float(w[0])),
                     "plaquette": repr(plaquette_expectation(v[:, 0], ham.H_B, coupling))})
    path = Path(__file__).with_name("golden_plaquette_l10.csv")
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


if __name__ == "__main__":
    main()

"""Generate the bundled Maeda-style reference model file.

The tables are a synthetic stand-in with the structure of the Maeda model
(7 linear components on a glottis-to-lips grid, power-law sagittal-to-area
conversion). Swap in published tables by writing a file in the same format.

    python tools/make_reference_model.py [output path]
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from artinv.model.data import REFERENCE_PATH, ModelData, save_model_data

# (region code, number of gridlines, section length cm, alpha, beta)
REGIONS = [
    (0, 3, 0.70, 1.6, 1.3),  # larynx
    (1, 7, 0.75, 1.8, 1.4),  # pharynx
    (2, 5, 0.75, 2.0, 1.5),  # velar
    (3, 5, 0.70, 1.6, 1.5),  # palatal
    (4, 4, 0.45, 1.5, 1.3),  # alveolar
    (5, 2, 0.60, 1.8, 1.4),  # lips
]


def _bump(u, center, width):
    return np.exp(-0.5 * ((u - center) / width) ** 2)


def build() -> ModelData:
    region = np.concatenate([np.full(n, code) for code, n, *_ in REGIONS])
    length = np.concatenate([np.full(n, ln) for _, n, ln, *_ in REGIONS])
    alpha = np.concatenate([np.full(n, a) for _, n, _, a, _ in REGIONS])
    beta = np.concatenate([np.full(n, b) for _, n, _, _, b in REGIONS])
    g = region.size
    edges = np.concatenate([[0.0], np.cumsum(length)])
    u = 0.5 * (edges[:-1] + edges[1:]) / edges[-1]

    larynx = region == 0
    lower_phar = (region == 1) & (np.arange(g) < 5)
    lips = region == 5

    dist = np.where(larynx, 0.95, 1.45 - 0.15 * _bump(u, 0.80, 0.08))
    dist = np.where(lips, 1.05, dist)

    basis_d = np.zeros((7, g))
    basis_l = np.zeros((7, g))
    # jaw: + opens the oral cavity and lips, slightly narrows the pharynx
    basis_d[0] = 0.22 * _bump(u, 0.86, 0.10) - 0.08 * _bump(u, 0.35, 0.10) + 0.18 * lips
    # tongue dorsum position: + fronts the tongue (wider pharynx, narrower palate)
    basis_d[1] = 0.38 * _bump(u, 0.30, 0.11) - 0.36 * _bump(u, 0.72, 0.09)
    # tongue dorsum height: + raises the dorsum into the velar region
    basis_d[2] = -0.38 * _bump(u, 0.58, 0.09) + 0.12 * _bump(u, 0.22, 0.08)
    # tongue tip: + raises the tip toward the alveolar ridge
    basis_d[3] = -0.28 * _bump(u, 0.89, 0.04) + 0.08 * _bump(u, 0.76, 0.05)
    # lower lip: + opens the lips
    basis_d[4] = 0.30 * lips
    # lip protrusion: + lengthens and slightly rounds the lip tube
    basis_l[5] = 0.13 * lips
    basis_d[5] = -0.06 * lips
    # larynx height: + raises the larynx (shorter, wider larynx tube)
    basis_l[6] = -0.09 * larynx - 0.03 * lower_phar
    basis_d[6] = 0.06 * larynx - 0.05 * lower_phar

    mean = np.concatenate([dist, length])
    basis = np.hstack([basis_d, basis_l])
    return ModelData(
        name="maeda-style-synthetic-v1",
        position=u,
        region=region.astype(np.int64),
        mean=mean,
        basis=basis,
        alpha=alpha,
        beta=beta,
        l0=float(length.sum()),
    )


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else REFERENCE_PATH
    save_model_data(build(), out)
    print(f"wrote {out}")

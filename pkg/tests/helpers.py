"""Fixture builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from properdiv import CategoricalDist, MomentSummary, PiecewiseLinearCdf

HEADER = "cell_id,lat,lon,year,value\n"


def grid_cells(n_cells=154, seed=0):
    """Cell ids and coordinates on a regular lat/lon patch."""
    rng = np.random.default_rng(seed)
    cells = []
    for i in range(n_cells):
        r, c = divmod(i, 14)
        cells.append((f"r{r:03d}c{c:03d}", 30.0 + 2.5 * r, -10.0 + 2.5 * c))
    rng.shuffle(cells)
    return cells


def reference_field(n_cells=154, years=range(1961, 1991), seed=0):
    """Per-cell yearly maxima for a synthetic reference: cell climatology plus noise."""
    rng = np.random.default_rng(seed)
    cells = grid_cells(n_cells, seed)
    years = list(years)
    base = rng.uniform(20.0, 40.0, size=n_cells)
    vals = base[:, None] + rng.gumbel(0.0, 1.5, size=(n_cells, len(years)))
    return cells, years, vals


def write_grid_csv(path, cells, years, values, shift=0.0):
    lines = [HEADER]
    for (cid, lat, lon), row in zip(cells, values):
        for y, v in zip(years, row):
            lines.append(f"{cid},{lat!r},{lon!r},{y},{float(v + shift)!r}\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


def case_study_fixture(tmp_path, n_models=15, n_cells=154, seed=0):
    """Two references and n_models shifted or noisy models, written as CSVs."""
    cells, years, vals = reference_field(n_cells, seed=seed)
    rng = np.random.default_rng(seed + 1)
    ref1 = write_grid_csv(tmp_path / "ref_era.csv", cells, years, vals)
    ref2 = write_grid_csv(tmp_path / "ref_ncep.csv", cells, years, vals + rng.normal(0.0, 0.5, vals.shape))
    models = []
    for m in range(n_models):
        noise = rng.normal(0.0, 0.3 + 0.1 * m, vals.shape)
        models.append(write_grid_csv(tmp_path / f"model{m:02d}.csv", cells, years, vals + noise, shift=0.2 * m))
    return ref1, ref2, models


# --- random distributions -------------------------------------------------------


def random_cdf(rng, n_max=6, lo=-2.0, hi=2.0):
    """A random piecewise-linear CDF mixing jumps and linear pieces."""
    n = int(rng.integers(1, n_max + 1))
    x = np.sort(rng.uniform(lo, hi, size=n))
    x = np.unique(np.round(x, 6))
    n = x.size
    if n == 1:
        return PiecewiseLinearCdf.point_mass(x[0])
    levels = np.sort(rng.uniform(0, 1, size=2 * n - 2))
    v = np.concatenate([[0.0], levels, [1.0]])
    # some breakpoints are continuous: collapse the jump
    left, right = v[0::2].copy(), v[1::2].copy()
    cont = rng.random(n) < 0.4
    cont[0] = cont[-1] = False
    right[cont] = left[cont]
    return PiecewiseLinearCdf(x, left, right)


def random_atoms(rng, k_max=8, lo=-2.0, hi=2.0, lattice=None):
    k = int(rng.integers(1, k_max + 1))
    a = rng.uniform(lo, hi, size=k)
    if lattice:
        a = np.round(a * lattice) / lattice
    return a


def random_categorical(rng, c):
    p = rng.dirichlet(np.ones(c))
    p = np.round(p, 8)
    p[-1] = 1.0 - p[:-1].sum()
    return CategoricalDist(np.clip(p, 0, None) / np.clip(p, 0, None).sum())


def random_moments(rng, m):
    A = rng.normal(size=(m, m))
    return MomentSummary(rng.normal(size=m), A @ A.T + 0.5 * np.eye(m))

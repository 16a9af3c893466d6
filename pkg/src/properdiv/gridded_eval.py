"""Per-cell divergences between gridded model output and reference data.

Each grid cell holds one value per year (typically an annual maximum).
A model is compared with a reference cell by cell, treating the model's
yearly values as the forecast distribution F and the reference's as the
empirical measure Ĝ. Cell values are averaged over the grid and models are
ranked against two references, with the divergence between the references
themselves reported as an internal-variability baseline.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from ._accel import worker_count
from .divergences import (
    CATEGORICAL,
    MOMENT_BASED,
    DivergenceSpec,
    DivergenceValue,
    Propriety,
    divergence,
)
from .errors import (
    EmptyDataset,
    IncompleteYear,
    InvalidInput,
    NoCommonCells,
    ParseError,
    SingularCovariance,
)
from .measures import EmpiricalMeasure, _parse_float, annual_maxima, bin_counts, moment_summary

YEARLY_HEADER = ("cell_id", "lat", "lon", "year", "value")
DAILY_HEADER = ("cell_id", "lat", "lon", "date", "value")

OK = "ok"
SKIPPED = "skipped"


@dataclass(frozen=True, eq=False)
class Cell:
    cell_id: str
    lat: float
    lon: float
    years: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))


@dataclass(frozen=True, eq=False)
class GridDataset:
    """Cells keyed by id (iterated in sorted order) plus per-cell quality flags."""

    dataset_id: str
    cells: Mapping[str, Cell]
    flags: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.cells:
            raise EmptyDataset(f"dataset {self.dataset_id!r} has no cells")
        object.__setattr__(self, "cells", {cid: self.cells[cid] for cid in sorted(self.cells)})
        object.__setattr__(self, "flags", dict(sorted(self.flags.items())))

    @classmethod
    def from_arrays(cls, dataset_id, series: Mapping[str, tuple]) -> GridDataset:
        """Build from ``{cell_id: (lat, lon, years, values)}``; mainly for fixtures."""
        cells = {cid: Cell(cid, float(lat), float(lon), years, values) for cid, (lat, lon, years, values) in series.items()}
        for c in cells.values():
            if len(set(c.years)) != len(c.years) or len(c.years) != c.values.size:
                raise InvalidInput(f"cell {c.cell_id}: years must be unique and match the values")
            if not np.all(np.isfinite(c.values)):
                raise InvalidInput(f"cell {c.cell_id}: values must be finite")
        return cls(dataset_id, cells, _year_set_flags(cells))

    def __len__(self):
        return len(self.cells)


def _year_set_flags(cells) -> dict:
    sets = Counter(frozenset(c.years) for c in cells.values())
    # modal year set; ties go to the larger set, then the earliest years
    modal = max(sets, key=lambda s: (sets[s], len(s), [-y for y in sorted(s)]))
    return {cid: "year set differs from the dataset's" for cid, c in cells.items() if frozenset(c.years) != modal}


def load_grid_dataset(path, format: str = "auto", dataset_id: Optional[str] = None, min_days: int = 300) -> GridDataset:
    """Read a grid CSV with header ``cell_id,lat,lon,year,value`` or ``cell_id,lat,lon,date,value``.

    ``format`` is ``"yearly"``, ``"daily"`` or ``"auto"`` (decided by the
    header). Daily series are reduced to annual maxima. Row numbers in
    errors count the header as row 1.
    """
    path = Path(path)
    dataset_id = dataset_id or path.stem
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        raise EmptyDataset(f"{path}: empty file")
    header = tuple(h.strip() for h in header)
    if header == YEARLY_HEADER:
        found = "yearly"
    elif header == DAILY_HEADER:
        found = "daily"
    else:
        raise ParseError(f"{path}: header must be {','.join(YEARLY_HEADER)} or {','.join(DAILY_HEADER)}", row=1)
    if format not in ("auto", found):
        raise ParseError(f"{path}: expected {format} input, header is {found}", row=1)

    coords: dict[str, tuple] = {}
    series: dict[str, list] = {}
    seen = set()
    for n, row in enumerate(rows, start=2):
        if not row or all(not x.strip() for x in row):
            continue
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", row=n)
        cid = row[0].strip()
        if not cid:
            raise ParseError("empty cell_id", row=n)
        lat, lon = _parse_float(row[1], n), _parse_float(row[2], n)
        if not (-90.0 <= lat <= 90.0):
            raise ParseError(f"latitude {lat} outside [-90, 90]", row=n)
        if cid in coords and coords[cid] != (lat, lon):
            raise ParseError(f"cell {cid} changes coordinates", row=n)
        coords[cid] = (lat, lon)
        if found == "yearly":
            try:
                t = int(row[3].strip())
            except ValueError as exc:
                raise ParseError(f"bad year {row[3]!r}", row=n) from exc
        else:
            t = row[3].strip()
            try:
                t = _dt.date.fromisoformat(t)
            except ValueError as exc:
                raise ParseError(f"bad date {row[3]!r}", row=n) from exc
        if (cid, t) in seen:
            raise ParseError(f"duplicate entry for cell {cid} at {t}", row=n)
        seen.add((cid, t))
        series.setdefault(cid, []).append((t, _parse_float(row[4], n)))
    if not series:
        raise EmptyDataset(f"{path}: no data rows")

    flags: dict[str, str] = {}
    cells = {}
    for cid, pts in series.items():
        if found == "daily":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IncompleteYear)
                maxima = annual_maxima(pts, min_days=min_days)
            short = [m.year for m in maxima if not m.complete]
            if short:
                flags[cid] = f"incomplete years {short}"
            pts = [(m.year, m.value) for m in maxima]
        pts.sort()
        cells[cid] = Cell(cid, *coords[cid], [p[0] for p in pts], [p[1] for p in pts])
    if flags:
        warnings.warn(f"{dataset_id}: {len(flags)} cell(s) with incomplete years", IncompleteYear, stacklevel=2)
    for cid, msg in _year_set_flags(cells).items():
        flags[cid] = f"{flags[cid]}; {msg}" if cid in flags else msg
    return GridDataset(dataset_id, cells, flags)


# --- per-cell divergences -------------------------------------------------------


class CellResult(NamedTuple):
    cell_id: str
    lat: float
    lon: float
    value: Optional[DivergenceValue]
    status: str
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass(frozen=True, eq=False)
class DivergenceMap:
    spec: DivergenceSpec
    model_id: str
    reference_id: str
    cells: tuple

    @property
    def n_used(self) -> int:
        return sum(1 for c in self.cells if c.ok)

    def values(self) -> dict:
        return {c.cell_id: c.value.value for c in self.cells if c.ok}


def _cell_value(spec, f_vals, g_vals, edges, units) -> DivergenceValue:
    if spec.id in CATEGORICAL:
        fc, gc = bin_counts(f_vals, edges), bin_counts(g_vals, edges)
        if spec.id == "KL_SCOREFORM":
            return divergence(spec, fc / fc.sum(), gc, units)
        return divergence(spec, fc / fc.sum(), gc / gc.sum(), units)
    if spec.id in MOMENT_BASED:
        return divergence(spec, moment_summary(f_vals), moment_summary(g_vals), units)
    return divergence(spec, EmpiricalMeasure(f_vals), EmpiricalMeasure(g_vals), units)


def per_cell_divergence(
    model: GridDataset,
    reference: GridDataset,
    spec: DivergenceSpec,
    edges: Optional[Sequence[float]] = None,
    units: str = "data",
) -> DivergenceMap:
    """d(F_cell, Ĝ_cell) for every cell of either dataset.

    Cells present on only one side are SKIPPED (missing); a singular
    covariance in a moment-based divergence skips that cell too.
    Categorical divergences bin the yearly values with ``edges``.
    """
    if not isinstance(spec, DivergenceSpec):
        spec = DivergenceSpec.from_json(spec)
    if spec.id in CATEGORICAL and edges is None:
        raise InvalidInput(f"{spec.id} on grid data needs explicit bin edges")
    common = sorted(set(model.cells) & set(reference.cells))
    if not common:
        raise NoCommonCells(f"{model.dataset_id} and {reference.dataset_id} share no cells")

    def one(cid):
        f, g = model.cells[cid], reference.cells[cid]
        try:
            return CellResult(cid, g.lat, g.lon, _cell_value(spec, f.values, g.values, edges, units), OK)
        except SingularCovariance as exc:
            return CellResult(cid, g.lat, g.lon, None, SKIPPED, f"singular covariance: {exc}")

    n_workers = min(worker_count(), len(common))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            done = dict(zip(common, pool.map(one, common)))
    else:
        done = {cid: one(cid) for cid in common}

    out = []
    for cid in sorted(set(model.cells) | set(reference.cells)):
        if cid in done:
            out.append(done[cid])
        else:
            c = reference.cells.get(cid) or model.cells[cid]
            out.append(CellResult(cid, c.lat, c.lon, None, SKIPPED, "missing"))
    return DivergenceMap(spec, model.dataset_id, reference.dataset_id, tuple(out))


def spatial_average(dmap: DivergenceMap, coslat: bool = False) -> float:
    """Mean over non-skipped cells; ``coslat`` weights by cos(latitude) (off by default)."""
    used = [c for c in dmap.cells if c.ok]
    if not used:
        raise InvalidInput("every cell was skipped")
    vals = [c.value.value for c in used]
    if any(math.isinf(v) for v in vals):
        return math.inf
    if not coslat:
        return math.fsum(vals) / len(vals)
    w = [math.cos(math.radians(c.lat)) for c in used]
    return math.fsum(wi * v for wi, v in zip(w, vals)) / math.fsum(w)


def internal_variability_baseline(ref1: GridDataset, ref2: GridDataset, spec, edges=None, coslat=False) -> float:
    return spatial_average(per_cell_divergence(ref1, ref2, spec, edges), coslat)


# --- ranking -----------------------------------------------------------------------


class RankingRow(NamedTuple):
    model_id: str
    avg_ref1: float
    avg_ref2: float
    rank_ref1: int
    rank_ref2: int
    n_cells_used: int


@dataclass(frozen=True, eq=False)
class RankingTable:
    spec: DivergenceSpec
    ref_ids: tuple
    rows: tuple
    baseline: float
    baseline_cells: int
    maps: Mapping[str, tuple] = field(repr=False, default_factory=dict)

    @property
    def propriety_warning(self) -> bool:
        return self.spec.propriety is Propriety.IMPROPER_VARIANT

    def row(self, model_id) -> RankingRow:
        for r in self.rows:
            if r.model_id == model_id:
                return r
        raise KeyError(model_id)


def _ranks(avgs: dict) -> dict:
    order = sorted(avgs, key=lambda mid: (avgs[mid], mid))
    return {mid: i + 1 for i, mid in enumerate(order)}


def rank_models(
    models: Sequence[GridDataset],
    refs: Sequence[GridDataset],
    spec,
    edges=None,
    coslat: bool = False,
) -> RankingTable:
    """Average divergence of each model against both references, ranked per reference.

    Ties are broken by model id; +inf averages rank last.
    """
    if not isinstance(spec, DivergenceSpec):
        spec = DivergenceSpec.from_json(spec)
    if len(refs) != 2:
        raise InvalidInput("exactly two reference datasets are required")
    if not models:
        raise InvalidInput("at least one model is required")
    ids = [m.dataset_id for m in models]
    if len(set(ids)) != len(ids):
        raise InvalidInput(f"duplicate model ids in {ids}")
    r1, r2 = refs
    maps, avg1, avg2, used = {}, {}, {}, {}
    for m in models:
        m1 = per_cell_divergence(m, r1, spec, edges)
        m2 = per_cell_divergence(m, r2, spec, edges)
        maps[m.dataset_id] = (m1, m2)
        avg1[m.dataset_id] = spatial_average(m1, coslat)
        avg2[m.dataset_id] = spatial_average(m2, coslat)
        used[m.dataset_id] = min(m1.n_used, m2.n_used)
    base_map = per_cell_divergence(r1, r2, spec, edges)
    rank1, rank2 = _ranks(avg1), _ranks(avg2)
    rows = tuple(
        RankingRow(mid, avg1[mid], avg2[mid], rank1[mid], rank2[mid], used[mid])
        for mid in sorted(ids, key=lambda mid: (rank1[mid], mid))
    )
    return RankingTable(spec, (r1.dataset_id, r2.dataset_id), rows, spatial_average(base_map, coslat), base_map.n_used, maps)


# --- output ------------------------------------------------------------------------

BASELINE_ID = "__baseline__"


def _num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _json_num(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def map_csv(dmap: DivergenceMap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell_id", "lat", "lon", "value", "status"])
    for c in dmap.cells:
        status = OK if c.ok else f"{SKIPPED}:{c.reason.split(':')[0]}"
        w.writerow([c.cell_id, _num(c.lat), _num(c.lon), _num(c.value.value if c.ok else None), status])
    return buf.getvalue()


def ranking_csv(table: RankingTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model_id", "avg_ref1", "avg_ref2", "rank_ref1", "rank_ref2", "n_cells_used", "propriety_warning"])
    flag = "true" if table.propriety_warning else "false"
    for r in table.rows:
        w.writerow([r.model_id, _num(r.avg_ref1), _num(r.avg_ref2), r.rank_ref1, r.rank_ref2, r.n_cells_used, flag])
    w.writerow([BASELINE_ID, _num(table.baseline), _num(table.baseline), "", "", table.baseline_cells, flag])
    return buf.getvalue()


def scatter_json(table: RankingTable) -> str:
    payload = {
        "divergence": table.spec.to_json(),
        "propriety": table.spec.propriety.value,
        "propriety_warning": table.propriety_warning,
        "references": list(table.ref_ids),
        "baseline": {"value": _json_num(table.baseline), "n_cells_used": table.baseline_cells},
        "points": [
            {"model_id": r.model_id, "x": _json_num(r.avg_ref1), "y": _json_num(r.avg_ref2)} for r in table.rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_outputs(table: RankingTable, out_dir) -> list[Path]:
    """Ranking CSV, scatter JSON and one map CSV per (model, reference); returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, text):
        p = out / name
        p.write_text(text, encoding="utf-8", newline="")
        written.append(p)

    put("ranking.csv", ranking_csv(table))
    put("scatter.json", scatter_json(table))
    for mid in sorted(table.maps):
        for ref_id, dmap in zip(table.ref_ids, table.maps[mid]):
            put(f"map_{mid}_vs_{ref_id}.csv", map_csv(dmap))
    return written

"""Observed metro panel: point-in-time homeless counts, census populations, rent index.

Each metro carries a baseline year (used only for prior elicitation) followed by
the modeled years.  Raw continuum-of-care counts and county-level population /
rent series can be aggregated into metro-level synthetic continuums with a
geographic mapping: counts add across continuums, populations add across
counties, and the rent index is population-weighted across counties with
weights recomputed every year.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

import numpy as np

__all__ = [
    "PanelError",
    "MetroSeries",
    "Panel",
    "GeoMapping",
    "aggregate_geography",
    "delta_zri",
    "load_panel",
    "save_panel",
    "load_geo_file",
    "bundled_geo_mapping",
]

PANEL_COLUMNS = [
    "metro_id",
    "year",
    "count_total",
    "count_sheltered",
    "count_unsheltered",
    "population",
    "zri",
]

GEO_COLUMNS = ["kind", "unit_id", "metro_id", "year", "population", "zri", "count"]


class PanelError(ValueError):
    """Raised when panel or geography inputs violate the schema or an invariant."""


@dataclass(frozen=True)
class MetroSeries:
    """One metro's observed series over the baseline year plus T modeled years.

    The sheltered/unsheltered split is recorded for the baseline year only;
    it seeds the count-accuracy prior and is excluded from the likelihood.
    """

    metro_id: str
    years: np.ndarray        # (T+1,) consecutive ints; years[0] is the baseline
    count_total: np.ndarray  # (T+1,) persons counted
    count_sheltered0: int
    count_unsheltered0: int
    population: np.ndarray   # (T+1,) census intercensal estimates
    zri: np.ndarray          # (T+1,) dollars/month

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64)
        counts = np.asarray(self.count_total, dtype=np.int64)
        pop = np.asarray(self.population, dtype=np.int64)
        zri = np.asarray(self.zri, dtype=np.float64)
        if not (len(years) == len(counts) == len(pop) == len(zri)):
            raise PanelError(f"{self.metro_id}: series lengths differ")
        if len(years) < 2:
            raise PanelError(f"{self.metro_id}: need a baseline year plus at least one modeled year")
        if np.any(np.diff(years) != 1):
            raise PanelError(f"{self.metro_id}: years must be consecutive, got {years.tolist()}")
        if np.any(counts < 0) or np.any(pop < 0):
            raise PanelError(f"{self.metro_id}: negative count or population")
        if np.any(counts > pop):
            bad = int(years[np.argmax(counts > pop)])
            raise PanelError(f"{self.metro_id}: count exceeds population in year {bad}")
        if np.any(zri <= 0):
            bad = int(years[np.argmax(zri <= 0)])
            raise PanelError(f"{self.metro_id}: nonpositive rent index in year {bad}")
        if self.count_sheltered0 < 0 or self.count_unsheltered0 < 0:
            raise PanelError(f"{self.metro_id}: negative baseline sheltered/unsheltered count")
        if self.count_sheltered0 + self.count_unsheltered0 != counts[0]:
            raise PanelError(
                f"{self.metro_id}: baseline sheltered + unsheltered "
                f"({self.count_sheltered0} + {self.count_unsheltered0}) != total {counts[0]}"
            )
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "count_total", counts)
        object.__setattr__(self, "population", pop)
        object.__setattr__(self, "zri", zri)

    @property
    def n_years(self) -> int:
        """Number of modeled years T (baseline excluded)."""
        return len(self.years) - 1

    @property
    def baseline_year(self) -> int:
        return int(self.years[0])


@dataclass(frozen=True)
class Panel:
    """Ordered collection of metro series sharing one year range."""

    metros: tuple[MetroSeries, ...]

    def __post_init__(self):
        if not self.metros:
            raise PanelError("panel has no metros")
        object.__setattr__(self, "metros", tuple(self.metros))
        ref = self.metros[0].years
        for m in self.metros[1:]:
            if not np.array_equal(m.years, ref):
                raise PanelError(f"{m.metro_id}: year range differs from {self.metros[0].metro_id}")
        ids = [m.metro_id for m in self.metros]
        if len(set(ids)) != len(ids):
            raise PanelError("duplicate metro_id in panel")

    @property
    def n_metros(self) -> int:
        return len(self.metros)

    @property
    def n_years(self) -> int:
        return self.metros[0].n_years

    @property
    def years(self) -> np.ndarray:
        return self.metros[0].years

    @property
    def metro_ids(self) -> list[str]:
        return [m.metro_id for m in self.metros]

    def metro(self, metro_id: str) -> MetroSeries:
        for m in self.metros:
            if m.metro_id == metro_id:
                return m
        raise KeyError(metro_id)


@dataclass(frozen=True)
class GeoMapping:
    """Assignment of continuums (count reporters) and counties (population/rent
    reporters) to metros.  Every unit maps to exactly one metro."""

    continuum_to_metro: Mapping[str, str]
    county_to_metro: Mapping[str, str]

    def __post_init__(self):
        metros_with_continuum = set(self.continuum_to_metro.values())
        metros_with_county = set(self.county_to_metro.values())
        if metros_with_continuum != metros_with_county:
            odd = metros_with_continuum.symmetric_difference(metros_with_county)
            raise PanelError(f"metros missing a continuum or a county: {sorted(odd)}")

    @property
    def metro_ids(self) -> list[str]:
        return sorted(set(self.continuum_to_metro.values()))


def delta_zri(series: MetroSeries) -> np.ndarray:
    """Year-over-year relative change in the rent index, length T.

    The first entry compares the first modeled year against the baseline year.
    """
    zri = np.asarray(series.zri, dtype=float)
    if np.any(zri[:-1] <= 0):
        raise PanelError(f"{series.metro_id}: nonpositive prior-year rent index")
    return np.diff(zri) / zri[:-1]


def aggregate_geography(
    raw_continuum_counts: Mapping[tuple[str, int], int],
    raw_county_populations: Mapping[tuple[str, int], int],
    raw_county_zri: Mapping[tuple[str, int], float],
    mapping: GeoMapping,
    baseline_splits: Mapping[str, tuple[int, int]] | None = None,
) -> Panel:
    """Aggregate unit-level series into metro-level synthetic continuums.

    Counts add across a metro's continuums; populations add across its
    counties; the metro rent index is the population-weighted mean of county
    rent indexes with weights recomputed per year.

    ``baseline_splits`` maps metro_id to a (sheltered, unsheltered) split of
    the baseline-year count.  Geography files carry no split, so without one
    the whole baseline count is recorded as sheltered, which makes the
    baseline count-accuracy prior degenerate at 1; supply the split (e.g. via
    a panel file) for any analysis that uses count-accuracy priors.
    """
    for unit, _ in raw_continuum_counts:
        if unit not in mapping.continuum_to_metro:
            raise PanelError(f"unmapped continuum id: {unit!r}")
    for unit, _ in raw_county_populations:
        if unit not in mapping.county_to_metro:
            raise PanelError(f"unmapped county id: {unit!r}")
    for unit, _ in raw_county_zri:
        if unit not in mapping.county_to_metro:
            raise PanelError(f"unmapped county id: {unit!r}")

    years = sorted({y for _, y in raw_continuum_counts})
    if not years:
        raise PanelError("no continuum count data")

    # units with any data at all; each must then report every year
    continuums = {u for u, _ in raw_continuum_counts}
    counties = {u for u, _ in raw_county_populations} | {u for u, _ in raw_county_zri}

    series = []
    for metro_id in mapping.metro_ids:
        m_continuums = sorted(u for u in continuums if mapping.continuum_to_metro[u] == metro_id)
        m_counties = sorted(u for u in counties if mapping.county_to_metro[u] == metro_id)
        if not m_continuums or not m_counties:
            raise PanelError(f"{metro_id}: no continuum or county data present")
        counts, pops, zris = [], [], []
        for year in years:
            total = 0
            for u in m_continuums:
                if (u, year) not in raw_continuum_counts:
                    raise PanelError(f"continuum {u!r}: missing year {year}")
                total += int(raw_continuum_counts[(u, year)])
            pop_total = 0
            weighted = 0.0
            for u in m_counties:
                if (u, year) not in raw_county_populations:
                    raise PanelError(f"county {u!r}: missing population for year {year}")
                if (u, year) not in raw_county_zri:
                    raise PanelError(f"county {u!r}: missing rent index for year {year}")
                p = int(raw_county_populations[(u, year)])
                pop_total += p
                weighted += p * float(raw_county_zri[(u, year)])
            if pop_total <= 0:
                raise PanelError(f"{metro_id}: zero aggregate population in year {year}")
            counts.append(total)
            pops.append(pop_total)
            zris.append(weighted / pop_total)
        if baseline_splits is not None and metro_id in baseline_splits:
            sheltered, unsheltered = baseline_splits[metro_id]
        else:
            sheltered, unsheltered = counts[0], 0
        series.append(
            MetroSeries(
                metro_id=metro_id,
                years=np.array(years),
                count_total=np.array(counts),
                count_sheltered0=int(sheltered),
                count_unsheltered0=int(unsheltered),
                population=np.array(pops),
                zri=np.array(zris),
            )
        )
    return Panel(metros=tuple(series))


def _parse_int(value: str, row: int, column: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise PanelError(f"row {row}: column {column!r} is not an integer: {value!r}") from None


def _parse_float(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise PanelError(f"row {row}: column {column!r} is not a number: {value!r}") from None


def load_panel(panel_path, geo_path=None) -> Panel:
    """Load and validate a metro panel from CSV.

    When ``geo_path`` is given, the metro count/population/rent series are
    built by :func:`aggregate_geography` from the unit-level geography file;
    the panel file then only contributes the baseline sheltered/unsheltered
    splits.  Schema and invariant violations are reported with row numbers.
    """
    rows_by_metro: dict[str, list[tuple[int, dict]]] = {}
    with open(panel_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != PANEL_COLUMNS:
            raise PanelError(
                f"panel file must have columns {PANEL_COLUMNS}, got {reader.fieldnames}"
            )
        for idx, row in enumerate(reader, start=2):  # header is row 1
            metro = row["metro_id"].strip()
            if not metro:
                raise PanelError(f"row {idx}: empty metro_id")
            rows_by_metro.setdefault(metro, []).append((idx, row))
    if not rows_by_metro:
        raise PanelError("panel file contains no data rows")

    series = []
    for metro, rows in rows_by_metro.items():
        rows.sort(key=lambda item: _parse_int(item[1]["year"], item[0], "year"))
        years, counts, pops, zris = [], [], [], []
        sheltered0 = unsheltered0 = None
        baseline_row = rows[0][0]
        for idx, row in rows:
            year = _parse_int(row["year"], idx, "year")
            count = _parse_int(row["count_total"], idx, "count_total")
            pop = _parse_int(row["population"], idx, "population")
            zri = _parse_float(row["zri"], idx, "zri")
            if count > pop:
                raise PanelError(
                    f"row {idx}: count_total {count} exceeds population {pop} for {metro}"
                )
            if zri <= 0:
                raise PanelError(f"row {idx}: nonpositive zri for {metro}")
            if not years:  # baseline row: split is required
                if not row["count_sheltered"].strip() or not row["count_unsheltered"].strip():
                    raise PanelError(
                        f"row {idx}: baseline year for {metro} needs count_sheltered "
                        "and count_unsheltered"
                    )
                sheltered0 = _parse_int(row["count_sheltered"], idx, "count_sheltered")
                unsheltered0 = _parse_int(row["count_unsheltered"], idx, "count_unsheltered")
                baseline_row = idx
            years.append(year)
            counts.append(count)
            pops.append(pop)
            zris.append(zri)
        try:
            series.append(
                MetroSeries(
                    metro_id=metro,
                    years=np.array(years),
                    count_total=np.array(counts),
                    count_sheltered0=sheltered0,
                    count_unsheltered0=unsheltered0,
                    population=np.array(pops),
                    zri=np.array(zris),
                )
            )
        except PanelError as err:
            raise PanelError(f"rows {baseline_row}..{rows[-1][0]}: {err}") from None

    panel = Panel(metros=tuple(series))
    if geo_path is None:
        return panel

    mapping, counts, pops, zris = load_geo_file(geo_path)
    splits = {
        m.metro_id: (m.count_sheltered0, m.count_unsheltered0) for m in panel.metros
    }
    return aggregate_geography(counts, pops, zris, mapping, baseline_splits=splits)


def save_panel(panel: Panel, path) -> None:
    """Write a panel to CSV in the schema accepted by :func:`load_panel`."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PANEL_COLUMNS)
        for m in panel.metros:
            for k, year in enumerate(m.years):
                sheltered = str(m.count_sheltered0) if k == 0 else ""
                unsheltered = str(m.count_unsheltered0) if k == 0 else ""
                writer.writerow(
                    [
                        m.metro_id,
                        int(year),
                        int(m.count_total[k]),
                        sheltered,
                        unsheltered,
                        int(m.population[k]),
                        repr(float(m.zri[k])),
                    ]
                )


def load_geo_file(path):
    """Parse a geography CSV into (mapping, continuum counts, county populations,
    county rent indexes).

    Rows with kind ``continuum`` carry counts; rows with kind ``county`` carry
    population and rent index.  A unit assigned to two different metros is
    rejected.
    """
    continuum_to_metro: dict[str, str] = {}
    county_to_metro: dict[str, str] = {}
    counts: dict[tuple[str, int], int] = {}
    pops: dict[tuple[str, int], int] = {}
    zris: dict[tuple[str, int], float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != GEO_COLUMNS:
            raise PanelError(f"geo file must have columns {GEO_COLUMNS}, got {reader.fieldnames}")
        for idx, row in enumerate(reader, start=2):
            kind = row["kind"].strip()
            unit = row["unit_id"].strip()
            metro = row["metro_id"].strip()
            if kind not in ("continuum", "county"):
                raise PanelError(f"row {idx}: kind must be continuum or county, got {kind!r}")
            if not unit or not metro:
                raise PanelError(f"row {idx}: empty unit_id or metro_id")
            assignments = continuum_to_metro if kind == "continuum" else county_to_metro
            if assignments.setdefault(unit, metro) != metro:
                raise PanelError(f"row {idx}: unit {unit!r} assigned to more than one metro")
            if not row["year"].strip():
                continue  # mapping-only row
            year = _parse_int(row["year"], idx, "year")
            if kind == "continuum":
                counts[(unit, year)] = _parse_int(row["count"], idx, "count")
            else:
                pops[(unit, year)] = _parse_int(row["population"], idx, "population")
                zris[(unit, year)] = _parse_float(row["zri"], idx, "zri")
    mapping = GeoMapping(continuum_to_metro=continuum_to_metro, county_to_metro=county_to_metro)
    return mapping, counts, pops, zris


def bundled_geo_mapping() -> GeoMapping:
    """The shipped continuum/county-to-metro assignment for the 25 largest metros."""
    continuum_to_metro: dict[str, str] = {}
    county_to_metro: dict[str, str] = {}
    ref = resources.files("countgap.data").joinpath("metro_geography.csv")
    with ref.open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if row["kind"] == "continuum":
                continuum_to_metro[row["unit_id"]] = row["metro_id"]
            else:
                county_to_metro[row["unit_id"]] = row["metro_id"]
    return GeoMapping(continuum_to_metro=continuum_to_metro, county_to_metro=county_to_metro)

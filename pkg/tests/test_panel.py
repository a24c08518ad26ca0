"""Panel construction, geographic aggregation, rent-change computation, CSV round trips."""

from __future__ import annotations

import numpy as np
import pytest

import countgap as cg
from countgap.panel import load_geo_file

from conftest import make_series


# --- MetroSeries / Panel invariants ---------------------------------------

def test_series_validates_count_le_population():
    with pytest.raises(cg.PanelError, match="exceeds population"):
        make_series(counts=(1000, 600_000, 1150, 1200))


def test_series_validates_baseline_split():
    with pytest.raises(cg.PanelError, match="sheltered"):
        make_series(sheltered0=100, unsheltered0=100)  # != 1000


def test_series_rejects_year_gaps():
    with pytest.raises(cg.PanelError, match="consecutive"):
        make_series(years=(2010, 2011, 2013, 2014))


def test_series_rejects_nonpositive_zri():
    with pytest.raises(cg.PanelError, match="rent index"):
        make_series(zris=(1500.0, 0.0, 1620.0, 1700.0))


def test_panel_requires_identical_year_ranges():
    a = make_series("a")
    b = make_series("b", years=(2011, 2012, 2013, 2014))
    with pytest.raises(cg.PanelError, match="year range"):
        cg.Panel(metros=(a, b))


# --- delta_zri -------------------------------------------------------------

def test_delta_zri_constant_is_zero():
    s = make_series(zris=(1500.0, 1500.0, 1500.0, 1500.0))
    assert np.allclose(cg.delta_zri(s), 0.0)


def test_delta_zri_matches_published_example():
    # 1534 -> 1634 is a rise of 100/1534, about 6.5%
    s = make_series(zris=(1534.0, 1634.0, 1634.0, 1634.0))
    d = cg.delta_zri(s)
    assert d[0] == pytest.approx(100.0 / 1534.0)
    assert d[0] == pytest.approx(0.0652, abs=5e-5)


def test_delta_zri_exact_arithmetic():
    s = make_series(zris=(1000.0, 900.0, 990.0, 990.0))
    d = cg.delta_zri(s)
    assert d[0] == pytest.approx(-0.10)
    assert d[1] == pytest.approx(0.10)


def test_delta_zri_scale_invariance():
    s1 = make_series(zris=(1100.0, 1200.0, 1260.0, 1400.0))
    s2 = make_series(zris=(3.7 * 1100.0, 3.7 * 1200.0, 3.7 * 1260.0, 3.7 * 1400.0))
    assert np.allclose(cg.delta_zri(s1), cg.delta_zri(s2))


# --- aggregate_geography ----------------------------------------------------

def _one_metro_mapping():
    return cg.GeoMapping(
        continuum_to_metro={"cont-1": "m"},
        county_to_metro={"cty-1": "m"},
    )


def test_aggregate_passthrough_single_units():
    years = [2010, 2011]
    counts = {("cont-1", y): c for y, c in zip(years, (120, 130))}
    pops = {("cty-1", y): p for y, p in zip(years, (10_000, 10_400))}
    zris = {("cty-1", y): z for y, z in zip(years, (1200.0, 1250.0))}
    panel = cg.aggregate_geography(counts, pops, zris, _one_metro_mapping())
    m = panel.metros[0]
    assert m.count_total.tolist() == [120, 130]
    assert m.population.tolist() == [10_000, 10_400]
    assert np.allclose(m.zri, [1200.0, 1250.0])


def test_aggregate_equal_weight_zri_average():
    mapping = cg.GeoMapping(
        continuum_to_metro={"cont-1": "m"},
        county_to_metro={"cty-1": "m", "cty-2": "m"},
    )
    counts = {("cont-1", 2010): 50}
    pops = {("cty-1", 2010): 5000, ("cty-2", 2010): 5000}
    zris = {("cty-1", 2010): 1000.0, ("cty-2", 2010): 2000.0}
    # a panel needs two years; replicate
    for y in (2011,):
        counts[("cont-1", y)] = 50
        pops[("cty-1", y)] = 5000
        pops[("cty-2", y)] = 5000
        zris[("cty-1", y)] = 1000.0
        zris[("cty-2", y)] = 2000.0
    panel = cg.aggregate_geography(counts, pops, zris, mapping)
    assert np.allclose(panel.metros[0].zri, 1500.0)


def test_aggregate_seven_county_population_sum():
    # a metro spanning seven counties aggregates the seven county populations
    mapping = cg.GeoMapping(
        continuum_to_metro={"cont-1": "m"},
        county_to_metro={f"cty-{k}": "m" for k in range(7)},
    )
    rng = np.random.default_rng(3)
    county_pops = rng.integers(50_000, 700_000, size=7)
    counts, pops, zris = {}, {}, {}
    for y in (2010, 2011):
        counts[("cont-1", y)] = 4000
        for k in range(7):
            pops[(f"cty-{k}", y)] = int(county_pops[k])
            zris[(f"cty-{k}", y)] = 1000.0 + 100.0 * k
    panel = cg.aggregate_geography(counts, pops, zris, mapping)
    assert panel.metros[0].population[0] == county_pops.sum()


def test_aggregate_rejects_unmapped_unit():
    years = [2010, 2011]
    counts = {("cont-UNKNOWN", y): 10 for y in years}
    pops = {("cty-1", y): 1000 for y in years}
    zris = {("cty-1", y): 1000.0 for y in years}
    with pytest.raises(cg.PanelError, match="cont-UNKNOWN"):
        cg.aggregate_geography(counts, pops, zris, _one_metro_mapping())


def test_aggregate_rejects_missing_year():
    counts = {("cont-1", 2010): 10, ("cont-1", 2011): 12}
    pops = {("cty-1", 2010): 1000}  # 2011 missing
    zris = {("cty-1", 2010): 1000.0, ("cty-1", 2011): 1010.0}
    with pytest.raises(cg.PanelError, match="missing population for year 2011"):
        cg.aggregate_geography(counts, pops, zris, _one_metro_mapping())


def test_aggregate_additivity():
    # aggregating a union of county/continuum groups equals aggregating the
    # groups separately and combining: counts and populations add, the rent
    # index combines population-weighted
    rng = np.random.default_rng(11)
    years = [2010, 2011, 2012]
    units_a = ["a1", "a2"]
    units_b = ["b1"]
    counts, pops, zris = {}, {}, {}
    for u in units_a + units_b:
        for y in years:
            counts[(f"cont-{u}", y)] = int(rng.integers(50, 500))
            pops[(f"cty-{u}", y)] = int(rng.integers(10_000, 90_000))
            zris[(f"cty-{u}", y)] = float(rng.uniform(900, 2500))

    def build(units, metro):
        mapping = cg.GeoMapping(
            continuum_to_metro={f"cont-{u}": metro for u in units},
            county_to_metro={f"cty-{u}": metro for u in units},
        )
        sub_counts = {k: v for k, v in counts.items() if k[0].removeprefix("cont-") in units}
        sub_pops = {k: v for k, v in pops.items() if k[0].removeprefix("cty-") in units}
        sub_zris = {k: v for k, v in zris.items() if k[0].removeprefix("cty-") in units}
        return cg.aggregate_geography(sub_counts, sub_pops, sub_zris, mapping).metros[0]

    union = build(units_a + units_b, "m")
    part_a = build(units_a, "m")
    part_b = build(units_b, "m")
    assert np.array_equal(union.count_total, part_a.count_total + part_b.count_total)
    assert np.array_equal(union.population, part_a.population + part_b.population)
    expected_zri = (
        part_a.population * part_a.zri + part_b.population * part_b.zri
    ) / (part_a.population + part_b.population)
    assert np.allclose(union.zri, expected_zri)


# --- load/save -------------------------------------------------------------

def test_load_panel_round_trip(tmp_path, tiny_panel):
    path = tmp_path / "panel.csv"
    cg.save_panel(tiny_panel, path)
    loaded = cg.load_panel(path)
    assert loaded.metro_ids == tiny_panel.metro_ids
    for a, b in zip(loaded.metros, tiny_panel.metros):
        assert np.array_equal(a.years, b.years)
        assert np.array_equal(a.count_total, b.count_total)
        assert np.array_equal(a.population, b.population)
        assert np.allclose(a.zri, b.zri)
        assert a.count_sheltered0 == b.count_sheltered0
        assert a.count_unsheltered0 == b.count_unsheltered0


def test_load_panel_two_metros(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text(
        "metro_id,year,count_total,count_sheltered,count_unsheltered,population,zri\n"
        "a,2010,100,70,30,10000,1200\n"
        "a,2011,110,,,10100,1250\n"
        "b,2010,200,150,50,20000,1400\n"
        "b,2011,190,,,20300,1420\n"
    )
    panel = cg.load_panel(path)
    assert panel.n_metros == 2
    assert panel.n_years == 1


def test_load_panel_names_bad_row(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text(
        "metro_id,year,count_total,count_sheltered,count_unsheltered,population,zri\n"
        "a,2010,100,70,30,10000,1200\n"
        "a,2011,99999,,,10100,1250\n"
    )
    with pytest.raises(cg.PanelError, match="row 3"):
        cg.load_panel(path)


def test_load_panel_baseline_year_separated(tmp_path):
    # counts for seven calendar years give T = 6 modeled years
    rows = ["metro_id,year,count_total,count_sheltered,count_unsheltered,population,zri"]
    rows.append("a,2010,100,70,30,10000,1200")
    for k, y in enumerate(range(2011, 2017)):
        rows.append(f"a,{y},{100 + k},,,{10000 + 10 * k},{1200 + 5 * k}")
    path = tmp_path / "panel.csv"
    path.write_text("\n".join(rows) + "\n")
    panel = cg.load_panel(path)
    assert panel.n_years == 6
    assert panel.metros[0].baseline_year == 2010


def test_load_panel_with_geo_file(tmp_path):
    panel_path = tmp_path / "panel.csv"
    panel_path.write_text(
        "metro_id,year,count_total,count_sheltered,count_unsheltered,population,zri\n"
        "m,2010,50,40,10,10000,1100\n"
        "m,2011,55,,,10100,1150\n"
    )
    geo_path = tmp_path / "geo.csv"
    geo_path.write_text(
        "kind,unit_id,metro_id,year,population,zri,count\n"
        "continuum,c1,m,2010,,,30\n"
        "continuum,c2,m,2010,,,20\n"
        "continuum,c1,m,2011,,,33\n"
        "continuum,c2,m,2011,,,22\n"
        "county,k1,m,2010,6000,1000,\n"
        "county,k2,m,2010,4000,1300,\n"
        "county,k1,m,2011,6100,1050,\n"
        "county,k2,m,2011,4100,1330,\n"
    )
    panel = cg.load_panel(panel_path, geo_path)
    m = panel.metros[0]
    assert m.count_total.tolist() == [50, 55]
    assert m.population.tolist() == [10_000, 10_200]
    assert m.zri[0] == pytest.approx((6000 * 1000 + 4000 * 1300) / 10_000)
    # baseline split came from the panel file
    assert (m.count_sheltered0, m.count_unsheltered0) == (40, 10)


def test_geo_file_rejects_conflicting_assignment(tmp_path):
    geo_path = tmp_path / "geo.csv"
    geo_path.write_text(
        "kind,unit_id,metro_id,year,population,zri,count\n"
        "continuum,c1,m,2010,,,30\n"
        "continuum,c1,OTHER,2011,,,33\n"
    )
    with pytest.raises(cg.PanelError, match="more than one metro"):
        load_geo_file(geo_path)


def test_bundled_geography_mapping():
    mapping = cg.bundled_geo_mapping()
    assert len(mapping.metro_ids) == 25
    assert mapping.continuum_to_metro["WA-500"] == "Seattle"
    # the Denver metro spans seven counties
    denver = [c for c, m in mapping.county_to_metro.items() if m == "Denver"]
    assert len(denver) == 7

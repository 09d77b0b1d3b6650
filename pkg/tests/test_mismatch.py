import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import covers, exists_cover_of_size

from mbshape.mismatch import (
    PmfLookupTable,
    assignment_feasible,
    build_gain_map,
    candidate_mask,
    coverage_bounds,
    coverage_interval,
    greedy_cover,
    quantize_pmfs,
    snr_grid,
)


@pytest.fixture(scope="module")
def small():
    return build_gain_map(8, 10.0, 20.0, 0.5)


def test_snr_grid():
    g = snr_grid(5.0, 25.0, 0.1)
    assert len(g) == 201 and g[0] == 5.0 and g[-1] == 25.0
    assert g[91] == 14.1
    assert snr_grid(7.0, 7.0, 0.1).tolist() == [7.0]


@pytest.mark.parametrize("lo, hi, step", [(5, 25, 0.0), (5, 25, -0.1), (25, 5, 0.1), (5, 25, 0.3)])
def test_snr_grid_rejects(lo, hi, step):
    with pytest.raises(ValueError):
        snr_grid(lo, hi, step)


def test_penalty_nonnegative_with_zero_diagonal(gmap8):
    p = gmap8.penalty_db
    live = ~gmap8.saturated
    assert np.all(p[live] >= -1e-6)
    np.testing.assert_array_equal(np.diag(p)[live], 0.0)
    assert gmap8.saturated.sum() == 2  # 24.9 and 25.0 dB


def test_row_minimum_on_diagonal(gmap8):
    p = gmap8.penalty_db
    for i in np.flatnonzero(~gmap8.saturated):
        assert np.argmin(p[i]) == i or p[i].min() >= -1e-9


def test_penalty_grows_away_from_diagonal(gmap8):
    p = gmap8.penalty_db
    for i in np.flatnonzero(~gmap8.saturated):
        assert np.all(np.diff(p[i, i:]) >= -1e-9)
        assert np.all(np.diff(p[i, : i + 1][::-1]) >= -1e-9)


def test_coverage_huge_threshold_is_full_range(gmap8):
    assert coverage_interval(gmap8, 15.0, 100.0) == (5.0, 25.0)


def test_coverage_examples(gmap8):
    lo, hi = coverage_interval(gmap8, 18.0, 0.1)
    assert lo <= 16.2 + 1e-9 and hi == pytest.approx(19.3, abs=0.3)
    lo, hi = coverage_interval(gmap8, 24.0, 0.1)
    assert lo <= 22.2 + 1e-9 and hi == 25.0


def test_coverage_contains_diagonal(gmap8):
    b = coverage_bounds(gmap8, 0.1)
    idx = np.arange(len(b))
    assert np.all((b[:, 0] <= idx) & (idx <= b[:, 1]))


def test_coverage_rejects_bad_threshold(gmap8):
    with pytest.raises(ValueError):
        coverage_interval(gmap8, 18.0, 0.0)
    with pytest.raises(ValueError):
        coverage_interval(gmap8, 18.05, 0.1)


@pytest.mark.parametrize("threshold", [0.05, 0.1, 0.2, 0.3, 0.5])
def test_table_tiles_and_is_feasible(gmap8, threshold):
    table = quantize_pmfs(gmap8, threshold)
    e = table.entries
    assert e[0].channel_snr_lo_db == 5.0 and e[-1].channel_snr_hi_db == 25.0
    for a, b in zip(e, e[1:]):
        assert b.channel_snr_lo_db == pytest.approx(a.channel_snr_hi_db + 0.1, abs=1e-9)
    p = gmap8.coverage_penalty()
    for x in e:
        i0, i1, j = gmap8.index(x.channel_snr_lo_db), gmap8.index(x.channel_snr_hi_db), gmap8.index(x.shaping_snr_db)
        assert np.all(p[i0 : i1 + 1, j] <= threshold)


@pytest.mark.parametrize("threshold", [0.1, 0.2, 0.3])
def test_table_is_minimal(gmap8, threshold):
    table = quantize_pmfs(gmap8, threshold)
    bounds = coverage_bounds(gmap8, threshold)
    assert not exists_cover_of_size(bounds, len(bounds), len(table) - 1)


def test_table_size_monotone_in_threshold(gmap8):
    sizes = [len(quantize_pmfs(gmap8, t)) for t in (0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0)]
    assert sizes == sorted(sizes, reverse=True)


def test_candidate_step_none_equals_full_grid_size(gmap8):
    for t in (0.1, 0.2, 0.3):
        assert len(quantize_pmfs(gmap8, t, None)) == len(quantize_pmfs(gmap8, t))


def test_lookup(gmap8):
    table = quantize_pmfs(gmap8, 0.1)
    for e in table.entries:
        mid = 0.5 * (e.channel_snr_lo_db + e.channel_snr_hi_db)
        assert table.lookup(mid) is e
    assert table.lookup(30.0) is table.entries[-1]


def test_table_json_round_trip(gmap8):
    table = quantize_pmfs(gmap8, 0.2)
    rows = json.loads(table.to_json())
    assert [r["input"] for r in rows] == ["a", "b", "c"]
    back = PmfLookupTable.from_json(table.to_json(), 0.2)
    assert back == table
    for e in back.entries:
        c = e.constellation()
        assert float(np.dot(c.pmf, c.levels**2)) == pytest.approx(1.0, rel=1e-12)


def test_assignment_feasible(gmap8):
    assert assignment_feasible(gmap8, [14.5, 18.0, 21.0, 24.0], 0.1)
    assert not assignment_feasible(gmap8, [14.5, 24.0], 0.1)


def test_greedy_cover_small_cases():
    b = np.array([[0, 1], [0, 3], [2, 4], [3, 5], [5, 5], [4, 5]])
    cover = greedy_cover(b)
    assert [(s, e) for s, e, _ in cover] == [(0, 3), (4, 5)]
    with pytest.raises(ValueError):
        greedy_cover(np.array([[0, 0], [2, 2], [2, 2]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.data())
def test_greedy_cover_optimal_against_exhaustive(n, data):
    bounds = []
    for j in range(n):
        lo = data.draw(st.integers(0, j))
        hi = data.draw(st.integers(j, n - 1))
        bounds.append((lo, hi))
    bounds = np.array(bounds)
    cover = greedy_cover(bounds)
    assert covers([tuple(bounds[c]) for _, _, c in cover], n)
    assert not exists_cover_of_size(bounds, n, len(cover) - 1)


def test_candidate_mask():
    g = snr_grid(5.0, 6.0, 0.1)
    assert g[candidate_mask(g, 0.5)].tolist() == [5.0, 5.5, 6.0]
    assert candidate_mask(g, None).all()
    assert not candidate_mask(np.array([5.1, 5.2]), 0.5).any()
    with pytest.raises(ValueError):
        candidate_mask(g, 0.0)


def test_csv_writers(small, tmp_path):
    small.write_matrix_csv(tmp_path / "m.csv")
    small.write_long_csv(tmp_path / "l.csv")
    rows = list(csv.reader(open(tmp_path / "m.csv")))
    assert rows[0][0] == "channel_snr_db"
    assert [float(v) for v in rows[0][1:]] == small.grid_db.tolist()
    np.testing.assert_array_equal(np.array([r[1:] for r in rows[1:]], dtype=float), small.penalty_db)
    long_rows = list(csv.reader(open(tmp_path / "l.csv")))
    assert long_rows[0] == ["channel", "shaping", "penalty"]
    assert len(long_rows) == 1 + len(small.grid_db) ** 2


def test_csv_marks_saturation(tmp_path):
    g = build_gain_map(4, 30.0, 31.0, 1.0)
    g.write_long_csv(tmp_path / "l.csv")
    rows = list(csv.reader(open(tmp_path / "l.csv")))[1:]
    assert all(r[2] == "saturated" for r in rows)


def test_workers_do_not_change_output(small):
    par = build_gain_map(8, 10.0, 20.0, 0.5, workers=2)
    np.testing.assert_array_equal(par.gain_db, small.gain_db)
    np.testing.assert_array_equal(par.pmfs, small.pmfs)


def test_one_point_grid():
    g = build_gain_map(8, 15.0, 15.0, 0.1)
    assert g.penalty_db.shape == (1, 1) and g.penalty_db[0, 0] == 0.0
    t = quantize_pmfs(g, 0.1)
    assert len(t) == 1 and t.entries[0].shaping_snr_db == 15.0


def test_pmfs_are_matched_solutions(small):
    from mbshape.shaping import optimize_shaping

    j = small.index(15.0)
    np.testing.assert_array_equal(small.pmfs[j], optimize_shaping(8, 15.0).pmf)
    assert not math.isnan(small.matched_gain_db[j])

import pytest

from actnet.complexity import (
    DEFAULT_GRID,
    complexity_rows,
    flop_doubling_ratios,
    grid_specs,
    layout_length,
    rows_to_csv,
)
from actnet.network import param_count


class TestGrid:
    def test_default_grid_has_27_points(self):
        specs = grid_specs(DEFAULT_GRID["L"], DEFAULT_GRID["m"], DEFAULT_GRID["N"])
        assert len(specs) == 27
        assert all(layout_length(s) == param_count(s) for s in specs)

    def test_rows_without_timing(self):
        rows = complexity_rows(grid_specs([1], [4, 8], [2]), timing=False)
        assert [r["m"] for r in rows] == [4, 8] and rows[0]["ms_per_forward"] is None
        assert rows_to_csv(rows).splitlines()[1].endswith(",")

    def test_doubling_ratios(self):
        rows = complexity_rows(grid_specs([1], [64, 128], [4]), timing=False)
        [(key, r)] = flop_doubling_ratios(rows)
        assert key == (1, 64, 4) and r == pytest.approx(4.0, rel=0.1)

    def test_timing_is_positive(self):
        rows = complexity_rows(grid_specs([1], [4], [2]), n_points=50, repeats=1)
        assert rows[0]["ms_per_forward"] > 0

import csv
import io

import pytest

from orderthresh import tables
from orderthresh.published import PUBLISHED


class TestKGrid:
    @pytest.mark.parametrize("n,expected", [
        (50, [1, 3, 7, 7, 13, 18, 30, 50]),
        (100, [2, 4, 9, 10, 21, 31, 56, 100]),
        (200, [2, 5, 12, 14, 34, 53, 103, 200]),
        (500, [2, 6, 15, 22, 62, 105, 229, 500]),
        (1000, [2, 6, 18, 31, 100, 177, 421, 1000]),
    ])
    def test_values(self, n, expected):
        assert tables.k_grid(n) == expected

    def test_labels(self):
        assert len(tables.K_GRID_LABELS) == 8 and tables.K_GRID_LABELS[-1] == "n"


class TestPublished:
    def test_spot_values(self):
        assert PUBLISHED["table3"]["n=500"] == (0.0665, 0.0631, 0.0577, 0.0559, 0.0536, 0.0536, 0.0535, 0.0547)
        assert PUBLISHED["table3app"]["n=500"] == (0.0589, 0.0556, 0.0552, 0.0530, 0.0520, 0.0521, 0.0508, 0.0505)
        assert PUBLISHED["table1"]["n=500"] == (0.0327, 0.0388, 0.0422, 0.0465, 0.0502, 0.0535)
        assert PUBLISHED["table8"]["a=1000,n=5"][6] == 0.0507
        assert PUBLISHED["table8"]["a=500,n=3"][3] == 0.0466

    def test_power_rows(self):
        h1 = PUBLISHED["table4"]["H1"]
        assert h1[1:3] == (0.843, 0.944) and h1[5] == 0.976
        assert PUBLISHED["table9"]["H1"][1:3] == (0.8612, 0.9992)

    def test_shapes(self):
        assert len(PUBLISHED["table8"]) == 10
        for name, rows in PUBLISHED.items():
            widths = {len(v) for v in rows.values()}
            assert len(widths) == 1, name


class TestReproduce:
    def test_table3_shape(self):
        rep = tables.reproduce("table3", replicates=200, seed=7)
        rows = list(csv.reader(io.StringIO(rep.to_csv())))
        assert rows[0] == ["row"] + list(tables.K_GRID_LABELS)
        assert [r[0] for r in rows[1:]] == ["n=50", "n=100", "n=200", "n=500"]
        assert all(len(r) == 9 for r in rows)
        assert rep.published_csv().splitlines()[0] == rep.to_csv().splitlines()[0]
        assert len(rep.long.rows) == 32

    def test_power_table_layout(self):
        rep = tables.reproduce("table9", replicates=100, seed=1)
        assert set(rep.rows) == set(rep.published)
        assert rep.rows["H1"][0] == 20
        assert rep.rows["H20"][0] == 1
        assert tables.reproduce("table4", replicates=100, seed=1).rows["H0G"][0] == 0
        diffs = rep.differences()
        assert rep.max_abs_difference() == max(abs(d) for row in diffs.values() for d in row)

    def test_deterministic(self):
        a = tables.reproduce("table1", replicates=150, seed=3).to_csv()
        b = tables.reproduce("table1", replicates=150, seed=3, threads=2).to_csv()
        assert a == b

    def test_figure(self):
        rep = tables.reproduce("fig2", replicates=1000, seed=0)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "statistic,parameter,x,density,normal"
        assert len(lines) == 1 + 3 * 512
        assert rep.published_csv().splitlines()[1:] == ["hanova-order,22", "hanova-order,105", "hanova-order,229"]

    def test_unknown(self):
        with pytest.raises(KeyError):
            tables.reproduce("table7")

    def test_defaults(self):
        assert tables.DEFAULT_REPLICATES["table3"] == 30000
        assert tables.DEFAULT_REPLICATES["table8"] == 20000
        assert tables.DEFAULT_REPLICATES["fig1"] == 20000

import numpy as np

from uaggregation.simulation import SIM_COLUMNS, Cell, fig3_cells, fig4_cells, simulate


def test_rows_report_grid_lambda():
    rows = simulate([Cell(200, 30, 0.3, "heteroskedastic", 1.0)], replicates=3, seed=0,
                    methods=("pca",))
    assert [r["lambda"] for r in rows] == [1.0, 1.0, 1.0]


def test_canonical_order_independent_of_workers():
    cells = [Cell(150, 20, 0.3, "homoskedastic"), Cell(150, 25, 0.5, "heteroskedastic")]
    a = simulate(cells, replicates=2, seed=1, methods=("u_aggregation_o", "average"), workers=1)
    b = simulate(cells, replicates=2, seed=1, methods=("u_aggregation_o", "average"), workers=2)
    assert a == b
    assert [(r["d"], r["replicate"], r["method"]) for r in a][:4] == [
        (20, 0, "u_aggregation_o"), (20, 0, "average"), (20, 1, "u_aggregation_o"),
        (20, 1, "average")]
    assert all(set(r) == set(SIM_COLUMNS) for r in a)


def test_grids():
    assert len(fig3_cells()) == 32
    cells = fig4_cells()
    assert {(c.n, c.d) for c in cells} == {(1000, 100)}
    assert np.all(np.diff(sorted({c.lam for c in cells})) > 0)

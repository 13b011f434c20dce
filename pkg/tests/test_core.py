"""Grids, fields, quadrature plumbing, and deterministic output."""

import json
import math

import numpy as np
import pytest

from subplanck import (
    InvalidFieldError,
    PhaseSpaceGrid,
    Quadrature,
    UnitSystem,
    WignerField,
    integrate_2d,
    linspace_grid,
)
from subplanck.core import (
    _format_float,
    field_summary,
    field_to_csv,
    parallel_map,
    write_json,
    write_text_atomic,
)


def gaussian_field(grid, sx=1.0, sp=1.0):
    xm, pm = grid.meshgrid()
    values = np.exp(-(xm**2) / (2 * sx**2) - pm**2 / (2 * sp**2)) / (2 * math.pi * sx * sp)
    return WignerField(grid=grid, values=values)


class TestGrid:
    def test_steps_and_axes(self):
        g = PhaseSpaceGrid(x_min=-2.0, x_max=2.0, p_min=-1.0, p_max=3.0, nx=5, np=9)
        assert g.dx == pytest.approx(1.0)
        assert g.dp == pytest.approx(0.5)
        assert g.xs()[0] == -2.0 and g.xs()[-1] == 2.0
        assert g.ps()[0] == -1.0 and g.ps()[-1] == 3.0

    def test_meshgrid_layout(self):
        g = linspace_grid(1.0, 2.0, 3, 5)
        xm, pm = g.meshgrid()
        assert xm.shape == (3, 5) and pm.shape == (3, 5)
        # first index is x, second is p
        assert np.all(xm[0, :] == g.xs()[0])
        assert np.all(pm[:, 0] == g.ps()[0])

    def test_linspace_grid_centers(self):
        g = linspace_grid(2.0, 3.0, 5, 5, x_center=1.0, p_center=-2.0)
        assert g.x_min == -1.0 and g.x_max == 3.0
        assert g.p_min == -5.0 and g.p_max == 1.0

    def test_odd_grid_contains_origin(self):
        # linspace may leave ~1 ulp of rounding on the center node.
        g = linspace_grid(1.7, 2.3, 41, 25)
        assert np.abs(g.xs()).min() < 1e-12 * g.dx
        assert np.abs(g.ps()).min() < 1e-12 * g.dp

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"x_min": 1.0, "x_max": -1.0, "p_min": -1.0, "p_max": 1.0, "nx": 4, "np": 4},
            {"x_min": -1.0, "x_max": 1.0, "p_min": 1.0, "p_max": 1.0, "nx": 4, "np": 4},
            {"x_min": -1.0, "x_max": 1.0, "p_min": -1.0, "p_max": 1.0, "nx": 1, "np": 4},
            {"x_min": -np.inf, "x_max": 1.0, "p_min": -1.0, "p_max": 1.0, "nx": 4, "np": 4},
        ],
    )
    def test_invalid_grids_rejected(self, kwargs):
        with pytest.raises(ValueError):
            PhaseSpaceGrid(**kwargs)


class TestField:
    def test_shape_mismatch(self):
        g = linspace_grid(1.0, 1.0, 4, 4)
        with pytest.raises(InvalidFieldError):
            WignerField(grid=g, values=np.zeros((4, 5)))

    def test_non_finite_rejected(self):
        g = linspace_grid(1.0, 1.0, 3, 3)
        bad = np.zeros((3, 3))
        bad[1, 1] = np.nan
        with pytest.raises(InvalidFieldError):
            WignerField(grid=g, values=bad)

    def test_at_origin(self):
        g = linspace_grid(1.0, 1.0, 5, 5)
        f = gaussian_field(g)
        assert f.at_origin() == pytest.approx(1 / (2 * math.pi))


class TestQuadrature:
    def test_rule_validation(self):
        with pytest.raises(ValueError):
            Quadrature(rule="monte-carlo")
        with pytest.raises(ValueError):
            Quadrature(order=8)
        assert Quadrature(rule="gauss-hermite", order=32).order == 32

    def test_trapezoid_normalizes_gaussian(self):
        f = gaussian_field(linspace_grid(8.0, 8.0, 161, 161))
        assert integrate_2d(f) == pytest.approx(1.0, abs=1e-12)

    def test_simpson_matches_trapezoid(self):
        f = gaussian_field(linspace_grid(8.0, 8.0, 161, 161))
        assert integrate_2d(f, rule="simpson") == pytest.approx(integrate_2d(f), abs=1e-12)

    def test_simpson_needs_odd_counts(self):
        f = gaussian_field(linspace_grid(8.0, 8.0, 160, 161))
        with pytest.raises(ValueError):
            integrate_2d(f, rule="simpson")


class TestUnits:
    def test_defaults(self):
        u = UnitSystem()
        assert u.hbar == 1.0 and u.kB == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            UnitSystem(hbar=0.0)
        with pytest.raises(ValueError):
            UnitSystem(kB=-1.0)


class TestParallelMap:
    def test_preserves_order(self):
        items = list(range(40))
        assert parallel_map(lambda v: v * v, items, threads=8) == [v * v for v in items]

    def test_single_thread_identical(self):
        items = [0.1 * k for k in range(25)]
        fn = lambda v: math.sin(v) ** 2
        assert parallel_map(fn, items, threads=1) == parallel_map(fn, items, threads=4)


class TestWriters:
    def test_format_float_round_trip(self):
        for v in (0.1, 1 / 3, math.pi, 1e-300, -7.25):
            assert float(_format_float(v)) == v

    def test_write_json_sorted_and_atomic(self, tmp_path):
        path = tmp_path / "out.json"
        write_json({"b": 1, "a": [1.5, 2.5]}, str(path))
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1.5, 2.5], "b": 1}
        assert not (tmp_path / "out.json.tmp").exists()

    def test_write_text_atomic_overwrites(self, tmp_path):
        path = tmp_path / "t.txt"
        write_text_atomic(str(path), "one")
        write_text_atomic(str(path), "two")
        assert path.read_text() == "two"

    def test_field_to_csv_layout(self, tmp_path):
        g = linspace_grid(1.0, 1.0, 3, 4)
        f = gaussian_field(g)
        path = tmp_path / "f.csv"
        field_to_csv(f, str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "x,p,w"
        assert len(lines) == 1 + 3 * 4
        first = lines[1].split(",")
        assert float(first[0]) == -1.0 and float(first[1]) == -1.0

    def test_field_summary_keys(self):
        f = gaussian_field(linspace_grid(8.0, 8.0, 81, 81))
        s = field_summary(f)
        assert s["nx"] == 81 and s["integral"] == pytest.approx(1.0, abs=1e-9)
        assert s["min"] <= s["max"]

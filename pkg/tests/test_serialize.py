import json

import numpy as np
import pytest

from etlqg import (
    ConfigError,
    DimensionError,
    EllipsoidBound,
    ResetSystem,
    build_reset_system,
    design_lqg,
    solve_riccati_like,
    stefan_solve,
)
from etlqg.serialize import (
    TRADEOFF_HEADER,
    design_document,
    ellipsoid_document,
    fmt17,
    parse_design_document,
    parse_ellipsoid_document,
    parse_reset_system_document,
    read_grid_csv,
    read_json,
    read_polyline_csv,
    read_tradeoff_csv,
    reset_system_document,
    write_failures_csv,
    write_grid_csv,
    write_json,
    write_polyline_csv,
    write_tradeoff_csv,
)
from etlqg.simulate import SweepFailure, TradeoffPoint
from etlqg.stefan import GridSpec, extract_boundary


class TestFmt17:
    def test_roundtrip_exact(self):
        rng = np.random.default_rng(0)
        for x in rng.standard_normal(200) * np.exp(rng.uniform(-30, 30, 200)):
            assert float(fmt17(x)) == x

    def test_special_values(self):
        assert float(fmt17(np.inf)) == np.inf
        assert float(fmt17(1.0)) == 1.0
        assert fmt17(0.5) == "0.5"


class TestDesignDocument:
    def test_roundtrip(self, integrator_plant):
        design = design_lqg(integrator_plant)
        reset = build_reset_system(integrator_plant, design)
        doc = design_document(integrator_plant, design, reset)
        d2, r2 = parse_design_document(doc)
        assert np.array_equal(d2.X, design.X)
        assert np.array_equal(d2.Y, design.Y)
        assert np.array_equal(d2.F, design.F)
        assert np.array_equal(d2.L, design.L)
        assert d2.gamma0 == design.gamma0
        assert np.array_equal(r2.A, reset.A)
        assert np.array_equal(r2.Q, reset.Q)
        assert np.array_equal(r2.R, reset.R)

    def test_json_file_roundtrip_exact(self, tmp_path, integrator_plant):
        design = design_lqg(integrator_plant)
        reset = build_reset_system(integrator_plant, design)
        doc = design_document(integrator_plant, design, reset)
        p = tmp_path / "design.json"
        write_json(p, doc)
        d2, r2 = parse_design_document(read_json(p))
        # json round trips float64 exactly via repr
        assert d2.gamma0 == design.gamma0
        assert np.array_equal(d2.X, design.X)
        assert np.array_equal(r2.Q, reset.Q)

    def test_rewrite_byte_identical(self, tmp_path, integrator_plant):
        design = design_lqg(integrator_plant)
        reset = build_reset_system(integrator_plant, design)
        doc = design_document(integrator_plant, design, reset)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_json(p1, doc)
        d2, r2 = parse_design_document(read_json(p1))
        write_json(p2, design_document(integrator_plant, d2, r2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_kind_mismatch(self):
        with pytest.raises(ConfigError):
            parse_design_document({"kind": "reset_system"})
        with pytest.raises(ConfigError):
            parse_reset_system_document({"kind": "lqg_design"})
        with pytest.raises(ConfigError):
            parse_ellipsoid_document({})

    def test_shape_mismatch(self):
        doc = {
            "kind": "reset_system",
            "dimensions": {"n": 2},
            "A": [[0.0]],
            "Q": [[1.0]],
            "R": [[1.0]],
        }
        with pytest.raises(DimensionError):
            parse_reset_system_document(doc)


class TestResetAndEllipsoidDocuments:
    def test_reset_roundtrip(self, integrator_reset):
        r2 = parse_reset_system_document(reset_system_document(integrator_reset))
        assert np.array_equal(r2.A, integrator_reset.A)
        assert np.array_equal(r2.Q, integrator_reset.Q)
        assert np.array_equal(r2.R, integrator_reset.R)

    def test_ellipsoid_roundtrip(self, tmp_path):
        P = solve_riccati_like(np.eye(2) * 3.0, np.eye(2))
        bound = EllipsoidBound(P=P, rho=0.7)
        p = tmp_path / "bound.json"
        write_json(p, ellipsoid_document(bound))
        b2 = parse_ellipsoid_document(read_json(p))
        assert np.array_equal(b2.P, bound.P)
        assert b2.rho == bound.rho
        assert b2.threshold == bound.threshold


@pytest.fixture(scope="module")
def small_grid():
    sys = ResetSystem(A=np.zeros((2, 2)), Q=np.eye(2), R=np.eye(2))
    spec = GridSpec(
        half_width=np.array([4.0, 4.0]),
        n_cells=np.array([32, 32]),
        dt=0.06,
        stationarity_tol=1e-6,
        max_steps=200000,
    )
    return stefan_solve(sys, np.sqrt(2.0), spec)


class TestGridCsv:
    def test_roundtrip_exact(self, tmp_path, small_grid):
        p = tmp_path / "grid.csv"
        write_grid_csv(p, small_grid)
        g2 = read_grid_csv(p)
        assert np.array_equal(g2.V, small_grid.V)
        assert g2.J == small_grid.J
        assert g2.rho_effective == small_grid.rho_effective
        assert np.array_equal(g2.spec.n_cells, small_grid.spec.n_cells)
        assert np.array_equal(g2.spec.half_width, small_grid.spec.half_width)
        assert g2.spec.dt == small_grid.spec.dt
        assert g2.spec.max_steps == small_grid.spec.max_steps

    def test_rewrite_byte_identical(self, tmp_path, small_grid):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_grid_csv(p1, small_grid)
        write_grid_csv(p2, read_grid_csv(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_mask_preserved(self, tmp_path, small_grid):
        p = tmp_path / "grid.csv"
        write_grid_csv(p, small_grid)
        g2 = read_grid_csv(p)
        assert np.array_equal(g2.omega_mask, small_grid.omega_mask)

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "other.csv"
        p.write_text("x1,x2\n0,0\n")
        with pytest.raises(ConfigError):
            read_grid_csv(p)


class TestPolylineCsv:
    def test_roundtrip(self, tmp_path, small_grid):
        poly = extract_boundary(small_grid)
        p = tmp_path / "poly.csv"
        write_polyline_csv(p, poly.points)
        p2 = read_polyline_csv(p)
        assert np.array_equal(p2.points, poly.points)
        assert p2.is_closed

    def test_header_line(self, tmp_path):
        p = tmp_path / "poly.csv"
        write_polyline_csv(p, np.array([[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]))
        assert p.read_text().splitlines()[0] == "x1,x2"


class TestTradeoffCsv:
    def points(self):
        return [
            TradeoffPoint(
                h_avg=0.31415926535897932,
                J_H_hat=1.25,
                J_z_hat=24.162536060589295,
                stderr=0.0125,
                n_samples=63661,
                scheme="ellipsoid",
                param=1.0,
            ),
            TradeoffPoint(
                h_avg=0.5,
                J_H_hat=2.9,
                J_z_hat=25.8,
                stderr=0.0,
                n_samples=0,
                scheme="periodic",
                param=0.5,
            ),
        ]

    def test_roundtrip_exact(self, tmp_path):
        p = tmp_path / "tradeoff.csv"
        write_tradeoff_csv(p, self.points())
        back = read_tradeoff_csv(p)
        assert back == self.points()

    def test_header_written_and_validated(self, tmp_path):
        p = tmp_path / "tradeoff.csv"
        write_tradeoff_csv(p, self.points())
        assert p.read_text().splitlines()[0] == TRADEOFF_HEADER
        bad = tmp_path / "bad.csv"
        bad.write_text("h,J\n1,2\n")
        with pytest.raises(ConfigError):
            read_tradeoff_csv(bad)

    def test_rewrite_byte_identical(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_tradeoff_csv(p1, self.points())
        write_tradeoff_csv(p2, read_tradeoff_csv(p1))
        assert p1.read_bytes() == p2.read_bytes()


class TestFailuresCsv:
    def test_messages_sanitized(self, tmp_path):
        fails = [
            SweepFailure(scheme="grid", param=2.0, error="bad, very bad\nsecond line"),
        ]
        p = tmp_path / "errors.csv"
        write_failures_csv(p, fails)
        lines = p.read_text().splitlines()
        assert lines[0] == "scheme,param,error"
        # one record per failure even with embedded newlines, 3 fields per record
        assert len(lines) == 2
        assert lines[1].count(",") == 2


class TestJsonLayout:
    def test_trailing_newline_and_indent(self, tmp_path, integrator_reset):
        p = tmp_path / "r.json"
        write_json(p, reset_system_document(integrator_reset))
        text = p.read_text()
        assert text.endswith("\n")
        assert json.loads(text)["kind"] == "reset_system"
        assert text.splitlines()[1].startswith("  ")

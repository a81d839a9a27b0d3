import csv
import json
import os

import numpy as np
import pytest

from orbisol.cli import main
from orbisol.fileio import dump_geometry, load_geometry
from orbisol.skeletons import stiefel_skeleton


def run(args):
    return main(args)


class TestSeriesCommand:
    def test_cigar_jet_csv(self, tmp_path, capsys):
        code = run(["series", "--geometry", "cigar", "--order", "10",
                    "--out", str(tmp_path)])
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "jet.csv")))
        xrows = {int(r["m"]): float(r["coefficient"])
                 for r in rows if r["kind"] == "x"}
        # factorial-normalized cigar fixtures: x_2 = 2! * (-2/3), x_4 = 4! * 17/45
        assert xrows[2] == pytest.approx(-4.0 / 3.0)
        assert xrows[4] == pytest.approx(24 * 17.0 / 45.0)

    def test_gaussian_flat_zeros(self, tmp_path):
        code = run(["series", "--geometry", "gaussian-flat", "--k", "3",
                    "--epsilon", "2", "--u2", "-1", "--out", str(tmp_path)])
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "jet.csv")))
        for r in rows:
            if r["kind"] == "x" and int(r["m"]) >= 1:
                assert float(r["coefficient"]) == 0.0

    def test_sine_cone_u_zero(self, tmp_path):
        code = run(["series", "--geometry", "sine-cone", "--n", "2",
                    "--out", str(tmp_path)])
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "jet.csv")))
        for r in rows:
            if r["kind"] == "u":
                assert float(r["coefficient"]) == 0.0


class TestIntegrateCommand:
    def test_cigar_run(self, tmp_path, capsys):
        code = run(["integrate", "--geometry", "cigar", "--t0", "0.05",
                    "--t-end", "5", "--out", str(tmp_path),
                    "--emit-plot-data"])
        assert code == 0
        out = capsys.readouterr().out
        assert "first-integral" in out
        rows = list(csv.DictReader(open(tmp_path / "trajectory.csv")))
        dev = max(
            abs(float(r["x_s"]) - (np.tanh(float(r["t"])) / float(r["t"])) ** 2)
            for r in rows
        )
        assert dev < 1e-7
        profs = list(csv.DictReader(open(tmp_path / "profiles.csv")))
        r0 = profs[len(profs) // 2]
        assert float(r0["f_s"]) == pytest.approx(
            float(r0["t"]) * np.sqrt((np.tanh(float(r0["t"])) / float(r0["t"])) ** 2),
            abs=1e-6,
        )

    def test_sine_cone_degeneration_reported(self, tmp_path, capsys):
        code = run(["integrate", "--geometry", "sine-cone", "--n", "2",
                    "--t-end", "4", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "degeneration" in out
        tstar = float(out.split("degeneration detected at t =")[1].split()[0])
        assert abs(tstar - np.pi) < 1e-3


class TestIndeterminacyCommand:
    def test_stiefel(self, capsys):
        code = run(["indeterminacy", "--geometry", "stiefel-so(4)"])
        assert code == 0
        assert "total indeterminacy: 1" in capsys.readouterr().out

    def test_gaussian_flat(self, capsys):
        code = run(["indeterminacy", "--geometry", "abelian-flat(3)"])
        assert code == 0
        assert "total indeterminacy: 0" in capsys.readouterr().out

    def test_planted_root_file(self, tmp_path, capsys):
        # custom spec with a Casimir value planted at the m = 2 root
        k = 2
        path = tmp_path / "planted.geom"
        path.write_text(
            "name planted\nk 2\nisotropy_dim 0\n"
            "summand p1 2 plus\n"
            f"summand mP 2 minus {(k + 3) * 4}\n"
        )
        code = run(["indeterminacy", "--geometry", str(path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "   2     0      1  mP" in out


class TestVerifyCommand:
    def test_builtin_fixtures_pass(self, capsys):
        for args in (
            ["verify", "--geometry", "cigar", "--t-end", "4"],
            ["verify", "--geometry", "gaussian-flat(2)", "--epsilon", "-2",
             "--u2", "1", "--t-end", "6"],
        ):
            code = run(args)
            out = capsys.readouterr().out
            assert code == 0, out
            assert "FAIL" not in out

    def test_trace_violation_rejected(self, capsys):
        code = run(["verify", "--geometry", "stiefel-so(4)", "--epsilon", "0",
                    "--u2", "-1", "--L1", "m1=0.1"])
        err = capsys.readouterr().err
        assert code == 2
        assert "minimal" in err

    def test_wrong_epsilon_flagged(self, capsys):
        # sine-cone geometry with a planted wrong soliton constant: the jet
        # no longer describes the cone and the potential picks up mass, which
        # shows in the certificates as a genuine inconsistency somewhere
        code = run(["verify", "--geometry", "sine-cone(2)", "--epsilon",
                    "-3.9", "--u2", "0", "--t-end", "2.5"])
        out = capsys.readouterr().out
        # a wrong constant with u2 = 0 is *also* a valid soliton seed (it
        # moves along the family), so residuals may pass; the certificate that
        # must fail is the closed-form comparison, done here directly
        from orbisol import solve_series, sphere_skeleton
        from conftest import make_data

        spec = sphere_skeleton(2)
        sol = solve_series(spec, make_data(spec, -3.9, 0.0, order=8))
        dev = abs(float(sol.x_raw[2].values[0]) + 1.0 / 3.0)
        assert dev > 1e-3
        assert code in (0, 3)


class TestGeometryFiles:
    def test_roundtrip(self, tmp_path):
        spec = stiefel_skeleton(2)
        path = tmp_path / "stiefel.geom"
        dump_geometry(spec, str(path))
        loaded = load_geometry(str(path))
        assert loaded.k == spec.k
        assert loaded.labels() == spec.labels()
        assert np.allclose(loaded.brackets, spec.brackets)

    def test_config_file(self, tmp_path):
        cfg = {
            "geometry": "cigar",
            "epsilon": 0.0,
            "u2": -2.0,
            "series_order": 8,
            "out": str(tmp_path / "out"),
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        code = run(["series", "--config", str(path)])
        assert code == 0
        assert os.path.exists(tmp_path / "out" / "jet.csv")


class TestSweep:
    def test_two_configs(self, tmp_path, capsys):
        paths = []
        for i, geom in enumerate(["cigar", "gaussian-flat(2)"]):
            cfg = {"geometry": geom, "t_end": 3.0, "out": str(tmp_path / f"o{i}")}
            if geom.startswith("gaussian"):
                cfg.update(epsilon=2.0, u2=-1.0)
            p = tmp_path / f"c{i}.json"
            p.write_text(json.dumps(cfg))
            paths.append(str(p))
        code = run(["sweep"] + paths + ["--jobs", "1"])
        assert code == 0

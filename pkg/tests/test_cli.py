import json

import pandas as pd
import pytest

import config
from main import main


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class TestLatticeInfo:
    def test_writes_geometry_and_manifest(self, output_dir):
        assert main(["lattice-info", "--lattice", "2x2"]) == 0
        payload = read_json(output_dir / "lattice_info.json")
        assert payload["num_sites"] == 8
        manifest = read_json(output_dir / f"lattice_info{config.MANIFEST_SUFFIX}")
        assert manifest["config"]["lx"] == 2
        assert manifest["versions"]["kitaev_lab"] == config.__version__
        assert manifest["wall_time_seconds"] >= 0

    def test_open_lattice(self, output_dir):
        assert main(["lattice-info", "--lx", "2", "--ly", "2", "--bc", "open", "--output", "open.json"]) == 0
        assert len(read_json(output_dir / "open.json")["plaquettes"]) == 1

    def test_bad_flag_is_a_usage_error(self, output_dir, capsys):
        assert main(["lattice-info", "--frobnicate"]) == config.EXIT_CODES["usage"]
        assert "error" in capsys.readouterr().err

    def test_torus_too_small(self, output_dir):
        assert main(["lattice-info", "--lattice", "1x3"]) == config.EXIT_CODES["usage"]


class TestSpectrum:
    def test_lowest_levels(self, output_dir, capsys):
        assert main(["spectrum", "--lattice", "2x2", "--k", "4"]) == 0
        payload = read_json(output_dir / "spectrum.json")
        assert len(payload["eigenvalues"]) == 4
        assert payload["eigenvalues"] == sorted(payload["eigenvalues"])
        assert payload["majorana_sector_energy"] == pytest.approx(payload["eigenvalues"][0], abs=1e-8)
        assert "energy" in capsys.readouterr().out

    def test_flux_sector(self, output_dir):
        assert main(["spectrum", "--lattice", "2x2", "--flux", "1,1,-1,-1", "--output", "sector.json"]) == 0
        payload = read_json(output_dir / "sector.json")
        assert payload["flux"] == [1, 1, -1, -1]
        assert payload["wp_profiles"][0] == pytest.approx([1, 1, -1, -1], abs=1e-8)

    def test_odd_flux_rejected(self, output_dir):
        assert main(["spectrum", "--flux", "-1,1,1,1"]) == config.EXIT_CODES["usage"]

    def test_too_many_spins(self, output_dir, capsys):
        assert main(["spectrum", "--lattice", "3x4"]) == config.EXIT_CODES["resource"]
        assert "majorana" in capsys.readouterr().err.lower()

    def test_reproducible_output(self, output_dir):
        for name in ("first.json", "second.json"):
            assert main(["spectrum", "--k", "2", "--seed", "5", "--solver", "lanczos", "--output", name]) == 0
        assert (output_dir / "first.json").read_bytes() == (output_dir / "second.json").read_bytes()

    def test_superexchange_couplings(self, output_dir):
        assert main(["spectrum", "--t-plus", "0.1", "0.1", "0.1", "--u", "1"]) == 0
        payload = read_json(output_dir / "spectrum.json")
        assert payload["couplings"]["Jx"] == pytest.approx(0.005)
        assert payload["couplings"]["hz"] == pytest.approx(0.04)
        assert "majorana_sector_energy" not in payload

    def test_t_plus_needs_u(self, output_dir):
        assert main(["spectrum", "--t-plus", "0.1", "0.1", "0.1"]) == config.EXIT_CODES["usage"]


class TestConfigFile:
    def test_flags_override_file(self, output_dir, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"lattice": "2x2", "couplings": {"jz": 2.0, "jx": 0.3}, "k": 2}))
        assert main(["spectrum", "--config", str(path), "--jx", "0.5"]) == 0
        manifest = read_json(output_dir / f"spectrum{config.MANIFEST_SUFFIX}")
        assert manifest["config"]["jz"] == 2.0
        assert manifest["config"]["jx"] == 0.5
        assert manifest["config"]["k"] == 2

    @pytest.mark.parametrize("document", [{"numbering": "foo"}, {"solver": "fast"}, {"boundary": "mobius"}])
    def test_bad_choice_in_file(self, output_dir, tmp_path, capsys, document):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(document))
        assert main(["braid", "--config", str(path)]) == config.EXIT_CODES["usage"]
        assert "error" in capsys.readouterr().err

    def test_unknown_key(self, output_dir, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"colour": "blue"}))
        assert main(["spectrum", "--config", str(path)]) == config.EXIT_CODES["usage"]


class TestSweeps:
    def test_phase_diagram(self, output_dir):
        assert main(["phase-diagram", "--step", "0.25", "--gap-size", "4", "--xlsx"]) == 0
        df = pd.read_csv(output_dir / "phase_diagram.csv")
        assert len(df) == 15
        corner = df[(df["Jz"] == 1.0)].iloc[0]
        assert corner["phase"] == "A_gapped"
        assert corner["gap"] == pytest.approx(2.0)
        assert (df["gap"] >= 0).all()
        assert (output_dir / "phase_diagram.xlsx").exists()
        manifest = read_json(output_dir / f"phase_diagram{config.MANIFEST_SUFFIX}")
        assert manifest["summary"]["failed_points"] == 0

    def test_gap_sweep(self, output_dir):
        assert main(["gap-sweep", "--jx", "0", "--jy", "0", "--jz", "1", "--sizes", "4", "6"]) == 0
        df = pd.read_csv(output_dir / "gap_sweep.csv")
        assert df["L"].tolist() == [4, 6]
        assert df["gap"].tolist() == pytest.approx([2.0, 2.0])

    def test_gap_sweep_sizes_ascending(self, output_dir):
        assert main(["gap-sweep", "--sizes", "6", "4"]) == config.EXIT_CODES["usage"]


class TestBraid:
    def test_discrimination(self, output_dir, capsys):
        assert main(["braid", "--loops", "1", "--loops", "2", "--discriminate"]) == 0
        payload = read_json(output_dir / "braid.json")
        assert payload["discrimination"] == "Abelian-consistent"
        verdicts = {r["loops"]: r["verdict"] for r in payload["reports"]}
        assert verdicts[1] == "DEVIATION"
        assert payload["numbering"] == "loop"
        out = capsys.readouterr().out
        assert "Abelian-consistent" in out
        assert out.startswith("hexagon numbering: loop")

    def test_discrimination_needs_two_loop_counts(self, output_dir):
        assert main(["braid", "--loops", "1", "--discriminate"]) == config.EXIT_CODES["numeric"]

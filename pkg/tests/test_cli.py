import json
import math

import pytest

from qubitmech import pipeline
from qubitmech.cli import main
from qubitmech.errors import NoConvergence


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content if isinstance(content, str) else json.dumps(content))
    return str(path)


FLUX = {"circuit": "fluxonium", "params": {"e_c": 1.0, "e_l": 0.5, "e_j": 8.0, "phi_ext": 2.0}}


def sweep_cfg(start, stop, steps=3):
    return {
        "circuit": "transmon",
        "params": {"e_c": 1.0, "e_j": 1.0},
        "levels": 3,
        "sweep": {"variable": "ej_over_ec", "from": start, "to": stop, "steps": steps},
    }


class TestSpectrum:
    def test_prints_levels(self, tmp_path, capsys):
        out = tmp_path / "levels.csv"
        assert main(["spectrum", "--config", write(tmp_path, "c.json", FLUX), "--levels", "4", "--out", str(out)]) == 0
        lines = capsys.readouterr().out.splitlines()
        energies = [float(l.split("=")[1].split()[0]) for l in lines if l.startswith("E")]
        assert len(energies) == 4 and energies == sorted(energies)
        assert any(l.startswith("disjointness") for l in lines)
        assert out.read_text().count("\n") == 5

    def test_override(self, tmp_path, capsys):
        cfg = write(tmp_path, "c.json", FLUX)
        main(["spectrum", "--config", cfg, "--set", f"params.phi_ext={math.pi}"])
        text = capsys.readouterr().out
        f10 = float(next(l for l in text.splitlines() if l.startswith("f10")).split("=")[1])
        assert f10 < 0.1

    def test_malformed_json(self, tmp_path, capsys):
        assert main(["spectrum", "--config", write(tmp_path, "c.json", "{oops")]) == 2
        assert "ParseError" in capsys.readouterr().err

    def test_nonpositive_inductive_energy(self, tmp_path, capsys):
        bad = json.loads(json.dumps(FLUX))
        bad["params"]["e_l"] = 0.0
        assert main(["spectrum", "--config", write(tmp_path, "c.json", bad)]) == 2
        assert "NonPositiveEnergy" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "nope.json")]) == 2

    def test_solver_failure(self, tmp_path, monkeypatch, capsys):
        def fail(*args, **kwargs):
            raise NoConvergence("budget exhausted")

        monkeypatch.setattr(pipeline, "lowest_eigenpairs", fail)
        assert main(["spectrum", "--config", write(tmp_path, "c.json", FLUX)]) == 3
        assert "NoConvergence" in capsys.readouterr().err

    def test_sweep_config_rejected(self, tmp_path):
        assert main(["spectrum", "--config", write(tmp_path, "c.json", sweep_cfg(1, 2))]) == 2


class TestSweep:
    def test_writes_rows(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", write(tmp_path, "c.json", sweep_cfg(1, 5, 5)), "--out", str(out)]) == 0
        assert out.read_text().count("\n") == 6
        assert (tmp_path / "s.meta.json").exists()
        assert capsys.readouterr().err == ""

    def test_partial_failure_warns(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", write(tmp_path, "c.json", sweep_cfg(-1, 1)), "--out", str(out)]) == 0
        assert "1 of 3" in capsys.readouterr().err

    def test_total_failure(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", write(tmp_path, "c.json", sweep_cfg(-3, -1)), "--out", str(out)]) == 3

    def test_unwritable_output(self, tmp_path, capsys):
        out = tmp_path / "missing" / "s.csv"
        assert main(["sweep", "--config", write(tmp_path, "c.json", sweep_cfg(1, 2, 2)), "--out", str(out)]) == 4
        assert "IoError" in capsys.readouterr().err

    def test_threads_flag_is_deterministic(self, tmp_path):
        cfg = write(tmp_path, "c.json", sweep_cfg(1, 9, 9))
        texts = []
        for threads in ("1", "3"):
            out = tmp_path / f"s{threads}.csv"
            assert main(["sweep", "--config", cfg, "--out", str(out), "--threads", threads]) == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1]


class TestWavefunctions:
    def test_export(self, tmp_path):
        out = tmp_path / "wf.csv"
        assert main(["wavefunctions", "--config", write(tmp_path, "c.json", FLUX), "--levels", "0,1,2,5", "--out", str(out)]) == 0
        header = out.read_text().splitlines()[0].split(",")
        assert header[:3] == ["x", "V", "psi_0"] and "raw_psi_5" in header

    @pytest.mark.parametrize("levels", ["a,b", "", "-1"])
    def test_bad_levels(self, tmp_path, levels):
        out = tmp_path / "wf.csv"
        assert main(["wavefunctions", "--config", write(tmp_path, "c.json", FLUX), "--levels", levels, "--out", str(out)]) == 2

    def test_charge_basis(self, tmp_path):
        cfg = {"circuit": "transmon", "params": {"e_c": 1.0, "e_j": 5.0}}
        assert main(["wavefunctions", "--config", write(tmp_path, "c.json", cfg), "--out", str(tmp_path / "w.csv")]) == 2


class TestMap:
    def run(self, tmp_path, capsys, direction, circuit, cfg):
        code = main(["map", "--direction", direction, "--circuit", circuit, "--config", write(tmp_path, "m.json", cfg)])
        return code, capsys.readouterr()

    def test_transmon_e2m(self, tmp_path, capsys):
        code, out = self.run(tmp_path, capsys, "e2m", "transmon", {"e_c": 1.0, "e_j": 2.0, "length_L": 1.0})
        data = json.loads(out.out)
        assert code == 0 and data["inertia_I"] == 0.5 and data["k"] == 8.0

    def test_fluxonium_m2e(self, tmp_path, capsys):
        cfg = {"inertia_I": 0.5, "k_j": 8.0, "k_l": 8.0, "half_length_l": 1.0}
        code, out = self.run(tmp_path, capsys, "m2e", "fluxonium", cfg)
        data = json.loads(out.out)
        assert code == 0 and data["e_l"] == 1.0 and data["e_j"] == 2.0

    def test_zeropi_round_trip(self, tmp_path, capsys):
        params = {"e_c_phi": 10.0, "e_c_theta": 0.2, "e_j": 5.0, "e_l": 0.04, "phi_ext": 0.5}
        _, out = self.run(tmp_path, capsys, "e2m", "zeropi", {**params, "length_L": 2.0})
        code, back = self.run(tmp_path, capsys, "m2e", "zeropi", json.loads(out.out))
        data = json.loads(back.out)
        assert code == 0
        for key, value in params.items():
            assert data[key] == pytest.approx(value, rel=1e-12)

    def test_missing_geometry(self, tmp_path, capsys):
        code, out = self.run(tmp_path, capsys, "e2m", "transmon", {"e_c": 1.0, "e_j": 2.0})
        assert code == 2 and "length_L" in out.err

    def test_unknown_field(self, tmp_path, capsys):
        code, _ = self.run(tmp_path, capsys, "m2e", "transmon", {"inertia_I": 1.0, "k": 1.0, "length_L": 1.0, "mass": 2})
        assert code == 2

    def test_nonpositive(self, tmp_path, capsys):
        code, _ = self.run(tmp_path, capsys, "m2e", "transmon", {"inertia_I": 0.0, "k": 1.0, "length_L": 1.0})
        assert code == 2


class TestCheck:
    def test_passes(self, capsys):
        assert main(["check"]) == 0
        lines = capsys.readouterr().out.splitlines()
        checks = [l for l in lines if l.startswith(("PASS", "FAIL"))]
        assert len(checks) >= 6 and all(l.startswith("PASS") for l in checks)

    def test_fault_injection(self, capsys):
        assert main(["check", "--inject-fault"]) == 5
        assert "FAIL" in capsys.readouterr().out
        assert main(["check"]) == 0  # fault is scoped to one run

    def test_repeatable(self, capsys):
        main(["check"])
        first = capsys.readouterr().out
        main(["check"])
        assert capsys.readouterr().out == first
